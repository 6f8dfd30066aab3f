#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "dip/graph.hpp"
#include "dip/io.hpp"
#include "dip/splits.hpp"

namespace dip {

// MMG bundle directory layout:
//   graph.json   manifest {n, d_v, d_t, edge_file, feat_v_file, feat_t_file,
//                labels_file?, num_classes?, allow_drop?}
//   edge file    little-endian u32 pairs, one per undirected edge
//   feature file little-endian f32, row-major
//   labels file  little-endian u32
//   splits.json  optional split description (written by cmd_gen)

namespace detail {

inline std::string encode_f32_matrix(const Matd& m) {
    std::string bytes;
    bytes.reserve(m.d.size() * 4);
    for (double v : m.d) io::put_f32(bytes, static_cast<float>(v));
    return bytes;
}

inline Matd decode_f32_matrix(const std::string& bytes, int rows, int cols, const std::string& what) {
    if (bytes.size() != static_cast<std::size_t>(rows) * cols * 4)
        throw ConfigError(what + ": byte length " + std::to_string(bytes.size()) +
                          " does not match declared shape " + shape_str(rows, cols));
    Matd m(rows, cols);
    for (std::size_t i = 0; i < m.d.size(); ++i)
        m.d[i] = static_cast<double>(io::get_f32(bytes, i * 4));
    return m;
}

}  // namespace detail

inline void save_bundle(const std::filesystem::path& dir, const MultimodalGraph& g) {
    std::filesystem::create_directories(dir);
    nlohmann::json manifest;
    manifest["n"] = g.n;
    manifest["d_v"] = g.d_v();
    manifest["d_t"] = g.d_t();
    manifest["edge_file"] = "edges.bin";
    manifest["feat_v_file"] = "feat_v.bin";
    manifest["feat_t_file"] = "feat_t.bin";

    std::string edges;
    for (const auto& [u, v] : g.adjacency.undirected_edges()) {
        io::put_u32(edges, u);
        io::put_u32(edges, v);
    }
    io::write_file(dir / "edges.bin", edges);
    io::write_file(dir / "feat_v.bin", detail::encode_f32_matrix(g.feat_v));
    io::write_file(dir / "feat_t.bin", detail::encode_f32_matrix(g.feat_t));

    if (g.labels) {
        std::string labels;
        for (std::uint32_t c : *g.labels) io::put_u32(labels, c);
        io::write_file(dir / "labels.bin", labels);
        manifest["labels_file"] = "labels.bin";
        manifest["num_classes"] = g.num_classes;
    }
    io::write_file(dir / "graph.json", manifest.dump(2) + "\n");
}

inline MultimodalGraph load_bundle(const std::filesystem::path& dir) {
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(io::read_file(dir / "graph.json"));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("graph.json: " + std::string(e.what()));
    }

    MultimodalGraph g;
    g.n = manifest.at("n").get<int>();
    int d_v = manifest.at("d_v").get<int>();
    int d_t = manifest.at("d_t").get<int>();
    if (g.n <= 0 || d_v <= 0 || d_t <= 0) throw ConfigError("graph.json: n, d_v, d_t must be positive");
    bool allow_drop = manifest.value("allow_drop", false);

    std::string edge_bytes = io::read_file(dir / manifest.at("edge_file").get<std::string>());
    if (edge_bytes.size() % 8 != 0) throw ConfigError("edge file: length is not a multiple of 8");
    EdgeList edges;
    edges.reserve(edge_bytes.size() / 8);
    for (std::size_t off = 0; off < edge_bytes.size(); off += 8) {
        std::uint32_t u = io::get_u32(edge_bytes, off);
        std::uint32_t v = io::get_u32(edge_bytes, off + 4);
        if (u >= static_cast<std::uint32_t>(g.n) || v >= static_cast<std::uint32_t>(g.n))
            throw ConfigError("edge file: node index out of range");
        if (u == v) {
            if (allow_drop) continue;
            throw ConfigError("edge file: self-loop (" + std::to_string(u) +
                              "," + std::to_string(v) + ") and allow_drop is not set");
        }
        edges.push_back({u, v});
    }
    g.adjacency = build_adjacency(edges, g.n);

    g.feat_v = detail::decode_f32_matrix(
        io::read_file(dir / manifest.at("feat_v_file").get<std::string>()), g.n, d_v, "feat_v");
    g.feat_t = detail::decode_f32_matrix(
        io::read_file(dir / manifest.at("feat_t_file").get<std::string>()), g.n, d_t, "feat_t");

    if (manifest.contains("labels_file")) {
        std::string label_bytes = io::read_file(dir / manifest.at("labels_file").get<std::string>());
        if (label_bytes.size() != static_cast<std::size_t>(g.n) * 4)
            throw ConfigError("labels file: byte length does not match n");
        std::vector<std::uint32_t> labels(g.n);
        for (int i = 0; i < g.n; ++i) labels[i] = io::get_u32(label_bytes, static_cast<std::size_t>(i) * 4);
        g.labels = std::move(labels);
        g.num_classes = manifest.value("num_classes", 0);
        if (g.num_classes <= 0) throw ConfigError("graph.json: labels_file requires num_classes");
    }

    validate_graph(g);
    return g;
}

// --- splits ------------------------------------------------------------------

inline void save_splits(const std::filesystem::path& dir, const SplitSet& s) {
    nlohmann::json j;
    j["task"] = to_string(s.task);
    j["seed"] = s.seed;
    auto edges_json = [](const EdgeList& es) {
        nlohmann::json a = nlohmann::json::array();
        for (const auto& [u, v] : es) a.push_back({u, v});
        return a;
    };
    if (s.task == Task::LinkPrediction) {
        j["train_edges"] = edges_json(s.train_edges);
        j["valid_edges"] = edges_json(s.valid_edges);
        j["test_edges"] = edges_json(s.test_edges);
    } else {
        j["train_nodes"] = s.train_nodes;
        j["valid_nodes"] = s.valid_nodes;
        j["test_nodes"] = s.test_nodes;
    }
    io::write_file(dir / "splits.json", j.dump(2) + "\n");
}

inline SplitSet load_splits(const std::filesystem::path& dir) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(io::read_file(dir / "splits.json"));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("splits.json: " + std::string(e.what()));
    }
    SplitSet s;
    s.task = task_from_string(j.at("task").get<std::string>());
    s.seed = j.at("seed").get<std::uint64_t>();
    auto edges_from = [&](const char* key) {
        EdgeList es;
        for (const auto& e : j.at(key)) es.push_back({e.at(0).get<std::uint32_t>(), e.at(1).get<std::uint32_t>()});
        return es;
    };
    if (s.task == Task::LinkPrediction) {
        s.train_edges = edges_from("train_edges");
        s.valid_edges = edges_from("valid_edges");
        s.test_edges = edges_from("test_edges");
    } else {
        s.train_nodes = j.at("train_nodes").get<std::vector<int>>();
        s.valid_nodes = j.at("valid_nodes").get<std::vector<int>>();
        s.test_nodes = j.at("test_nodes").get<std::vector<int>>();
    }
    return s;
}

}  // namespace dip
