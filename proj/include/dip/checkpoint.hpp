#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "dip/io.hpp"
#include "dip/params.hpp"

namespace dip {

// Checkpoint file: 8-byte magic, u64 JSON header length, JSON header
// (parameter names/shapes, precision, model config), then the parameter
// arrays concatenated as little-endian f64 in header order.

inline constexpr char kCheckpointMagic[8] = {'D', 'I', 'P', 'C', 'K', 'P', 'T', '\0'};

inline nlohmann::json model_config_to_json(const ModelConfig& cfg) {
    nlohmann::json j;
    j["d_s"] = cfg.d_s;
    j["tau"] = cfg.tau;
    j["L"] = cfg.L;
    j["n_p_v"] = cfg.n_p_v;
    j["n_p_t"] = cfg.n_p_t;
    j["normalize"] = to_string(cfg.normalize);
    j["seed"] = cfg.seed;
    j["leaky_slope"] = cfg.leaky_slope;
    j["d_in_v"] = cfg.d_in_v;
    j["d_in_t"] = cfg.d_in_t;
    j["num_classes"] = cfg.num_classes;
    j["flags"] = {{"use_visual_pseudo", cfg.flags.use_visual_pseudo},
                  {"use_textual_pseudo", cfg.flags.use_textual_pseudo},
                  {"use_local", cfg.flags.use_local},
                  {"use_global", cfg.flags.use_global},
                  {"use_cross_modal", cfg.flags.use_cross_modal}};
    return j;
}

inline ModelConfig model_config_from_json(const nlohmann::json& j) {
    ModelConfig cfg;
    cfg.d_s = j.at("d_s").get<int>();
    cfg.tau = j.at("tau").get<int>();
    cfg.L = j.at("L").get<int>();
    cfg.n_p_v = j.at("n_p_v").get<int>();
    cfg.n_p_t = j.at("n_p_t").get<int>();
    cfg.normalize = normalize_from_string(j.at("normalize").get<std::string>());
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.leaky_slope = j.at("leaky_slope").get<double>();
    cfg.d_in_v = j.at("d_in_v").get<int>();
    cfg.d_in_t = j.at("d_in_t").get<int>();
    cfg.num_classes = j.at("num_classes").get<int>();
    const auto& f = j.at("flags");
    cfg.flags.use_visual_pseudo = f.at("use_visual_pseudo").get<bool>();
    cfg.flags.use_textual_pseudo = f.at("use_textual_pseudo").get<bool>();
    cfg.flags.use_local = f.at("use_local").get<bool>();
    cfg.flags.use_global = f.at("use_global").get<bool>();
    cfg.flags.use_cross_modal = f.at("use_cross_modal").get<bool>();
    return cfg;
}

inline void save_checkpoint(const std::filesystem::path& path, ModelParams& params,
                            const ModelConfig& cfg) {
    ParamList list = list_params(params);
    nlohmann::json header;
    header["format"] = "dip-checkpoint";
    header["version"] = 1;
    header["precision"] = "f64";
    header["config"] = model_config_to_json(cfg);
    nlohmann::json plist = nlohmann::json::array();
    for (std::size_t k = 0; k < list.size(); ++k)
        plist.push_back({{"name", list.names[k]}, {"rows", list.mats[k]->rows}, {"cols", list.mats[k]->cols}});
    header["params"] = plist;

    std::string header_str = header.dump();
    std::string bytes(kCheckpointMagic, 8);
    io::put_u64(bytes, header_str.size());
    bytes += header_str;
    for (const Matd* m : list.mats)
        for (double v : m->d) io::put_f64(bytes, v);
    io::write_file(path, bytes);
}

struct Checkpoint {
    ModelParams params;
    ModelConfig config;
};

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::string bytes = io::read_file(path);
    if (bytes.size() < 16 || std::memcmp(bytes.data(), kCheckpointMagic, 8) != 0)
        throw ConfigError("checkpoint: bad magic in " + path.string());
    std::uint64_t hlen = io::get_u64(bytes, 8);
    if (16 + hlen > bytes.size()) throw ConfigError("checkpoint: truncated header");
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(bytes.substr(16, hlen));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("checkpoint header: " + std::string(e.what()));
    }
    if (header.value("precision", "") != "f64") throw ConfigError("checkpoint: unsupported precision");

    Checkpoint out;
    out.config = model_config_from_json(header.at("config"));
    out.params = init_model(out.config);
    ParamList list = list_params(out.params);
    const auto& plist = header.at("params");
    if (plist.size() != list.size()) throw ConfigError("checkpoint: parameter count mismatch");

    std::size_t off = 16 + hlen;
    for (std::size_t k = 0; k < list.size(); ++k) {
        const auto& entry = plist[k];
        if (entry.at("name").get<std::string>() != list.names[k])
            throw ConfigError("checkpoint: parameter name mismatch at " + list.names[k]);
        int rows = entry.at("rows").get<int>(), cols = entry.at("cols").get<int>();
        if (rows != list.mats[k]->rows || cols != list.mats[k]->cols)
            throw ConfigError("checkpoint: shape mismatch at " + list.names[k] + ": file has " +
                              shape_str(rows, cols) + ", config implies " +
                              shape_str(list.mats[k]->rows, list.mats[k]->cols));
        for (double& v : list.mats[k]->d) {
            if (off + 8 > bytes.size()) throw ConfigError("checkpoint: truncated data");
            v = io::get_f64(bytes, off);
            off += 8;
        }
    }
    if (off != bytes.size()) throw ConfigError("checkpoint: trailing bytes");
    return out;
}

}  // namespace dip
