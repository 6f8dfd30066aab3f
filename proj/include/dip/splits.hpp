#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "dip/graph.hpp"
#include "dip/rng.hpp"

namespace dip {

enum class Task { LinkPrediction, NodeClassification };

inline std::string to_string(Task t) {
    return t == Task::LinkPrediction ? "link-prediction" : "node-classification";
}
inline Task task_from_string(const std::string& s) {
    if (s == "link-prediction" || s == "lp") return Task::LinkPrediction;
    if (s == "node-classification" || s == "nc") return Task::NodeClassification;
    throw ConfigError("unknown task: " + s);
}

struct SplitSet {
    Task task = Task::NodeClassification;
    std::uint64_t seed = 0;
    // LP: disjoint positive edge lists
    EdgeList train_edges, valid_edges, test_edges;
    // NC: disjoint node index sets
    std::vector<int> train_nodes, valid_nodes, test_nodes;
};

using Ratios = std::array<double, 3>;

namespace detail {

inline void check_ratios(const Ratios& r) {
    if (std::abs(r[0] + r[1] + r[2] - 1.0) > 1e-9)
        throw ConfigError("split ratios must sum to 1");
    for (double x : r)
        if (x < 0) throw ConfigError("split ratios must be nonnegative");
}

// Deterministic Fisher-Yates over [0, n)
inline std::vector<std::uint32_t> shuffled_indices(std::size_t n, Rng& rng) {
    std::vector<std::uint32_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<std::uint32_t>(i);
    for (std::size_t i = n; i > 1; --i) {
        std::size_t j = rng.below(i);
        std::swap(idx[i - 1], idx[j]);
    }
    return idx;
}

inline std::pair<std::size_t, std::size_t> split_counts(std::size_t total, const Ratios& r) {
    std::size_t n_train = static_cast<std::size_t>(std::llround(r[0] * static_cast<double>(total)));
    std::size_t n_valid = static_cast<std::size_t>(std::llround(r[1] * static_cast<double>(total)));
    n_train = std::min(n_train, total);
    n_valid = std::min(n_valid, total - n_train);
    return {n_train, n_valid};
}

}  // namespace detail

// Shuffles the undirected edges deterministically and partitions them. The
// returned adjacency contains train edges only, so validation/test edges
// never leak into message passing.
inline std::pair<SplitSet, Csr> split_edges(const MultimodalGraph& g, const Ratios& ratios,
                                            std::uint64_t seed) {
    detail::check_ratios(ratios);
    EdgeList all = g.adjacency.undirected_edges();
    Rng rng(derive_seed(seed, 0x73706c6974ULL));  // "split"
    auto order = detail::shuffled_indices(all.size(), rng);
    auto [n_train, n_valid] = detail::split_counts(all.size(), ratios);

    SplitSet s;
    s.task = Task::LinkPrediction;
    s.seed = seed;
    for (std::size_t k = 0; k < all.size(); ++k) {
        const Edge& e = all[order[k]];
        if (k < n_train) s.train_edges.push_back(e);
        else if (k < n_train + n_valid) s.valid_edges.push_back(e);
        else s.test_edges.push_back(e);
    }
    Csr mp = build_adjacency(s.train_edges, g.n);
    return {std::move(s), std::move(mp)};
}

// Node split for classification; same shuffling discipline.
inline SplitSet split_nodes(const MultimodalGraph& g, const Ratios& ratios, std::uint64_t seed) {
    detail::check_ratios(ratios);
    Rng rng(derive_seed(seed, 0x6e6f646573ULL));  // "nodes"
    auto order = detail::shuffled_indices(static_cast<std::size_t>(g.n), rng);
    auto [n_train, n_valid] = detail::split_counts(order.size(), ratios);

    SplitSet s;
    s.task = Task::NodeClassification;
    s.seed = seed;
    for (std::size_t k = 0; k < order.size(); ++k) {
        int v = static_cast<int>(order[k]);
        if (k < n_train) s.train_nodes.push_back(v);
        else if (k < n_train + n_valid) s.valid_nodes.push_back(v);
        else s.test_nodes.push_back(v);
    }
    return s;
}

enum class NegativeMode { UniformDestination };

// For each anchor (u, v), draws k destinations w with w != u and
// (u, w) outside adjacency and anchors, rejection-resampled. Deterministic
// given the seed.
inline std::vector<std::vector<std::uint32_t>> sample_negatives(const MultimodalGraph& g,
                                                                const EdgeList& anchors, int k,
                                                                NegativeMode, std::uint64_t seed) {
    if (k < 1) throw ConfigError("sample_negatives: k >= 1 required");
    std::unordered_set<std::uint64_t> anchor_keys;
    anchor_keys.reserve(anchors.size() * 2);
    auto key = [](std::uint32_t a, std::uint32_t b) {
        return (static_cast<std::uint64_t>(std::min(a, b)) << 32) | std::max(a, b);
    };
    for (const auto& [u, v] : anchors) anchor_keys.insert(key(u, v));

    Rng rng(derive_seed(seed, 0x6e656773ULL));  // "negs"
    const int max_attempts = 200000;
    std::vector<std::vector<std::uint32_t>> out(anchors.size());
    for (std::size_t q = 0; q < anchors.size(); ++q) {
        std::uint32_t u = anchors[q].first;
        out[q].reserve(k);
        for (int slot = 0; slot < k; ++slot) {
            bool found = false;
            for (int attempt = 0; attempt < max_attempts; ++attempt) {
                std::uint32_t w = static_cast<std::uint32_t>(rng.below(static_cast<std::uint64_t>(g.n)));
                if (w == u) continue;
                if (g.adjacency.has_edge(u, w)) continue;
                if (anchor_keys.count(key(u, w))) continue;
                out[q].push_back(w);
                found = true;
                break;
            }
            if (!found)
                throw ConfigError("sample_negatives: no valid negative for node " + std::to_string(u) +
                                  " after " + std::to_string(max_attempts) +
                                  " attempts (graph too dense)");
        }
    }
    return out;
}

}  // namespace dip
