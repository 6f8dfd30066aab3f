#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "dip/graph.hpp"
#include "dip/rng.hpp"

namespace dip {

// Stochastic block model with modality-split class signal: classes are
// assigned unit-norm, mutually orthogonal mean vectors, written into feat_v
// for the first round(signal_split * C) classes and into feat_t for the
// rest; the other modality of each node receives pure noise.
struct SynthConfig {
    int n = 1000;
    int blocks = 4;  // class count C
    double p_in = 0.02;
    double p_out = 0.002;
    int d_v = 32;
    int d_t = 32;
    double signal_split = 0.5;
    double noise_sigma = 1.0;
    std::uint64_t seed = 1;

    void validate() const {
        if (n < 2) throw ConfigError("synth: n >= 2 required");
        if (blocks < 2) throw ConfigError("synth: C >= 2 required");
        if (!(p_out >= 0 && p_out <= p_in && p_in <= 1.0))
            throw ConfigError("synth: need 0 <= p_out <= p_in <= 1");
        if (signal_split < 0 || signal_split > 1) throw ConfigError("synth: signal_split in [0,1]");
        if (noise_sigma < 0) throw ConfigError("synth: noise_sigma >= 0");
        if (d_v < blocks || d_t < blocks)
            throw ConfigError("synth: feature dims must be >= C for orthogonal class means");
    }

    int visual_classes() const {
        int k = static_cast<int>(std::llround(signal_split * blocks));
        return std::min(std::max(k, 0), blocks);
    }
};

namespace detail {

// C orthonormal rows via Gram-Schmidt on a seeded Gaussian matrix.
inline Matd orthonormal_means(int c, int d, Rng& rng) {
    Matd m = rng.normal_matrix(c, d, 1.0);
    for (int i = 0; i < c; ++i) {
        double* ri = m.row(i);
        for (int j = 0; j < i; ++j) {
            const double* rj = m.row(j);
            double dot = 0;
            for (int k = 0; k < d; ++k) dot += ri[k] * rj[k];
            for (int k = 0; k < d; ++k) ri[k] -= dot * rj[k];
        }
        double norm = 0;
        for (int k = 0; k < d; ++k) norm += ri[k] * ri[k];
        norm = std::sqrt(norm);
        if (norm < 1e-9) throw NumericError("orthonormal_means: degenerate draw");
        for (int k = 0; k < d; ++k) ri[k] /= norm;
    }
    return m;
}

// Skip-samples Bernoulli(p) over a linear index space of `count` pairs,
// appending the selected indices.
inline void sample_pairs(std::int64_t count, double p, Rng& rng, std::vector<std::int64_t>& out) {
    if (p <= 0.0 || count <= 0) return;
    std::int64_t pos = rng.skip_geometric(p);
    while (pos < count) {
        out.push_back(pos);
        pos += 1 + rng.skip_geometric(p);
    }
}

// Decodes pair index k of the upper triangle of an s x s block into (i, j).
inline std::pair<int, int> triangle_decode(std::int64_t k, int s) {
    // row i owns (s - 1 - i) pairs; solve incrementally adjusted closed form
    double sd = static_cast<double>(s);
    std::int64_t i = static_cast<std::int64_t>(
        std::floor((2 * sd - 1 - std::sqrt((2 * sd - 1) * (2 * sd - 1) - 8.0 * static_cast<double>(k))) / 2.0));
    if (i < 0) i = 0;
    auto row_start = [&](std::int64_t r) { return r * s - r * (r + 1) / 2; };
    while (i > 0 && row_start(i) > k) --i;
    while (row_start(i + 1) <= k) ++i;
    std::int64_t j = i + 1 + (k - row_start(i));
    return {static_cast<int>(i), static_cast<int>(j)};
}

}  // namespace detail

// Deterministic given the seed: same config twice gives bit-identical graphs.
inline MultimodalGraph gen_synthetic(const SynthConfig& cfg) {
    cfg.validate();
    const int c = cfg.blocks;

    // equal blocks; remainders spread over the first n % C blocks
    std::vector<int> block_start(c + 1, 0);
    for (int b = 0; b < c; ++b) block_start[b + 1] = block_start[b] + cfg.n / c + (b < cfg.n % c ? 1 : 0);
    std::vector<std::uint32_t> labels(cfg.n);
    for (int b = 0; b < c; ++b)
        for (int i = block_start[b]; i < block_start[b + 1]; ++i) labels[i] = static_cast<std::uint32_t>(b);

    // edges: skip-sample each uniform-probability region
    EdgeList edges;
    Rng edge_rng(derive_seed(cfg.seed, 0x6564676573ULL));  // "edges"
    std::vector<std::int64_t> hits;
    for (int b = 0; b < c; ++b) {
        int s = block_start[b + 1] - block_start[b];
        hits.clear();
        detail::sample_pairs(static_cast<std::int64_t>(s) * (s - 1) / 2, cfg.p_in, edge_rng, hits);
        for (std::int64_t k : hits) {
            auto [i, j] = detail::triangle_decode(k, s);
            edges.push_back({static_cast<std::uint32_t>(block_start[b] + i),
                             static_cast<std::uint32_t>(block_start[b] + j)});
        }
    }
    for (int b1 = 0; b1 < c; ++b1) {
        int s1 = block_start[b1 + 1] - block_start[b1];
        for (int b2 = b1 + 1; b2 < c; ++b2) {
            int s2 = block_start[b2 + 1] - block_start[b2];
            hits.clear();
            detail::sample_pairs(static_cast<std::int64_t>(s1) * s2, cfg.p_out, edge_rng, hits);
            for (std::int64_t k : hits) {
                edges.push_back({static_cast<std::uint32_t>(block_start[b1] + static_cast<int>(k / s2)),
                                 static_cast<std::uint32_t>(block_start[b2] + static_cast<int>(k % s2))});
            }
        }
    }

    MultimodalGraph g;
    g.n = cfg.n;
    g.adjacency = build_adjacency(edges, cfg.n);
    g.labels = labels;
    g.num_classes = c;

    // class means and features; values are rounded to f32 so a bundle
    // round-trip through the f32 on-disk format is lossless
    Rng mean_rng_v(derive_seed(cfg.seed, 0x6d65616e76ULL));  // "meanv"
    Rng mean_rng_t(derive_seed(cfg.seed, 0x6d65616e74ULL));  // "meant"
    Matd mu_v = detail::orthonormal_means(c, cfg.d_v, mean_rng_v);
    Matd mu_t = detail::orthonormal_means(c, cfg.d_t, mean_rng_t);
    const int n_vis = cfg.visual_classes();

    Rng feat_rng_v(derive_seed(cfg.seed, 0x6665617476ULL));  // "featv"
    Rng feat_rng_t(derive_seed(cfg.seed, 0x6665617474ULL));  // "featt"
    g.feat_v = Matd(cfg.n, cfg.d_v);
    g.feat_t = Matd(cfg.n, cfg.d_t);
    for (int i = 0; i < cfg.n; ++i) {
        int y = static_cast<int>(labels[i]);
        double* fv = g.feat_v.row(i);
        for (int j = 0; j < cfg.d_v; ++j) {
            double v = cfg.noise_sigma * feat_rng_v.normal();
            if (y < n_vis) v += mu_v.at(y, j);
            fv[j] = static_cast<double>(static_cast<float>(v));
        }
        double* ft = g.feat_t.row(i);
        for (int j = 0; j < cfg.d_t; ++j) {
            double v = cfg.noise_sigma * feat_rng_t.normal();
            if (y >= n_vis) v += mu_t.at(y, j);
            ft[j] = static_cast<double>(static_cast<float>(v));
        }
    }

    validate_graph(g);
    return g;
}

}  // namespace dip
