#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "dip/matrix.hpp"

namespace dip {

using Edge = std::pair<std::uint32_t, std::uint32_t>;
using EdgeList = std::vector<Edge>;

// Symmetric CSR adjacency: offsets has length n+1, columns sorted ascending
// per row, no self-loops, no duplicates.
struct Csr {
    int n = 0;
    std::vector<std::uint32_t> offsets;  // length n + 1
    std::vector<std::uint32_t> cols;     // length offsets[n]

    int degree(int v) const { return static_cast<int>(offsets[v + 1] - offsets[v]); }
    const std::uint32_t* begin(int v) const { return cols.data() + offsets[v]; }
    const std::uint32_t* end(int v) const { return cols.data() + offsets[v + 1]; }

    bool has_edge(std::uint32_t u, std::uint32_t v) const {
        return std::binary_search(begin(static_cast<int>(u)), end(static_cast<int>(u)), v);
    }

    std::size_t directed_edge_count() const { return cols.size(); }
    std::size_t undirected_edge_count() const { return cols.size() / 2; }

    // Unique undirected edges (u < v), in row order.
    EdgeList undirected_edges() const {
        EdgeList out;
        out.reserve(undirected_edge_count());
        for (int u = 0; u < n; ++u)
            for (const std::uint32_t* p = begin(u); p != end(u); ++p)
                if (static_cast<std::uint32_t>(u) < *p) out.push_back({static_cast<std::uint32_t>(u), *p});
        return out;
    }
};

// Builds a symmetric, deduplicated, self-loop-free CSR from an edge list.
// Directed input is symmetrized; (u,v) and (v,u) collapse to one edge.
inline Csr build_adjacency(const EdgeList& edges, int n) {
    for (const auto& [u, v] : edges)
        if (u >= static_cast<std::uint32_t>(n) || v >= static_cast<std::uint32_t>(n))
            throw ConfigError("build_adjacency: node index out of range");

    std::vector<std::uint64_t> keys;
    keys.reserve(edges.size());
    for (const auto& [u, v] : edges) {
        if (u == v) continue;  // self-loops dropped here; loaders decide whether to error first
        std::uint32_t a = std::min(u, v), b = std::max(u, v);
        keys.push_back((static_cast<std::uint64_t>(a) << 32) | b);
    }
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

    Csr csr;
    csr.n = n;
    csr.offsets.assign(static_cast<size_t>(n) + 1, 0);
    for (std::uint64_t k : keys) {
        ++csr.offsets[(k >> 32) + 1];
        ++csr.offsets[(k & 0xffffffffu) + 1];
    }
    for (int i = 0; i < n; ++i) csr.offsets[i + 1] += csr.offsets[i];
    csr.cols.resize(csr.offsets[n]);
    std::vector<std::uint32_t> fill(csr.offsets.begin(), csr.offsets.end() - 1);
    for (std::uint64_t k : keys) {
        std::uint32_t a = static_cast<std::uint32_t>(k >> 32);
        std::uint32_t b = static_cast<std::uint32_t>(k & 0xffffffffu);
        csr.cols[fill[a]++] = b;
        csr.cols[fill[b]++] = a;
    }
    // rows come out sorted because keys were sorted by (min, max) and each
    // row receives its columns in ascending order
    for (int v = 0; v < n; ++v)
        if (!std::is_sorted(csr.cols.begin() + csr.offsets[v], csr.cols.begin() + csr.offsets[v + 1]))
            std::sort(csr.cols.begin() + csr.offsets[v], csr.cols.begin() + csr.offsets[v + 1]);
    return csr;
}

struct MultimodalGraph {
    int n = 0;
    Csr adjacency;
    Matd feat_v;  // n x d_v
    Matd feat_t;  // n x d_t
    std::optional<std::vector<std::uint32_t>> labels;  // values in [0, num_classes)
    int num_classes = 0;

    std::size_t edge_count() const { return adjacency.undirected_edge_count(); }
    int d_v() const { return feat_v.cols; }
    int d_t() const { return feat_t.cols; }
};

// Per-node mean of neighbor rows; zero row for isolated nodes.
template <typename Real>
Mat<Real> neighbor_mean(const Mat<Real>& x, const Csr& adj) {
    if (x.rows != adj.n) throw ConfigError("neighbor_mean: rows != graph n");
    Mat<Real> out(x.rows, x.cols);
    for (int v = 0; v < adj.n; ++v) {
        int deg = adj.degree(v);
        if (deg == 0) continue;
        Real* ov = out.row(v);
        for (const std::uint32_t* p = adj.begin(v); p != adj.end(v); ++p) {
            const Real* xj = x.row(static_cast<int>(*p));
            for (int j = 0; j < x.cols; ++j) ov[j] += xj[j];
        }
        Real inv = Real(1) / static_cast<Real>(deg);
        for (int j = 0; j < x.cols; ++j) ov[j] *= inv;
    }
    return out;
}

// Validates every structural invariant; called after load and generation.
inline void validate_graph(const MultimodalGraph& g) {
    const Csr& a = g.adjacency;
    if (a.n != g.n) throw ConfigError("graph: adjacency node count mismatch");
    if (a.offsets.size() != static_cast<size_t>(g.n) + 1) throw ConfigError("graph: offsets length");
    if (a.offsets[g.n] != a.cols.size()) throw ConfigError("graph: offsets[n] != cols length");
    for (int v = 0; v < g.n; ++v) {
        const std::uint32_t* b = a.begin(v);
        const std::uint32_t* e = a.end(v);
        for (const std::uint32_t* p = b; p != e; ++p) {
            if (*p >= static_cast<std::uint32_t>(g.n)) throw ConfigError("graph: column out of range");
            if (*p == static_cast<std::uint32_t>(v)) throw ConfigError("graph: self-loop");
            if (p + 1 != e && *(p + 1) <= *p) throw ConfigError("graph: columns not sorted unique");
            if (!a.has_edge(*p, static_cast<std::uint32_t>(v))) throw ConfigError("graph: asymmetric adjacency");
        }
    }
    if (g.feat_v.rows != g.n || g.feat_t.rows != g.n)
        throw ConfigError("graph: feature row count != n");
    check_finite(g.feat_v, "feat_v");
    check_finite(g.feat_t, "feat_t");
    if (g.labels) {
        if (g.labels->size() != static_cast<size_t>(g.n)) throw ConfigError("graph: labels length != n");
        for (std::uint32_t c : *g.labels)
            if (c >= static_cast<std::uint32_t>(g.num_classes)) throw ConfigError("graph: label out of range");
    }
}

}  // namespace dip
