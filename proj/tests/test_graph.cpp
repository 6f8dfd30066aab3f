#include <gtest/gtest.h>

#include "dip/graph.hpp"
#include "dip/rng.hpp"

using namespace dip;

TEST(BuildAdjacency, EmptyEdgeList) {
    Csr a = build_adjacency({}, 3);
    EXPECT_EQ(a.n, 3);
    ASSERT_EQ(a.offsets.size(), 4u);
    for (auto o : a.offsets) EXPECT_EQ(o, 0u);
    EXPECT_EQ(a.undirected_edge_count(), 0u);
}

TEST(BuildAdjacency, DeduplicatesAndSymmetrizes) {
    Csr a = build_adjacency({{0, 1}, {1, 0}, {0, 1}}, 2);
    std::vector<std::uint32_t> want_offsets = {0, 1, 2};
    EXPECT_EQ(a.offsets, want_offsets);
    EXPECT_EQ(a.cols[0], 1u);
    EXPECT_EQ(a.cols[1], 0u);
    EXPECT_EQ(a.undirected_edge_count(), 1u);
}

TEST(BuildAdjacency, RejectsOutOfRange) {
    EXPECT_THROW(build_adjacency({{0, 5}}, 3), ConfigError);
}

TEST(BuildAdjacency, MatchesDenseBooleanOracle) {
    const int n = 50;
    Rng rng(1234);
    EdgeList edges;
    for (int e = 0; e < 200; ++e) {
        auto u = static_cast<std::uint32_t>(rng.below(n));
        auto v = static_cast<std::uint32_t>(rng.below(n));
        edges.push_back({u, v});
    }
    Csr a = build_adjacency(edges, n);

    // dense oracle: symmetrize, drop diagonal
    std::vector<std::vector<bool>> dense(n, std::vector<bool>(n, false));
    for (const auto& [u, v] : edges) {
        if (u == v) continue;
        dense[u][v] = dense[v][u] = true;
    }
    for (int u = 0; u < n; ++u) {
        std::vector<std::uint32_t> want;
        for (int v = 0; v < n; ++v)
            if (dense[u][v]) want.push_back(static_cast<std::uint32_t>(v));
        std::vector<std::uint32_t> got(a.begin(u), a.end(u));
        EXPECT_EQ(got, want) << "row " << u;
    }
}

TEST(BuildAdjacency, HasEdgeAndDegree) {
    Csr a = build_adjacency({{0, 1}, {1, 2}, {2, 3}}, 4);
    EXPECT_TRUE(a.has_edge(1, 2));
    EXPECT_TRUE(a.has_edge(2, 1));
    EXPECT_FALSE(a.has_edge(0, 3));
    EXPECT_EQ(a.degree(1), 2);
    EXPECT_EQ(a.degree(0), 1);
}

TEST(GraphValidation, CatchesBrokenInvariants) {
    MultimodalGraph g;
    g.n = 2;
    g.adjacency = build_adjacency({{0, 1}}, 2);
    g.feat_v = Matd(2, 3);
    g.feat_t = Matd(2, 2);
    validate_graph(g);  // fine

    MultimodalGraph bad = g;
    bad.feat_v = Matd(3, 3);  // wrong row count
    EXPECT_THROW(validate_graph(bad), ConfigError);

    bad = g;
    bad.adjacency.cols[0] = 0;  // self-loop at node 0
    EXPECT_THROW(validate_graph(bad), ConfigError);

    bad = g;
    bad.feat_t.d[1] = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(validate_graph(bad), NumericError);
}

TEST(NeighborMean, HandlesIsolatedNodes) {
    Csr a = build_adjacency({{0, 1}}, 3);  // node 2 isolated
    Matd x(3, 2, {1, 2, 3, 4, 5, 6});
    Matd m = neighbor_mean(x, a);
    EXPECT_DOUBLE_EQ(m.at(0, 0), 3);
    EXPECT_DOUBLE_EQ(m.at(0, 1), 4);
    EXPECT_DOUBLE_EQ(m.at(1, 0), 1);
    EXPECT_DOUBLE_EQ(m.at(2, 0), 0);
    EXPECT_DOUBLE_EQ(m.at(2, 1), 0);
}
