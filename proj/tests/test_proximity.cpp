#include <gtest/gtest.h>

#include <numeric>

#include "dip/dense_reference.hpp"
#include "dip/proximity.hpp"
#include "dip/rng.hpp"

using namespace dip;

namespace {

Projector<Matd> random_projector(Rng& rng, int d_in, int d_s) {
    Projector<Matd> p;
    p.a1 = {rng.normal_matrix(d_in, d_s, 0.3), rng.normal_matrix(1, d_s, 0.1)};
    p.a2 = {rng.normal_matrix(d_s, d_s, 0.3), rng.normal_matrix(1, d_s, 0.1)};
    return p;
}

Channels<Matd> random_channels(Rng& rng, int d_s, int tau) {
    Channels<Matd> c;
    int d_c = d_s / tau;
    for (int t = 0; t < tau; ++t)
        c.ch.push_back({rng.normal_matrix(d_s, d_c, 0.3), rng.normal_matrix(1, d_c, 0.1)});
    c.lambda = rng.normal_matrix(tau, 1, 0.5);
    return c;
}

}  // namespace

TEST(EmbedNodes, PermutationEquivariantExactly) {
    Rng rng(31);
    Projector<Matd> proj = random_projector(rng, 5, 8);
    Matd x = rng.normal_matrix(12, 5, 1.0);

    std::vector<int> perm(12);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);

    Matd z = embed_nodes(proj, x);
    Matd z_perm = embed_nodes(proj, gather_rows(x, perm));
    EXPECT_TRUE(bit_equal(z_perm, gather_rows(z, perm)));
}

TEST(EmbedNodes, ZeroInputZeroBiasGivesZero) {
    Projector<Matd> proj;
    proj.a1 = {Matd(4, 6, std::vector<double>(24, 0.5)), Matd(1, 6)};
    proj.a2 = {Matd(6, 6, std::vector<double>(36, -0.3)), Matd(1, 6)};
    Matd z = embed_nodes(proj, Matd(3, 4));
    for (double v : z.d) EXPECT_DOUBLE_EQ(v, 0.0);
}

TEST(EmbedNodes, HandComputedOneByOneProjector) {
    Projector<Matd> proj;
    proj.a1 = {Matd(1, 1, {2.0}), Matd(1, 1)};
    proj.a2 = {Matd(1, 1, {3.0}), Matd(1, 1)};
    Matd z = embed_nodes(proj, Matd(1, 1, {1.0}));
    EXPECT_DOUBLE_EQ(z.d[0], 6.0);  // hidden = lrelu(2) = 2, out = 3*2
}

TEST(EmbedNodes, DimensionMismatchRejected) {
    Rng rng(2);
    Projector<Matd> proj = random_projector(rng, 5, 8);
    EXPECT_THROW(embed_nodes(proj, Matd(3, 4)), ConfigError);
}

TEST(Proximity, ZeroVectorsZeroBiasesGiveZero) {
    Channels<Matd> ch;
    ch.ch.push_back({Matd(3, 3, std::vector<double>(9, 0.7)), Matd(1, 3)});
    ch.lambda = Matd(1, 1, {1.0});
    EXPECT_DOUBLE_EQ(proximity(ch, Matd(1, 3), Matd(1, 3)), 0.0);
}

TEST(Proximity, ZeroLambdaGivesZero) {
    Rng rng(5);
    Channels<Matd> ch = random_channels(rng, 8, 4);
    for (auto& v : ch.lambda.d) v = 0.0;
    Matd a = rng.normal_matrix(1, 8, 1.0), b = rng.normal_matrix(1, 8, 1.0);
    EXPECT_DOUBLE_EQ(proximity(ch, a, b), 0.0);
}

TEST(Proximity, IdentityChannelDotProduct) {
    // tau=1, identity transform, positive inputs: phi = a . b = 11
    Channels<Matd> ch;
    Matd eye(2, 2);
    eye.at(0, 0) = eye.at(1, 1) = 1.0;
    ch.ch.push_back({eye, Matd(1, 2)});
    ch.lambda = Matd(1, 1, {1.0});
    EXPECT_DOUBLE_EQ(proximity(ch, Matd(1, 2, {1, 2}), Matd(1, 2, {3, 4})), 11.0);
}

TEST(Proximity, SymmetricExactly) {
    Rng rng(7);
    Channels<Matd> ch = random_channels(rng, 8, 2);
    for (int trial = 0; trial < 20; ++trial) {
        Matd a = rng.normal_matrix(1, 8, 1.0), b = rng.normal_matrix(1, 8, 1.0);
        double ab = proximity(ch, a, b);
        double ba = proximity(ch, b, a);
        EXPECT_EQ(ab, ba);
    }
}

TEST(ProximityMatrix, RowSoftmaxRowsSumToOne) {
    Rng rng(11);
    Channels<Matd> ch = random_channels(rng, 8, 4);
    Matd a = rng.normal_matrix(6, 8, 1.0), b = rng.normal_matrix(9, 8, 1.0);
    Matd w = proximity_matrix(ch, a, b, Normalize::RowSoftmax);
    for (int i = 0; i < w.rows; ++i) {
        double s = 0;
        for (int j = 0; j < w.cols; ++j) s += w.at(i, j);
        EXPECT_NEAR(s, 1.0, 1e-12);
    }
}

TEST(ProximityMatrix, SelfArgumentSymmetric) {
    Rng rng(13);
    Channels<Matd> ch = random_channels(rng, 8, 4);
    Matd a = rng.normal_matrix(7, 8, 1.0);
    Matd w = proximity_matrix(ch, a, a, Normalize::None);
    for (int i = 0; i < w.rows; ++i)
        for (int j = 0; j < w.cols; ++j) EXPECT_NEAR(w.at(i, j), w.at(j, i), 1e-12);
}

TEST(ProximityMatrix, MatchesPerPairBruteForce) {
    Rng rng(17);
    Channels<Matd> ch = random_channels(rng, 8, 4);
    Matd a = rng.normal_matrix(7, 8, 1.0), b = rng.normal_matrix(5, 8, 1.0);
    Matd w = proximity_matrix(ch, a, b, Normalize::None);
    ASSERT_EQ(w.rows, 7);
    ASSERT_EQ(w.cols, 5);
    for (int i = 0; i < 7; ++i)
        for (int j = 0; j < 5; ++j) {
            Matd ai(1, 8), bj(1, 8);
            std::copy(a.row(i), a.row(i) + 8, ai.d.begin());
            std::copy(b.row(j), b.row(j) + 8, bj.d.begin());
            EXPECT_NEAR(w.at(i, j), proximity(ch, ai, bj), 1e-12);
        }
    // dense transcription agrees too
    Matd oracle = dense::proximity_dense(ch, a, b, Normalize::None, 0.01);
    EXPECT_LT(max_abs_diff(w, oracle), 1e-12);
}

TEST(ProximityMatrix, CostCountersMatchBlockedFormula) {
    Rng rng(19);
    const int d_s = 16, tau = 4, d_c = d_s / tau, p = 9, q = 13;
    Channels<Matd> ch = random_channels(rng, d_s, tau);
    Matd a = rng.normal_matrix(p, d_s, 1.0), b = rng.normal_matrix(q, d_s, 1.0);

    op_counters().reset();
    op_counters().record_shapes = true;
    proximity_matrix(ch, a, b, Normalize::None);
    auto& c = op_counters();

    EXPECT_EQ(c.prox_proj, static_cast<std::uint64_t>(tau) * (p + q) * d_s * d_c);
    EXPECT_EQ(c.prox_pair, static_cast<std::uint64_t>(tau) * p * q * d_c);
    // no p*q*d_s^2 path: every product pairing p with q has inner dim d_c
    for (const auto& [m, k, n] : c.shapes)
        if (m == p && n == q) EXPECT_EQ(k, d_c);
    op_counters().record_shapes = false;
    op_counters().reset();
}

TEST(ProximityMatrix, RowShiftLeavesSoftmaxUnchanged) {
    Rng rng(23);
    Channels<Matd> ch = random_channels(rng, 8, 2);
    Matd a = rng.normal_matrix(4, 8, 1.0), b = rng.normal_matrix(6, 8, 1.0);
    Matd raw = proximity_matrix(ch, a, b, Normalize::None);
    Matd shifted = raw;
    for (int i = 0; i < shifted.rows; ++i)
        for (int j = 0; j < shifted.cols; ++j) shifted.at(i, j) += 7.25;
    EXPECT_LT(max_abs_diff(softmax_rows(raw), softmax_rows(shifted)), 1e-12);
}
