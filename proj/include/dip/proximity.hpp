#pragma once

#include "dip/engine.hpp"
#include "dip/params.hpp"

namespace dip {

template <class E>
typename E::V affine_apply(E& e, const Affine<typename E::V>& a, typename E::V x) {
    return e.add_bias_row(e.matmul(x, a.w), a.b);
}

// affine + LeakyReLU; the sigma(.) building block used everywhere
template <class E>
typename E::V affine_lrelu(E& e, const Affine<typename E::V>& a, typename E::V x, double slope) {
    return e.leaky_relu(affine_apply(e, a, x), slope);
}

// Row-wise state projection f: d_in -> d_s -> d_s with LeakyReLU between the
// two affine layers. Row i of the output depends only on row i of the input,
// which is what makes f permutation equivariant.
template <class E>
typename E::V embed_nodes(E& e, const Projector<typename E::V>& proj, typename E::V x,
                          double slope) {
    return affine_apply(e, proj.a2, e.leaky_relu(affine_apply(e, proj.a1, x), slope));
}

// W[i][j] = sum_t lambda_t sigma_t(A_i)^T sigma_t(B_j), evaluated as tau
// blocked products sigma_t(A) sigma_t(B)^T so the cost is
// tau*(p+q)*d_s*d_c projections plus tau*p*q*d_c products -- never p*q*d_s^2.
template <class E>
typename E::V proximity_matrix(E& e, const Channels<typename E::V>& ch, typename E::V a,
                               typename E::V b, Normalize norm, double slope) {
    using V = typename E::V;
    V w{};
    for (std::size_t t = 0; t < ch.ch.size(); ++t) {
        V pa, pb;
        {
            CounterScope mark(CountScope::ProximityProjection);
            pa = affine_lrelu(e, ch.ch[t], a, slope);
            pb = affine_lrelu(e, ch.ch[t], b, slope);
        }
        V prod;
        {
            CounterScope mark(CountScope::ProximityPairing);
            prod = e.matmul_nt(pa, pb);
        }
        V term = e.scale_var(prod, e.gather_rows(ch.lambda, {static_cast<int>(t)}));
        w = t == 0 ? term : e.add(w, term);
    }
    if (norm == Normalize::RowSoftmax) w = e.softmax_rows(w);
    return w;
}

// Host helpers over plain matrices (evaluation, tests, heatmap export).

inline Matd embed_nodes(const Projector<Matd>& proj, const Matd& x, double slope = 0.01) {
    EagerD e;
    return embed_nodes(e, proj, x, slope);
}

inline Matd proximity_matrix(const Channels<Matd>& ch, const Matd& a, const Matd& b,
                             Normalize norm, double slope = 0.01) {
    EagerD e;
    return proximity_matrix(e, ch, a, b, norm, slope);
}

// Scalar proximity phi(a, b) between two d_s vectors (1 x d_s matrices).
inline double proximity(const Channels<Matd>& ch, const Matd& a, const Matd& b,
                        double slope = 0.01) {
    if (a.rows != 1 || b.rows != 1 || a.cols != b.cols)
        throw ConfigError("proximity: expects two 1 x d_s vectors");
    return proximity_matrix(ch, a, b, Normalize::None, slope).d[0];
}

}  // namespace dip
