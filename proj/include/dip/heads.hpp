#pragma once

#include <vector>

#include "dip/engine.hpp"
#include "dip/params.hpp"
#include "dip/proximity.hpp"

namespace dip {

// Modality fusion: linear projection of the concatenated states (no
// activation).
template <class E>
typename E::V fuse(E& e, const Affine<typename E::V>& g, typename E::V zv, typename E::V zt) {
    return affine_apply(e, g, e.concat_cols(zv, zt));
}

// NC head: 2-layer MLP d -> d -> C with LeakyReLU between; returns logits.
template <class E>
typename E::V nc_logits(E& e, const Heads<typename E::V>& h, typename E::V z, double slope) {
    return affine_apply(e, h.nc2, e.leaky_relu(affine_apply(e, h.nc1, z), slope));
}

// LP scoring: per-pair inner products of fused embeddings, returned as raw
// logits (m x 1); sigmoid gives the edge probability.
template <class E>
typename E::V lp_logits(E& e, typename E::V z, const std::vector<int>& us,
                        const std::vector<int>& ws) {
    return e.row_sum(e.mul(e.gather_rows(z, us), e.gather_rows(z, ws)));
}

// --- host helpers -----------------------------------------------------------

inline Matd fuse(const Affine<Matd>& g, const Matd& zv, const Matd& zt) {
    EagerD e;
    return fuse(e, g, zv, zt);
}

inline double lp_score(const Matd& zu, const Matd& zw) {
    if (zu.rows != 1 || zw.rows != 1 || zu.cols != zw.cols)
        throw ConfigError("lp_score: expects two equal-length row vectors");
    double dot = 0;
    for (int j = 0; j < zu.cols; ++j) dot += zu.d[j] * zw.d[j];
    return 1.0 / (1.0 + std::exp(-dot));
}

inline Matd nc_predict(const Heads<Matd>& h, const Matd& z, double slope = 0.01) {
    EagerD e;
    return softmax_rows(nc_logits(e, h, z, slope));
}

// Mean binary cross-entropy over probability scores: labels 1 for positives,
// 0 for negatives.
inline double lp_loss(const std::vector<double>& pos, const std::vector<double>& neg) {
    if (pos.empty() && neg.empty()) throw ConfigError("lp_loss: empty batch");
    double loss = 0;
    for (double p : pos) loss += -std::log(p);
    for (double q : neg) loss += -std::log1p(-q);
    return loss / static_cast<double>(pos.size() + neg.size());
}

// Mean cross-entropy over masked rows, from logits.
inline double nc_loss(const Matd& logits, const std::vector<std::uint32_t>& labels,
                      const std::vector<int>& mask) {
    EagerD e;
    return e.cross_entropy_logits(logits, labels, mask).d[0];
}

}  // namespace dip
