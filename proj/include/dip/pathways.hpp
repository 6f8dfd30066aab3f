#pragma once

#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "dip/engine.hpp"
#include "dip/graph.hpp"
#include "dip/params.hpp"
#include "dip/proximity.hpp"

namespace dip {

// ---------------------------------------------------------------------------
// Canonical node ordering.
//
// Reductions over the node axis (neighbor sums, softmax rows of W_GP, the
// W_GP * M products) are float sums whose result depends on summation order.
// To make dip_forward exactly permutation equivariant the forward internally
// relabels nodes into a canonical order derived from the feature rows
// themselves, computes there, and maps the outputs back. Any relabeling of
// the input then reproduces bit-identical states. Ties (bit-identical
// feature rows across both modalities) fall back to input order.
// ---------------------------------------------------------------------------

inline std::vector<int> canonical_order(const Matd& fv, const Matd& ft) {
    std::vector<int> idx(fv.rows);
    std::iota(idx.begin(), idx.end(), 0);
    auto row_less = [](const double* a, const double* b, int cols) -> int {
        for (int j = 0; j < cols; ++j) {
            if (a[j] < b[j]) return -1;
            if (a[j] > b[j]) return 1;
        }
        return 0;
    };
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        int c = row_less(fv.row(a), fv.row(b), fv.cols);
        if (c != 0) return c < 0;
        c = row_less(ft.row(a), ft.row(b), ft.cols);
        if (c != 0) return c < 0;
        return a < b;
    });
    return idx;
}

inline std::vector<int> invert_permutation(const std::vector<int>& perm) {
    std::vector<int> inv(perm.size());
    for (std::size_t k = 0; k < perm.size(); ++k) inv[perm[k]] = static_cast<int>(k);
    return inv;
}

// Relabels the adjacency into canonical order: row k of the result holds the
// canonical labels of perm[k]'s neighbors, sorted.
inline Csr permute_adjacency(const Csr& adj, const std::vector<int>& perm,
                             const std::vector<int>& inv) {
    Csr out;
    out.n = adj.n;
    out.offsets.assign(static_cast<std::size_t>(adj.n) + 1, 0);
    for (int k = 0; k < adj.n; ++k)
        out.offsets[k + 1] = out.offsets[k] + static_cast<std::uint32_t>(adj.degree(perm[k]));
    out.cols.resize(out.offsets[adj.n]);
    for (int k = 0; k < adj.n; ++k) {
        std::uint32_t* dst = out.cols.data() + out.offsets[k];
        int u = perm[k];
        int deg = adj.degree(u);
        for (int j = 0; j < deg; ++j) dst[j] = static_cast<std::uint32_t>(inv[adj.begin(u)[j]]);
        std::sort(dst, dst + deg);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Pathway stages (all engine-generic)
// ---------------------------------------------------------------------------

template <class E>
struct BranchState {
    typename E::V z, m;
    std::optional<typename E::V> h;
};

// LocalMP: per-node mean over neighbor [M||Z] rows, then
// psi([self || neighbor-mean]) with one affine + LeakyReLU. Isolated nodes
// aggregate the zero vector.
template <class E>
typename E::V local_mp(E& e, const Affine<typename E::V>& psi, typename E::V m, typename E::V z,
                       const Csr& adj, double slope) {
    auto mz = e.concat_cols(m, z);
    auto nb = e.neighbor_mean(mz, adj);
    return affine_lrelu(e, psi, e.concat_cols(mz, nb), slope);
}

template <class E>
struct GlobOut {
    typename E::V m_hat;  // n x d message returned to graph nodes
    typename E::V dh;     // n_p x d_s pseudo state refinement
};

// GlobMP: diffusion D = W_GP M, refinement D_hat = W_PP D with
// dH = sigma(D_hat), aggregation M_hat = W_PG sigma(D_hat) where W_PG is
// measured against the refined pseudo states H + dH. All pathway weights are
// blocked proximity products; nothing n x n is ever formed.
template <class E>
GlobOut<E> glob_mp(E& e, const Branch<typename E::V>& br, typename E::V h, typename E::V m_g,
                   typename E::V z, Normalize norm, double slope) {
    auto w_gp = proximity_matrix(e, br.gp, h, z, norm, slope);  // n_p x n
    auto d = e.matmul(w_gp, m_g);                               // n_p x d
    auto w_pp = proximity_matrix(e, br.pp, h, h, norm, slope);  // n_p x n_p
    auto d_hat = e.matmul(w_pp, d);
    GlobOut<E> out;
    out.dh = affine_lrelu(e, br.site_dh, d_hat, slope);
    auto s = affine_lrelu(e, br.site_msg, d_hat, slope);
    auto w_pg = proximity_matrix(e, br.pg, z, e.add(h, out.dh), norm, slope);  // n x n_p
    out.m_hat = e.matmul(w_pg, s);
    return out;
}

// G2P: local message passing plus global diffusion into this modality's
// pseudo nodes. With use_local off the local stage passes through; with the
// global route off the state is left at the local result.
template <class E>
void intra_g2p_step(E& e, const Branch<typename E::V>& br, BranchState<E>& st, const Csr& adj,
                    bool local_on, bool glob_on, Normalize norm, double slope) {
    auto m_new = st.m;
    auto z_hat = st.z;
    if (local_on) {
        m_new = local_mp(e, br.psi, st.m, st.z, adj, slope);
        z_hat = e.add(st.z, affine_lrelu(e, br.site_local, m_new, slope));
    }
    if (glob_on) {
        auto g = glob_mp(e, br, *st.h, m_new, z_hat, norm, slope);
        st.z = e.add(z_hat, affine_lrelu(e, br.site_g2p, g.m_hat, slope));
        st.m = e.add(m_new, g.m_hat);
        st.h = e.add(*st.h, g.dh);
    } else {
        st.z = z_hat;
        st.m = m_new;
    }
}

// P2P: cross-modal pseudo exchange, simultaneous on both sides.
template <class E>
void inter_modal_step(E& e, const CrossModal<typename E::V>& cross, typename E::V& hv,
                      typename E::V& ht, Normalize norm, double slope) {
    auto w_tv = proximity_matrix(e, cross.tv, hv, ht, norm, slope);  // n_pv x n_pt
    auto w_vt = proximity_matrix(e, cross.vt, ht, hv, norm, slope);  // n_pt x n_pv
    auto hv_new = e.add(hv, e.matmul(w_tv, ht));
    auto ht_new = e.add(ht, e.matmul(w_vt, hv));
    hv = hv_new;
    ht = ht_new;
}

// P2G: a second global pass that redistributes the exchanged pseudo states
// into graph node states.
template <class E>
void intra_p2g_step(E& e, const Branch<typename E::V>& br, BranchState<E>& st, bool glob_on,
                    Normalize norm, double slope) {
    if (!glob_on) return;
    auto g = glob_mp(e, br, *st.h, st.m, st.z, norm, slope);
    st.z = e.add(st.z, affine_lrelu(e, br.site_p2g, g.m_hat, slope));
    st.m = e.add(st.m, g.m_hat);
    st.h = e.add(*st.h, g.dh);
}

// ---------------------------------------------------------------------------
// Full forward
// ---------------------------------------------------------------------------

template <class E>
struct PathwayOut {
    typename E::V zv, zt;  // n x d_s final states, original node order
    std::optional<typename E::V> hv, ht;
    // canonical-order bookkeeping; canon_adj must stay alive until any
    // backward pass over this forward has completed
    std::vector<int> perm, inv;
    std::unique_ptr<Csr> canon_adj;
};

template <class E>
PathwayOut<E> dip_forward(E& e, const Model<typename E::V>& p, const ModelConfig& cfg,
                          const AblationFlags& flags, const MultimodalGraph& g,
                          const Csr& mp_adj) {
    if (cfg.d_in_v != g.d_v() || cfg.d_in_t != g.d_t())
        throw ConfigError("dip_forward: graph feature dims do not match model config");
    if (mp_adj.n != g.n) throw ConfigError("dip_forward: adjacency node count mismatch");

    PathwayOut<E> out;
    out.perm = canonical_order(g.feat_v, g.feat_t);
    out.inv = invert_permutation(out.perm);
    out.canon_adj = std::make_unique<Csr>(permute_adjacency(mp_adj, out.perm, out.inv));

    auto xv = e.constant(gather_rows(g.feat_v, out.perm));
    auto xt = e.constant(gather_rows(g.feat_t, out.perm));

    const bool glob_v = flags.use_global && flags.use_visual_pseudo;
    const bool glob_t = flags.use_global && flags.use_textual_pseudo;
    const bool cross_on = flags.use_cross_modal && glob_v && glob_t;
    const double slope = cfg.leaky_slope;

    BranchState<E> sv, st;
    sv.z = embed_nodes(e, p.vis.proj, xv, slope);
    sv.m = sv.z;
    st.z = embed_nodes(e, p.txt.proj, xt, slope);
    st.m = st.z;
    if (glob_v) sv.h = p.vis.pseudo;
    if (glob_t) st.h = p.txt.pseudo;

    for (int l = 1; l <= cfg.L; ++l) {
        intra_g2p_step(e, p.vis, sv, *out.canon_adj, flags.use_local, glob_v, cfg.normalize, slope);
        intra_g2p_step(e, p.txt, st, *out.canon_adj, flags.use_local, glob_t, cfg.normalize, slope);
        if (cross_on) inter_modal_step(e, p.cross, *sv.h, *st.h, cfg.normalize, slope);
        intra_p2g_step(e, p.vis, sv, glob_v, cfg.normalize, slope);
        intra_p2g_step(e, p.txt, st, glob_t, cfg.normalize, slope);
        e.check_state(sv.z, "visual state after step " + std::to_string(l));
        e.check_state(st.z, "textual state after step " + std::to_string(l));
    }

    out.zv = e.gather_rows(sv.z, out.inv);
    out.zt = e.gather_rows(st.z, out.inv);
    out.hv = sv.h;
    out.ht = st.h;
    return out;
}

}  // namespace dip
