#pragma once

// Literal dense transcription of the pathway equations, kept deliberately
// independent of the blocked implementation: every W is materialized entry
// by entry from the scalar proximity definition, and all linear algebra is
// written as plain loops. Used by the equivalence tests and nothing else.

#include <cmath>
#include <vector>

#include "dip/graph.hpp"
#include "dip/params.hpp"

namespace dip::dense {

inline Matd affine_naive(const Matd& x, const Affine<Matd>& a) {
    Matd out(x.rows, a.w.cols);
    for (int i = 0; i < x.rows; ++i)
        for (int j = 0; j < a.w.cols; ++j) {
            double s = 0;
            for (int k = 0; k < x.cols; ++k) s += x.at(i, k) * a.w.at(k, j);
            out.at(i, j) = s + a.b.d[j];
        }
    return out;
}

inline Matd lrelu_naive(const Matd& x, double slope) {
    Matd out = x;
    for (auto& v : out.d) v = v >= 0 ? v : slope * v;
    return out;
}

inline Matd sigma_naive(const Matd& x, const Affine<Matd>& a, double slope) {
    return lrelu_naive(affine_naive(x, a), slope);
}

// phi(a, b) = sum_t lambda_t sigma_t(a)^T sigma_t(b) for two row vectors.
inline double proximity_scalar(const Channels<Matd>& ch, const double* a, const double* b,
                               int d_s, double slope) {
    double total = 0;
    for (std::size_t t = 0; t < ch.ch.size(); ++t) {
        const Affine<Matd>& f = ch.ch[t];
        int d_c = f.w.cols;
        double dot = 0;
        for (int j = 0; j < d_c; ++j) {
            double pa = f.b.d[j], pb = f.b.d[j];
            for (int k = 0; k < d_s; ++k) {
                pa += a[k] * f.w.at(k, j);
                pb += b[k] * f.w.at(k, j);
            }
            pa = pa >= 0 ? pa : slope * pa;
            pb = pb >= 0 ? pb : slope * pb;
            dot += pa * pb;
        }
        total += ch.lambda.d[t] * dot;
    }
    return total;
}

// W[i][j] = phi(A_i, B_j), materialized densely.
inline Matd proximity_dense(const Channels<Matd>& ch, const Matd& a, const Matd& b,
                            Normalize norm, double slope) {
    Matd w(a.rows, b.rows);
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < b.rows; ++j)
            w.at(i, j) = proximity_scalar(ch, a.row(i), b.row(j), a.cols, slope);
    if (norm == Normalize::RowSoftmax) {
        for (int i = 0; i < w.rows; ++i) {
            double mx = w.at(i, 0);
            for (int j = 1; j < w.cols; ++j) mx = std::max(mx, w.at(i, j));
            double z = 0;
            for (int j = 0; j < w.cols; ++j) {
                w.at(i, j) = std::exp(w.at(i, j) - mx);
                z += w.at(i, j);
            }
            for (int j = 0; j < w.cols; ++j) w.at(i, j) /= z;
        }
    }
    return w;
}

inline Matd matmul_naive(const Matd& a, const Matd& b) {
    Matd c(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < b.cols; ++j) {
            double s = 0;
            for (int k = 0; k < a.cols; ++k) s += a.at(i, k) * b.at(k, j);
            c.at(i, j) = s;
        }
    return c;
}

inline Matd add_naive(const Matd& a, const Matd& b) {
    Matd c = a;
    for (std::size_t i = 0; i < c.d.size(); ++i) c.d[i] += b.d[i];
    return c;
}

inline Matd embed_naive(const Projector<Matd>& p, const Matd& x, double slope) {
    return affine_naive(lrelu_naive(affine_naive(x, p.a1), slope), p.a2);
}

inline Matd local_mp_naive(const Affine<Matd>& psi, const Matd& m, const Matd& z, const Csr& adj,
                           double slope) {
    int n = m.rows, d = m.cols, ds = z.cols;
    Matd cat(n, 2 * (d + ds));
    for (int v = 0; v < n; ++v) {
        double* row = cat.row(v);
        for (int j = 0; j < d; ++j) row[j] = m.at(v, j);
        for (int j = 0; j < ds; ++j) row[d + j] = z.at(v, j);
        int deg = adj.degree(v);
        if (deg > 0) {
            for (const std::uint32_t* p = adj.begin(v); p != adj.end(v); ++p) {
                int u = static_cast<int>(*p);
                for (int j = 0; j < d; ++j) row[d + ds + j] += m.at(u, j);
                for (int j = 0; j < ds; ++j) row[2 * d + ds + j] += z.at(u, j);
            }
            for (int j = 0; j < d + ds; ++j) row[d + ds + j] /= deg;
        }
    }
    return sigma_naive(cat, psi, slope);
}

struct GlobNaive {
    Matd m_hat, dh;
};

inline GlobNaive glob_mp_naive(const Branch<Matd>& br, const Matd& h, const Matd& m_g,
                               const Matd& z, Normalize norm, double slope) {
    Matd w_gp = proximity_dense(br.gp, h, z, norm, slope);
    Matd d = matmul_naive(w_gp, m_g);
    Matd w_pp = proximity_dense(br.pp, h, h, norm, slope);
    Matd d_hat = matmul_naive(w_pp, d);
    GlobNaive out;
    out.dh = sigma_naive(d_hat, br.site_dh, slope);
    Matd s = sigma_naive(d_hat, br.site_msg, slope);
    Matd w_pg = proximity_dense(br.pg, z, add_naive(h, out.dh), norm, slope);
    out.m_hat = matmul_naive(w_pg, s);
    return out;
}

struct DenseState {
    Matd z, m, h;
    bool has_h = false;
};

inline void g2p_naive(const Branch<Matd>& br, DenseState& st, const Csr& adj, bool local_on,
                      bool glob_on, Normalize norm, double slope) {
    Matd m_new = st.m, z_hat = st.z;
    if (local_on) {
        m_new = local_mp_naive(br.psi, st.m, st.z, adj, slope);
        z_hat = add_naive(st.z, sigma_naive(m_new, br.site_local, slope));
    }
    if (glob_on) {
        GlobNaive g = glob_mp_naive(br, st.h, m_new, z_hat, norm, slope);
        st.z = add_naive(z_hat, sigma_naive(g.m_hat, br.site_g2p, slope));
        st.m = add_naive(m_new, g.m_hat);
        st.h = add_naive(st.h, g.dh);
    } else {
        st.z = z_hat;
        st.m = m_new;
    }
}

inline void p2g_naive(const Branch<Matd>& br, DenseState& st, bool glob_on, Normalize norm,
                      double slope) {
    if (!glob_on) return;
    GlobNaive g = glob_mp_naive(br, st.h, st.m, st.z, norm, slope);
    st.z = add_naive(st.z, sigma_naive(g.m_hat, br.site_p2g, slope));
    st.m = add_naive(st.m, g.m_hat);
    st.h = add_naive(st.h, g.dh);
}

struct DenseForwardOut {
    Matd zv, zt;
};

inline DenseForwardOut dip_forward_dense(const ModelParams& p, const ModelConfig& cfg,
                                         const AblationFlags& flags, const MultimodalGraph& g,
                                         const Csr& adj) {
    const double slope = cfg.leaky_slope;
    const bool glob_v = flags.use_global && flags.use_visual_pseudo;
    const bool glob_t = flags.use_global && flags.use_textual_pseudo;
    const bool cross_on = flags.use_cross_modal && glob_v && glob_t;

    DenseState sv, st;
    sv.z = embed_naive(p.vis.proj, g.feat_v, slope);
    sv.m = sv.z;
    sv.h = p.vis.pseudo;
    sv.has_h = glob_v;
    st.z = embed_naive(p.txt.proj, g.feat_t, slope);
    st.m = st.z;
    st.h = p.txt.pseudo;
    st.has_h = glob_t;

    for (int l = 1; l <= cfg.L; ++l) {
        g2p_naive(p.vis, sv, adj, flags.use_local, glob_v, cfg.normalize, slope);
        g2p_naive(p.txt, st, adj, flags.use_local, glob_t, cfg.normalize, slope);
        if (cross_on) {
            Matd w_tv = proximity_dense(p.cross.tv, sv.h, st.h, cfg.normalize, slope);
            Matd w_vt = proximity_dense(p.cross.vt, st.h, sv.h, cfg.normalize, slope);
            Matd hv_new = add_naive(sv.h, matmul_naive(w_tv, st.h));
            Matd ht_new = add_naive(st.h, matmul_naive(w_vt, sv.h));
            sv.h = hv_new;
            st.h = ht_new;
        }
        p2g_naive(p.vis, sv, glob_v, cfg.normalize, slope);
        p2g_naive(p.txt, st, glob_t, cfg.normalize, slope);
    }
    return {sv.z, st.z};
}

}  // namespace dip::dense
