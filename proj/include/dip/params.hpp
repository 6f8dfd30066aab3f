#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dip/matrix.hpp"
#include "dip/rng.hpp"

namespace dip {

enum class Normalize { None, RowSoftmax };

inline std::string to_string(Normalize n) {
    return n == Normalize::None ? "none" : "row-softmax";
}
inline Normalize normalize_from_string(const std::string& s) {
    if (s == "none") return Normalize::None;
    if (s == "row-softmax") return Normalize::RowSoftmax;
    throw ConfigError("unknown normalize mode: " + s);
}

// Table-4 style switches. All combinations are legal.
struct AblationFlags {
    bool use_visual_pseudo = true;
    bool use_textual_pseudo = true;
    bool use_local = true;
    bool use_global = true;
    bool use_cross_modal = true;
};

struct ModelConfig {
    int d_s = 32;
    int tau = 8;
    int L = 2;
    int n_p_v = 8;
    int n_p_t = 8;
    Normalize normalize = Normalize::RowSoftmax;
    AblationFlags flags;
    std::uint64_t seed = 1;
    double leaky_slope = 0.01;
    // data-dependent
    int d_in_v = 0;
    int d_in_t = 0;
    int num_classes = 0;  // 0 when the NC head is absent

    int d_c() const { return d_s / tau; }

    void validate() const {
        if (d_s <= 0 || tau <= 0 || L < 0 || n_p_v < 1 || n_p_t < 1)
            throw ConfigError("model config: d_s/tau positive, L >= 0, pseudo counts >= 1");
        if (d_s % tau != 0)
            throw ConfigError("model config: tau must divide d_s (channel width d_c = d_s/tau)");
        if (d_in_v <= 0 || d_in_t <= 0) throw ConfigError("model config: input dims unset");
    }
};

// Parameter containers are templated on the storage type so the same model
// code runs over host matrices (Mat<double>) or engine handles (Tape ids).
template <class T>
struct Affine {
    T w;  // in x out
    T b;  // 1 x out
};

template <class T>
struct Projector {
    Affine<T> a1, a2;  // d_in -> d_s -> d_s, LeakyReLU between
};

// Multi-channel proximity: tau transforms d_s -> d_c plus channel weights
// lambda (tau x 1).
template <class T>
struct Channels {
    std::vector<Affine<T>> ch;
    T lambda;
};

template <class T>
struct Branch {
    Projector<T> proj;
    T pseudo;  // n_p x d_s, trainable initial pseudo states
    Channels<T> gp, pp, pg;
    Affine<T> psi;  // 4*d_s -> d_s local aggregation
    // the five update sites, each d_s -> d_s affine + LeakyReLU
    Affine<T> site_local, site_g2p, site_p2g, site_dh, site_msg;
};

template <class T>
struct CrossModal {
    Channels<T> tv, vt;
};

template <class T>
struct Heads {
    Affine<T> fuse;      // 2*d_s -> d_s, linear
    Affine<T> nc1, nc2;  // d_s -> d_s -> C (present only with labels)
};

template <class T>
struct Model {
    Branch<T> vis, txt;
    CrossModal<T> cross;
    Heads<T> heads;
};

using ModelParams = Model<Matd>;

// ---------------------------------------------------------------------------
// Initialization: affine weights uniform in +-sqrt(6/(fan_in+fan_out)),
// biases zero, lambda 1/tau, pseudo states N(0, 1/sqrt(d_s)).
// ---------------------------------------------------------------------------

inline Affine<Matd> init_affine(Rng& rng, int in, int out) {
    double bound = std::sqrt(6.0 / (in + out));
    return {rng.uniform_matrix(in, out, -bound, bound), Matd(1, out)};
}

inline Channels<Matd> init_channels(Rng& rng, int d_s, int tau) {
    Channels<Matd> c;
    int d_c = d_s / tau;
    c.ch.reserve(tau);
    for (int t = 0; t < tau; ++t) c.ch.push_back(init_affine(rng, d_s, d_c));
    c.lambda = Matd(tau, 1);
    for (auto& v : c.lambda.d) v = 1.0 / tau;
    return c;
}

inline Branch<Matd> init_branch(Rng& rng, const ModelConfig& cfg, int d_in, int n_p) {
    Branch<Matd> b;
    b.proj.a1 = init_affine(rng, d_in, cfg.d_s);
    b.proj.a2 = init_affine(rng, cfg.d_s, cfg.d_s);
    b.pseudo = rng.normal_matrix(n_p, cfg.d_s, 1.0 / std::sqrt(static_cast<double>(cfg.d_s)));
    b.gp = init_channels(rng, cfg.d_s, cfg.tau);
    b.pp = init_channels(rng, cfg.d_s, cfg.tau);
    b.pg = init_channels(rng, cfg.d_s, cfg.tau);
    b.psi = init_affine(rng, 4 * cfg.d_s, cfg.d_s);
    b.site_local = init_affine(rng, cfg.d_s, cfg.d_s);
    b.site_g2p = init_affine(rng, cfg.d_s, cfg.d_s);
    b.site_p2g = init_affine(rng, cfg.d_s, cfg.d_s);
    b.site_dh = init_affine(rng, cfg.d_s, cfg.d_s);
    b.site_msg = init_affine(rng, cfg.d_s, cfg.d_s);
    return b;
}

inline ModelParams init_model(const ModelConfig& cfg) {
    cfg.validate();
    Rng rng(derive_seed(cfg.seed, 0x6d6f64656cULL));  // "model"
    ModelParams p;
    p.vis = init_branch(rng, cfg, cfg.d_in_v, cfg.n_p_v);
    p.txt = init_branch(rng, cfg, cfg.d_in_t, cfg.n_p_t);
    p.cross.tv = init_channels(rng, cfg.d_s, cfg.tau);
    p.cross.vt = init_channels(rng, cfg.d_s, cfg.tau);
    p.heads.fuse = init_affine(rng, 2 * cfg.d_s, cfg.d_s);
    if (cfg.num_classes > 0) {
        p.heads.nc1 = init_affine(rng, cfg.d_s, cfg.d_s);
        p.heads.nc2 = init_affine(rng, cfg.d_s, cfg.num_classes);
    }
    return p;
}

// ---------------------------------------------------------------------------
// Flat enumeration in a fixed order: checkpoints, Adam state, tape leaves and
// the gradient checker all walk parameters through this.
// ---------------------------------------------------------------------------

struct ParamList {
    std::vector<std::string> names;
    std::vector<Matd*> mats;

    std::size_t size() const { return mats.size(); }
};

namespace detail {

template <class F>
void visit_affine(const std::string& prefix, Affine<Matd>& a, F&& f) {
    f(prefix + ".w", a.w);
    f(prefix + ".b", a.b);
}

template <class F>
void visit_channels(const std::string& prefix, Channels<Matd>& c, F&& f) {
    for (std::size_t t = 0; t < c.ch.size(); ++t)
        visit_affine(prefix + ".ch" + std::to_string(t), c.ch[t], f);
    f(prefix + ".lambda", c.lambda);
}

template <class F>
void visit_branch(const std::string& prefix, Branch<Matd>& b, F&& f) {
    visit_affine(prefix + ".proj.a1", b.proj.a1, f);
    visit_affine(prefix + ".proj.a2", b.proj.a2, f);
    f(prefix + ".pseudo", b.pseudo);
    visit_channels(prefix + ".gp", b.gp, f);
    visit_channels(prefix + ".pp", b.pp, f);
    visit_channels(prefix + ".pg", b.pg, f);
    visit_affine(prefix + ".psi", b.psi, f);
    visit_affine(prefix + ".site_local", b.site_local, f);
    visit_affine(prefix + ".site_g2p", b.site_g2p, f);
    visit_affine(prefix + ".site_p2g", b.site_p2g, f);
    visit_affine(prefix + ".site_dh", b.site_dh, f);
    visit_affine(prefix + ".site_msg", b.site_msg, f);
}

}  // namespace detail

template <class F>
void visit_params(ModelParams& p, F&& f) {
    detail::visit_branch("vis", p.vis, f);
    detail::visit_branch("txt", p.txt, f);
    detail::visit_channels("cross.tv", p.cross.tv, f);
    detail::visit_channels("cross.vt", p.cross.vt, f);
    detail::visit_affine("heads.fuse", p.heads.fuse, f);
    if (p.heads.nc1.w.rows > 0) {
        detail::visit_affine("heads.nc1", p.heads.nc1, f);
        detail::visit_affine("heads.nc2", p.heads.nc2, f);
    }
}

inline ParamList list_params(ModelParams& p) {
    ParamList list;
    visit_params(p, [&](const std::string& name, Matd& m) {
        list.names.push_back(name);
        list.mats.push_back(&m);
    });
    return list;
}

// Bind host parameters into an engine (tape leaves or casted eager values),
// preserving structure so the forward can address them by role. When `flat`
// is given it receives one handle per parameter in list_params order, which
// is how the training loop lines gradients up with the Adam state.
template <class E>
Model<typename E::V> bind_params(E& e, const ModelParams& host,
                                 std::vector<typename E::V>* flat = nullptr) {
    using V = typename E::V;
    auto reg = [&](const Matd& m) -> V {
        V v = e.param(m);
        if (flat) flat->push_back(v);
        return v;
    };
    auto aff = [&](const Affine<Matd>& a) -> Affine<V> {
        Affine<V> out;
        out.w = reg(a.w);
        out.b = reg(a.b);
        return out;
    };
    auto chans = [&](const Channels<Matd>& c) -> Channels<V> {
        Channels<V> out;
        out.ch.reserve(c.ch.size());
        for (const auto& a : c.ch) out.ch.push_back(aff(a));
        out.lambda = reg(c.lambda);
        return out;
    };
    auto branch = [&](const Branch<Matd>& b) -> Branch<V> {
        Branch<V> out;
        out.proj.a1 = aff(b.proj.a1);
        out.proj.a2 = aff(b.proj.a2);
        out.pseudo = reg(b.pseudo);
        out.gp = chans(b.gp);
        out.pp = chans(b.pp);
        out.pg = chans(b.pg);
        out.psi = aff(b.psi);
        out.site_local = aff(b.site_local);
        out.site_g2p = aff(b.site_g2p);
        out.site_p2g = aff(b.site_p2g);
        out.site_dh = aff(b.site_dh);
        out.site_msg = aff(b.site_msg);
        return out;
    };
    Model<V> out;
    out.vis = branch(host.vis);
    out.txt = branch(host.txt);
    out.cross.tv = chans(host.cross.tv);
    out.cross.vt = chans(host.cross.vt);
    out.heads.fuse = aff(host.heads.fuse);
    if (host.heads.nc1.w.rows > 0) {
        out.heads.nc1 = aff(host.heads.nc1);
        out.heads.nc2 = aff(host.heads.nc2);
    }
    return out;
}

}  // namespace dip
