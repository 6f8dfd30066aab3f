#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "dip/matrix.hpp"

namespace dip {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    std::vector<Matd> m, v;
    std::int64_t t = 0;

    static AdamState like(const std::vector<Matd*>& params) {
        AdamState s;
        s.m.reserve(params.size());
        s.v.reserve(params.size());
        for (const Matd* p : params) {
            s.m.emplace_back(p->rows, p->cols);
            s.v.emplace_back(p->rows, p->cols);
        }
        return s;
    }
};

// Standard bias-corrected Adam update, in place.
inline void adam_step(const std::vector<Matd*>& params, const std::vector<Matd>& grads,
                      AdamState& state, const AdamConfig& cfg) {
    if (params.size() != grads.size() || params.size() != state.m.size())
        throw ConfigError("adam_step: parameter/gradient/state count mismatch");
    state.t += 1;
    double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
    for (std::size_t k = 0; k < params.size(); ++k) {
        Matd& p = *params[k];
        const Matd& g = grads[k];
        if (!p.same_shape(g) || !p.same_shape(state.m[k]))
            throw ConfigError("adam_step: shape mismatch at parameter " + std::to_string(k));
        Matd& m = state.m[k];
        Matd& v = state.v[k];
        for (std::size_t i = 0; i < p.d.size(); ++i) {
            m.d[i] = cfg.beta1 * m.d[i] + (1.0 - cfg.beta1) * g.d[i];
            v.d[i] = cfg.beta2 * v.d[i] + (1.0 - cfg.beta2) * g.d[i] * g.d[i];
            double mhat = m.d[i] / bc1;
            double vhat = v.d[i] / bc2;
            p.d[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
        }
    }
}

}  // namespace dip
