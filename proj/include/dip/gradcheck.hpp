#pragma once

#include <functional>
#include <vector>

#include "dip/matrix.hpp"
#include "dip/params.hpp"
#include "dip/rng.hpp"

namespace dip {

// loss_fn: evaluates the (deterministic) scalar loss at the current params.
// grad_fn: evaluates loss and fills grads aligned with `params`.
using LossFn = std::function<double()>;
using GradFn = std::function<double(std::vector<Matd>& grads)>;

// Central-difference check of tape gradients at `probes` randomly chosen
// parameter coordinates. Returns max(|a-b| / max(|a|,|b|,1e-8)).
inline double finite_diff_check(const LossFn& loss_fn, const GradFn& grad_fn,
                                const ParamList& params, int probes, double h,
                                std::uint64_t seed) {
    double base0 = loss_fn();
    double base1 = loss_fn();
    if (std::memcmp(&base0, &base1, sizeof(double)) != 0)
        throw NumericError("finite_diff_check: closure is non-deterministic");

    std::vector<Matd> grads;
    grad_fn(grads);
    if (grads.size() != params.size())
        throw ConfigError("finite_diff_check: gradient count mismatch");

    // probe only coordinates of non-empty parameters
    std::vector<std::size_t> eligible;
    for (std::size_t k = 0; k < params.size(); ++k)
        if (!params.mats[k]->d.empty()) eligible.push_back(k);
    if (eligible.empty()) throw ConfigError("finite_diff_check: no parameters");

    Rng rng(seed);
    double worst = 0.0;
    for (int p = 0; p < probes; ++p) {
        std::size_t k = eligible[rng.below(eligible.size())];
        Matd& mat = *params.mats[k];
        std::size_t i = rng.below(mat.d.size());
        double saved = mat.d[i];
        mat.d[i] = saved + h;
        double lp = loss_fn();
        mat.d[i] = saved - h;
        double lm = loss_fn();
        mat.d[i] = saved;
        double fd = (lp - lm) / (2.0 * h);
        double an = grads[k].d[i];
        double rel = std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-8});
        worst = std::max(worst, rel);
    }
    return worst;
}

}  // namespace dip
