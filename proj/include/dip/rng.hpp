#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "dip/matrix.hpp"

namespace dip {

// splitmix64: used to derive independent stream seeds from (seed, tag) pairs
// so that e.g. feature noise and edge sampling never share a stream.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
    return splitmix64(seed ^ splitmix64(tag));
}

// Deterministic RNG with hand-rolled distributions. The standard library's
// distribution objects are implementation-defined; these are pinned so the
// same seed gives the same bytes on any conforming platform.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n)
    std::uint64_t below(std::uint64_t n) {
        // rejection sampling to avoid modulo bias
        std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return x % n;
    }

    int below_int(int n) { return static_cast<int>(below(static_cast<std::uint64_t>(n))); }

    // standard normal via Box-Muller, caching the second deviate
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1, u2;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    // geometric gap for skip-sampling Bernoulli(p) sequences: returns the
    // number of failures before the next success.
    std::int64_t skip_geometric(double p) {
        if (p >= 1.0) return 0;
        double u;
        do {
            u = uniform();
        } while (u <= 0.0);
        return static_cast<std::int64_t>(std::floor(std::log(u) / std::log1p(-p)));
    }

    Matd normal_matrix(int rows, int cols, double stddev) {
        Matd m(rows, cols);
        for (auto& v : m.d) v = stddev * normal();
        return m;
    }

    Matd uniform_matrix(int rows, int cols, double lo, double hi) {
        Matd m(rows, cols);
        for (auto& v : m.d) v = uniform(lo, hi);
        return m;
    }

  private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace dip
