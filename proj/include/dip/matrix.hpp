#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

namespace dip {

// Thrown on invalid configuration or malformed input (CLI exit code 2).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when a computation produces non-finite values or violates a
// numerical contract (CLI exit code 3).
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dense row-major matrix. double is the training precision, float the
// inference/benchmark precision.
template <typename Real>
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<Real> d;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), d(static_cast<size_t>(r) * c, Real(0)) {}
    Mat(int r, int c, std::vector<Real> data) : rows(r), cols(c), d(std::move(data)) {
        if (d.size() != static_cast<size_t>(r) * c)
            throw ConfigError("Mat: data length does not match shape");
    }

    size_t size() const { return d.size(); }
    Real* row(int i) { return d.data() + static_cast<size_t>(i) * cols; }
    const Real* row(int i) const { return d.data() + static_cast<size_t>(i) * cols; }
    Real& at(int i, int j) { return d[static_cast<size_t>(i) * cols + j]; }
    Real at(int i, int j) const { return d[static_cast<size_t>(i) * cols + j]; }

    bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }

    template <typename Other>
    Mat<Other> cast() const {
        Mat<Other> out(rows, cols);
        for (size_t i = 0; i < d.size(); ++i) out.d[i] = static_cast<Other>(d[i]);
        return out;
    }
};

using Matd = Mat<double>;
using Matf = Mat<float>;

inline std::string shape_str(int r, int c) {
    return std::to_string(r) + "x" + std::to_string(c);
}

template <typename Real>
void require_shape(const Mat<Real>& m, int r, int c, const char* what) {
    if (m.rows != r || m.cols != c)
        throw ConfigError(std::string(what) + ": expected " + shape_str(r, c) + ", got " +
                          shape_str(m.rows, m.cols));
}

// ---------------------------------------------------------------------------
// Operation counters. Every matmul kernel reports its multiply-add count and
// (optionally) its shape so tests can assert the complexity bounds hold.
// ---------------------------------------------------------------------------

enum class CountScope { General, ProximityProjection, ProximityPairing };

struct OpCounters {
    std::uint64_t madds = 0;       // all matmul multiply-adds
    std::uint64_t prox_proj = 0;   // channel projections sigma_t(.) inside proximity
    std::uint64_t prox_pair = 0;   // blocked pairing products sigma_t(A) sigma_t(B)^T
    CountScope scope = CountScope::General;
    bool record_shapes = false;
    std::vector<std::array<std::int64_t, 3>> shapes;  // (m, k, n) per product

    void reset() {
        madds = 0;
        prox_proj = 0;
        prox_pair = 0;
        shapes.clear();
    }
    void note(std::int64_t m, std::int64_t k, std::int64_t n) {
        std::uint64_t w = static_cast<std::uint64_t>(m) * k * n;
        madds += w;
        if (scope == CountScope::ProximityProjection) prox_proj += w;
        else if (scope == CountScope::ProximityPairing) prox_pair += w;
        if (record_shapes) shapes.push_back({m, k, n});
    }
};

inline OpCounters& op_counters() {
    thread_local OpCounters c;
    return c;
}

// RAII marker attributing matmul work to a proximity cost bucket.
struct CounterScope {
    CountScope prev;
    explicit CounterScope(CountScope s) : prev(op_counters().scope) { op_counters().scope = s; }
    ~CounterScope() { op_counters().scope = prev; }
};

// ---------------------------------------------------------------------------
// Kernels
// ---------------------------------------------------------------------------

// C = A * B, (m x k) * (k x n)
template <typename Real>
Mat<Real> matmul(const Mat<Real>& a, const Mat<Real>& b) {
    if (a.cols != b.rows)
        throw ConfigError("matmul: inner dims " + shape_str(a.rows, a.cols) + " * " +
                          shape_str(b.rows, b.cols));
    Mat<Real> c(a.rows, b.cols);
    const int m = a.rows, k = a.cols, n = b.cols;
    for (int i = 0; i < m; ++i) {
        const Real* ai = a.row(i);
        Real* ci = c.row(i);
        for (int p = 0; p < k; ++p) {
            const Real av = ai[p];
            const Real* bp = b.row(p);
            for (int j = 0; j < n; ++j) ci[j] += av * bp[j];
        }
    }
    op_counters().note(m, k, n);
    return c;
}

// C = A * B^T, (m x k) * (n x k)^T
template <typename Real>
Mat<Real> matmul_nt(const Mat<Real>& a, const Mat<Real>& b) {
    if (a.cols != b.cols)
        throw ConfigError("matmul_nt: inner dims " + shape_str(a.rows, a.cols) + " * " +
                          shape_str(b.rows, b.cols) + "^T");
    Mat<Real> c(a.rows, b.rows);
    const int m = a.rows, k = a.cols, n = b.rows;
    for (int i = 0; i < m; ++i) {
        const Real* ai = a.row(i);
        Real* ci = c.row(i);
        for (int j = 0; j < n; ++j) {
            const Real* bj = b.row(j);
            Real s = 0;
            for (int p = 0; p < k; ++p) s += ai[p] * bj[p];
            ci[j] = s;
        }
    }
    op_counters().note(m, k, n);
    return c;
}

// C = A^T * B, (k x m)^T * (k x n)
template <typename Real>
Mat<Real> matmul_tn(const Mat<Real>& a, const Mat<Real>& b) {
    if (a.rows != b.rows)
        throw ConfigError("matmul_tn: inner dims " + shape_str(a.rows, a.cols) + "^T * " +
                          shape_str(b.rows, b.cols));
    Mat<Real> c(a.cols, b.cols);
    const int m = a.cols, k = a.rows, n = b.cols;
    for (int p = 0; p < k; ++p) {
        const Real* ap = a.row(p);
        const Real* bp = b.row(p);
        for (int i = 0; i < m; ++i) {
            const Real av = ap[i];
            Real* ci = c.row(i);
            for (int j = 0; j < n; ++j) ci[j] += av * bp[j];
        }
    }
    op_counters().note(m, k, n);
    return c;
}

template <typename Real>
Mat<Real> transpose(const Mat<Real>& a) {
    Mat<Real> t(a.cols, a.rows);
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j) t.at(j, i) = a.at(i, j);
    return t;
}

template <typename Real>
Mat<Real> add(const Mat<Real>& a, const Mat<Real>& b) {
    if (!a.same_shape(b)) throw ConfigError("add: shape mismatch");
    Mat<Real> c = a;
    for (size_t i = 0; i < c.d.size(); ++i) c.d[i] += b.d[i];
    return c;
}

template <typename Real>
void add_inplace(Mat<Real>& a, const Mat<Real>& b, Real alpha = Real(1)) {
    if (!a.same_shape(b)) throw ConfigError("add_inplace: shape mismatch");
    for (size_t i = 0; i < a.d.size(); ++i) a.d[i] += alpha * b.d[i];
}

template <typename Real>
Mat<Real> hadamard(const Mat<Real>& a, const Mat<Real>& b) {
    if (!a.same_shape(b)) throw ConfigError("hadamard: shape mismatch");
    Mat<Real> c = a;
    for (size_t i = 0; i < c.d.size(); ++i) c.d[i] *= b.d[i];
    return c;
}

template <typename Real>
Mat<Real> scale(const Mat<Real>& a, Real s) {
    Mat<Real> c = a;
    for (auto& v : c.d) v *= s;
    return c;
}

// M + broadcast row bias (1 x cols)
template <typename Real>
Mat<Real> add_bias_row(const Mat<Real>& a, const Mat<Real>& bias) {
    if (bias.rows != 1 || bias.cols != a.cols) throw ConfigError("add_bias_row: bias shape");
    Mat<Real> c = a;
    for (int i = 0; i < c.rows; ++i) {
        Real* ci = c.row(i);
        for (int j = 0; j < c.cols; ++j) ci[j] += bias.d[j];
    }
    return c;
}

template <typename Real>
Mat<Real> col_sum(const Mat<Real>& a) {
    Mat<Real> s(1, a.cols);
    for (int i = 0; i < a.rows; ++i) {
        const Real* ai = a.row(i);
        for (int j = 0; j < a.cols; ++j) s.d[j] += ai[j];
    }
    return s;
}

template <typename Real>
Mat<Real> row_sum(const Mat<Real>& a) {
    Mat<Real> s(a.rows, 1);
    for (int i = 0; i < a.rows; ++i) {
        const Real* ai = a.row(i);
        Real acc = 0;
        for (int j = 0; j < a.cols; ++j) acc += ai[j];
        s.d[i] = acc;
    }
    return s;
}

template <typename Real>
Mat<Real> leaky_relu(const Mat<Real>& a, Real slope) {
    Mat<Real> c = a;
    for (auto& v : c.d) v = v >= Real(0) ? v : slope * v;
    return c;
}

template <typename Real>
Mat<Real> sigmoid(const Mat<Real>& a) {
    Mat<Real> c = a;
    for (auto& v : c.d) {
        if (v >= Real(0)) {
            v = Real(1) / (Real(1) + std::exp(-v));
        } else {
            Real e = std::exp(v);
            v = e / (Real(1) + e);
        }
    }
    return c;
}

// Row-stabilized softmax: subtracts the row max before exponentiation.
template <typename Real>
Mat<Real> softmax_rows(const Mat<Real>& a) {
    Mat<Real> c = a;
    for (int i = 0; i < c.rows; ++i) {
        Real* ci = c.row(i);
        Real mx = ci[0];
        for (int j = 1; j < c.cols; ++j) mx = std::max(mx, ci[j]);
        Real z = 0;
        for (int j = 0; j < c.cols; ++j) {
            ci[j] = std::exp(ci[j] - mx);
            z += ci[j];
        }
        for (int j = 0; j < c.cols; ++j) ci[j] /= z;
    }
    return c;
}

template <typename Real>
Mat<Real> concat_cols(const Mat<Real>& a, const Mat<Real>& b) {
    if (a.rows != b.rows) throw ConfigError("concat_cols: row mismatch");
    Mat<Real> c(a.rows, a.cols + b.cols);
    for (int i = 0; i < a.rows; ++i) {
        std::copy(a.row(i), a.row(i) + a.cols, c.row(i));
        std::copy(b.row(i), b.row(i) + b.cols, c.row(i) + a.cols);
    }
    return c;
}

template <typename Real>
Mat<Real> gather_rows(const Mat<Real>& a, const std::vector<int>& idx) {
    Mat<Real> c(static_cast<int>(idx.size()), a.cols);
    for (size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] < 0 || idx[i] >= a.rows) throw ConfigError("gather_rows: index out of range");
        std::copy(a.row(idx[i]), a.row(idx[i]) + a.cols, c.row(static_cast<int>(i)));
    }
    return c;
}

template <typename Real>
Mat<Real> scatter_add_rows(const Mat<Real>& a, const std::vector<int>& idx, int out_rows) {
    if (static_cast<int>(idx.size()) != a.rows) throw ConfigError("scatter_add_rows: index count");
    Mat<Real> c(out_rows, a.cols);
    for (size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] < 0 || idx[i] >= out_rows) throw ConfigError("scatter_add_rows: index out of range");
        const Real* src = a.row(static_cast<int>(i));
        Real* dst = c.row(idx[i]);
        for (int j = 0; j < a.cols; ++j) dst[j] += src[j];
    }
    return c;
}

template <typename Real>
bool all_finite(const Mat<Real>& a) {
    for (Real v : a.d)
        if (!std::isfinite(v)) return false;
    return true;
}

template <typename Real>
void check_finite(const Mat<Real>& a, const char* what) {
    if (!all_finite(a)) throw NumericError(std::string("non-finite values in ") + what);
}

template <typename Real>
Real max_abs_diff(const Mat<Real>& a, const Mat<Real>& b) {
    if (!a.same_shape(b)) throw ConfigError("max_abs_diff: shape mismatch");
    Real m = 0;
    for (size_t i = 0; i < a.d.size(); ++i) m = std::max(m, std::abs(a.d[i] - b.d[i]));
    return m;
}

template <typename Real>
bool bit_equal(const Mat<Real>& a, const Mat<Real>& b) {
    if (!a.same_shape(b)) return false;
    return std::memcmp(a.d.data(), b.d.data(), a.d.size() * sizeof(Real)) == 0;
}

}  // namespace dip
