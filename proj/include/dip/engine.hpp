#pragma once

#include <string>
#include <vector>

#include "dip/graph.hpp"
#include "dip/matrix.hpp"
#include "dip/tape.hpp"

namespace dip {

// The model forward is written once against this implicit interface and
// instantiated with either engine:
//   TapeEngine        — records onto a Tape for reverse-mode gradients
//   EagerEngine<Real> — plain evaluation; float is the benchmark mode
struct TapeEngine {
    Tape& tape;
    using V = Tape::Id;

    explicit TapeEngine(Tape& t) : tape(t) {}

    V param(const Matd& m) { return tape.leaf(m, true); }
    V constant(const Matd& m) { return tape.leaf(m, false); }

    V matmul(V a, V b) { return tape.matmul(a, b); }
    V matmul_nt(V a, V b) { return tape.matmul_nt(a, b); }
    V add(V a, V b) { return tape.add(a, b); }
    V scale(V a, double c) { return tape.scale(a, c); }
    V scale_var(V a, V s) { return tape.scale_var(a, s); }
    V add_bias_row(V a, V bias) { return tape.add_bias_row(a, bias); }
    V concat_cols(V a, V b) { return tape.concat_cols(a, b); }
    V leaky_relu(V a, double slope) { return tape.leaky_relu(a, slope); }
    V sigmoid(V a) { return tape.sigmoid(a); }
    V softmax_rows(V a) { return tape.softmax_rows(a); }
    V mul(V a, V b) { return tape.mul(a, b); }
    V gather_rows(V a, const std::vector<int>& idx) { return tape.gather_rows(a, idx); }
    V scatter_add_rows(V a, const std::vector<int>& idx, int rows) {
        return tape.scatter_add_rows(a, idx, rows);
    }
    V neighbor_mean(V a, const Csr& adj) { return tape.neighbor_mean(a, adj); }
    V row_sum(V a) { return tape.row_sum(a); }
    V row_mean(V a) { return tape.row_mean(a); }
    V reduce_sum(V a) { return tape.reduce_sum(a); }
    V cross_entropy_logits(V logits, const std::vector<std::uint32_t>& labels, std::vector<int> mask) {
        return tape.cross_entropy_logits(logits, labels, std::move(mask));
    }
    V bce_logits(V scores, std::vector<double> targets) {
        return tape.bce_logits(scores, std::move(targets));
    }

    Matd value_of(V v) const { return tape.val(v); }
    int rows(V v) const { return tape.val(v).rows; }
    int cols(V v) const { return tape.val(v).cols; }

    // tape ops validate finiteness as they record
    void check_state(V, const std::string&) const {}
};

template <typename Real>
struct EagerEngine {
    using V = Mat<Real>;

    V param(const Matd& m) { return m.template cast<Real>(); }
    V constant(const Matd& m) { return m.template cast<Real>(); }

    V matmul(const V& a, const V& b) { return dip::matmul(a, b); }
    V matmul_nt(const V& a, const V& b) { return dip::matmul_nt(a, b); }
    V add(const V& a, const V& b) { return dip::add(a, b); }
    V scale(const V& a, double c) { return dip::scale(a, static_cast<Real>(c)); }
    V scale_var(const V& a, const V& s) {
        if (s.rows != 1 || s.cols != 1) throw ConfigError("scale_var: scalar operand must be 1x1");
        return dip::scale(a, s.d[0]);
    }
    V add_bias_row(const V& a, const V& bias) { return dip::add_bias_row(a, bias); }
    V concat_cols(const V& a, const V& b) { return dip::concat_cols(a, b); }
    V leaky_relu(const V& a, double slope) { return dip::leaky_relu(a, static_cast<Real>(slope)); }
    V sigmoid(const V& a) { return dip::sigmoid(a); }
    V softmax_rows(const V& a) { return dip::softmax_rows(a); }
    V mul(const V& a, const V& b) { return dip::hadamard(a, b); }
    V gather_rows(const V& a, const std::vector<int>& idx) { return dip::gather_rows(a, idx); }
    V scatter_add_rows(const V& a, const std::vector<int>& idx, int rows) {
        return dip::scatter_add_rows(a, idx, rows);
    }
    V neighbor_mean(const V& a, const Csr& adj) { return dip::neighbor_mean(a, adj); }
    V row_sum(const V& a) { return dip::row_sum(a); }
    V row_mean(const V& a) {
        V out = dip::col_sum(a);
        for (auto& v : out.d) v /= static_cast<Real>(a.rows);
        return out;
    }
    V reduce_sum(const V& a) {
        Real s = 0;
        for (Real v : a.d) s += v;
        V out(1, 1);
        out.d[0] = s;
        return out;
    }
    V cross_entropy_logits(const V& logits, const std::vector<std::uint32_t>& labels,
                           std::vector<int> mask) {
        if (mask.empty()) throw ConfigError("cross_entropy: empty mask");
        double loss = 0;
        for (int i : mask) {
            const Real* r = logits.row(i);
            Real mx = r[0];
            for (int j = 1; j < logits.cols; ++j) mx = std::max(mx, r[j]);
            double lse = 0;
            for (int j = 0; j < logits.cols; ++j) lse += std::exp(static_cast<double>(r[j] - mx));
            loss += static_cast<double>(mx) + std::log(lse) - static_cast<double>(r[labels[i]]);
        }
        V out(1, 1);
        out.d[0] = static_cast<Real>(loss / mask.size());
        return out;
    }
    V bce_logits(const V& scores, std::vector<double> targets) {
        if (targets.empty()) throw ConfigError("bce_logits: empty batch");
        double loss = 0;
        for (int i = 0; i < scores.rows; ++i) {
            double z = scores.d[i], y = targets[i];
            loss += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
        }
        V out(1, 1);
        out.d[0] = static_cast<Real>(loss / scores.rows);
        return out;
    }

    Matd value_of(const V& v) const { return v.template cast<double>(); }
    int rows(const V& v) const { return v.rows; }
    int cols(const V& v) const { return v.cols; }

    void check_state(const V& v, const std::string& what) const {
        if (!all_finite(v)) throw NumericError("non-finite state in " + what);
    }
};

using EagerD = EagerEngine<double>;
using EagerF = EagerEngine<float>;

}  // namespace dip
