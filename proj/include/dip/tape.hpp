#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dip/graph.hpp"
#include "dip/matrix.hpp"

namespace dip {

// Reverse-mode tape over dense double matrices. Records one node per
// primitive; ids grow monotonically so a reverse sweep is a valid
// topological order. A tape is confined to one thread.
class Tape {
  public:
    using Id = std::int32_t;

    enum class Op : std::uint8_t {
        Leaf,
        MatMul,      // a * b
        MatMulNT,    // a * b^T
        Add,
        Scale,       // a * cval
        ScaleVar,    // a * s, s is a 1x1 node
        AddBiasRow,  // a + broadcast bias row
        ConcatCols,
        LeakyRelu,
        Sigmoid,
        SoftmaxRows,
        Mul,         // elementwise
        GatherRows,
        ScatterAddRows,
        NeighborMean,
        RowSum,      // m x 1
        RowMean,     // 1 x d, mean over rows
        ReduceSum,   // 1 x 1
        CrossEntropyLogits,
        BceLogits,
    };

    Id leaf(Matd value, bool requires_grad) {
        check_finite(value, "leaf");
        return push(Op::Leaf, -1, -1, std::move(value), requires_grad);
    }

    Id matmul(Id a, Id b) { return push(Op::MatMul, a, b, dip::matmul(val(a), val(b))); }
    Id matmul_nt(Id a, Id b) { return push(Op::MatMulNT, a, b, dip::matmul_nt(val(a), val(b))); }
    Id add(Id a, Id b) { return push(Op::Add, a, b, dip::add(val(a), val(b))); }

    Id scale(Id a, double c) {
        Id id = push(Op::Scale, a, -1, dip::scale(val(a), c));
        nodes_[id].cval = c;
        return id;
    }

    Id scale_var(Id a, Id s) {
        const Matd& sv = val(s);
        if (sv.rows != 1 || sv.cols != 1) throw ConfigError("scale_var: scalar operand must be 1x1");
        return push(Op::ScaleVar, a, s, dip::scale(val(a), sv.d[0]));
    }

    Id add_bias_row(Id a, Id bias) { return push(Op::AddBiasRow, a, bias, dip::add_bias_row(val(a), val(bias))); }

    Id concat_cols(Id a, Id b) { return push(Op::ConcatCols, a, b, dip::concat_cols(val(a), val(b))); }

    Id leaky_relu(Id a, double slope) {
        Id id = push(Op::LeakyRelu, a, -1, dip::leaky_relu(val(a), slope));
        nodes_[id].cval = slope;
        return id;
    }

    Id sigmoid(Id a) { return push(Op::Sigmoid, a, -1, dip::sigmoid(val(a))); }
    Id softmax_rows(Id a) { return push(Op::SoftmaxRows, a, -1, dip::softmax_rows(val(a))); }
    Id mul(Id a, Id b) { return push(Op::Mul, a, b, dip::hadamard(val(a), val(b))); }

    Id gather_rows(Id a, std::vector<int> idx) {
        Id id = push(Op::GatherRows, a, -1, dip::gather_rows(val(a), idx));
        nodes_[id].indices = std::move(idx);
        return id;
    }

    Id scatter_add_rows(Id a, std::vector<int> idx, int out_rows) {
        Id id = push(Op::ScatterAddRows, a, -1, dip::scatter_add_rows(val(a), idx, out_rows));
        nodes_[id].indices = std::move(idx);
        return id;
    }

    // Per-node mean over graph neighbors; zero row for isolated nodes.
    Id neighbor_mean(Id a, const Csr& adj) {
        Id id = push(Op::NeighborMean, a, -1, dip::neighbor_mean(val(a), adj));
        nodes_[id].adj = &adj;
        return id;
    }

    Id row_sum(Id a) { return push(Op::RowSum, a, -1, dip::row_sum(val(a))); }

    Id row_mean(Id a) {
        const Matd& x = val(a);
        Matd out = dip::col_sum(x);
        for (auto& v : out.d) v /= x.rows;
        return push(Op::RowMean, a, -1, std::move(out));
    }

    Id reduce_sum(Id a) {
        const Matd& x = val(a);
        double s = 0;
        for (double v : x.d) s += v;
        Matd out(1, 1);
        out.d[0] = s;
        return push(Op::ReduceSum, a, -1, std::move(out));
    }

    // Mean cross-entropy over masked rows, computed from logits with the
    // log-sum-exp stabilization.
    Id cross_entropy_logits(Id logits, const std::vector<std::uint32_t>& labels,
                            std::vector<int> mask) {
        const Matd& x = val(logits);
        if (labels.size() != static_cast<size_t>(x.rows)) throw ConfigError("cross_entropy: labels length");
        if (mask.empty()) throw ConfigError("cross_entropy: empty mask");
        double loss = 0;
        for (int i : mask) {
            if (i < 0 || i >= x.rows) throw ConfigError("cross_entropy: mask index out of range");
            const double* r = x.row(i);
            double mx = r[0];
            for (int j = 1; j < x.cols; ++j) mx = std::max(mx, r[j]);
            double lse = 0;
            for (int j = 0; j < x.cols; ++j) lse += std::exp(r[j] - mx);
            lse = mx + std::log(lse);
            loss += lse - r[labels[i]];
        }
        Matd out(1, 1);
        out.d[0] = loss / static_cast<double>(mask.size());
        Id id = push(Op::CrossEntropyLogits, logits, -1, std::move(out));
        nodes_[id].indices = std::move(mask);
        nodes_[id].labels = labels;
        return id;
    }

    // Mean binary cross-entropy from raw scores (pre-sigmoid), stable form.
    Id bce_logits(Id scores, std::vector<double> targets) {
        const Matd& s = val(scores);
        if (s.cols != 1) throw ConfigError("bce_logits: scores must be m x 1");
        if (targets.size() != static_cast<size_t>(s.rows)) throw ConfigError("bce_logits: target length");
        if (targets.empty()) throw ConfigError("bce_logits: empty batch");
        double loss = 0;
        for (int i = 0; i < s.rows; ++i) {
            double z = s.d[i], y = targets[i];
            loss += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
        }
        Matd out(1, 1);
        out.d[0] = loss / s.rows;
        Id id = push(Op::BceLogits, scores, -1, std::move(out));
        nodes_[id].targets = std::move(targets);
        return id;
    }

    const Matd& val(Id id) const { return nodes_[id].value; }
    bool requires_grad(Id id) const { return nodes_[id].needs_grad; }
    std::size_t size() const { return nodes_.size(); }

    // Reverse sweep from a scalar loss. Afterwards grad(id) is valid for every
    // node that requires grad; leaves that did not participate get zeros.
    void backward(Id loss) {
        const Matd& lv = val(loss);
        if (lv.rows != 1 || lv.cols != 1) throw NumericError("backward: loss is not a 1x1 scalar");
        grads_.assign(nodes_.size(), Matd());
        seen_.assign(nodes_.size(), false);
        accum(loss, Matd(1, 1, {1.0}));
        for (Id id = static_cast<Id>(nodes_.size()) - 1; id >= 0; --id) {
            if (!seen_[id] || !nodes_[id].needs_grad) continue;
            step_back(id);
        }
        for (std::size_t i = 0; i < nodes_.size(); ++i)
            if (seen_[i] && grads_[i].rows > 0 && !all_finite(grads_[i]))
                throw NumericError("backward: non-finite gradient");
    }

    // Gradient of the last backward() w.r.t. node id; zeros if it did not
    // participate in the loss.
    Matd grad(Id id) const {
        if (id < static_cast<Id>(grads_.size()) && grads_[id].rows > 0) return grads_[id];
        const Matd& v = val(id);
        return Matd(v.rows, v.cols);
    }

  private:
    struct Node {
        Op op;
        Id a = -1, b = -1;
        Matd value;
        double cval = 0;
        bool needs_grad = false;
        std::vector<int> indices;
        std::vector<std::uint32_t> labels;
        std::vector<double> targets;
        const Csr* adj = nullptr;
    };

    std::vector<Node> nodes_;
    std::vector<Matd> grads_;
    std::vector<bool> seen_;

    Id push(Op op, Id a, Id b, Matd value, bool leaf_grad = false) {
        check_finite(value, "tape op output");
        Node n;
        n.op = op;
        n.a = a;
        n.b = b;
        n.value = std::move(value);
        n.needs_grad = op == Op::Leaf ? leaf_grad
                                      : ((a >= 0 && nodes_[a].needs_grad) || (b >= 0 && nodes_[b].needs_grad));
        nodes_.push_back(std::move(n));
        return static_cast<Id>(nodes_.size()) - 1;
    }

    void accum(Id id, Matd g) {
        if (!nodes_[id].needs_grad) return;
        if (!seen_[id]) {
            seen_[id] = true;
            grads_[id] = std::move(g);
        } else {
            add_inplace(grads_[id], g);
        }
    }

    void step_back(Id id) {
        const Node& n = nodes_[id];
        const Matd& g = grads_[id];
        switch (n.op) {
            case Op::Leaf:
                break;
            case Op::MatMul:
                accum(n.a, dip::matmul_nt(g, val(n.b)));
                accum(n.b, dip::matmul_tn(val(n.a), g));
                break;
            case Op::MatMulNT:
                accum(n.a, dip::matmul(g, val(n.b)));
                accum(n.b, dip::matmul_tn(g, val(n.a)));
                break;
            case Op::Add:
                accum(n.a, g);
                accum(n.b, g);
                break;
            case Op::Scale:
                accum(n.a, dip::scale(g, n.cval));
                break;
            case Op::ScaleVar: {
                accum(n.a, dip::scale(g, val(n.b).d[0]));
                double ds = 0;
                const Matd& av = val(n.a);
                for (size_t i = 0; i < g.d.size(); ++i) ds += g.d[i] * av.d[i];
                accum(n.b, Matd(1, 1, {ds}));
                break;
            }
            case Op::AddBiasRow:
                accum(n.a, g);
                accum(n.b, col_sum(g));
                break;
            case Op::ConcatCols: {
                const Matd& av = val(n.a);
                const Matd& bv = val(n.b);
                Matd ga(av.rows, av.cols), gb(bv.rows, bv.cols);
                for (int i = 0; i < g.rows; ++i) {
                    std::copy(g.row(i), g.row(i) + av.cols, ga.row(i));
                    std::copy(g.row(i) + av.cols, g.row(i) + g.cols, gb.row(i));
                }
                accum(n.a, std::move(ga));
                accum(n.b, std::move(gb));
                break;
            }
            case Op::LeakyRelu: {
                const Matd& x = val(n.a);
                Matd ga = g;
                for (size_t i = 0; i < ga.d.size(); ++i)
                    if (x.d[i] < 0) ga.d[i] *= n.cval;
                accum(n.a, std::move(ga));
                break;
            }
            case Op::Sigmoid: {
                const Matd& y = n.value;
                Matd ga = g;
                for (size_t i = 0; i < ga.d.size(); ++i) ga.d[i] *= y.d[i] * (1.0 - y.d[i]);
                accum(n.a, std::move(ga));
                break;
            }
            case Op::SoftmaxRows: {
                const Matd& y = n.value;
                Matd ga(y.rows, y.cols);
                for (int i = 0; i < y.rows; ++i) {
                    const double* yi = y.row(i);
                    const double* gi = g.row(i);
                    double dot = 0;
                    for (int j = 0; j < y.cols; ++j) dot += gi[j] * yi[j];
                    double* oi = ga.row(i);
                    for (int j = 0; j < y.cols; ++j) oi[j] = yi[j] * (gi[j] - dot);
                }
                accum(n.a, std::move(ga));
                break;
            }
            case Op::Mul:
                accum(n.a, hadamard(g, val(n.b)));
                accum(n.b, hadamard(g, val(n.a)));
                break;
            case Op::GatherRows:
                accum(n.a, dip::scatter_add_rows(g, n.indices, val(n.a).rows));
                break;
            case Op::ScatterAddRows:
                accum(n.a, dip::gather_rows(g, n.indices));
                break;
            case Op::NeighborMean: {
                const Csr& adj = *n.adj;
                Matd ga(g.rows, g.cols);
                for (int v = 0; v < adj.n; ++v) {
                    int deg = adj.degree(v);
                    if (deg == 0) continue;
                    double inv = 1.0 / deg;
                    const double* gv = g.row(v);
                    for (const std::uint32_t* p = adj.begin(v); p != adj.end(v); ++p) {
                        double* gj = ga.row(static_cast<int>(*p));
                        for (int j = 0; j < g.cols; ++j) gj[j] += gv[j] * inv;
                    }
                }
                accum(n.a, std::move(ga));
                break;
            }
            case Op::RowSum: {
                const Matd& x = val(n.a);
                Matd ga(x.rows, x.cols);
                for (int i = 0; i < x.rows; ++i) {
                    double gi = g.d[i];
                    double* r = ga.row(i);
                    for (int j = 0; j < x.cols; ++j) r[j] = gi;
                }
                accum(n.a, std::move(ga));
                break;
            }
            case Op::RowMean: {
                const Matd& x = val(n.a);
                Matd ga(x.rows, x.cols);
                double inv = 1.0 / x.rows;
                for (int i = 0; i < x.rows; ++i) {
                    double* r = ga.row(i);
                    for (int j = 0; j < x.cols; ++j) r[j] = g.d[j] * inv;
                }
                accum(n.a, std::move(ga));
                break;
            }
            case Op::ReduceSum: {
                const Matd& x = val(n.a);
                Matd ga(x.rows, x.cols);
                for (auto& v : ga.d) v = g.d[0];
                accum(n.a, std::move(ga));
                break;
            }
            case Op::CrossEntropyLogits: {
                const Matd& x = val(n.a);
                Matd ga(x.rows, x.cols);
                double inv = g.d[0] / static_cast<double>(n.indices.size());
                for (int i : n.indices) {
                    const double* r = x.row(i);
                    double mx = r[0];
                    for (int j = 1; j < x.cols; ++j) mx = std::max(mx, r[j]);
                    double z = 0;
                    for (int j = 0; j < x.cols; ++j) z += std::exp(r[j] - mx);
                    double* o = ga.row(i);
                    for (int j = 0; j < x.cols; ++j) o[j] = std::exp(r[j] - mx) / z * inv;
                    o[n.labels[i]] -= inv;
                }
                accum(n.a, std::move(ga));
                break;
            }
            case Op::BceLogits: {
                const Matd& s = val(n.a);
                Matd ga(s.rows, 1);
                double inv = g.d[0] / s.rows;
                for (int i = 0; i < s.rows; ++i) {
                    double z = s.d[i];
                    double sig = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
                    ga.d[i] = (sig - n.targets[i]) * inv;
                }
                accum(n.a, std::move(ga));
                break;
            }
        }
    }
};

}  // namespace dip
