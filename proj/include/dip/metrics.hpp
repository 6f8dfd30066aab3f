#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "dip/graph.hpp"
#include "dip/matrix.hpp"

namespace dip {

struct RankMetrics {
    double mrr = 0;
    double hits_at_1 = 0;
    double hits_at_10 = 0;
};

// pos[i] is the positive score of query i; negs[i] its negative scores (all
// queries must have the same count). Ties split half-up:
// rank = 1 + #(neg > pos) + #(neg == pos)/2.
inline RankMetrics rank_metrics(const std::vector<double>& pos,
                                const std::vector<std::vector<double>>& negs) {
    if (pos.empty() || pos.size() != negs.size()) throw ConfigError("rank_metrics: query mismatch");
    std::size_t k = negs[0].size();
    if (k == 0) throw ConfigError("rank_metrics: k = 0");
    RankMetrics r;
    for (std::size_t i = 0; i < pos.size(); ++i) {
        if (negs[i].size() != k) throw ConfigError("rank_metrics: ragged negative lists");
        double above = 0, ties = 0;
        for (double s : negs[i]) {
            if (s > pos[i]) above += 1;
            else if (s == pos[i]) ties += 1;
        }
        double rank = 1.0 + above + ties / 2.0;
        r.mrr += 1.0 / rank;
        r.hits_at_1 += rank <= 1.0 ? 1.0 : 0.0;
        r.hits_at_10 += rank <= 10.0 ? 1.0 : 0.0;
    }
    double n = static_cast<double>(pos.size());
    r.mrr /= n;
    r.hits_at_1 /= n;
    r.hits_at_10 /= n;
    return r;
}

struct ClassificationMetrics {
    double accuracy = 0;
    double macro_f1 = 0;
};

// accuracy over the mask; macro-F1 is the unweighted mean of per-class F1,
// counting 0 for classes absent from both predictions and labels.
inline ClassificationMetrics classification_metrics(const std::vector<std::uint32_t>& preds,
                                                    const std::vector<std::uint32_t>& labels,
                                                    const std::vector<int>& mask,
                                                    int num_classes) {
    if (mask.empty()) throw ConfigError("classification_metrics: empty mask");
    if (preds.size() != labels.size()) throw ConfigError("classification_metrics: length mismatch");
    std::vector<double> tp(num_classes, 0), fp(num_classes, 0), fn(num_classes, 0);
    double correct = 0;
    for (int i : mask) {
        std::uint32_t p = preds[i], y = labels[i];
        if (p >= static_cast<std::uint32_t>(num_classes) || y >= static_cast<std::uint32_t>(num_classes))
            throw ConfigError("classification_metrics: class out of range");
        if (p == y) {
            correct += 1;
            tp[p] += 1;
        } else {
            fp[p] += 1;
            fn[y] += 1;
        }
    }
    ClassificationMetrics m;
    m.accuracy = correct / static_cast<double>(mask.size());
    double f1_sum = 0;
    for (int c = 0; c < num_classes; ++c) {
        double denom = 2 * tp[c] + fp[c] + fn[c];
        f1_sum += denom > 0 ? 2 * tp[c] / denom : 0.0;
    }
    m.macro_f1 = f1_sum / num_classes;
    return m;
}

// E = (1/|E|) * sum over undirected edges of ||Z_i - Z_j||^2; 0 for edgeless
// graphs.
inline double dirichlet_energy(const Matd& z, const Csr& adj) {
    if (z.rows != adj.n) throw ConfigError("dirichlet_energy: rows != n");
    std::size_t edges = adj.undirected_edge_count();
    if (edges == 0) return 0.0;
    double total = 0;
    for (int u = 0; u < adj.n; ++u) {
        for (const std::uint32_t* p = adj.begin(u); p != adj.end(u); ++p) {
            if (*p <= static_cast<std::uint32_t>(u)) continue;
            const double* zu = z.row(u);
            const double* zw = z.row(static_cast<int>(*p));
            double s = 0;
            for (int j = 0; j < z.cols; ++j) {
                double dlt = zu[j] - zw[j];
                s += dlt * dlt;
            }
            total += s;
        }
    }
    return total / static_cast<double>(edges);
}

struct MetricsReport {
    std::optional<double> mrr, hits_at_1, hits_at_10;
    std::optional<double> accuracy, macro_f1;
    std::vector<std::pair<int, double>> dirichlet_by_depth;
    double wall_time_s = 0;
    std::uint64_t peak_bytes = 0;
};

}  // namespace dip
