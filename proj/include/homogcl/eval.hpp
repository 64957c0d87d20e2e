#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "homogcl/autodiff.hpp"
#include "homogcl/cluster.hpp"
#include "homogcl/graph.hpp"
#include "homogcl/optim.hpp"

namespace homogcl {

struct Stats {
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation
    std::vector<double> runs;

    static Stats of(std::vector<double> values) {
        if (values.empty()) fail<ConfigError>("statistics over zero runs");
        Stats s;
        s.runs = std::move(values);
        const double n = static_cast<double>(s.runs.size());
        for (double v : s.runs) s.mean += v;
        s.mean /= n;
        if (s.runs.size() > 1) {
            double ss = 0.0;
            for (double v : s.runs) ss += (v - s.mean) * (v - s.mean);
            s.stddev = std::sqrt(ss / (n - 1.0));
        }
        return s;
    }
};

struct ProbeOptions {
    double lr = 1e-2;
    std::size_t epochs = 300;
};

namespace detail {

inline std::vector<int> compact_labels(const std::vector<int>& y, std::size_t& num_classes) {
    std::vector<int> sorted = y;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    num_classes = sorted.size();
    std::vector<int> out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i)
        out[i] = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), y[i]) -
                                  sorted.begin());
    return out;
}

inline std::size_t argmax_row(const DenseMatrix& m, std::size_t i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < m.cols(); ++j)
        if (m(i, j) > m(i, best)) best = j;
    return best;
}

inline double accuracy(const DenseMatrix& logits, const std::vector<int>& y,
                       const std::vector<std::size_t>& idx) {
    if (idx.empty()) return 0.0;
    std::size_t hits = 0;
    for (std::size_t r = 0; r < idx.size(); ++r)
        if (static_cast<int>(argmax_row(logits, r)) == y[idx[r]]) hits++;
    return static_cast<double>(hits) / static_cast<double>(idx.size());
}

}  // namespace detail

struct ProbeRunResult {
    double best_val_accuracy = 0.0;
    double test_accuracy = 0.0;
};

// One probe fit from a given initialization: softmax cross-entropy with an
// L2 penalty on the weights, Adam, model selection by validation accuracy.
inline ProbeRunResult linear_probe_single(const DenseMatrix& H, const std::vector<int>& labels,
                                          const Split& split, double l2_coef,
                                          const ProbeOptions& opts, DenseMatrix W,
                                          DenseMatrix b) {
    std::size_t num_classes = 0;
    std::vector<int> y = detail::compact_labels(labels, num_classes);
    {
        std::vector<char> seen(num_classes, 0);
        for (std::size_t i : split.train_idx) seen[y[i]] = 1;
        if (std::count(seen.begin(), seen.end(), 1) < 2)
            fail<ConfigError>("degenerate probe: training split covers fewer than 2 classes");
        if (split.test_idx.empty()) fail<ConfigError>("degenerate probe: empty test split");
    }
    const DenseMatrix H_train = gather_rows(H, split.train_idx);
    const DenseMatrix H_val = gather_rows(H, split.val_idx);
    const DenseMatrix H_test = gather_rows(H, split.test_idx);
    DenseMatrix onehot(split.train_idx.size(), num_classes);
    for (std::size_t r = 0; r < split.train_idx.size(); ++r)
        onehot(r, y[split.train_idx[r]]) = 1.0;

    std::vector<DenseMatrix> params = {std::move(W), std::move(b)};
    AdamState state;
    AdamConfig adam{.lr = opts.lr};
    ProbeRunResult result;
    bool have_best = false;
    for (std::size_t epoch = 0; epoch < opts.epochs; ++epoch) {
        ad::Tape t;
        ad::Var w = t.param(params[0]);
        ad::Var bias = t.param(params[1]);
        ad::Var logits = t.add_rowvec(t.matmul(t.constant(H_train), w), bias);
        ad::Var ce = t.scalar_mul(t.sum_all(t.mul(t.constant(onehot), t.log_softmax_rows(logits))),
                                  -1.0 / static_cast<double>(split.train_idx.size()));
        ad::Var obj = t.add(ce, t.scalar_mul(t.sum_all(t.mul(w, w)), l2_coef));
        t.backward(obj);
        adam_step(params, {t.grad(w), t.grad(bias)}, state, adam);

        auto logits_of = [&](const DenseMatrix& rows) {
            DenseMatrix lg = matmul(rows, params[0]);
            for (std::size_t i = 0; i < lg.rows(); ++i)
                for (std::size_t j = 0; j < lg.cols(); ++j) lg(i, j) += params[1](0, j);
            return lg;
        };
        const double val_acc = detail::accuracy(logits_of(H_val), y, split.val_idx);
        if (!have_best || val_acc > result.best_val_accuracy) {
            have_best = true;
            result.best_val_accuracy = val_acc;
            result.test_accuracy = detail::accuracy(logits_of(H_test), y, split.test_idx);
        }
    }
    return result;
}

// L2-regularized one-layer linear classifier on frozen embeddings,
// repeated with fresh initializations.
inline Stats linear_probe(const DenseMatrix& H, const std::vector<int>& labels,
                          const Split& split, double l2_coef, std::size_t runs,
                          RngStream& stream, const ProbeOptions& opts = {}) {
    if (labels.size() != H.rows()) fail<DataError>("linear_probe: label count mismatch");
    std::size_t num_classes = 0;
    detail::compact_labels(labels, num_classes);
    std::vector<double> accs;
    for (std::size_t r = 0; r < runs; ++r) {
        DenseMatrix W(H.cols(), num_classes);
        for (double& x : W.data()) x = 0.01 * stream.normal();
        DenseMatrix b(1, num_classes);
        accs.push_back(
            linear_probe_single(H, labels, split, l2_coef, opts, std::move(W), std::move(b))
                .test_accuracy);
    }
    return Stats::of(std::move(accs));
}

// ---- clustering agreement metrics ----

namespace detail {

inline std::vector<std::vector<std::size_t>> contingency(const std::vector<int>& pred,
                                                         const std::vector<int>& truth,
                                                         std::size_t& kp, std::size_t& kt) {
    if (pred.size() != truth.size()) fail<DataError>("label vectors differ in length");
    if (pred.empty()) fail<DataError>("empty label vectors");
    std::vector<int> p = compact_labels(pred, kp);
    std::vector<int> t = compact_labels(truth, kt);
    std::vector<std::vector<std::size_t>> table(kp, std::vector<std::size_t>(kt, 0));
    for (std::size_t i = 0; i < p.size(); ++i) table[p[i]][t[i]]++;
    return table;
}

}  // namespace detail

// NMI = 2 I(pred; truth) / (H(pred) + H(truth)), natural logarithms.
// Two single-cluster partitions agree perfectly (1); if exactly one side is
// single-cluster the mutual information, hence the score, is 0.
inline double nmi(const std::vector<int>& pred, const std::vector<int>& truth) {
    std::size_t kp = 0, kt = 0;
    auto table = detail::contingency(pred, truth, kp, kt);
    if (kp == 1 && kt == 1) return 1.0;
    const double n = static_cast<double>(pred.size());
    std::vector<double> a(kp, 0.0), b(kt, 0.0);
    for (std::size_t i = 0; i < kp; ++i)
        for (std::size_t j = 0; j < kt; ++j) {
            a[i] += static_cast<double>(table[i][j]);
            b[j] += static_cast<double>(table[i][j]);
        }
    double mi = 0.0;
    for (std::size_t i = 0; i < kp; ++i)
        for (std::size_t j = 0; j < kt; ++j) {
            const auto nij = static_cast<double>(table[i][j]);
            if (nij == 0.0) continue;
            mi += (nij / n) * std::log(n * nij / (a[i] * b[j]));
        }
    double hp = 0.0, ht = 0.0;
    for (double ai : a) hp -= (ai / n) * std::log(ai / n);
    for (double bj : b) ht -= (bj / n) * std::log(bj / n);
    if (hp + ht == 0.0) return 0.0;
    const double v = 2.0 * mi / (hp + ht);
    return std::clamp(v, 0.0, 1.0);
}

// Adjusted Rand index by pair counting: (RI - E[RI]) / (max RI - E[RI]).
inline double ari(const std::vector<int>& pred, const std::vector<int>& truth) {
    std::size_t kp = 0, kt = 0;
    auto table = detail::contingency(pred, truth, kp, kt);
    const double n = static_cast<double>(pred.size());
    auto choose2 = [](double x) { return x * (x - 1.0) / 2.0; };
    std::vector<double> a(kp, 0.0), b(kt, 0.0);
    double index = 0.0;
    for (std::size_t i = 0; i < kp; ++i)
        for (std::size_t j = 0; j < kt; ++j) {
            const auto nij = static_cast<double>(table[i][j]);
            a[i] += nij;
            b[j] += nij;
            index += choose2(nij);
        }
    double sum_a = 0.0, sum_b = 0.0;
    for (double ai : a) sum_a += choose2(ai);
    for (double bj : b) sum_b += choose2(bj);
    const double expected = sum_a * sum_b / choose2(n);
    const double max_index = 0.5 * (sum_a + sum_b);
    if (max_index == expected) return 1.0;
    return (index - expected) / (max_index - expected);
}

struct ClusteringStats {
    Stats nmi;
    Stats ari;
};

// k-means on the embeddings, repeated with fresh seedings, scored against
// the labels.
inline ClusteringStats clustering_eval(const DenseMatrix& H, const std::vector<int>& labels,
                                       std::size_t k, std::size_t runs, RngStream& stream,
                                       std::size_t max_iters = 50) {
    if (labels.size() != H.rows()) fail<DataError>("clustering_eval: label count mismatch");
    std::vector<double> nmis, aris;
    for (std::size_t r = 0; r < runs; ++r) {
        KmeansResult km = kmeans(H, k, max_iters, stream);
        std::vector<int> pred(km.labels.size());
        for (std::size_t i = 0; i < pred.size(); ++i) pred[i] = static_cast<int>(km.labels[i]);
        nmis.push_back(nmi(pred, labels));
        aris.push_back(ari(pred, labels));
    }
    return {Stats::of(std::move(nmis)), Stats::of(std::move(aris))};
}

// Mean cosine of positive pairs (each node with itself across identical
// views) and of all distinct pairs; the distinct-pair mean comes from the
// normalized Gram identity so it costs O(N d).
struct SimilaritySummary {
    double positive_mean = 0.0;
    double negative_mean = 0.0;
};

inline SimilaritySummary similarity_summary(const DenseMatrix& H) {
    const DenseMatrix Hn = row_l2_normalize(H);
    const std::size_t n = Hn.rows();
    double diag = 0.0;
    std::vector<double> colsum(Hn.cols(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        diag += dot(Hn.row(i), Hn.row(i));
        for (std::size_t j = 0; j < Hn.cols(); ++j) colsum[j] += Hn(i, j);
    }
    double total = 0.0;
    for (double c : colsum) total += c * c;
    SimilaritySummary s;
    s.positive_mean = diag / static_cast<double>(n);
    s.negative_mean =
        n > 1 ? (total - diag) / (static_cast<double>(n) * (static_cast<double>(n) - 1.0))
              : 0.0;
    return s;
}

// ---- saliency case study ----

struct SaliencyBinCurve {
    std::size_t bin_size = 0;
    std::vector<double> homophily;      // per bin, most-salient bin first
    std::vector<std::size_t> bin_start;  // rank of the first edge in each bin
};

// Edges sorted by descending saliency, cut into consecutive bins, each
// scored by its intra-class fraction. Ties break on edge index so the
// curve is deterministic.
inline SaliencyBinCurve saliency_homophily_bins(const EdgeSaliency& s, const Graph& g,
                                                const std::vector<int>& labels,
                                                std::size_t bin_size) {
    if (bin_size == 0) fail<ConfigError>("bin size must be >= 1");
    if (g.num_edges() == 0) fail<NumericError>("saliency bins undefined on an edgeless graph");
    if (s.values.size() != g.num_edges()) fail<DataError>("saliency size mismatch");
    if (labels.size() != g.num_nodes()) fail<DataError>("label count mismatch");
    std::vector<std::size_t> order(g.num_edges());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        if (s.values[x] != s.values[y]) return s.values[x] > s.values[y];
        return x < y;
    });
    SaliencyBinCurve curve;
    curve.bin_size = bin_size;
    for (std::size_t start = 0; start < order.size(); start += bin_size) {
        const std::size_t end = std::min(start + bin_size, order.size());
        std::size_t intra = 0;
        for (std::size_t r = start; r < end; ++r) {
            const Edge& e = g.edges()[order[r]];
            if (labels[e.u] == labels[e.v]) intra++;
        }
        curve.bin_start.push_back(start);
        curve.homophily.push_back(static_cast<double>(intra) / static_cast<double>(end - start));
    }
    return curve;
}

}  // namespace homogcl
