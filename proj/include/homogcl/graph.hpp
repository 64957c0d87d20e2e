#pragma once

#include <algorithm>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "homogcl/matrix.hpp"
#include "homogcl/rng.hpp"

namespace homogcl {

// Undirected edge stored once, endpoints ordered u < v.
struct Edge {
    std::size_t u;
    std::size_t v;
    bool operator==(const Edge&) const = default;
};

// Immutable node/edge/feature/label container. The CSR adjacency view
// materializes both directions of every edge and carries, per CSR entry,
// the index of the underlying undirected edge so that per-edge quantities
// (saliency) can be looked up from either endpoint.
class Graph {
public:
    Graph(std::size_t num_nodes, std::vector<Edge> edges, DenseMatrix features,
          std::optional<std::vector<int>> labels = std::nullopt,
          std::vector<std::size_t> edge_origin = {})
        : num_nodes_(num_nodes),
          edges_(std::move(edges)),
          features_(std::move(features)),
          labels_(std::move(labels)),
          edge_origin_(std::move(edge_origin)) {
        if (features_.rows() != num_nodes_)
            fail<DataError>("feature row count ", features_.rows(), " != node count ", num_nodes_);
        if (!features_.all_finite()) fail<DataError>("non-finite feature entry");
        if (labels_ && labels_->size() != num_nodes_)
            fail<DataError>("label count ", labels_->size(), " != node count ", num_nodes_);
        if (edge_origin_.empty()) {
            edge_origin_.resize(edges_.size());
            for (std::size_t e = 0; e < edges_.size(); ++e) edge_origin_[e] = e;
        } else if (edge_origin_.size() != edges_.size()) {
            fail<DataError>("edge origin map size mismatch");
        }
        std::set<std::pair<std::size_t, std::size_t>> seen;
        for (auto& e : edges_) {
            if (e.u > e.v) std::swap(e.u, e.v);
            if (e.v >= num_nodes_)
                fail<DataError>("edge endpoint ", e.v, " out of range [0,", num_nodes_, ")");
            if (e.u == e.v) fail<DataError>("self-loop (", e.u, ",", e.v, ") in edge list");
            if (!seen.insert({e.u, e.v}).second)
                fail<DataError>("duplicate edge (", e.u, ",", e.v, ")");
        }
        build_adjacency();
    }

    std::size_t num_nodes() const { return num_nodes_; }
    std::size_t num_edges() const { return edges_.size(); }
    const std::vector<Edge>& edges() const { return edges_; }
    const DenseMatrix& features() const { return features_; }
    bool has_labels() const { return labels_.has_value(); }
    const std::vector<int>& labels() const {
        if (!labels_) fail<DataError>("graph has no labels");
        return *labels_;
    }
    // Index of each edge in the ancestor graph this one was derived from.
    const std::vector<std::size_t>& edge_origin() const { return edge_origin_; }

    const std::vector<std::size_t>& adj_row_ptr() const { return row_ptr_; }
    const std::vector<std::size_t>& adj_col_idx() const { return col_idx_; }
    const std::vector<std::size_t>& adj_edge_id() const { return edge_id_; }

    std::span<const std::size_t> neighbors(std::size_t i) const {
        return {col_idx_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
    }

    std::size_t degree(std::size_t i) const { return row_ptr_[i + 1] - row_ptr_[i]; }

private:
    void build_adjacency() {
        row_ptr_.assign(num_nodes_ + 1, 0);
        for (const Edge& e : edges_) {
            row_ptr_[e.u + 1]++;
            row_ptr_[e.v + 1]++;
        }
        for (std::size_t i = 0; i < num_nodes_; ++i) row_ptr_[i + 1] += row_ptr_[i];
        col_idx_.resize(2 * edges_.size());
        edge_id_.resize(2 * edges_.size());
        std::vector<std::size_t> cursor(row_ptr_.begin(), row_ptr_.end() - 1);
        for (std::size_t e = 0; e < edges_.size(); ++e) {
            const Edge& ed = edges_[e];
            col_idx_[cursor[ed.u]] = ed.v;
            edge_id_[cursor[ed.u]++] = e;
            col_idx_[cursor[ed.v]] = ed.u;
            edge_id_[cursor[ed.v]++] = e;
        }
        for (std::size_t i = 0; i < num_nodes_; ++i) {
            std::vector<std::pair<std::size_t, std::size_t>> row;
            for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p)
                row.emplace_back(col_idx_[p], edge_id_[p]);
            std::sort(row.begin(), row.end());
            for (std::size_t r = 0; r < row.size(); ++r) {
                col_idx_[row_ptr_[i] + r] = row[r].first;
                edge_id_[row_ptr_[i] + r] = row[r].second;
            }
        }
    }

    std::size_t num_nodes_;
    std::vector<Edge> edges_;
    DenseMatrix features_;
    std::optional<std::vector<int>> labels_;
    std::vector<std::size_t> edge_origin_;
    std::vector<std::size_t> row_ptr_;
    std::vector<std::size_t> col_idx_;
    std::vector<std::size_t> edge_id_;
};

// Fraction of edges whose endpoints share a class, each unordered pair
// counted once.
inline double homophily(const Graph& g, const std::vector<int>& labels) {
    if (labels.size() != g.num_nodes()) fail<DataError>("homophily: label count mismatch");
    if (g.num_edges() == 0) fail<NumericError>("homophily undefined on an edgeless graph");
    std::size_t intra = 0;
    for (const Edge& e : g.edges())
        if (labels[e.u] == labels[e.v]) intra++;
    return static_cast<double>(intra) / static_cast<double>(g.num_edges());
}

inline double homophily(const Graph& g) { return homophily(g, g.labels()); }

// ---- text-format ingestion ----
// Edge file: "u v" per line, '#' comments. Feature file: N rows of d reals.
// Label file: N class indices.

struct LoadReport {
    std::size_t self_loops_dropped = 0;
    std::size_t duplicates_merged = 0;
};

inline Graph load_graph(const std::string& edge_path, const std::string& feature_path,
                        const std::optional<std::string>& label_path = std::nullopt,
                        LoadReport* report = nullptr) {
    std::ifstream fin(feature_path);
    if (!fin) fail<IoError>("cannot open: ", feature_path);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(fin, line)) {
        lineno++;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream iss(line);
        std::vector<double> row;
        double x;
        while (iss >> x) row.push_back(x);
        if (!iss.eof()) fail<DataError>(feature_path, ":", lineno, ": malformed feature row");
        if (!rows.empty() && row.size() != rows.front().size())
            fail<DataError>(feature_path, ":", lineno, ": feature row width mismatch");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) fail<DataError>(feature_path, ": no feature rows");
    const std::size_t n = rows.size();
    DenseMatrix features = DenseMatrix::from_rows(std::move(rows));

    std::ifstream ein(edge_path);
    if (!ein) fail<IoError>("cannot open: ", edge_path);
    std::vector<Edge> edges;
    std::set<std::pair<std::size_t, std::size_t>> seen;
    LoadReport rep;
    lineno = 0;
    while (std::getline(ein, line)) {
        lineno++;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream iss(line);
        long long u, v;
        if (!(iss >> u >> v) || u < 0 || v < 0)
            fail<DataError>(edge_path, ":", lineno, ": malformed edge line");
        std::string trailing;
        if (iss >> trailing) fail<DataError>(edge_path, ":", lineno, ": malformed edge line");
        auto su = static_cast<std::size_t>(u), sv = static_cast<std::size_t>(v);
        if (su >= n || sv >= n)
            fail<DataError>(edge_path, ":", lineno, ": endpoint out of range [0,", n, ")");
        if (su == sv) {
            rep.self_loops_dropped++;
            continue;
        }
        if (su > sv) std::swap(su, sv);
        if (!seen.insert({su, sv}).second) {
            rep.duplicates_merged++;
            continue;
        }
        edges.push_back({su, sv});
    }
    if (rep.self_loops_dropped > 0)
        warn(edge_path, ": dropped ", rep.self_loops_dropped, " self-loop(s)");
    if (report) *report = rep;

    std::optional<std::vector<int>> labels;
    if (label_path) {
        std::ifstream lin(*label_path);
        if (!lin) fail<IoError>("cannot open: ", *label_path);
        std::vector<int> y;
        lineno = 0;
        while (std::getline(lin, line)) {
            lineno++;
            if (line.empty() || line[0] == '#') continue;
            std::istringstream iss(line);
            int c;
            if (!(iss >> c) || c < 0) fail<DataError>(*label_path, ":", lineno, ": malformed label");
            y.push_back(c);
        }
        if (y.size() != n)
            fail<DataError>(*label_path, ": ", y.size(), " labels for ", n, " nodes");
        labels = std::move(y);
    }
    return Graph(n, std::move(edges), std::move(features), std::move(labels));
}

inline void save_graph(const Graph& g, const std::string& edge_path,
                       const std::string& feature_path,
                       const std::optional<std::string>& label_path = std::nullopt) {
    std::ofstream eout(edge_path);
    if (!eout) fail<IoError>("cannot open for writing: ", edge_path);
    for (const Edge& e : g.edges()) eout << e.u << " " << e.v << "\n";
    if (!eout) fail<IoError>("write failed: ", edge_path);

    std::ofstream fout(feature_path);
    if (!fout) fail<IoError>("cannot open for writing: ", feature_path);
    fout << std::setprecision(17);
    const DenseMatrix& X = g.features();
    for (std::size_t i = 0; i < X.rows(); ++i) {
        for (std::size_t j = 0; j < X.cols(); ++j) {
            if (j) fout << " ";
            fout << X(i, j);
        }
        fout << "\n";
    }
    if (!fout) fail<IoError>("write failed: ", feature_path);

    if (label_path) {
        std::ofstream lout(*label_path);
        if (!lout) fail<IoError>("cannot open for writing: ", *label_path);
        for (int y : g.labels()) lout << y << "\n";
        if (!lout) fail<IoError>("write failed: ", *label_path);
    }
}

// ---- synthetic homophilic graphs ----

// Stochastic block model with round-robin class assignment and noisy
// block-prototype features (disjoint blocks of ones, each bit flipped
// independently with probability flip_prob).
inline Graph generate_sbm(std::size_t n, std::size_t num_classes, double p_in, double p_out,
                          std::size_t feat_dim, double flip_prob, std::uint64_t seed) {
    if (!(p_out >= 0.0 && p_out <= p_in && p_in <= 1.0))
        fail<ConfigError>("generate_sbm requires 0 <= p_out <= p_in <= 1");
    if (flip_prob < 0.0 || flip_prob > 1.0) fail<ConfigError>("flip_prob out of [0,1]");
    if (num_classes == 0 || num_classes > n) fail<ConfigError>("num_classes out of range");
    if (feat_dim < num_classes) fail<ConfigError>("feat_dim must be >= num_classes");

    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % num_classes);

    Rng rng(seed);
    RngStream edge_stream = rng.stream("sbm/edges");
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double p = labels[i] == labels[j] ? p_in : p_out;
            if (edge_stream.bernoulli(p)) edges.push_back({i, j});
        }
    }

    RngStream feat_stream = rng.stream("sbm/features");
    DenseMatrix X(n, feat_dim);
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = static_cast<std::size_t>(labels[i]);
        const std::size_t lo = c * feat_dim / num_classes;
        const std::size_t hi = (c + 1) * feat_dim / num_classes;
        for (std::size_t j = 0; j < feat_dim; ++j) {
            const double proto = (j >= lo && j < hi) ? 1.0 : 0.0;
            X(i, j) = feat_stream.bernoulli(flip_prob) ? 1.0 - proto : proto;
        }
    }
    return Graph(n, std::move(edges), std::move(X), std::move(labels));
}

// ---- train/val/test splits ----

struct Split {
    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> val_idx;
    std::vector<std::size_t> test_idx;
};

enum class SplitMode { PerClassCount, Proportions };

struct SplitSpec {
    SplitMode mode = SplitMode::Proportions;
    // PerClassCount: train_per_class nodes of every class, then val_count
    // nodes for validation, remainder test.
    std::size_t train_per_class = 20;
    std::size_t val_count = 500;
    // Proportions: floor(frac * N) for train and val, remainder test.
    double train_frac = 0.1;
    double val_frac = 0.1;
};

inline Split make_split(const Graph& g, const SplitSpec& spec, std::uint64_t seed) {
    const std::size_t n = g.num_nodes();
    RngStream stream = Rng(seed).stream("split");
    std::vector<std::size_t> order = stream.permutation(n);
    Split split;
    if (spec.mode == SplitMode::Proportions) {
        if (spec.train_frac < 0 || spec.val_frac < 0 || spec.train_frac + spec.val_frac > 1.0)
            fail<ConfigError>("split fractions infeasible");
        const auto n_train = static_cast<std::size_t>(spec.train_frac * static_cast<double>(n));
        const auto n_val = static_cast<std::size_t>(spec.val_frac * static_cast<double>(n));
        if (n_train == 0) fail<ConfigError>("split yields an empty training set");
        split.train_idx.assign(order.begin(), order.begin() + n_train);
        split.val_idx.assign(order.begin() + n_train, order.begin() + n_train + n_val);
        split.test_idx.assign(order.begin() + n_train + n_val, order.end());
    } else {
        const std::vector<int>& y = g.labels();
        int num_classes = 0;
        for (int c : y) num_classes = std::max(num_classes, c + 1);
        std::vector<std::size_t> per_class_taken(num_classes, 0);
        std::vector<std::size_t> rest;
        for (std::size_t i : order) {
            const auto c = static_cast<std::size_t>(y[i]);
            if (per_class_taken[c] < spec.train_per_class) {
                per_class_taken[c]++;
                split.train_idx.push_back(i);
            } else {
                rest.push_back(i);
            }
        }
        for (int c = 0; c < num_classes; ++c) {
            if (per_class_taken[c] < spec.train_per_class)
                fail<ConfigError>("infeasible split: class ", c, " has only ", per_class_taken[c],
                                  " nodes, requested ", spec.train_per_class);
        }
        const std::size_t n_val = std::min(spec.val_count, rest.size());
        split.val_idx.assign(rest.begin(), rest.begin() + n_val);
        split.test_idx.assign(rest.begin() + n_val, rest.end());
    }
    return split;
}

inline void save_split(const Split& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail<IoError>("cannot open for writing: ", path);
    auto emit = [&](const char* tag, const std::vector<std::size_t>& idx) {
        out << tag << ":";
        for (std::size_t i : idx) out << " " << i;
        out << "\n";
    };
    emit("train", s.train_idx);
    emit("val", s.val_idx);
    emit("test", s.test_idx);
    if (!out) fail<IoError>("write failed: ", path);
}

inline Split load_split(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail<IoError>("cannot open: ", path);
    Split s;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        lineno++;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream iss(line);
        std::string tag;
        iss >> tag;
        std::vector<std::size_t>* dst = nullptr;
        if (tag == "train:") dst = &s.train_idx;
        else if (tag == "val:") dst = &s.val_idx;
        else if (tag == "test:") dst = &s.test_idx;
        else fail<DataError>(path, ":", lineno, ": expected train:/val:/test: prefix");
        std::size_t i;
        while (iss >> i) dst->push_back(i);
    }
    if (s.train_idx.empty()) fail<DataError>(path, ": empty training split");
    return s;
}

}  // namespace homogcl
