#pragma once

#include <set>
#include <vector>

#include "homogcl/cluster.hpp"
#include "homogcl/graph.hpp"
#include "homogcl/matrix.hpp"
#include "homogcl/rng.hpp"

namespace test_util {

using namespace homogcl;

inline DenseMatrix random_matrix(std::size_t rows, std::size_t cols, RngStream& s,
                                 double scale = 1.0) {
    DenseMatrix m(rows, cols);
    for (double& x : m.data()) x = scale * s.normal();
    return m;
}

inline Graph random_graph(std::size_t n, double p, std::size_t feat_dim, RngStream& s,
                          std::size_t num_classes = 0) {
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (s.bernoulli(p)) edges.push_back({i, j});
    std::optional<std::vector<int>> labels;
    if (num_classes > 0) {
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i)
            y[i] = static_cast<int>(s.uniform_index(num_classes));
        labels = std::move(y);
    }
    return Graph(n, std::move(edges), random_matrix(n, feat_dim, s), std::move(labels));
}

// Symmetric N x N weights in [0,1] restricted to the given edges.
inline DenseMatrix random_saliency_matrix(const Graph& g, RngStream& s) {
    DenseMatrix w(g.num_nodes(), g.num_nodes());
    for (const Edge& e : g.edges()) {
        const double v = s.uniform();
        w(e.u, e.v) = v;
        w(e.v, e.u) = v;
    }
    return w;
}

inline EdgeSaliency saliency_from_matrix(const Graph& g, const DenseMatrix& w) {
    EdgeSaliency sal;
    for (const Edge& e : g.edges()) sal.values.push_back(w(e.u, e.v));
    return sal;
}

inline std::vector<std::set<std::size_t>> neighbor_sets(const Graph& g) {
    std::vector<std::set<std::size_t>> nbr(g.num_nodes());
    for (const Edge& e : g.edges()) {
        nbr[e.u].insert(e.v);
        nbr[e.v].insert(e.u);
    }
    return nbr;
}

inline std::vector<std::pair<std::size_t, std::size_t>> edge_pairs(const Graph& g) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (const Edge& e : g.edges()) out.emplace_back(e.u, e.v);
    return out;
}

}  // namespace test_util
