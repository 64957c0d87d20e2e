#pragma once

#include <utility>
#include <vector>

#include "homogcl/graph.hpp"

namespace homogcl {

enum class MaskMode { Column, Entry };

struct AugmentConfig {
    double p_e = 0.4;  // edge drop probability
    double p_f = 0.2;  // feature mask probability
    MaskMode mask_mode = MaskMode::Column;

    void validate() const {
        if (p_e < 0.0 || p_e > 1.0) fail<ConfigError>("aug.p_e out of [0,1]");
        if (p_f < 0.0 || p_f > 1.0) fail<ConfigError>("aug.p_f out of [0,1]");
    }
};

// Keeps each undirected edge independently with probability 1 - p_e.
// Surviving edges carry their index in the input graph's edge list.
inline Graph drop_edges(const Graph& g, double p_e, RngStream& stream) {
    if (p_e < 0.0 || p_e > 1.0) fail<ConfigError>("p_e out of [0,1]");
    std::vector<Edge> kept;
    std::vector<std::size_t> origin;
    for (std::size_t e = 0; e < g.num_edges(); ++e) {
        const bool drop = stream.bernoulli(p_e);
        if (!drop) {
            kept.push_back(g.edges()[e]);
            origin.push_back(g.edge_origin()[e]);
        }
    }
    auto labels = g.has_labels() ? std::optional(g.labels()) : std::nullopt;
    return Graph(g.num_nodes(), std::move(kept), g.features(), std::move(labels),
                 std::move(origin));
}

// Column mode samples one length-d mask shared by every row; entry mode
// masks each cell independently.
inline DenseMatrix mask_features(const DenseMatrix& X, double p_f, RngStream& stream,
                                 MaskMode mode = MaskMode::Column) {
    if (p_f < 0.0 || p_f > 1.0) fail<ConfigError>("p_f out of [0,1]");
    DenseMatrix out = X;
    if (mode == MaskMode::Column) {
        std::vector<bool> masked(X.cols());
        for (std::size_t j = 0; j < X.cols(); ++j) masked[j] = stream.bernoulli(p_f);
        for (std::size_t i = 0; i < X.rows(); ++i)
            for (std::size_t j = 0; j < X.cols(); ++j)
                if (masked[j]) out(i, j) = 0.0;
    } else {
        for (std::size_t i = 0; i < X.rows(); ++i)
            for (std::size_t j = 0; j < X.cols(); ++j)
                if (stream.bernoulli(p_f)) out(i, j) = 0.0;
    }
    return out;
}

// One augmented view: edge dropping followed by feature masking.
inline Graph sample_view(const Graph& g, const AugmentConfig& cfg, RngStream& stream) {
    cfg.validate();
    Graph dropped = drop_edges(g, cfg.p_e, stream);
    DenseMatrix X = mask_features(dropped.features(), cfg.p_f, stream, cfg.mask_mode);
    auto labels = g.has_labels() ? std::optional(g.labels()) : std::nullopt;
    std::vector<std::size_t> origin = dropped.edge_origin();
    std::vector<Edge> edges = dropped.edges();
    return Graph(g.num_nodes(), std::move(edges), std::move(X), std::move(labels),
                 std::move(origin));
}

}  // namespace homogcl
