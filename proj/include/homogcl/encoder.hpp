#pragma once

#include <vector>

#include "homogcl/autodiff.hpp"
#include "homogcl/graph.hpp"
#include "homogcl/rng.hpp"

namespace homogcl {

// A_hat = D~^{-1/2} (A + I) D~^{-1/2} with D~ the degree matrix of A + I.
// Isolated nodes keep a unit self-loop entry.
inline CsrMatrix normalize_adjacency(const Graph& g) {
    const std::size_t n = g.num_nodes();
    std::vector<double> inv_sqrt_deg(n);
    for (std::size_t i = 0; i < n; ++i)
        inv_sqrt_deg[i] = 1.0 / std::sqrt(static_cast<double>(g.degree(i) + 1));
    std::vector<std::tuple<std::size_t, std::size_t, double>> coo;
    coo.reserve(2 * g.num_edges() + n);
    for (std::size_t i = 0; i < n; ++i) {
        coo.emplace_back(i, i, inv_sqrt_deg[i] * inv_sqrt_deg[i]);
        for (std::size_t j : g.neighbors(i)) coo.emplace_back(i, j, inv_sqrt_deg[i] * inv_sqrt_deg[j]);
    }
    return CsrMatrix::from_coo(n, n, std::move(coo));
}

// The "w/o MP" ablation replaces A_hat with the identity.
inline CsrMatrix identity_adjacency(std::size_t n) {
    if (n == 0) fail<ConfigError>("identity_adjacency: n must be >= 1");
    return csr_identity(n);
}

struct EncoderParams {
    std::vector<DenseMatrix> weights;  // layer l maps d_{l-1} -> d_l
    std::vector<DenseMatrix> proj;     // optional 2-layer projection head, d' -> d'

    std::vector<DenseMatrix*> all() {
        std::vector<DenseMatrix*> ps;
        for (auto& w : weights) ps.push_back(&w);
        for (auto& w : proj) ps.push_back(&w);
        return ps;
    }
};

inline DenseMatrix glorot_init(std::size_t fan_in, std::size_t fan_out, RngStream& stream) {
    const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    DenseMatrix w(fan_in, fan_out);
    for (double& x : w.data()) x = stream.uniform(-a, a);
    return w;
}

inline EncoderParams init_encoder(std::size_t in_dim, std::size_t hidden_dim, std::size_t out_dim,
                                  std::size_t layers, bool projection_head, RngStream& stream) {
    if (layers < 1) fail<ConfigError>("encoder.layers must be >= 1");
    EncoderParams p;
    std::size_t d = in_dim;
    for (std::size_t l = 0; l < layers; ++l) {
        const std::size_t d_out = (l + 1 == layers) ? out_dim : hidden_dim;
        p.weights.push_back(glorot_init(d, d_out, stream));
        d = d_out;
    }
    if (projection_head) {
        p.proj.push_back(glorot_init(out_dim, out_dim, stream));
        p.proj.push_back(glorot_init(out_dim, out_dim, stream));
    }
    return p;
}

// L-layer GCN: H^{(l)} = A_hat sigma(...) W^{(l)}, ReLU between layers and
// none after the last.
inline ad::Var gcn_forward(ad::Tape& tape, const CsrMatrix& adj_norm, ad::Var X,
                           const std::vector<ad::Var>& weights) {
    ad::Var h = X;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        h = tape.spmm(adj_norm, tape.matmul(h, weights[l]));
        if (l + 1 < weights.size()) h = tape.relu(h);
    }
    return h;
}

inline DenseMatrix gcn_forward_value(const CsrMatrix& adj_norm, const DenseMatrix& X,
                                     const std::vector<DenseMatrix>& weights) {
    ad::Tape tape;
    std::vector<ad::Var> ws;
    for (const auto& w : weights) ws.push_back(tape.constant(w));
    return tape.value(gcn_forward(tape, adj_norm, tape.constant(X), ws));
}

// Two-layer projection head: linear, ReLU, linear.
inline ad::Var project(ad::Tape& tape, ad::Var H, const std::vector<ad::Var>& proj) {
    if (proj.size() != 2) fail<ConfigError>("projection head is disabled");
    return tape.matmul(tape.relu(tape.matmul(H, proj[0])), proj[1]);
}

}  // namespace homogcl
