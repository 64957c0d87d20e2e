#pragma once

#include <vector>

#include "homogcl/autodiff.hpp"
#include "homogcl/cluster.hpp"
#include "homogcl/graph.hpp"

namespace homogcl {

// Per-epoch objective components. Contrastive and BGRL similarity values
// are stored in their to-be-maximized orientation; `objective` is the
// minimized combination.
struct LossBreakdown {
    double contrastive = 0.0;
    double homophily = 0.0;
    double bgrl1 = 0.0;
    double bgrl2 = 0.0;
    double objective = 0.0;
};

namespace detail {

// Dense 0/1 adjacency of a view, both directions.
inline DenseMatrix dense_adjacency(const Graph& view, std::size_t n) {
    DenseMatrix a(n, n);
    for (const Edge& e : view.edges()) {
        a(e.u, e.v) = 1.0;
        a(e.v, e.u) = 1.0;
    }
    return a;
}

// Adjacency of a view weighted by the saliency of the underlying original
// edge (looked up through the view's edge-origin map).
inline DenseMatrix saliency_weighted_adjacency(const Graph& view, const EdgeSaliency& s,
                                               std::size_t n) {
    DenseMatrix a(n, n);
    for (std::size_t e = 0; e < view.num_edges(); ++e) {
        const Edge& ed = view.edges()[e];
        const std::size_t orig = view.edge_origin()[e];
        if (orig >= s.values.size())
            fail<DataError>("saliency missing for view edge (", ed.u, ",", ed.v, ")");
        a(ed.u, ed.v) = s.values[orig];
        a(ed.v, ed.u) = s.values[orig];
    }
    return a;
}

// exclusion mask 1 - I - adj: negatives drop self and the given neighbor set
inline DenseMatrix exclusion_mask(const DenseMatrix& adj) {
    DenseMatrix m(adj.rows(), adj.cols(), 1.0);
    for (std::size_t i = 0; i < adj.rows(); ++i) {
        m(i, i) = 0.0;
        for (std::size_t j = 0; j < adj.cols(); ++j)
            if (adj(i, j) != 0.0) m(i, j) = 0.0;
    }
    return m;
}

inline DenseMatrix identity_mask(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

// Shared InfoNCE core. For the anchor-in-U term the positives are the
// inter-view pair plus pos_w_u-weighted same-view pairs; the negatives are
// the inter-view pairs outside {i} u N_v(i) and the intra-view pairs
// outside {i} u N_u(i). The symmetric term swaps every role. The plain
// InfoNCE loss is the special case of all-zero positive weights and empty
// neighbor sets.
inline ad::Var contrastive_core(ad::Tape& t, ad::Var U, ad::Var V, double tau,
                                const DenseMatrix& pos_w_u, const DenseMatrix& pos_w_v,
                                const DenseMatrix& adj_u, const DenseMatrix& adj_v) {
    if (tau <= 0.0) fail<ConfigError>("loss.tau must be positive");
    const std::size_t n = t.value(U).rows();
    require_same_shape(t.value(U), t.value(V), "contrastive loss");
    if (n < 2) warn("contrastive loss with N < 2: negative sums are empty");

    ad::Var Un = t.row_l2_normalize(U);
    ad::Var Vn = t.row_l2_normalize(V);
    ad::Var Euv = t.exp(t.scalar_mul(t.matmul_nt(Un, Vn), 1.0 / tau));
    ad::Var Euu = t.exp(t.scalar_mul(t.matmul_nt(Un, Un), 1.0 / tau));
    ad::Var Evv = t.exp(t.scalar_mul(t.matmul_nt(Vn, Vn), 1.0 / tau));
    ad::Var Evu = t.transpose(Euv);

    ad::Var eye = t.constant(identity_mask(n));
    ad::Var w_pos_u = t.constant(pos_w_u);
    ad::Var w_pos_v = t.constant(pos_w_v);
    ad::Var excl_u = t.constant(exclusion_mask(adj_u));
    ad::Var excl_v = t.constant(exclusion_mask(adj_v));

    // anchors in U: inter-view exclusions come from view v, intra from view u
    ad::Var pos_u = t.add(t.row_sums(t.mul(Euv, eye)), t.row_sums(t.mul(Euu, w_pos_u)));
    ad::Var neg_u = t.add(t.row_sums(t.mul(Euv, excl_v)), t.row_sums(t.mul(Euu, excl_u)));
    ad::Var term_u = t.sum_all(t.sub(t.log(pos_u), t.log(t.add(pos_u, neg_u))));

    ad::Var pos_v = t.add(t.row_sums(t.mul(Evu, eye)), t.row_sums(t.mul(Evv, w_pos_v)));
    ad::Var neg_v = t.add(t.row_sums(t.mul(Evu, excl_u)), t.row_sums(t.mul(Evv, excl_v)));
    ad::Var term_v = t.sum_all(t.sub(t.log(pos_v), t.log(t.add(pos_v, neg_v))));

    return t.scalar_mul(t.add(term_u, term_v), 1.0 / (2.0 * static_cast<double>(n)));
}

}  // namespace detail

// InfoNCE over two views: positive pair against all inter- and intra-view
// negatives. Returned in to-be-maximized orientation (always <= 0).
inline ad::Var grace_loss(ad::Tape& t, ad::Var U, ad::Var V, double tau) {
    const std::size_t n = t.value(U).rows();
    DenseMatrix zeros(n, n);
    return detail::contrastive_core(t, U, V, tau, zeros, zeros, zeros, zeros);
}

// Positive set expanded with saliency-weighted same-view neighbors; those
// neighbors leave the negative sums. S is a constant (no gradient reaches
// the clustering that produced it).
inline ad::Var homogcl_contrastive(ad::Tape& t, ad::Var U, ad::Var V, const EdgeSaliency& s,
                                   const Graph& view_u, const Graph& view_v, double tau) {
    const std::size_t n = t.value(U).rows();
    if (view_u.num_nodes() != n || view_v.num_nodes() != n)
        fail<DataError>("homogcl_contrastive: view size mismatch");
    DenseMatrix adj_u = detail::dense_adjacency(view_u, n);
    DenseMatrix adj_v = detail::dense_adjacency(view_v, n);
    DenseMatrix pos_u = detail::saliency_weighted_adjacency(view_u, s, n);
    DenseMatrix pos_v = detail::saliency_weighted_adjacency(view_v, s, n);
    return detail::contrastive_core(t, U, V, tau, pos_u, pos_v, adj_u, adj_v);
}

// Posterior of H against fixed centroids, differentiable in H. The row
// softmax of -|h_i - c_j|^2 / (2 sigma^2) is assembled from the squared-
// distance expansion so gradients flow through H only.
inline ad::Var differentiable_posterior(ad::Tape& t, ad::Var H, const Centroids& C,
                                        double sigma2) {
    if (sigma2 <= 0.0) fail<ConfigError>("sigma2 must be positive");
    const std::size_t k = C.k();
    DenseMatrix c_norms(1, k);
    for (std::size_t c = 0; c < k; ++c)
        c_norms(0, c) = -dot(C.means.row(c), C.means.row(c)) / (2.0 * sigma2);
    ad::Var cross = t.scalar_mul(t.matmul_nt(H, t.constant(C.means)), 1.0 / sigma2);
    ad::Var h_norms = t.scalar_mul(t.row_sums(t.mul(H, H)), -1.0 / (2.0 * sigma2));
    ad::Var logits = t.add_rowvec(t.add_colvec(cross, h_norms), t.constant(c_norms));
    return t.softmax_rows(logits);
}

// Mean squared posterior difference across edges and clusters,
// (1/(k|E|)) sum_r sum_{(i,j) in E} (R_ir - R_jr)^2, edges counted once.
inline ad::Var homophily_loss(ad::Tape& t, ad::Var R, const Graph& g) {
    const std::size_t k = t.value(R).cols();
    if (t.value(R).rows() != g.num_nodes()) fail<DataError>("homophily_loss: R row mismatch");
    if (g.num_edges() == 0) {
        warn("homophily loss on an edgeless graph is 0");
        return t.constant_scalar(0.0);
    }
    std::vector<std::size_t> heads, tails;
    heads.reserve(g.num_edges());
    tails.reserve(g.num_edges());
    for (const Edge& e : g.edges()) {
        heads.push_back(e.u);
        tails.push_back(e.v);
    }
    ad::Var d = t.sub(t.gather_rows(R, heads), t.gather_rows(R, tails));
    const double scale = 1.0 / (static_cast<double>(k) * static_cast<double>(g.num_edges()));
    return t.scalar_mul(t.sum_all(t.mul(d, d)), scale);
}

inline double homophily_loss_value(const DenseMatrix& R, const Graph& g) {
    ad::Tape t;
    return t.value_scalar(homophily_loss(t, t.constant(R), g));
}

// Trainer-facing minimization objective for the GRACE-based combination:
// the contrastive value is maximized, the homophily penalty minimized.
inline double combined_objective(double l_cont, double l_homo, double alpha) {
    return -l_cont + alpha * l_homo;
}

// Mean rowwise cosine between predictions and target embeddings; the target
// is passed by value and enters the tape as a constant (gradient blocked).
inline ad::Var bgrl_loss(ad::Tape& t, ad::Var Z1, const DenseMatrix& H2) {
    if (!t.value(Z1).same_shape(H2)) fail<DataError>("bgrl_loss: shape mismatch");
    const std::size_t n = H2.rows();
    ad::Var c = t.mul(t.row_l2_normalize(Z1), t.constant(row_l2_normalize(H2)));
    return t.scalar_mul(t.sum_all(c), 1.0 / static_cast<double>(n));
}

// Saliency-weighted cross-view neighbor similarity,
// (1/|E|) sum_{(i,j) in E} cos(Z1_i, H2_j) S_ij.
inline ad::Var bgrl_expanded_loss(ad::Tape& t, ad::Var Z1, const DenseMatrix& H2,
                                  const EdgeSaliency& s, const Graph& g) {
    if (!t.value(Z1).same_shape(H2)) fail<DataError>("bgrl_expanded_loss: shape mismatch");
    if (g.num_edges() == 0) {
        warn("bgrl expanded loss on an edgeless graph is 0");
        return t.constant_scalar(0.0);
    }
    if (s.values.size() != g.num_edges()) fail<DataError>("bgrl_expanded_loss: saliency mismatch");
    // Both edge directions contribute: cos(Z1_i, H2_j) != cos(Z1_j, H2_i).
    std::vector<std::size_t> heads, tails;
    DenseMatrix w(2 * g.num_edges(), 1);
    for (std::size_t e = 0; e < g.num_edges(); ++e) {
        const Edge& ed = g.edges()[e];
        heads.push_back(ed.u);
        tails.push_back(ed.v);
        w(e, 0) = s.values[e];
    }
    for (std::size_t e = 0; e < g.num_edges(); ++e) {
        const Edge& ed = g.edges()[e];
        heads.push_back(ed.v);
        tails.push_back(ed.u);
        w(g.num_edges() + e, 0) = s.values[e];
    }
    ad::Var zn = t.gather_rows(t.row_l2_normalize(Z1), heads);
    ad::Var hn = t.constant(gather_rows(row_l2_normalize(H2), tails));
    ad::Var cos_e = t.row_sums(t.mul(zn, hn));
    const double scale = 1.0 / (2.0 * static_cast<double>(g.num_edges()));
    return t.scalar_mul(t.sum_all(t.mul(cos_e, t.constant(w))), scale);
}

// Trainer-facing minimization objective for the BGRL-based combination.
inline double bgrl_objective(double l1, double l_homo, double l2, double alpha, double beta) {
    return -l1 + alpha * l_homo - beta * l2;
}

// phi <- tau phi + (1 - tau) xi, elementwise.
inline void ema_update(const std::vector<DenseMatrix>& online, std::vector<DenseMatrix>& target,
                       double tau_ema) {
    if (tau_ema < 0.0 || tau_ema > 1.0) fail<ConfigError>("ema tau out of [0,1]");
    if (online.size() != target.size()) fail<DataError>("ema_update: parameter count mismatch");
    for (std::size_t p = 0; p < online.size(); ++p) {
        require_same_shape(online[p], target[p], "ema_update");
        for (std::size_t i = 0; i < online[p].size(); ++i)
            target[p].data()[i] =
                tau_ema * target[p].data()[i] + (1.0 - tau_ema) * online[p].data()[i];
    }
}

}  // namespace homogcl
