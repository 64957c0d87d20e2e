#pragma once

#include <algorithm>
#include <limits>
#include <vector>

#include "homogcl/graph.hpp"
#include "homogcl/matrix.hpp"
#include "homogcl/rng.hpp"

namespace homogcl {

// k mean vectors, one per hard cluster.
struct Centroids {
    DenseMatrix means;  // k x d'
    std::size_t k() const { return means.rows(); }
};

struct KmeansResult {
    std::vector<std::size_t> labels;
    Centroids centroids;
    std::vector<double> inertia_history;  // inertia after each Lloyd iteration
    std::size_t iterations = 0;
};

namespace detail {

inline double sq_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

// Nearest centroid, ties broken toward the lowest cluster index.
inline std::size_t nearest_centroid(std::span<const double> x, const DenseMatrix& means) {
    std::size_t best = 0;
    double best_d = sq_distance(x, means.row(0));
    for (std::size_t c = 1; c < means.rows(); ++c) {
        const double d = sq_distance(x, means.row(c));
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

}  // namespace detail

// k-means++ seeding.
inline Centroids kmeans_pp_init(const DenseMatrix& H, std::size_t k, RngStream& stream) {
    const std::size_t n = H.rows();
    if (k == 0 || k > n) fail<ConfigError>("kmeans: k must be in [1, N]");
    DenseMatrix means(k, H.cols());
    std::size_t first = stream.uniform_index(n);
    std::copy(H.row(first).begin(), H.row(first).end(), means.row(0).begin());
    std::vector<double> d2(n);
    for (std::size_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = detail::sq_distance(H.row(i), means.row(0));
            for (std::size_t r = 1; r < c; ++r)
                best = std::min(best, detail::sq_distance(H.row(i), means.row(r)));
            d2[i] = best;
            total += best;
        }
        std::size_t pick;
        if (total == 0.0) {
            pick = stream.uniform_index(n);
        } else {
            const double target = stream.uniform() * total;
            double acc = 0.0;
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += d2[i];
                if (acc >= target) {
                    pick = i;
                    break;
                }
            }
        }
        std::copy(H.row(pick).begin(), H.row(pick).end(), means.row(c).begin());
    }
    return {means};
}

// Lloyd iterations until the assignment reaches a fixpoint or max_iters.
// An emptied cluster is reseeded at the point farthest from its own
// assigned centroid.
inline KmeansResult kmeans_lloyd(const DenseMatrix& H, Centroids init, std::size_t max_iters) {
    const std::size_t n = H.rows();
    const std::size_t k = init.k();
    KmeansResult res;
    res.centroids = std::move(init);
    res.labels.assign(n, 0);
    std::vector<std::size_t> counts(k);

    for (std::size_t it = 0; it < max_iters; ++it) {
        bool changed = false;
        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t c = detail::nearest_centroid(H.row(i), res.centroids.means);
            if (c != res.labels[i]) changed = true;
            res.labels[i] = c;
            inertia += detail::sq_distance(H.row(i), res.centroids.means.row(c));
        }
        res.inertia_history.push_back(inertia);
        res.iterations = it + 1;

        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t c : res.labels) counts[c]++;
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] > 0) continue;
            // farthest-point repair
            std::size_t far = 0;
            double far_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double d =
                    detail::sq_distance(H.row(i), res.centroids.means.row(res.labels[i]));
                if (d > far_d && counts[res.labels[i]] > 1) {
                    far_d = d;
                    far = i;
                }
            }
            counts[res.labels[far]]--;
            res.labels[far] = c;
            counts[c] = 1;
            changed = true;
        }

        DenseMatrix sums(k, H.cols());
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < H.cols(); ++j) sums(res.labels[i], j) += H(i, j);
        for (std::size_t c = 0; c < k; ++c)
            for (std::size_t j = 0; j < H.cols(); ++j)
                res.centroids.means(c, j) = sums(c, j) / static_cast<double>(counts[c]);

        if (!changed && it > 0) break;
    }
    return res;
}

inline KmeansResult kmeans(const DenseMatrix& H, std::size_t k, std::size_t max_iters,
                           RngStream& stream) {
    if (!H.all_finite()) fail<NumericError>("kmeans: non-finite embedding");
    return kmeans_lloyd(H, kmeans_pp_init(H, k, stream), max_iters);
}

// Mean squared distance from each point to its assigned centroid; the
// data-scaled default for sigma^2. Guarded away from zero so the posterior
// stays defined when every point sits on a centroid.
inline double sigma2_auto(const DenseMatrix& H, const KmeansResult& km) {
    double s = 0.0;
    for (std::size_t i = 0; i < H.rows(); ++i)
        s += detail::sq_distance(H.row(i), km.centroids.means.row(km.labels[i]));
    s /= static_cast<double>(H.rows());
    return std::max(s, 1e-12);
}

// Softmax of -sqdist/(2 sigma^2) per row, computed with the max-shift.
// Row-stochastic with strictly positive entries.
inline DenseMatrix posterior_from_sqdist(const DenseMatrix& sqdist, double sigma2) {
    if (sigma2 <= 0.0) fail<ConfigError>("sigma2 must be positive");
    DenseMatrix R(sqdist.rows(), sqdist.cols());
    for (std::size_t i = 0; i < sqdist.rows(); ++i) {
        double mn = sqdist(i, 0);
        for (double d : sqdist.row(i)) mn = std::min(mn, d);
        double z = 0.0;
        for (std::size_t j = 0; j < sqdist.cols(); ++j)
            z += (R(i, j) = std::exp(-(sqdist(i, j) - mn) / (2.0 * sigma2)));
        for (std::size_t j = 0; j < sqdist.cols(); ++j) R(i, j) /= z;
    }
    return R;
}

// Gaussian posterior under equal priors and shared isotropic variance:
// R_ij = exp(-|h_i - c_j|^2 / 2 sigma^2) / sum_r exp(-|h_i - c_r|^2 / 2 sigma^2).
inline DenseMatrix gmm_posterior(const DenseMatrix& H, const Centroids& C, double sigma2) {
    if (sigma2 <= 0.0) fail<ConfigError>("sigma2 must be positive");
    if (H.cols() != C.means.cols()) fail<DataError>("gmm_posterior: dimension mismatch");
    DenseMatrix sqd(H.rows(), C.k());
    for (std::size_t i = 0; i < H.rows(); ++i)
        for (std::size_t c = 0; c < C.k(); ++c)
            sqd(i, c) = detail::sq_distance(H.row(i), C.means.row(c));
    return posterior_from_sqdist(sqd, sigma2);
}

// One weight per undirected original edge, aligned with graph.edges().
struct EdgeSaliency {
    std::vector<double> values;
};

// S_ij = <R_i / |R_i|, R_j / |R_j|> on connected pairs only. Posterior rows
// are strictly positive, so the cosine lands in [0,1]; clamped against
// round-off.
inline EdgeSaliency saliency(const DenseMatrix& R, const Graph& g) {
    if (R.rows() != g.num_nodes()) fail<DataError>("saliency: R row count mismatch");
    DenseMatrix Rn = row_l2_normalize(R);
    EdgeSaliency s;
    s.values.resize(g.num_edges());
    for (std::size_t e = 0; e < g.num_edges(); ++e) {
        const Edge& ed = g.edges()[e];
        s.values[e] = std::clamp(dot(Rn.row(ed.u), Rn.row(ed.v)), 0.0, 1.0);
    }
    return s;
}

}  // namespace homogcl
