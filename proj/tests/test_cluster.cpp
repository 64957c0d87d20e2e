#include <catch2/catch.hpp>

#include <set>

#include "homogcl/cluster.hpp"
#include "test_util.hpp"

using namespace homogcl;
using test_util::random_matrix;

TEST_CASE("kmeans recovers the optimal 2-partition of {0,1,10,11}") {
    DenseMatrix h = DenseMatrix::from_rows({{0.0}, {1.0}, {10.0}, {11.0}});
    // brute force over all 2-partitions: {0,1}|{10,11} minimizes inertia
    RngStream s = Rng(61).stream("km");
    KmeansResult km = kmeans(h, 2, 50, s);
    std::set<double> centroids = {km.centroids.means(0, 0), km.centroids.means(1, 0)};
    REQUIRE(centroids == std::set<double>{0.5, 10.5});
    REQUIRE(km.labels[0] == km.labels[1]);
    REQUIRE(km.labels[2] == km.labels[3]);
    REQUIRE(km.labels[0] != km.labels[2]);
}

TEST_CASE("kmeans with k = 1 returns the column mean") {
    RngStream s = Rng(62).stream("km");
    DenseMatrix h = random_matrix(9, 4, s);
    KmeansResult km = kmeans(h, 1, 50, s);
    DenseMatrix mean = scalar_mul(col_sums(h), 1.0 / 9.0);
    for (std::size_t j = 0; j < 4; ++j)
        REQUIRE(km.centroids.means(0, j) == Approx(mean(0, j)).margin(1e-12));
}

TEST_CASE("kmeans with k = N puts every distinct point in its own cluster") {
    RngStream s = Rng(63).stream("km");
    DenseMatrix h = random_matrix(6, 3, s);
    KmeansResult km = kmeans(h, 6, 50, s);
    std::set<std::size_t> used(km.labels.begin(), km.labels.end());
    REQUIRE(used.size() == 6);
    REQUIRE(km.inertia_history.back() == Approx(0.0).margin(1e-18));
}

TEST_CASE("kmeans rejects k greater than N") {
    RngStream s = Rng(64).stream("km");
    DenseMatrix h = random_matrix(3, 2, s);
    REQUIRE_THROWS_AS(kmeans(h, 4, 10, s), ConfigError);
}

TEST_CASE("kmeans inertia is non-increasing") {
    RngStream s = Rng(65).stream("km");
    for (int trial = 0; trial < 10; ++trial) {
        DenseMatrix h = random_matrix(40, 5, s);
        KmeansResult km = kmeans(h, 4, 50, s);
        REQUIRE(km.iterations <= 50);
        for (std::size_t i = 1; i < km.inertia_history.size(); ++i)
            REQUIRE(km.inertia_history[i] <=
                    km.inertia_history[i - 1] * (1.0 + 1e-12) + 1e-12);
    }
}

TEST_CASE("posterior with a single component is the all-ones column") {
    RngStream s = Rng(66).stream("gmm");
    DenseMatrix h = random_matrix(5, 3, s);
    KmeansResult km = kmeans(h, 1, 20, s);
    DenseMatrix r = gmm_posterior(h, km.centroids, 1.0);
    REQUIRE(r.cols() == 1);
    for (double x : r.data()) REQUIRE(x == Approx(1.0).margin(1e-15));
}

TEST_CASE("equidistant point splits evenly between two centroids") {
    Centroids c{DenseMatrix::from_rows({{1.0, 0.0}, {-1.0, 0.0}})};
    DenseMatrix h = DenseMatrix::from_rows({{0.0, 5.0}});
    DenseMatrix r = gmm_posterior(h, c, 2.0);
    REQUIRE(r(0, 0) == Approx(0.5).margin(1e-15));
    REQUIRE(r(0, 1) == Approx(0.5).margin(1e-15));
}

TEST_CASE("posterior matches the direct evaluation of the Gaussian ratio") {
    Centroids c{DenseMatrix::from_rows({{0.0}, {2.0}})};
    DenseMatrix h = DenseMatrix::from_rows({{0.0}});
    DenseMatrix r = gmm_posterior(h, c, 1.0);
    // distances 0 and 4: ratio = 1 : e^{-2}
    const double e2 = std::exp(-2.0);
    REQUIRE(r(0, 0) == Approx(1.0 / (1.0 + e2)).margin(1e-12));
    REQUIRE(r(0, 1) == Approx(e2 / (1.0 + e2)).margin(1e-12));
    REQUIRE(r(0, 0) == Approx(0.8808).margin(1e-4));
    REQUIRE(r(0, 1) == Approx(0.1192).margin(1e-4));
}

TEST_CASE("posterior rows are stochastic and strictly positive") {
    RngStream s = Rng(67).stream("gmm");
    for (int trial = 0; trial < 10; ++trial) {
        DenseMatrix h = random_matrix(20, 4, s, 3.0);
        KmeansResult km = kmeans(h, 5, 30, s);
        DenseMatrix r = gmm_posterior(h, km.centroids, sigma2_auto(h, km));
        for (std::size_t i = 0; i < r.rows(); ++i) {
            double sum = 0.0;
            for (std::size_t j = 0; j < r.cols(); ++j) {
                REQUIRE(r(i, j) > 0.0);
                REQUIRE(r(i, j) <= 1.0);
                sum += r(i, j);
            }
            REQUIRE(sum == Approx(1.0).margin(1e-12));
        }
    }
}

TEST_CASE("posterior is invariant to shifting a row of squared distances") {
    RngStream s = Rng(68).stream("gmm");
    DenseMatrix sqd(4, 3);
    for (double& x : sqd.data()) x = std::abs(s.normal()) * 4.0;
    DenseMatrix r1 = posterior_from_sqdist(sqd, 0.7);
    DenseMatrix shifted = sqd;
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 3; ++j) shifted(i, j) += 13.5;
    DenseMatrix r2 = posterior_from_sqdist(shifted, 0.7);
    for (std::size_t i = 0; i < r1.size(); ++i)
        REQUIRE(r1.data()[i] == Approx(r2.data()[i]).margin(1e-13));
}

TEST_CASE("posterior approaches one-hot as sigma2 goes to zero") {
    DenseMatrix h = DenseMatrix::from_rows({{0.0, 0.0}, {4.9, 5.1}});
    Centroids c{DenseMatrix::from_rows({{0.1, -0.1}, {5.0, 5.0}})};
    DenseMatrix r = gmm_posterior(h, c, 1e-6);
    REQUIRE(r(0, 0) == Approx(1.0).margin(1e-9));
    REQUIRE(r(1, 1) == Approx(1.0).margin(1e-9));
}

TEST_CASE("posterior rejects non-positive sigma2") {
    Centroids c{DenseMatrix(1, 2)};
    REQUIRE_THROWS_AS(gmm_posterior(DenseMatrix(3, 2), c, 0.0), ConfigError);
    REQUIRE_THROWS_AS(gmm_posterior(DenseMatrix(3, 2), c, -1.0), ConfigError);
}

TEST_CASE("saliency of identical posterior rows is 1, of disjoint rows 0") {
    Graph g(3, {{0, 1}, {1, 2}}, DenseMatrix(3, 1));
    DenseMatrix r = DenseMatrix::from_rows({{0.3, 0.7}, {0.3, 0.7}, {1.0, 0.0}});
    EdgeSaliency s = saliency(r, g);
    REQUIRE(s.values[0] == Approx(1.0).margin(1e-12));
    // rows (0.3,0.7) and (1,0) are not orthogonal; test a true one-hot pair
    DenseMatrix r2 = DenseMatrix::from_rows({{1.0, 0.0}, {0.0, 1.0}, {1.0, 0.0}});
    EdgeSaliency s2 = saliency(r2, g);
    REQUIRE(s2.values[0] == 0.0);
}

TEST_CASE("saliency matches the normalized dot product by hand") {
    Graph g(2, {{0, 1}}, DenseMatrix(2, 1));
    DenseMatrix r = DenseMatrix::from_rows({{0.5, 0.5}, {1.0, 0.0}});
    EdgeSaliency s = saliency(r, g);
    REQUIRE(s.values[0] == Approx(1.0 / std::sqrt(2.0)).margin(1e-12));
    REQUIRE(s.values[0] == Approx(0.70711).margin(1e-5));
}

TEST_CASE("saliency lies in [0,1] and is symmetric on random posteriors") {
    RngStream s = Rng(69).stream("sal");
    for (int trial = 0; trial < 10; ++trial) {
        Graph g = test_util::random_graph(15, 0.3, 2, s);
        if (g.num_edges() == 0) continue;
        DenseMatrix h = random_matrix(15, 4, s, 2.0);
        KmeansResult km = kmeans(h, 4, 30, s);
        DenseMatrix r = gmm_posterior(h, km.centroids, sigma2_auto(h, km));
        EdgeSaliency sal = saliency(r, g);
        for (double v : sal.values) {
            REQUIRE(v >= 0.0);
            REQUIRE(v <= 1.0);
        }
        // symmetry is structural: one value per unordered edge reachable from
        // either endpoint through the adjacency edge ids
        for (std::size_t i = 0; i < g.num_nodes(); ++i)
            for (std::size_t p = g.adj_row_ptr()[i]; p < g.adj_row_ptr()[i + 1]; ++p) {
                const std::size_t e = g.adj_edge_id()[p];
                const Edge& ed = g.edges()[e];
                const double direct =
                    dot(row_l2_normalize(r).row(ed.u), row_l2_normalize(r).row(ed.v));
                REQUIRE(sal.values[e] == Approx(direct).margin(1e-12));
            }
    }
}

TEST_CASE("empty clusters are repaired to keep k centroids") {
    // all points identical except one outlier; k-means++ may seed duplicates
    DenseMatrix h(8, 2);
    for (std::size_t i = 0; i < 7; ++i) {
        h(i, 0) = 1.0;
        h(i, 1) = 1.0;
    }
    h(7, 0) = 50.0;
    h(7, 1) = 50.0;
    RngStream s = Rng(70).stream("km");
    KmeansResult km = kmeans(h, 3, 50, s);
    std::vector<std::size_t> counts(3, 0);
    for (std::size_t c : km.labels) counts[c]++;
    for (std::size_t c = 0; c < 3; ++c) REQUIRE(counts[c] >= 1);
}
