#include <catch2/catch.hpp>

#include "homogcl/eval.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace homogcl;
using test_util::random_matrix;

namespace {

std::vector<int> random_labels(std::size_t n, std::size_t classes, RngStream& s) {
    std::vector<int> y(n);
    for (auto& c : y) c = static_cast<int>(s.uniform_index(classes));
    return y;
}

}  // namespace

TEST_CASE("nmi is 1 for any relabeling of the same partition") {
    std::vector<int> truth = {0, 0, 1, 1, 2, 2, 1};
    std::vector<int> renamed = {5, 5, 9, 9, 0, 0, 9};
    REQUIRE(nmi(renamed, truth) == Approx(1.0).margin(1e-12));
    REQUIRE(ari(renamed, truth) == Approx(1.0).margin(1e-12));
}

TEST_CASE("constant prediction against a mixed truth scores 0") {
    std::vector<int> pred = {3, 3, 3, 3};
    std::vector<int> truth = {0, 1, 0, 1};
    REQUIRE(nmi(pred, truth) == 0.0);
}

TEST_CASE("independent partitions score zero nmi") {
    std::vector<int> pred = {0, 0, 1, 1};
    std::vector<int> truth = {0, 1, 0, 1};
    REQUIRE(nmi(pred, truth) == Approx(0.0).margin(1e-12));
    REQUIRE(ari(pred, truth) == Approx(oracles::ari_ref(pred, truth)).margin(1e-12));
}

TEST_CASE("two single-cluster partitions agree perfectly") {
    std::vector<int> pred = {7, 7, 7};
    std::vector<int> truth = {1, 1, 1};
    REQUIRE(nmi(pred, truth) == 1.0);
    REQUIRE(ari(pred, truth) == 1.0);
}

TEST_CASE("nmi and ari match their oracles on random partitions") {
    RngStream s = Rng(91).stream("metrics");
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 2 + s.uniform_index(49);
        std::vector<int> pred = random_labels(n, 1 + s.uniform_index(5), s);
        std::vector<int> truth = random_labels(n, 1 + s.uniform_index(5), s);
        REQUIRE(nmi(pred, truth) == Approx(oracles::nmi_ref(pred, truth)).margin(1e-12));
        REQUIRE(ari(pred, truth) == Approx(oracles::ari_ref(pred, truth)).margin(1e-12));
    }
}

TEST_CASE("nmi and ari are symmetric and renaming-invariant") {
    RngStream s = Rng(92).stream("metrics");
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 5 + s.uniform_index(30);
        std::vector<int> pred = random_labels(n, 4, s);
        std::vector<int> truth = random_labels(n, 3, s);
        REQUIRE(nmi(pred, truth) == Approx(nmi(truth, pred)).margin(1e-12));
        REQUIRE(ari(pred, truth) == Approx(ari(truth, pred)).margin(1e-12));
        auto perm = s.permutation(4);
        std::vector<int> renamed(n);
        for (std::size_t i = 0; i < n; ++i) renamed[i] = static_cast<int>(perm[pred[i]]);
        REQUIRE(nmi(renamed, truth) == Approx(nmi(pred, truth)).margin(1e-12));
        REQUIRE(ari(renamed, truth) == Approx(ari(pred, truth)).margin(1e-12));
    }
}

TEST_CASE("length mismatches are rejected") {
    REQUIRE_THROWS_AS(nmi({0, 1}, {0, 1, 2}), DataError);
    REQUIRE_THROWS_AS(ari({0, 1}, {0}), DataError);
}

TEST_CASE("clustering one-hot class rows recovers the labels every run") {
    std::vector<int> y = {0, 1, 2, 0, 1, 2, 0, 1, 2, 0};
    DenseMatrix H(10, 3);
    for (std::size_t i = 0; i < 10; ++i) H(i, y[i]) = 1.0;
    RngStream s = Rng(93).stream("ce");
    ClusteringStats cs = clustering_eval(H, y, 3, 10, s);
    REQUIRE(cs.nmi.mean == Approx(1.0).margin(1e-12));
    REQUIRE(cs.nmi.stddev == Approx(0.0).margin(1e-12));
    REQUIRE(cs.ari.mean == Approx(1.0).margin(1e-12));
    REQUIRE(cs.nmi.runs.size() == 10);
}

TEST_CASE("clustering random embeddings stays near chance") {
    RngStream s = Rng(94).stream("ce");
    const std::size_t n = 300;
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<int>(i % 3);
    DenseMatrix H = random_matrix(n, 8, s);
    ClusteringStats cs = clustering_eval(H, y, 3, 5, s);
    REQUIRE(cs.nmi.mean < 0.1);
}

TEST_CASE("probe reaches perfect accuracy on separated blobs") {
    RngStream s = Rng(95).stream("probe");
    const std::size_t n = 60;
    std::vector<int> y(n);
    DenseMatrix H(n, 4);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = static_cast<int>(i % 2);
        for (std::size_t j = 0; j < 4; ++j)
            H(i, j) = (y[i] == 0 ? 5.0 : -5.0) + 0.1 * s.normal();
    }
    Graph g(n, {}, H, y);
    Split split = make_split(g, SplitSpec{.mode = SplitMode::Proportions}, 3);
    Stats acc = linear_probe(H, y, split, 1e-4, 3, s);
    REQUIRE(acc.mean == 1.0);
    REQUIRE(acc.stddev == 0.0);
}

TEST_CASE("probe on one-hot class rows is perfect") {
    const std::size_t n = 50;
    std::vector<int> y(n);
    DenseMatrix H(n, 3);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = static_cast<int>(i % 3);
        H(i, y[i]) = 1.0;
    }
    Graph g(n, {}, H, y);
    Split split = make_split(g, SplitSpec{.mode = SplitMode::Proportions, .train_frac = 0.2},
                             5);
    RngStream s = Rng(96).stream("probe");
    Stats acc = linear_probe(H, y, split, 1e-4, 2, s);
    REQUIRE(acc.mean == 1.0);
}

TEST_CASE("probe on shuffled labels sits at chance level") {
    RngStream s = Rng(97).stream("probe");
    const std::size_t n = 150;
    DenseMatrix H = random_matrix(n, 6, s);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<int>(s.uniform_index(3));
    Graph g(n, {}, H, y);
    Split split = make_split(
        g, SplitSpec{.mode = SplitMode::Proportions, .train_frac = 0.2, .val_frac = 0.2}, 7);
    Stats acc = linear_probe(H, y, split, 1e-4, 1, s, ProbeOptions{.epochs = 150});
    const double m = static_cast<double>(split.test_idx.size());
    const double band = 3.0 * std::sqrt(m * (1.0 / 3.0) * (2.0 / 3.0)) / m;
    REQUIRE(std::abs(acc.mean - 1.0 / 3.0) < band);
}

TEST_CASE("probe is deterministic given the stream") {
    RngStream s1 = Rng(98).stream("probe");
    RngStream s2 = Rng(98).stream("probe");
    DenseMatrix H = random_matrix(40, 5, s1);
    DenseMatrix H2 = random_matrix(40, 5, s2);  // keep streams aligned
    std::vector<int> y(40);
    for (std::size_t i = 0; i < 40; ++i) y[i] = static_cast<int>(i % 2);
    Graph g(40, {}, H, y);
    Split split = make_split(g, SplitSpec{.mode = SplitMode::Proportions, .train_frac = 0.3,
                                          .val_frac = 0.2},
                             1);
    Stats a = linear_probe(H, y, split, 1e-4, 3, s1, ProbeOptions{.epochs = 50});
    Stats b = linear_probe(H2, y, split, 1e-4, 3, s2, ProbeOptions{.epochs = 50});
    REQUIRE(a.runs == b.runs);
}

TEST_CASE("probe accuracy is unchanged under a feature permutation with permuted init") {
    RngStream s = Rng(99).stream("probe");
    const std::size_t n = 40, d = 6;
    std::vector<int> y(n);
    DenseMatrix H(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = static_cast<int>(i % 2);
        for (std::size_t j = 0; j < d; ++j) H(i, j) = (y[i] ? 1.0 : -1.0) + 0.3 * s.normal();
    }
    Graph g(n, {}, H, y);
    Split split = make_split(g, SplitSpec{.mode = SplitMode::Proportions, .train_frac = 0.3,
                                          .val_frac = 0.2},
                             2);
    DenseMatrix W0 = random_matrix(d, 2, s, 0.01);
    DenseMatrix b0(1, 2);

    auto perm = s.permutation(d);  // column j -> perm[j]
    DenseMatrix Hp(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) Hp(i, perm[j]) = H(i, j);
    DenseMatrix W0p(d, 2);
    for (std::size_t j = 0; j < d; ++j)
        for (std::size_t c = 0; c < 2; ++c) W0p(perm[j], c) = W0(j, c);

    ProbeOptions opts{.epochs = 80};
    auto r1 = linear_probe_single(H, y, split, 1e-4, opts, W0, b0);
    auto r2 = linear_probe_single(Hp, y, split, 1e-4, opts, W0p, b0);
    REQUIRE(r1.test_accuracy == r2.test_accuracy);
}

TEST_CASE("single-class training split is a degenerate probe") {
    DenseMatrix H = DenseMatrix(6, 2, 1.0);
    std::vector<int> y = {0, 0, 0, 1, 1, 1};
    Split split{{0, 1, 2}, {3}, {4, 5}};
    RngStream s = Rng(100).stream("probe");
    REQUIRE_THROWS_AS(linear_probe(H, y, split, 1e-4, 1, s), ConfigError);
}

TEST_CASE("saliency bins are flat at 1 on an all-intra graph") {
    Graph g(6, {{0, 1}, {1, 2}, {3, 4}, {4, 5}}, DenseMatrix(6, 1));
    std::vector<int> y = {0, 0, 0, 1, 1, 1};
    EdgeSaliency s{{0.9, 0.4, 0.7, 0.2}};
    SaliencyBinCurve curve = saliency_homophily_bins(s, g, y, 2);
    REQUIRE(curve.homophily.size() == 2);
    REQUIRE(curve.homophily[0] == 1.0);
    REQUIRE(curve.homophily[1] == 1.0);
}

TEST_CASE("saliency bins separate constructed intra and inter edges") {
    // intra-class edges get higher saliency than inter-class ones
    Graph g(6, {{0, 1}, {1, 2}, {3, 4}, {0, 3}, {1, 4}, {2, 5}}, DenseMatrix(6, 1));
    std::vector<int> y = {0, 0, 0, 1, 1, 1};
    EdgeSaliency s{{0.9, 0.8, 0.95, 0.1, 0.2, 0.05}};
    SaliencyBinCurve curve = saliency_homophily_bins(s, g, y, 3);
    REQUIRE(curve.homophily[0] == 1.0);
    REQUIRE(curve.homophily[1] == 0.0);
    REQUIRE(curve.bin_start == std::vector<std::size_t>{0, 3});
}

TEST_CASE("short last bin is averaged over its own size") {
    Graph g(4, {{0, 1}, {1, 2}, {2, 3}}, DenseMatrix(4, 1));
    std::vector<int> y = {0, 0, 1, 1};
    EdgeSaliency s{{0.9, 0.5, 0.8}};
    SaliencyBinCurve curve = saliency_homophily_bins(s, g, y, 2);
    REQUIRE(curve.homophily.size() == 2);
    // ranked: (0,1) intra, (2,3) intra | (1,2) inter
    REQUIRE(curve.homophily[0] == 1.0);
    REQUIRE(curve.homophily[1] == 0.0);
}

TEST_CASE("saliency bins reject an edgeless graph") {
    Graph g(3, {}, DenseMatrix(3, 1));
    EdgeSaliency s;
    REQUIRE_THROWS_AS(saliency_homophily_bins(s, g, {0, 1, 0}, 5), NumericError);
}
