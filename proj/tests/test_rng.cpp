#include <catch2/catch.hpp>

#include "homogcl/rng.hpp"

using namespace homogcl;

TEST_CASE("equal seed and label give identical streams") {
    Rng a(42), b(42);
    RngStream s1 = a.stream("x");
    RngStream s2 = b.stream("x");
    for (int i = 0; i < 100; ++i) REQUIRE(s1.uniform() == s2.uniform());
}

TEST_CASE("streams are independent of draw order elsewhere") {
    Rng rng(7);
    RngStream burn = rng.stream("other");
    for (int i = 0; i < 1000; ++i) burn.uniform();
    RngStream s1 = rng.stream("target");
    RngStream s2 = Rng(7).stream("target");
    REQUIRE(s1.uniform() == s2.uniform());
}

TEST_CASE("different labels give different streams") {
    Rng rng(3);
    RngStream s1 = rng.stream("a");
    RngStream s2 = rng.stream("b");
    bool differs = false;
    for (int i = 0; i < 10; ++i) differs |= (s1.uniform() != s2.uniform());
    REQUIRE(differs);
}

TEST_CASE("degenerate bernoulli draws") {
    RngStream s = Rng(1).stream("bern");
    for (int i = 0; i < 200; ++i) REQUIRE_FALSE(s.bernoulli(0.0));
    for (int i = 0; i < 200; ++i) REQUIRE(s.bernoulli(1.0));
}

TEST_CASE("uniform mean matches CLT bound") {
    RngStream s = Rng(11).stream("u");
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) sum += s.uniform();
    REQUIRE(std::abs(sum / n - 0.5) < 0.01);
}

TEST_CASE("normal draws have sane moments") {
    RngStream s = Rng(13).stream("n");
    double sum = 0.0, sq = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double x = s.normal();
        sum += x;
        sq += x * x;
    }
    REQUIRE(std::abs(sum / n) < 0.02);
    REQUIRE(std::abs(sq / n - 1.0) < 0.03);
}

TEST_CASE("permutation covers every index once") {
    RngStream s = Rng(5).stream("perm");
    auto p = s.permutation(257);
    std::vector<bool> seen(257, false);
    for (std::size_t i : p) {
        REQUIRE(i < 257);
        REQUIRE_FALSE(seen[i]);
        seen[i] = true;
    }
}
