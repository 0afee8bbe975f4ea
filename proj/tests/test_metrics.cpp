#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "topoplan/metrics.hpp"
#include "topoplan/rng.hpp"

using namespace topoplan;

namespace {

diagram make_diagram(std::vector<diagram_point> pts) {
    diagram d;
    d.points = std::move(pts);
    d.k = static_cast<int>(d.points.size());
    return d;
}

// Connected-graph style diagram: one infinite point plus finite points.
diagram random_diagram(topoplan::rng& r, int max_finite) {
    std::vector<diagram_point> pts;
    pts.push_back({r.uniform01() * 0.5, death_infinity, 0});
    int n = static_cast<int>(r.below(max_finite + 1));
    for (int i = 0; i < n; ++i) {
        double b = r.uniform01();
        double d = b + r.uniform01() * (1.0 - b);
        pts.push_back({b, d, i + 1});
    }
    return make_diagram(std::move(pts));
}

} // namespace

TEST_CASE("diagonal distances") {
    CHECK(diagonal_distance({0.2, 0.6, 0}, std::numeric_limits<double>::infinity()) ==
          doctest::Approx(0.2));
    CHECK(diagonal_distance({0.2, 0.6, 0}, 2.0) == doctest::Approx(0.4 / std::sqrt(2.0)));
    CHECK(diagonal_distance({0.37, 0.37, 0}, 1.0) == doctest::Approx(0.0));
    CHECK(diagonal_distance({0.37, 0.37, 0}, 3.0) == doctest::Approx(0.0));
    CHECK_THROWS_AS(diagonal_distance({0.2, death_infinity, 0}, 2.0), error);
}

TEST_CASE("identical diagrams have zero distance and identity matching") {
    auto d = make_diagram({{0.1, death_infinity, 0}, {0.2, 0.5, 1}, {0.3, 0.4, 2}});
    auto w = wasserstein(d, d, 2.0);
    CHECK(w.cost == doctest::Approx(0.0));
    CHECK(w.pairs.size() == 3);
    CHECK(w.unmatched1.empty());
    CHECK(w.unmatched2.empty());
    CHECK(bottleneck(d, d).cost == doctest::Approx(0.0));
}

TEST_CASE("single forced infinite pairing") {
    auto d1 = make_diagram({{0.0, death_infinity, 0}});
    auto d2 = make_diagram({{0.1, death_infinity, 0}});
    for (double p : {1.0, 2.0, 3.0})
        CHECK(wasserstein(d1, d2, p).cost == doctest::Approx(0.1));
    CHECK(bottleneck(d1, d2).cost == doctest::Approx(0.1));
}

TEST_CASE("bottleneck retires a lone finite point to the diagonal") {
    auto d1 = make_diagram({{0.0, death_infinity, 0}, {0.2, 0.3, 1}});
    auto d2 = make_diagram({{0.0, death_infinity, 0}});
    auto b = bottleneck(d1, d2);
    CHECK(b.cost == doctest::Approx(0.05));
    CHECK(b.unmatched1.size() == 1);
}

TEST_CASE("mismatched infinite point counts flag an infinite distance") {
    auto d1 = make_diagram({{0.0, death_infinity, 0}, {0.5, death_infinity, 1}});
    auto d2 = make_diagram({{0.0, death_infinity, 0}});
    auto w = wasserstein(d1, d2, 2.0);
    CHECK(w.infinite_cost);
    CHECK(std::isinf(w.cost));
    auto b = bottleneck(d1, d2);
    CHECK(b.infinite_cost);
    CHECK(std::isinf(b.cost));
}

TEST_CASE("hungarian matches the exhaustive minimum") {
    rng r(99);
    for (int trial = 0; trial < 200; ++trial) {
        auto d1 = random_diagram(r, 5);
        auto d2 = random_diagram(r, 5);
        auto w = wasserstein(d1, d2, 2.0);
        CHECK(w.cost == doctest::Approx(oracles::exhaustive_matching_cost(d1, d2, 2.0))
                            .epsilon(1e-9));
        auto b = bottleneck(d1, d2);
        CHECK(b.cost ==
              doctest::Approx(oracles::exhaustive_matching_cost(
                                  d1, d2, std::numeric_limits<double>::infinity()))
                  .epsilon(1e-9));
    }
}

TEST_CASE("metric properties on random diagrams") {
    rng r(1234);
    for (int trial = 0; trial < 100; ++trial) {
        auto d1 = random_diagram(r, 4);
        auto d2 = random_diagram(r, 4);
        auto d3 = random_diagram(r, 4);

        // Symmetry.
        CHECK(wasserstein(d1, d2, 2.0).cost ==
              doctest::Approx(wasserstein(d2, d1, 2.0).cost).epsilon(1e-12));
        CHECK(bottleneck(d1, d2).cost == doctest::Approx(bottleneck(d2, d1).cost).epsilon(1e-12));

        // Triangle inequality.
        CHECK(wasserstein(d1, d3, 2.0).cost <=
              wasserstein(d1, d2, 2.0).cost + wasserstein(d2, d3, 2.0).cost + 1e-9);
        CHECK(bottleneck(d1, d3).cost <=
              bottleneck(d1, d2).cost + bottleneck(d2, d3).cost + 1e-9);

        // The reported cost equals the formula recomputed from the matching.
        auto w = wasserstein(d1, d2, 2.0);
        CHECK(w.cost == matching_cost(w, d1, d2));
        auto b = bottleneck(d1, d2);
        CHECK(b.cost == matching_cost(b, d1, d2));

        // Every index appears exactly once across pairs and unmatched lists.
        auto check_partition = [](const matching& m, size_t n1, size_t n2) {
            std::vector<int> seen1(n1, 0), seen2(n2, 0);
            for (auto [i, j] : m.pairs) {
                ++seen1[i];
                ++seen2[j];
            }
            for (int i : m.unmatched1) ++seen1[i];
            for (int j : m.unmatched2) ++seen2[j];
            for (int c : seen1)
                if (c != 1) return false;
            for (int c : seen2)
                if (c != 1) return false;
            return true;
        };
        CHECK(check_partition(w, d1.points.size(), d2.points.size()));
        CHECK(check_partition(b, d1.points.size(), d2.points.size()));
    }
}

TEST_CASE("identity of indiscernibles") {
    rng r(77);
    for (int trial = 0; trial < 50; ++trial) {
        auto d1 = random_diagram(r, 3);
        auto d2 = random_diagram(r, 3);
        bool equal_multisets = d1.points.size() == d2.points.size();
        if (equal_multisets) {
            auto key = [](const diagram_point& p) { return std::pair(p.birth, p.death); };
            std::vector<std::pair<double, double>> a, b;
            for (const auto& pt : d1.points) a.push_back(key(pt));
            for (const auto& pt : d2.points) b.push_back(key(pt));
            std::sort(a.begin(), a.end());
            std::sort(b.begin(), b.end());
            equal_multisets = a == b;
        }
        double cost = wasserstein(d1, d2, 2.0).cost;
        if (equal_multisets)
            CHECK(cost == doctest::Approx(0.0));
        else
            CHECK(cost > 0.0);
    }
}
