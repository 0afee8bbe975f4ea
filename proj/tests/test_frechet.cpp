#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "topoplan/frechet.hpp"
#include "topoplan/rng.hpp"

using namespace topoplan;

namespace {

diagram make_diagram(std::vector<diagram_point> pts) {
    diagram d;
    d.points = std::move(pts);
    d.k = static_cast<int>(d.points.size());
    return d;
}

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

std::vector<int> all_seeds(size_t n) {
    std::vector<int> seeds(n);
    std::iota(seeds.begin(), seeds.end(), 0);
    return seeds;
}

} // namespace

TEST_CASE("functional of the sole ensemble member is zero") {
    auto d = make_diagram({{0.2, death_infinity, 0}, {0.3, 0.6, 1}});
    CHECK(frechet_functional(d, {d}) == doctest::Approx(0.0));
    CHECK(frechet_functional(d, {d, d, d}) == doctest::Approx(0.0));
}

TEST_CASE("functional of two forced infinite matchings") {
    auto candidate = make_diagram({{0.0, death_infinity, 0}});
    std::vector<diagram> ensemble = {make_diagram({{0.0, death_infinity, 0}}),
                                     make_diagram({{0.2, death_infinity, 0}})};
    CHECK(frechet_functional(candidate, ensemble) == doctest::Approx(0.02)); // (0 + .04)/2
}

TEST_CASE("update averages matched targets and diagonal projections") {
    // Candidate point (.2,.4); matched to (.2,.4) in D1 and unmatched for the
    // diagram whose finite points are too far: projected to (.3,.3).
    auto candidate = make_diagram({{0.1, death_infinity, 0}, {0.2, 0.4, 1}});
    auto d1 = make_diagram({{0.1, death_infinity, 0}, {0.2, 0.4, 1}});
    auto d2 = make_diagram({{0.1, death_infinity, 0}});
    auto next = frechet_update(candidate, {d1, d2});
    REQUIRE(next.points.size() == 2);
    CHECK(next.points[0].birth == doctest::Approx(0.1));
    CHECK(next.points[0].infinite());
    CHECK(next.points[1].birth == doctest::Approx(0.25)); // mean of .2 and .3
    CHECK(next.points[1].death == doctest::Approx(0.35)); // mean of .4 and .3
}

TEST_CASE("update on an ensemble of identical diagrams is the identity") {
    auto d = make_diagram({{0.15, death_infinity, 0}, {0.3, 0.7, 1}, {0.4, 0.5, 2}});
    auto next = frechet_update(d, {d, d, d, d});
    REQUIRE(next.points.size() == d.points.size());
    for (size_t i = 0; i < d.points.size(); ++i) {
        CHECK(next.points[i].birth == doctest::Approx(d.points[i].birth));
        if (!d.points[i].infinite())
            CHECK(next.points[i].death == doctest::Approx(d.points[i].death));
    }
}

TEST_CASE("mean of identical diagrams is that diagram with functional zero") {
    auto d = make_diagram({{0.15, death_infinity, 0}, {0.3, 0.7, 1}});
    std::vector<diagram> ensemble(5, d);
    auto result = frechet_mean(ensemble, all_seeds(5));
    CHECK(result.functional_value == doctest::Approx(0.0));
    REQUIRE(result.mean.points.size() == 2);
    CHECK(result.mean.points[0].birth == doctest::Approx(0.15));
    CHECK(result.mean.points[1].birth == doctest::Approx(0.3));
    CHECK(result.mean.points[1].death == doctest::Approx(0.7));
    CHECK(result.converged);
}

TEST_CASE("mean of two one-point diagrams is the midpoint of births") {
    std::vector<diagram> ensemble = {make_diagram({{0.2, death_infinity, 0}}),
                                     make_diagram({{0.6, death_infinity, 0}})};
    auto result = frechet_mean(ensemble, all_seeds(2));
    REQUIRE(result.mean.points.size() == 1);
    CHECK(result.mean.points[0].birth == doctest::Approx(0.4));
    CHECK(result.mean.points[0].infinite());
}

TEST_CASE("per-iteration functional is non-increasing for every seed") {
    rng r(314);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<diagram> ensemble;
        for (int i = 0; i < 8; ++i) ensemble.push_back(random_diagram(r, 4));
        for (int seed = 0; seed < 8; ++seed) {
            auto result = frechet_mean(ensemble, {seed}, 50, 1e-10);
            for (size_t i = 1; i < result.per_iteration_functional.size(); ++i)
                CHECK(result.per_iteration_functional[i] <=
                      result.per_iteration_functional[i - 1] + 1e-12);
        }
    }
}

TEST_CASE("functional_value equals the mean squared cost of final matchings") {
    rng r(2718);
    std::vector<diagram> ensemble;
    for (int i = 0; i < 10; ++i) ensemble.push_back(random_diagram(r, 4));
    auto result = frechet_mean(ensemble, stratified_seeds(10, 4));
    double sum = 0;
    for (size_t j = 0; j < ensemble.size(); ++j) {
        double recomputed = matching_cost(result.final_matchings[j], result.mean, ensemble[j]);
        sum += recomputed * recomputed;
    }
    CHECK(result.functional_value == doctest::Approx(sum / ensemble.size()).epsilon(1e-12));
}

TEST_CASE("ensemble order does not change the selected functional value") {
    rng r(55);
    std::vector<diagram> ensemble;
    for (int i = 0; i < 9; ++i) ensemble.push_back(random_diagram(r, 3));
    auto base = frechet_mean(ensemble, all_seeds(9));

    std::vector<diagram> shuffled = ensemble;
    std::reverse(shuffled.begin(), shuffled.end());
    auto reversed = frechet_mean(shuffled, all_seeds(9));
    CHECK(base.functional_value == doctest::Approx(reversed.functional_value).epsilon(1e-9));
}

TEST_CASE("translation equivariance of one-point ensembles") {
    rng r(66);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<diagram> ensemble;
        int n = 3 + static_cast<int>(r.below(4));
        for (int i = 0; i < n; ++i)
            ensemble.push_back(make_diagram({{r.uniform01() * 0.5, death_infinity, 0}}));
        double c = r.uniform01() * 0.4;
        std::vector<diagram> shifted = ensemble;
        for (auto& d : shifted) d.points[0].birth += c;

        auto base = frechet_mean(ensemble, all_seeds(n));
        auto moved = frechet_mean(shifted, all_seeds(n));
        CHECK(moved.mean.points[0].birth ==
              doctest::Approx(base.mean.points[0].birth + c).epsilon(1e-9));
    }
}

TEST_CASE("stratified seed selection") {
    CHECK(stratified_seeds(5, 10) == std::vector<int>{0, 1, 2, 3, 4});
    auto s = stratified_seeds(100, 4);
    CHECK(s == std::vector<int>{0, 25, 50, 75});
}

TEST_CASE("incompatible infinite counts and bad seeds are rejected") {
    auto one_inf = make_diagram({{0.2, death_infinity, 0}});
    auto two_inf = make_diagram({{0.2, death_infinity, 0}, {0.4, death_infinity, 1}});
    CHECK_THROWS_AS(frechet_functional(one_inf, {two_inf}), error);
    CHECK_THROWS_AS(frechet_mean({one_inf}, {3}), error);
    CHECK_THROWS_AS(frechet_mean({}, {0}), error);
}
