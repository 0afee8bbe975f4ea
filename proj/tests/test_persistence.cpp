#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "topoplan/persistence.hpp"
#include "topoplan/rng.hpp"

using namespace topoplan;

TEST_CASE("filtration_order sorts and flags ties") {
    auto r = filtration_order(std::vector<double>{0.3, 0.1, 0.2});
    CHECK(r.order == std::vector<int>{1, 2, 0});
    CHECK_FALSE(r.tie_broken);

    auto tie = filtration_order(std::vector<double>{0.2, 0.2});
    CHECK(tie.order == std::vector<int>{0, 1});
    CHECK(tie.tie_broken);

    CHECK_THROWS_AS(filtration_order(std::vector<double>{0.5, 1.5}), error);
    CHECK_THROWS_AS(filtration_order(std::vector<double>{-0.1, 0.5}), error);
}

TEST_CASE("single district diagram is one infinite point") {
    auto d = diagram_of(1, {}, {0.42});
    REQUIRE(d.points.size() == 1);
    CHECK(d.points[0].birth == 0.42);
    CHECK(d.points[0].infinite());
    CHECK(d.points[0].anchor == 0);
}

TEST_CASE("three-vertex path traces the definition by hand") {
    // F = (.2, .6, .4) on w1-w2-w3: w3 starts a second component at .4 which
    // merges into w1's when w2 appears at .6.
    auto d = diagram_of(3, {{0, 1}, {1, 2}}, {0.2, 0.6, 0.4});
    REQUIRE(d.points.size() == 2);
    CHECK(d.points[0].birth == 0.2);
    CHECK(d.points[0].infinite());
    CHECK(d.points[0].anchor == 0);
    CHECK(d.points[1].birth == 0.4);
    CHECK(d.points[1].death == 0.6);
    CHECK(d.points[1].anchor == 2);
}

TEST_CASE("local minima anchor the points") {
    rng r(11);
    for (int trial = 0; trial < 100; ++trial) {
        int k = 2 + static_cast<int>(r.below(7));
        auto edges = oracles::random_connected_graph(k, 0.4, r);
        auto values = oracles::random_distinct_values(k, r);
        std::vector<std::vector<int>> adj(k);
        for (auto [u, v] : edges) {
            adj[u].push_back(v);
            adj[v].push_back(u);
        }
        auto d = diagram_of(k, edges, values);

        std::vector<int> minima;
        for (int v = 0; v < k; ++v) {
            bool is_min = true;
            for (int u : adj[v]) is_min = is_min && values[v] < values[u];
            if (is_min) minima.push_back(v);
        }
        CHECK(d.points.size() == minima.size());
        for (const auto& pt : d.points) {
            bool found = false;
            for (int v : minima)
                if (pt.anchor == v && pt.birth == values[v]) found = true;
            CHECK(found);
        }
    }
}

TEST_CASE("diagram equals the prefix-component oracle") {
    rng r(5);
    for (int trial = 0; trial < 500; ++trial) {
        int k = 2 + static_cast<int>(r.below(7));
        auto edges = oracles::random_connected_graph(k, 0.35, r);
        auto values = oracles::random_distinct_values(k, r);
        auto fast = diagram_of(k, edges, values);
        auto slow = oracles::prefix_component_diagram(k, edges, values);
        CHECK(oracles::diagrams_equal(fast, slow));
    }
}

TEST_CASE("monotone shift moves births and deaths by the constant") {
    rng r(17);
    for (int trial = 0; trial < 50; ++trial) {
        int k = 3 + static_cast<int>(r.below(5));
        auto edges = oracles::random_connected_graph(k, 0.4, r);
        auto values = oracles::random_distinct_values(k, r);
        double c = 0.0;
        for (double v : values) c = std::max(c, v);
        c = (1.0 - c) * 0.5; // stay inside [0,1]
        std::vector<double> shifted = values;
        for (auto& v : shifted) v += c;

        auto base = diagram_of(k, edges, values);
        auto moved = diagram_of(k, edges, shifted);
        REQUIRE(base.points.size() == moved.points.size());
        for (size_t i = 0; i < base.points.size(); ++i) {
            CHECK(moved.points[i].birth ==
                  doctest::Approx(base.points[i].birth + c).epsilon(1e-12));
            if (!base.points[i].infinite())
                CHECK(moved.points[i].death ==
                      doctest::Approx(base.points[i].death + c).epsilon(1e-12));
        }
    }
}

TEST_CASE("total persistence is invariant under district relabeling") {
    rng r(23);
    for (int trial = 0; trial < 50; ++trial) {
        int k = 3 + static_cast<int>(r.below(5));
        auto edges = oracles::random_connected_graph(k, 0.4, r);
        auto values = oracles::random_distinct_values(k, r);

        std::vector<int> perm(k);
        std::iota(perm.begin(), perm.end(), 0);
        for (int i = k - 1; i > 0; --i) std::swap(perm[i], perm[r.below(i + 1)]);
        std::vector<std::pair<int, int>> redges;
        for (auto [u, v] : edges)
            redges.emplace_back(std::min(perm[u], perm[v]), std::max(perm[u], perm[v]));
        std::vector<double> rvalues(k);
        for (int v = 0; v < k; ++v) rvalues[perm[v]] = values[v];

        auto sum_of = [](const diagram& d) {
            double s = 0;
            for (const auto& pt : d.points)
                if (!pt.infinite()) s += pt.persistence();
            return s;
        };
        CHECK(sum_of(diagram_of(k, edges, values)) ==
              doctest::Approx(sum_of(diagram_of(k, redges, rvalues))).epsilon(1e-12));
    }
}

TEST_CASE("persistence_diagram requires a set filtration and a connected graph") {
    district_graph dg;
    dg.k = 2;
    dg.edges = {{0, 1}};
    dg.adjacency = {{1}, {0}};
    dg.population = {1, 1};
    CHECK_THROWS_AS(persistence_diagram(dg), error);

    CHECK_THROWS_AS(diagram_of(3, {{0, 1}}, {0.1, 0.2, 0.3}), error); // vertex 2 isolated
}

TEST_CASE("nw_quadrant filters by b < .5 < d") {
    diagram d;
    d.k = 4;
    d.points = {{0.3, 0.6, 0}, {0.4, 0.45, 1}, {0.6, 0.9, 2}};
    auto nw = nw_quadrant(d);
    REQUIRE(nw.points.size() == 1);
    CHECK(nw.points[0].birth == 0.3);
    CHECK(nw.points[0].anchor == 0);

    CHECK(nw_quadrant(diagram{}).points.empty());

    diagram inf_d;
    inf_d.points = {{0.49, death_infinity, 3}};
    CHECK(nw_quadrant(inf_d).points.size() == 1);
}
