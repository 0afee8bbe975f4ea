#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "topoplan/error.hpp"
#include "topoplan/hungarian.hpp"
#include "topoplan/persistence.hpp"

namespace topoplan {

// Optimal partial bijection between two diagrams. `pairs` holds point indices
// into each diagram; unmatched points retire to the diagonal. Infinite-death
// points only ever pair with infinite-death points, on births.
struct matching {
    double p = 2.0; // infinity() for bottleneck
    double cost = 0.0;
    bool infinite_cost = false; // infinite-death point counts differ
    std::vector<std::pair<int, int>> pairs;
    std::vector<int> unmatched1, unmatched2;
};

// l_p distance from (b,d) to the nearest diagonal point, attained at the
// midpoint: (d-b) * 2^(1/p - 1).
inline double diagonal_distance(const diagram_point& pt, double p) {
    if (pt.infinite())
        throw error(errc::infinite_death, "infinite-death point has no diagonal projection");
    const double gap = pt.death - pt.birth;
    if (std::isinf(p)) return gap / 2.0;
    return gap * std::pow(2.0, 1.0 / p - 1.0);
}

namespace detail {

inline double lp_pow(const diagram_point& a, const diagram_point& b, double p) {
    return std::pow(std::fabs(a.birth - b.birth), p) + std::pow(std::fabs(a.death - b.death), p);
}

inline double linf(const diagram_point& a, const diagram_point& b) {
    return std::max(std::fabs(a.birth - b.birth), std::fabs(a.death - b.death));
}

struct split_points {
    std::vector<int> finite, infinite;
};

inline split_points split(const diagram& d) {
    split_points s;
    for (int i = 0; i < static_cast<int>(d.points.size()); ++i)
        (d.points[i].infinite() ? s.infinite : s.finite).push_back(i);
    // Infinite points paired in birth order; sorted pairing is optimal on a
    // line for any convex cost and for the max.
    std::sort(s.infinite.begin(), s.infinite.end(), [&](int a, int b) {
        return d.points[a].birth < d.points[b].birth;
    });
    return s;
}

} // namespace detail

// The cost formula evaluated on a given partial bijection. Both metrics
// report matching_cost of the optimal matching they return, so recomputing
// from the matching reproduces the reported cost exactly.
inline double matching_cost(const matching& m, const diagram& d1, const diagram& d2) {
    if (m.infinite_cost) return std::numeric_limits<double>::infinity();
    const bool is_inf = std::isinf(m.p);
    double acc = 0.0;
    auto fold = [&](double powered_or_max) {
        if (is_inf)
            acc = std::max(acc, powered_or_max);
        else
            acc += powered_or_max;
    };
    for (auto [i, j] : m.pairs) {
        const auto& a = d1.points[i];
        const auto& b = d2.points[j];
        if (a.infinite() != b.infinite())
            throw error(errc::infinite_death, "matching pairs an infinite point with a finite one");
        if (a.infinite())
            fold(is_inf ? std::fabs(a.birth - b.birth) : std::pow(std::fabs(a.birth - b.birth), m.p));
        else
            fold(is_inf ? detail::linf(a, b) : detail::lp_pow(a, b, m.p));
    }
    for (int i : m.unmatched1)
        fold(is_inf ? diagonal_distance(d1.points[i], m.p)
                    : std::pow(diagonal_distance(d1.points[i], m.p), m.p));
    for (int j : m.unmatched2)
        fold(is_inf ? diagonal_distance(d2.points[j], m.p)
                    : std::pow(diagonal_distance(d2.points[j], m.p), m.p));
    return is_inf ? acc : std::pow(acc, 1.0 / m.p);
}

// Wasserstein p-distance (finite p) via the Hungarian algorithm on the
// (n+m) x (n+m) augmented cost matrix, each point free to retire to the
// diagonal at its diagonal distance.
inline matching wasserstein(const diagram& d1, const diagram& d2, double p) {
    if (std::isinf(p)) throw error(errc::invalid_config, "use bottleneck() for p = infinity");
    matching m;
    m.p = p;

    auto s1 = detail::split(d1);
    auto s2 = detail::split(d2);
    if (s1.infinite.size() != s2.infinite.size()) {
        m.infinite_cost = true;
        m.cost = std::numeric_limits<double>::infinity();
        for (int i = 0; i < static_cast<int>(d1.points.size()); ++i) m.unmatched1.push_back(i);
        for (int i = 0; i < static_cast<int>(d2.points.size()); ++i) m.unmatched2.push_back(i);
        return m;
    }

    for (size_t i = 0; i < s1.infinite.size(); ++i)
        m.pairs.emplace_back(s1.infinite[i], s2.infinite[i]);

    const int n = static_cast<int>(s1.finite.size());
    const int mm = static_cast<int>(s2.finite.size());
    if (n + mm > 0) {
        std::vector<std::vector<double>> cost(n + mm, std::vector<double>(n + mm, 0.0));
        for (int i = 0; i < n; ++i) {
            const auto& a = d1.points[s1.finite[i]];
            const double diag = std::pow(diagonal_distance(a, p), p);
            for (int j = 0; j < mm; ++j)
                cost[i][j] = detail::lp_pow(a, d2.points[s2.finite[j]], p);
            for (int j = mm; j < n + mm; ++j) cost[i][j] = diag;
        }
        for (int i = n; i < n + mm; ++i)
            for (int j = 0; j < mm; ++j)
                cost[i][j] = std::pow(diagonal_distance(d2.points[s2.finite[j]], p), p);

        auto assign = solve_assignment(cost);
        std::vector<char> covered(mm, 0);
        for (int i = 0; i < n; ++i) {
            if (assign[i] < mm) {
                m.pairs.emplace_back(s1.finite[i], s2.finite[assign[i]]);
                covered[assign[i]] = 1;
            } else {
                m.unmatched1.push_back(s1.finite[i]);
            }
        }
        for (int j = 0; j < mm; ++j)
            if (!covered[j]) m.unmatched2.push_back(s2.finite[j]);
    }

    m.cost = matching_cost(m, d1, d2);
    return m;
}

// Bottleneck distance: binary search over the sorted candidate costs with a
// bipartite feasibility matching; exact because the optimum is one of the
// finitely many candidate values.
inline matching bottleneck(const diagram& d1, const diagram& d2) {
    matching m;
    m.p = std::numeric_limits<double>::infinity();

    auto s1 = detail::split(d1);
    auto s2 = detail::split(d2);
    if (s1.infinite.size() != s2.infinite.size()) {
        m.infinite_cost = true;
        m.cost = std::numeric_limits<double>::infinity();
        for (int i = 0; i < static_cast<int>(d1.points.size()); ++i) m.unmatched1.push_back(i);
        for (int i = 0; i < static_cast<int>(d2.points.size()); ++i) m.unmatched2.push_back(i);
        return m;
    }

    for (size_t i = 0; i < s1.infinite.size(); ++i)
        m.pairs.emplace_back(s1.infinite[i], s2.infinite[i]);

    const int n = static_cast<int>(s1.finite.size());
    const int mm = static_cast<int>(s2.finite.size());
    double finite_part = 0.0;
    std::vector<int> finite_match(n, -1); // finite index in d1 -> finite index in d2 or -1

    if (n + mm > 0) {
        std::vector<double> diag1(n), diag2(mm);
        for (int i = 0; i < n; ++i)
            diag1[i] = diagonal_distance(d1.points[s1.finite[i]], m.p);
        for (int j = 0; j < mm; ++j)
            diag2[j] = diagonal_distance(d2.points[s2.finite[j]], m.p);

        std::vector<double> candidates;
        candidates.insert(candidates.end(), diag1.begin(), diag1.end());
        candidates.insert(candidates.end(), diag2.begin(), diag2.end());
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < mm; ++j)
                candidates.push_back(detail::linf(d1.points[s1.finite[i]], d2.points[s2.finite[j]]));
        std::sort(candidates.begin(), candidates.end());
        candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

        // Perfect matching on rows = points of d1 + diagonal slots for d2,
        // cols = points of d2 + diagonal slots for d1, edges of cost <= c.
        auto feasible_match = [&](double c) {
            bipartite_matcher bm(n + mm, mm + n);
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < mm; ++j)
                    if (detail::linf(d1.points[s1.finite[i]], d2.points[s2.finite[j]]) <= c)
                        bm.add_edge(i, j);
                if (diag1[i] <= c)
                    for (int j = mm; j < mm + n; ++j) bm.add_edge(i, j);
            }
            for (int i = n; i < n + mm; ++i) {
                if (diag2[i - n] <= c) bm.add_edge(i, i - n);
                for (int j = mm; j < mm + n; ++j) bm.add_edge(i, j);
            }
            return bm;
        };

        int lo = 0, hi = static_cast<int>(candidates.size()) - 1;
        while (lo < hi) {
            int mid = (lo + hi) / 2;
            auto bm = feasible_match(candidates[mid]);
            if (bm.solve() == n + mm)
                hi = mid;
            else
                lo = mid + 1;
        }
        finite_part = candidates.empty() ? 0.0 : candidates[lo];

        auto bm = feasible_match(finite_part);
        bm.solve();
        const auto& right = bm.right_match();
        for (int j = 0; j < mm; ++j)
            if (right[j] >= 0 && right[j] < n) finite_match[right[j]] = j;
    }

    for (int i = 0; i < n; ++i) {
        if (finite_match[i] >= 0)
            m.pairs.emplace_back(s1.finite[i], s2.finite[finite_match[i]]);
        else
            m.unmatched1.push_back(s1.finite[i]);
    }
    std::vector<char> covered(mm, 0);
    for (int i = 0; i < n; ++i)
        if (finite_match[i] >= 0) covered[finite_match[i]] = 1;
    for (int j = 0; j < mm; ++j)
        if (!covered[j]) m.unmatched2.push_back(s2.finite[j]);

    m.cost = matching_cost(m, d1, d2);
    return m;
}

} // namespace topoplan
