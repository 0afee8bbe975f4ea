#pragma once

#include <cmath>
#include <vector>

#include "topoplan/error.hpp"
#include "topoplan/metrics.hpp"
#include "topoplan/parallel.hpp"
#include "topoplan/persistence.hpp"

namespace topoplan {

struct frechet_result {
    diagram mean; // no anchors
    double functional_value = 0.0;
    int seed_id = -1;
    int iterations = 0;
    bool converged = false;
    std::vector<double> per_iteration_functional;
    std::vector<matching> final_matchings; // mean -> each ensemble diagram
};

namespace detail {

inline void check_infinite_counts(const diagram& candidate, const std::vector<diagram>& diagrams) {
    auto count_inf = [](const diagram& d) {
        int c = 0;
        for (const auto& pt : d.points) c += pt.infinite();
        return c;
    };
    const int expected = count_inf(candidate);
    for (const auto& d : diagrams)
        if (count_inf(d) != expected)
            throw error(errc::infinite_death,
                        "diagrams must share the candidate's infinite-death point count");
}

inline std::vector<matching> match_all(const diagram& candidate,
                                       const std::vector<diagram>& diagrams, int threads) {
    std::vector<matching> out(diagrams.size());
    parallel_for(static_cast<long>(diagrams.size()), threads,
                 [&](long j) { out[j] = wasserstein(candidate, diagrams[j], 2.0); });
    return out;
}

inline double functional_of(const std::vector<matching>& matchings) {
    double sum = 0.0;
    for (const auto& m : matchings) sum += m.cost * m.cost;
    return sum / static_cast<double>(matchings.size());
}

} // namespace detail

// Mean of squared 2-Wasserstein distances from the candidate to the sample.
inline double frechet_functional(const diagram& candidate, const std::vector<diagram>& diagrams,
                                 int threads = 1) {
    if (diagrams.empty()) throw error(errc::invalid_config, "empty diagram ensemble");
    detail::check_infinite_counts(candidate, diagrams);
    return detail::functional_of(detail::match_all(candidate, diagrams, threads));
}

// One update step: match the candidate to every diagram, extend each partial
// bijection by sending unmatched candidate points to their nearest diagonal
// point, then move every candidate point to the mean of its images.
// Infinite-death points average births only and keep death = infinity.
inline diagram frechet_update(const diagram& candidate, const std::vector<diagram>& diagrams,
                              int threads = 1) {
    if (diagrams.empty()) throw error(errc::invalid_config, "empty diagram ensemble");
    detail::check_infinite_counts(candidate, diagrams);
    auto matchings = detail::match_all(candidate, diagrams, threads);

    const int n = static_cast<int>(diagrams.size());
    const int pts = static_cast<int>(candidate.points.size());
    std::vector<double> sum_b(pts, 0.0), sum_d(pts, 0.0);
    std::vector<std::pair<double, double>> first_image(pts);
    std::vector<char> constant_image(pts, 1);
    for (int j = 0; j < n; ++j) {
        std::vector<int> image(pts, -1);
        for (auto [c, t] : matchings[j].pairs) image[c] = t;
        for (int c = 0; c < pts; ++c) {
            const auto& pt = candidate.points[c];
            double img_b, img_d;
            if (image[c] >= 0) {
                const auto& target = diagrams[j].points[image[c]];
                img_b = target.birth;
                img_d = pt.infinite() ? 0.0 : target.death;
            } else {
                img_b = img_d = (pt.birth + pt.death) / 2.0;
            }
            sum_b[c] += img_b;
            sum_d[c] += img_d;
            if (j == 0)
                first_image[c] = {img_b, img_d};
            else if (first_image[c] != std::pair(img_b, img_d))
                constant_image[c] = 0;
        }
    }

    diagram next;
    next.k = candidate.k;
    next.points.reserve(pts);
    for (int c = 0; c < pts; ++c) {
        const bool inf_pt = candidate.points[c].infinite();
        // A constant image set averages to itself exactly.
        const double mean_b = constant_image[c] ? first_image[c].first : sum_b[c] / n;
        const double mean_d = constant_image[c] ? first_image[c].second : sum_d[c] / n;
        next.points.push_back({mean_b, inf_pt ? death_infinity : mean_d, -1});
    }
    return next;
}

// Iterates frechet_update from each seed until the relative functional
// decrease drops below tol (or max_iter), then keeps the best local minimum
// across seeds. Zero-persistence points are pruned from the final mean.
inline frechet_result frechet_mean(const std::vector<diagram>& diagrams,
                                   const std::vector<int>& seed_indices, int max_iter = 200,
                                   double tol = 1e-8, int threads = 1) {
    if (diagrams.empty()) throw error(errc::invalid_config, "empty diagram ensemble");
    if (seed_indices.empty()) throw error(errc::invalid_config, "no seeds given");

    frechet_result best;
    bool have_best = false;

    for (int seed : seed_indices) {
        if (seed < 0 || seed >= static_cast<int>(diagrams.size()))
            throw error(errc::invalid_config, "seed index out of range", seed);

        diagram candidate = diagrams[seed];
        detail::check_infinite_counts(candidate, diagrams);

        frechet_result r;
        r.seed_id = seed;
        auto matchings = detail::match_all(candidate, diagrams, threads);
        double current = detail::functional_of(matchings);
        r.per_iteration_functional.push_back(current);

        for (int it = 0; it < max_iter; ++it) {
            diagram next = frechet_update(candidate, diagrams, threads);
            auto next_matchings = detail::match_all(next, diagrams, threads);
            const double value = detail::functional_of(next_matchings);
            r.per_iteration_functional.push_back(value);
            candidate = std::move(next);
            matchings = std::move(next_matchings);
            ++r.iterations;
            if (current - value <= tol * std::max(current, 1e-300)) {
                r.converged = true;
                current = value;
                break;
            }
            current = value;
        }

        // Points that collapsed onto the diagonal are trivial features.
        diagram pruned;
        pruned.k = candidate.k;
        for (const auto& pt : candidate.points)
            if (pt.infinite() || pt.persistence() > 1e-12) pruned.points.push_back(pt);
        if (pruned.points.size() != candidate.points.size()) {
            candidate = std::move(pruned);
            matchings = detail::match_all(candidate, diagrams, threads);
            current = detail::functional_of(matchings);
        }

        r.mean = std::move(candidate);
        r.functional_value = current;
        r.final_matchings = std::move(matchings);

        if (!have_best || r.functional_value < best.functional_value) {
            best = std::move(r);
            have_best = true;
        }
    }
    return best;
}

// Evenly spaced seed subset; the paper-style "every diagram as a seed" is the
// count == n case.
inline std::vector<int> stratified_seeds(int n, int count) {
    std::vector<int> seeds;
    if (count >= n) {
        seeds.resize(n);
        for (int i = 0; i < n; ++i) seeds[i] = i;
        return seeds;
    }
    for (int i = 0; i < count; ++i)
        seeds.push_back(static_cast<int>(static_cast<long long>(i) * n / count));
    return seeds;
}

} // namespace topoplan
