#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "topoplan/error.hpp"
#include "topoplan/graph.hpp"
#include "topoplan/rng.hpp"

namespace topoplan {

// A Democratic-leaning population center: share boosts decay with grid
// distance from (row, col).
struct city_spec {
    int row = 0, col = 0;
    double radius = 2.0;
    double dem_intensity = 0.3;
};

struct synth_spec {
    int rows = 10, cols = 10;
    std::vector<city_spec> cities;
    long long base_population = 100;
    double population_jitter = 0.05; // fraction of base, uniform
    double base_dem_share = 0.45;
    double turnout = 0.5;
    double target_statewide_dem = -1.0; // < 0: no calibration
    double swing = 0.03; // second election: uniform Republican share shift
    uint64_t seed = 0;
};

// Desk-scale stand-in for real precinct data: a rows x cols grid with
// Democratic support peaking at city centers. Emits two elections, BASE
// (attributes R/D) and SWING (R_SWING/D_SWING), the latter a uniform
// partisan swing of `swing` toward the Republican side. Deterministic
// under the seed.
inline dual_graph synth_state(const synth_spec& spec) {
    if (spec.rows < 2 || spec.cols < 2)
        throw error(errc::invalid_config, "synthetic grid needs at least 2 rows and columns");

    rng r(spec.seed);
    const int n = spec.rows * spec.cols;

    std::vector<long long> pop(n);
    std::vector<double> raw_share(n);
    for (int row = 0; row < spec.rows; ++row) {
        for (int col = 0; col < spec.cols; ++col) {
            const int v = row * spec.cols + col;
            const double jitter = (2.0 * r.uniform01() - 1.0) * spec.population_jitter;
            pop[v] = std::max<long long>(
                1, std::llround(static_cast<double>(spec.base_population) * (1.0 + jitter)));
            double share = spec.base_dem_share;
            for (const auto& city : spec.cities) {
                const double dist = std::abs(row - city.row) + std::abs(col - city.col);
                share += city.dem_intensity * std::exp(-(dist * dist) / (2.0 * city.radius * city.radius));
            }
            raw_share[v] = share;
        }
    }

    auto clamped = [&](double share, double shift) {
        return std::min(0.98, std::max(0.02, share + shift));
    };
    auto statewide = [&](double shift) {
        double dem = 0, all = 0;
        for (int v = 0; v < n; ++v) {
            const double votes = spec.turnout * static_cast<double>(pop[v]);
            dem += votes * clamped(raw_share[v], shift);
            all += votes;
        }
        return dem / all;
    };

    double shift = 0.0;
    if (spec.target_statewide_dem > 0.0) {
        double lo = -1.0, hi = 1.0;
        for (int iter = 0; iter < 100; ++iter) {
            shift = (lo + hi) / 2.0;
            if (statewide(shift) < spec.target_statewide_dem)
                lo = shift;
            else
                hi = shift;
        }
    }

    std::vector<node_record> nodes(n);
    for (int row = 0; row < spec.rows; ++row) {
        for (int col = 0; col < spec.cols; ++col) {
            const int v = row * spec.cols + col;
            node_record& rec = nodes[v];
            rec.id = std::to_string(row) + "_" + std::to_string(col);
            rec.population = pop[v];
            const double votes = spec.turnout * static_cast<double>(pop[v]);
            const double dem_share = clamped(raw_share[v], shift);
            rec.attributes["D"] = votes * dem_share;
            rec.attributes["R"] = votes * (1.0 - dem_share);
            const double swung = clamped(raw_share[v], shift - spec.swing);
            rec.attributes["D_SWING"] = votes * swung;
            rec.attributes["R_SWING"] = votes * (1.0 - swung);
        }
    }

    std::vector<std::pair<std::string, std::string>> edges;
    auto id_of = [&](int row, int col) { return std::to_string(row) + "_" + std::to_string(col); };
    for (int row = 0; row < spec.rows; ++row)
        for (int col = 0; col < spec.cols; ++col) {
            if (col + 1 < spec.cols) edges.emplace_back(id_of(row, col), id_of(row, col + 1));
            if (row + 1 < spec.rows) edges.emplace_back(id_of(row, col), id_of(row + 1, col));
        }

    return build_dual_graph(std::move(nodes), edges);
}

} // namespace topoplan
