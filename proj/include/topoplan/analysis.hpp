#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "topoplan/chains.hpp"
#include "topoplan/error.hpp"
#include "topoplan/frechet.hpp"
#include "topoplan/graph.hpp"
#include "topoplan/metrics.hpp"
#include "topoplan/parallel.hpp"
#include "topoplan/persistence.hpp"

namespace topoplan {

struct overlay_point {
    double birth = 0.0, death = 0.0;
    int anchor = -1;
    int plan_id = -1;
};

// Pooled point cloud of a diagram ensemble with plan provenance.
inline std::vector<overlay_point> overlay(const std::vector<diagram>& diagrams) {
    if (diagrams.empty()) throw error(errc::invalid_config, "empty diagram ensemble");
    std::vector<overlay_point> out;
    for (int i = 0; i < static_cast<int>(diagrams.size()); ++i)
        for (const auto& pt : diagrams[i].points)
            out.push_back({pt.birth, pt.death, pt.anchor, i});
    return out;
}

// Mean points at least min_persistence above the diagonal, infinite point
// first, then by decreasing persistence. Returns indices into mean.points.
inline std::vector<int> select_features(const diagram& mean, double min_persistence) {
    std::vector<int> selected;
    for (int i = 0; i < static_cast<int>(mean.points.size()); ++i)
        if (mean.points[i].infinite() || mean.points[i].persistence() >= min_persistence)
            selected.push_back(i);
    std::sort(selected.begin(), selected.end(), [&](int a, int b) {
        const auto& pa = mean.points[a];
        const auto& pb = mean.points[b];
        if (pa.infinite() != pb.infinite()) return pa.infinite();
        if (pa.persistence() != pb.persistence()) return pa.persistence() > pb.persistence();
        return pa.birth < pb.birth;
    });
    return selected;
}

struct feature_label {
    int point_index = -1; // into the plan's diagram
    double birth = 0.0, death = 0.0;
    int anchor = -1;
};

// Partial labeling of every ensemble diagram by the selected mean features
// via optimal L2 matchings; each diagram contributes at most one point per
// feature and each point labels at most one feature.
struct marked_ensemble {
    std::vector<diagram_point> features;
    std::vector<int> feature_points; // indices into the mean diagram
    std::vector<std::vector<std::optional<feature_label>>> labels; // [plan][feature]
    std::vector<double> label_rate;  // per feature
    std::vector<bool> unstable;      // label rate below 20%
};

inline marked_ensemble mark(const std::vector<diagram>& diagrams, const diagram& mean,
                            const std::vector<int>& feature_indices, int threads = 1) {
    if (feature_indices.empty()) throw error(errc::invalid_config, "no features selected");
    marked_ensemble out;
    out.feature_points = feature_indices;
    diagram features;
    features.k = mean.k;
    for (int fi : feature_indices) {
        features.points.push_back(mean.points[fi]);
        out.features.push_back(mean.points[fi]);
    }

    const int n = static_cast<int>(diagrams.size());
    const int f = static_cast<int>(feature_indices.size());
    out.labels.assign(n, {});
    parallel_for(n, threads, [&](long i) {
        auto& row = out.labels[i];
        row.assign(f, std::nullopt);
        matching m = wasserstein(features, diagrams[i], 2.0);
        if (m.infinite_cost) return; // no labels for incompatible diagrams
        for (auto [c, t] : m.pairs) {
            const auto& pt = diagrams[i].points[t];
            row[c] = feature_label{t, pt.birth, pt.death, pt.anchor};
        }
    });

    out.label_rate.assign(f, 0.0);
    for (const auto& row : out.labels)
        for (int c = 0; c < f; ++c)
            if (row[c]) out.label_rate[c] += 1.0;
    for (auto& rate : out.label_rate) rate /= n;
    out.unstable.resize(f);
    for (int c = 0; c < f; ++c) out.unstable[c] = out.label_rate[c] < 0.20;
    return out;
}

// Per-unit frequency of belonging to the feature's anchor district, over the
// plans where the feature was labeled. Empty frequency = undefined (no labels).
struct heat_map {
    int feature = -1;
    double label_rate = 0.0;
    std::vector<double> frequency; // by node index
};

inline std::vector<heat_map> localize(const marked_ensemble& marked,
                                      const std::vector<plan>& plans, const dual_graph& g) {
    if (plans.size() != marked.labels.size())
        throw error(errc::invalid_config, "plan and label counts differ");
    const int f = static_cast<int>(marked.features.size());
    std::vector<heat_map> maps(f);
    for (int c = 0; c < f; ++c) {
        maps[c].feature = c;
        maps[c].label_rate = marked.label_rate[c];
        long labeled = 0;
        std::vector<double> counts(g.node_count(), 0.0);
        for (size_t i = 0; i < plans.size(); ++i) {
            const auto& label = marked.labels[i][c];
            if (!label) continue;
            ++labeled;
            for (int v = 0; v < g.node_count(); ++v)
                if (plans[i].assignment[v] == label->anchor) counts[v] += 1.0;
        }
        if (labeled == 0) continue; // frequency left empty: undefined, not zero
        for (auto& value : counts) value /= static_cast<double>(labeled);
        maps[c].frequency = std::move(counts);
    }
    return maps;
}

// Northwest-quadrant features correspond to clusters of opposition-won
// districts: the anchor's connected component among districts with share
// below one half.
struct zone_stats {
    int feature = -1;
    double label_rate = 0.0;
    double nw_fraction = 0.0;       // of labeled plans
    double mean_cluster_size = 0.0; // districts, over NW-labeled plans
    std::vector<double> cluster_frequency; // per unit; empty = undefined
};

struct zone_report {
    std::vector<zone_stats> zones;
};

inline zone_report zone(const marked_ensemble& marked, const std::vector<plan>& plans,
                        const std::vector<district_graph>& dgs, const dual_graph& g) {
    if (plans.size() != marked.labels.size() || dgs.size() != plans.size())
        throw error(errc::invalid_config, "plan, diagram and label counts differ");
    zone_report report;
    const int f = static_cast<int>(marked.features.size());
    for (int c = 0; c < f; ++c) {
        zone_stats z;
        z.feature = c;
        z.label_rate = marked.label_rate[c];
        long labeled = 0, nw = 0;
        double size_sum = 0.0;
        std::vector<double> counts(g.node_count(), 0.0);

        for (size_t i = 0; i < plans.size(); ++i) {
            const auto& label = marked.labels[i][c];
            if (!label) continue;
            ++labeled;
            if (!(label->birth < 0.5 && label->death > 0.5)) continue;
            ++nw;

            const auto& dg = dgs[i];
            if (static_cast<int>(dg.filtration.size()) != dg.k)
                throw error(errc::missing_filtration, "district graph lacks a share filtration");
            if (!(dg.filtration[label->anchor] < 0.5))
                throw error(errc::anchor_not_party_won,
                            "NW-quadrant anchor has share >= .5", label->anchor);

            // Connected component of the anchor among districts with share < .5.
            std::vector<char> in_cluster(dg.k, 0);
            std::vector<int> stack{label->anchor};
            in_cluster[label->anchor] = 1;
            int cluster_size = 1;
            while (!stack.empty()) {
                int d = stack.back();
                stack.pop_back();
                for (int u : dg.adjacency[d])
                    if (!in_cluster[u] && dg.filtration[u] < 0.5) {
                        in_cluster[u] = 1;
                        ++cluster_size;
                        stack.push_back(u);
                    }
            }
            size_sum += cluster_size;
            for (int v = 0; v < g.node_count(); ++v)
                if (in_cluster[plans[i].assignment[v]]) counts[v] += 1.0;
        }

        z.nw_fraction = labeled > 0 ? static_cast<double>(nw) / labeled : 0.0;
        z.mean_cluster_size = nw > 0 ? size_sum / nw : 0.0;
        if (nw > 0) {
            for (auto& value : counts) value /= static_cast<double>(nw);
            z.cluster_frequency = std::move(counts);
        }
        report.zones.push_back(std::move(z));
    }
    return report;
}

enum class pair_mode { optimal_l2, geographic };

// One matched (or diagonal-retired) pair of mean features; index -1 marks the
// diagonal side. Deltas are B minus A; infinite deaths difference as 0.
struct feature_pair {
    int index_a = -1, index_b = -1; // positions within the feature lists
    double delta_birth = 0.0, delta_death = 0.0;
};

struct election_compare_report {
    pair_mode mode = pair_mode::optimal_l2;
    double swing_delta = 0.0; // statewide share difference (B - A): uniform
                              // partisan swing would displace by (delta, delta)
    std::vector<feature_pair> pairs;
};

namespace detail {

inline double death_delta(const diagram_point& a, const diagram_point& b) {
    if (a.infinite() && b.infinite()) return 0.0;
    return b.death - a.death;
}

inline double cosine(const std::vector<double>& x, const std::vector<double>& y) {
    double dot = 0, nx = 0, ny = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        dot += x[i] * y[i];
        nx += x[i] * x[i];
        ny += y[i] * y[i];
    }
    if (nx <= 0 || ny <= 0) return 0.0;
    return dot / std::sqrt(nx * ny);
}

} // namespace detail

// Pairs features of two means, by optimal L2 matching or by maximal heat map
// overlap (greedy cosine similarity); the infinite features always pair.
inline election_compare_report compare_features(
    const diagram& mean_a, const std::vector<int>& features_a, const diagram& mean_b,
    const std::vector<int>& features_b, pair_mode mode, double statewide_a, double statewide_b,
    const std::vector<heat_map>* heat_a = nullptr, const std::vector<heat_map>* heat_b = nullptr) {
    election_compare_report report;
    report.mode = mode;
    report.swing_delta = statewide_b - statewide_a;

    const int na = static_cast<int>(features_a.size());
    const int nb = static_cast<int>(features_b.size());
    auto point_a = [&](int c) -> const diagram_point& { return mean_a.points[features_a[c]]; };
    auto point_b = [&](int c) -> const diagram_point& { return mean_b.points[features_b[c]]; };

    std::vector<int> match_a(na, -1), match_b(nb, -1);

    if (mode == pair_mode::optimal_l2) {
        diagram fa, fb;
        fa.k = mean_a.k;
        fb.k = mean_b.k;
        for (int c = 0; c < na; ++c) fa.points.push_back(point_a(c));
        for (int c = 0; c < nb; ++c) fb.points.push_back(point_b(c));
        matching m = wasserstein(fa, fb, 2.0);
        if (!m.infinite_cost)
            for (auto [i, j] : m.pairs) {
                match_a[i] = j;
                match_b[j] = i;
            }
    } else {
        if (!heat_a || !heat_b || heat_a->size() != static_cast<size_t>(na) ||
            heat_b->size() != static_cast<size_t>(nb))
            throw error(errc::mode_unavailable, "geographic pairing requires heat maps");
        // Infinite features pair with each other, mirroring the metric
        // convention; the rest pair greedily by heat map overlap.
        for (int i = 0; i < na; ++i)
            for (int j = 0; j < nb; ++j)
                if (point_a(i).infinite() && point_b(j).infinite() && match_a[i] < 0 &&
                    match_b[j] < 0) {
                    match_a[i] = j;
                    match_b[j] = i;
                }
        for (;;) {
            double best = 0.0;
            int bi = -1, bj = -1;
            for (int i = 0; i < na; ++i) {
                if (match_a[i] >= 0 || point_a(i).infinite()) continue;
                if ((*heat_a)[i].frequency.empty()) continue;
                for (int j = 0; j < nb; ++j) {
                    if (match_b[j] >= 0 || point_b(j).infinite()) continue;
                    if ((*heat_b)[j].frequency.empty()) continue;
                    double sim = detail::cosine((*heat_a)[i].frequency, (*heat_b)[j].frequency);
                    if (sim > best) {
                        best = sim;
                        bi = i;
                        bj = j;
                    }
                }
            }
            if (bi < 0) break;
            match_a[bi] = bj;
            match_b[bj] = bi;
        }
    }

    for (int i = 0; i < na; ++i) {
        feature_pair fp;
        fp.index_a = i;
        if (match_a[i] >= 0) {
            fp.index_b = match_a[i];
            fp.delta_birth = point_b(match_a[i]).birth - point_a(i).birth;
            fp.delta_death = detail::death_delta(point_a(i), point_b(match_a[i]));
        } else {
            const double mid = (point_a(i).birth + point_a(i).death) / 2.0;
            fp.delta_birth = mid - point_a(i).birth;
            fp.delta_death = mid - point_a(i).death;
        }
        report.pairs.push_back(fp);
    }
    for (int j = 0; j < nb; ++j) {
        if (match_b[j] >= 0) continue;
        feature_pair fp;
        fp.index_b = j;
        const double mid = (point_b(j).birth + point_b(j).death) / 2.0;
        fp.delta_birth = point_b(j).birth - mid;
        fp.delta_death = point_b(j).death - mid;
        report.pairs.push_back(fp);
    }
    return report;
}

// Full biased-ensemble comparison: Frechet means and features of both
// ensembles, per-plan feature labels, safe-seat histograms for the favored
// party, and agreement between the geographic and L2 pairings.
struct biased_compare_report {
    frechet_result mean_a, mean_b;
    std::vector<int> features_a, features_b;
    marked_ensemble marked_a, marked_b;
    std::vector<heat_map> heat_a, heat_b;
    std::vector<long> safe_hist_a, safe_hist_b; // index = favored-party safe seats
    election_compare_report l2_pairs;
    std::optional<election_compare_report> geo_pairs;
    std::vector<bool> pairing_agreement; // per feature of ensemble A
};

struct analysis_options {
    double min_persistence = 0.05;
    int frechet_seed_count = 20;
    int frechet_max_iter = 200;
    double frechet_tol = 1e-8;
    int threads = 1;
};

inline std::vector<diagram> ensemble_diagrams(const dual_graph& g, const std::vector<plan>& plans,
                                              const std::string& rep_attr,
                                              const std::string& dem_attr, int threads = 1,
                                              std::vector<district_graph>* out_dgs = nullptr) {
    std::vector<diagram> diagrams(plans.size());
    std::vector<district_graph> dgs(plans.size());
    parallel_for(static_cast<long>(plans.size()), threads, [&](long i) {
        dgs[i] = build_district_graph(g, plans[i]);
        republican_share(dgs[i], rep_attr, dem_attr);
        diagrams[i] = persistence_diagram(dgs[i]);
    });
    if (out_dgs) *out_dgs = std::move(dgs);
    return diagrams;
}

inline biased_compare_report compare_biased(const dual_graph& g, const std::vector<plan>& plans_a,
                                            const std::vector<plan>& plans_b,
                                            const std::string& rep_attr,
                                            const std::string& dem_attr,
                                            const std::string& favored_attr,
                                            double safe_threshold, const analysis_options& opt) {
    if (plans_a.empty() || plans_b.empty())
        throw error(errc::invalid_config, "both ensembles must be nonempty");

    biased_compare_report report;
    const std::string other_attr = favored_attr == rep_attr ? dem_attr : rep_attr;

    auto analyze = [&](const std::vector<plan>& plans, frechet_result& mean,
                       std::vector<int>& features, marked_ensemble& marked,
                       std::vector<heat_map>& heat, std::vector<long>& hist) {
        std::vector<district_graph> dgs;
        auto diagrams = ensemble_diagrams(g, plans, rep_attr, dem_attr, opt.threads, &dgs);
        mean = frechet_mean(diagrams,
                            stratified_seeds(static_cast<int>(diagrams.size()),
                                             opt.frechet_seed_count),
                            opt.frechet_max_iter, opt.frechet_tol, opt.threads);
        features = select_features(mean.mean, opt.min_persistence);
        marked = mark(diagrams, mean.mean, features, opt.threads);
        heat = localize(marked, plans, g);
        for (const auto& dg : dgs) {
            int seats = safe_seats(dg, favored_attr, other_attr, safe_threshold);
            if (seats >= static_cast<int>(hist.size())) hist.resize(seats + 1, 0);
            ++hist[seats];
        }
    };

    analyze(plans_a, report.mean_a, report.features_a, report.marked_a, report.heat_a,
            report.safe_hist_a);
    analyze(plans_b, report.mean_b, report.features_b, report.marked_b, report.heat_b,
            report.safe_hist_b);

    const double share = statewide_share(g, rep_attr, dem_attr);
    report.l2_pairs = compare_features(report.mean_a.mean, report.features_a, report.mean_b.mean,
                                       report.features_b, pair_mode::optimal_l2, share, share);
    report.geo_pairs = compare_features(report.mean_a.mean, report.features_a, report.mean_b.mean,
                                        report.features_b, pair_mode::geographic, share, share,
                                        &report.heat_a, &report.heat_b);

    const int na = static_cast<int>(report.features_a.size());
    std::vector<int> l2_target(na, -1), geo_target(na, -1);
    for (const auto& fp : report.l2_pairs.pairs)
        if (fp.index_a >= 0) l2_target[fp.index_a] = fp.index_b;
    for (const auto& fp : report.geo_pairs->pairs)
        if (fp.index_a >= 0) geo_target[fp.index_a] = fp.index_b;
    report.pairing_agreement.resize(na);
    for (int i = 0; i < na; ++i) report.pairing_agreement[i] = l2_target[i] == geo_target[i];
    return report;
}

} // namespace topoplan
