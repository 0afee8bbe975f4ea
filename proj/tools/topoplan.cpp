// Batch CLI for districting-plan ensembles and their persistence summaries:
// synthesis, chain sampling, diagrams, distances, Frechet means, zoning,
// election and biased-ensemble comparison, and stability experiments.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "topoplan/analysis.hpp"
#include "topoplan/canonical.hpp"
#include "topoplan/chains.hpp"
#include "topoplan/frechet.hpp"
#include "topoplan/graph.hpp"
#include "topoplan/graph_stats.hpp"
#include "topoplan/io.hpp"
#include "topoplan/metrics.hpp"
#include "topoplan/parallel.hpp"
#include "topoplan/persistence.hpp"
#include "topoplan/spanning.hpp"
#include "topoplan/stability.hpp"
#include "topoplan/svg.hpp"
#include "topoplan/synth.hpp"

using namespace topoplan;
using nlohmann::json;

namespace {

const char* errc_name(errc code) {
    switch (code) {
        case errc::duplicate_node: return "duplicate_node";
        case errc::duplicate_edge: return "duplicate_edge";
        case errc::unknown_edge_endpoint: return "unknown_edge_endpoint";
        case errc::disconnected: return "disconnected";
        case errc::negative_attribute: return "negative_attribute";
        case errc::missing_node: return "missing_node";
        case errc::district_disconnected: return "district_disconnected";
        case errc::population_imbalance: return "population_imbalance";
        case errc::zero_turnout_district: return "zero_turnout_district";
        case errc::too_large: return "too_large";
        case errc::disconnected_subset: return "disconnected_subset";
        case errc::step_exhausted: return "step_exhausted";
        case errc::no_valid_flip: return "no_valid_flip";
        case errc::missing_filtration: return "missing_filtration";
        case errc::range_error: return "range_error";
        case errc::infinite_death: return "infinite_death";
        case errc::not_one_way: return "not_one_way";
        case errc::not_graph_preserving: return "not_graph_preserving";
        case errc::mode_unavailable: return "mode_unavailable";
        case errc::anchor_not_party_won: return "anchor_not_party_won";
        case errc::invalid_config: return "invalid_config";
        case errc::io_error: return "io_error";
    }
    return "unknown";
}

void emit_event(const json& j) { std::cerr << j.dump() << "\n"; }

void progress(const std::string& command, long done, long total) {
    emit_event({{"event", "progress"}, {"command", command}, {"done", done}, {"total", total}});
}

long cadence(long total) { return std::max<long>(1, total / 10); }

struct cli_options {
    std::string config_path;
    uint64_t seed = 0;
    bool seed_set = false;
    std::string out_dir;
    int threads = 1;
};

experiment_config load_cli_config(const cli_options& opt) {
    if (opt.config_path.empty())
        throw error(errc::invalid_config, "this command needs --config <path>");
    auto cfg = load_config(opt.config_path);
    if (opt.seed_set) {
        cfg.seed = opt.seed;
        cfg.chain.rng_seed = opt.seed;
    }
    if (!opt.out_dir.empty()) cfg.out_dir = opt.out_dir;
    return cfg;
}

dual_graph load_cli_graph(const experiment_config& cfg) {
    auto g = load_graph_json(cfg.graph_path);
    validate_config(cfg, g);
    return g;
}

plan initial_plan_for(const experiment_config& cfg, const dual_graph& g) {
    if (!cfg.initial_plan.empty()) return load_plan_csv(g, cfg.initial_plan, cfg.k, cfg.epsilon);
    rng r(cfg.seed);
    return seed_plan(g, cfg.k, cfg.epsilon, r);
}

// Chain loop with progress records; mirrors run_chain/biased_chain semantics.
ensemble run_with_progress(const dual_graph& g, const plan& initial, const chain_config& cfg,
                           chain_kind kind, const bias_config* bias,
                           const std::string& command) {
    validate(cfg);
    if (bias) validate(*bias);
    plan state = validate_plan(g, initial.assignment, initial.k, cfg.epsilon);

    ensemble e;
    e.kind = bias ? "biased-recom" : (kind == chain_kind::recom ? "recom" : "flip");
    e.rng_seed = cfg.rng_seed;
    e.config = cfg;

    rng r(cfg.rng_seed);
    district_graph dg;
    int safe = 0;
    if (bias) {
        dg = build_district_graph(g, state);
        safe = safe_seats(dg, bias->favored_attr, bias->other_attr, bias->safe_threshold);
    }
    const long tick = cadence(cfg.steps);
    for (long s = 1; s <= cfg.steps; ++s) {
        if (bias) {
            plan proposal = recom_step(g, state, r, cfg);
            auto proposal_dg = build_district_graph(g, proposal);
            int proposal_safe =
                safe_seats(proposal_dg, bias->favored_attr, bias->other_attr, bias->safe_threshold);
            ++e.proposals;
            if (metropolis_accept(safe - proposal_safe, bias->beta, r)) {
                state = std::move(proposal);
                safe = proposal_safe;
                ++e.accepted;
            }
        } else {
            state = kind == chain_kind::recom ? recom_step(g, state, r, cfg)
                                              : flip_step(g, state, r);
            ++e.proposals;
            ++e.accepted;
        }
        ++e.steps;
        if (s % cfg.subsample_interval == 0) e.plans.push_back(state);
        if (s % tick == 0) progress(command, s, cfg.steps);
    }
    return e;
}

json point_json(const diagram_point& pt) {
    json j;
    j["birth"] = pt.birth;
    j["death"] = pt.infinite() ? json("inf") : json(pt.death);
    j["anchor"] = pt.anchor;
    return j;
}

json pairs_json(const election_compare_report& report) {
    json out = json::array();
    for (const auto& fp : report.pairs) {
        json j;
        j["feature_a"] = fp.index_a;
        j["feature_b"] = fp.index_b;
        j["delta_birth"] = fp.delta_birth;
        j["delta_death"] = fp.delta_death;
        out.push_back(j);
    }
    return out;
}

struct diagrams_on_disk {
    std::vector<diagram> diagrams;
    std::vector<std::string> names;
    int k = 0;
    std::string election;
};

diagrams_on_disk load_diagrams_dir(const std::string& dir) {
    auto manifest_path = dir + "/diagrams.json";
    std::ifstream in(manifest_path);
    if (!in) throw error(errc::io_error, "missing diagrams manifest " + manifest_path);
    json manifest;
    in >> manifest;
    diagrams_on_disk out;
    out.k = manifest.at("k").get<int>();
    out.election = manifest.value("election", "");
    for (const auto& name : manifest.at("files")) {
        out.names.push_back(name.get<std::string>());
        out.diagrams.push_back(load_diagram_csv(dir + "/" + out.names.back(), out.k));
    }
    return out;
}

svg_series series_of(const std::vector<diagram>& diagrams, const std::string& label,
                     const std::string& color) {
    svg_series s;
    s.label = label;
    s.color = color;
    for (const auto& d : diagrams)
        for (const auto& pt : d.points) s.points.emplace_back(pt.birth, pt.death);
    return s;
}

// --- subcommand bodies ----------------------------------------------------

void cmd_synth(const cli_options& opt, const synth_spec& spec, const std::string& out_path) {
    auto g = synth_state(spec);
    save_graph_json(g, out_path);
    emit_event({{"event", "done"},
                {"command", "synth"},
                {"nodes", g.node_count()},
                {"edges", g.edge_count()},
                {"out", out_path}});
    (void)opt;
}

void cmd_ensemble(const cli_options& opt, const std::string& biased, const std::string& kind_name) {
    auto cfg = load_cli_config(opt);
    auto g = load_cli_graph(cfg);
    plan initial = initial_plan_for(cfg, g);

    ensemble e;
    if (!biased.empty()) {
        if (cfg.bias_election.empty())
            throw error(errc::invalid_config, "--biased needs a bias section in the config");
        const auto& election = find_election(cfg, cfg.bias_election);
        bias_config bias;
        bias.favored_attr = biased == "democratic" ? election.dem_attr : election.rep_attr;
        bias.other_attr = biased == "democratic" ? election.rep_attr : election.dem_attr;
        bias.safe_threshold = cfg.safe_threshold;
        bias.beta = cfg.beta;
        // Start from a neutral-ensemble plan rather than the raw seed: a
        // short unweighted ReCom stretch before the weighted chain.
        rng warm(cfg.chain.rng_seed ^ 0x5eedULL);
        for (long s = 0; s < cfg.chain.subsample_interval; ++s)
            initial = recom_step(g, initial, warm, cfg.chain);
        e = run_with_progress(g, initial, cfg.chain, chain_kind::recom, &bias, "ensemble");
    } else {
        chain_kind kind = kind_name == "flip" ? chain_kind::flip : chain_kind::recom;
        e = run_with_progress(g, initial, cfg.chain, kind, nullptr, "ensemble");
    }
    save_ensemble(g, e, cfg.out_dir);
    emit_event({{"event", "done"},
                {"command", "ensemble"},
                {"plans", e.plans.size()},
                {"accepted", e.accepted},
                {"proposals", e.proposals},
                {"out", cfg.out_dir}});
}

void cmd_persist(const cli_options& opt, const std::string& ensemble_dir,
                 const std::string& election_name) {
    auto cfg = load_cli_config(opt);
    auto g = load_cli_graph(cfg);
    const auto& election = find_election(cfg, election_name);
    auto e = load_ensemble(g, ensemble_dir);

    std::filesystem::create_directories(cfg.out_dir);
    std::vector<diagram> kept;
    std::vector<std::string> names;
    const long tick = cadence(static_cast<long>(e.plans.size()));
    for (size_t i = 0; i < e.plans.size(); ++i) {
        try {
            auto dg = build_district_graph(g, e.plans[i]);
            republican_share(dg, election.rep_attr, election.dem_attr);
            auto d = persistence_diagram(dg);
            if (d.tie_broken)
                emit_event({{"event", "warning"},
                            {"command", "persist"},
                            {"plan", i},
                            {"code", "tie_broken"},
                            {"message", "equal shares ordered by district index"}});
            std::string name = "diagram_" + std::string(plan_file_name(static_cast<int>(i))).substr(5);
            save_diagram_csv(d, cfg.out_dir + "/" + name);
            kept.push_back(std::move(d));
            names.push_back(std::move(name));
        } catch (const error& err) {
            if (err.code != errc::zero_turnout_district) throw;
            emit_event({{"event", "warning"},
                        {"command", "persist"},
                        {"plan", i},
                        {"code", errc_name(err.code)},
                        {"message", err.what()}});
        }
        if ((i + 1) % tick == 0) progress("persist", static_cast<long>(i + 1),
                                          static_cast<long>(e.plans.size()));
    }
    save_overlay_csv(overlay(kept), cfg.out_dir + "/overlay.csv");

    json manifest;
    manifest["election"] = election_name;
    manifest["k"] = cfg.k;
    manifest["ensemble"] = ensemble_dir;
    manifest["files"] = names;
    std::ofstream(cfg.out_dir + "/diagrams.json") << manifest.dump(1) << "\n";
    emit_event({{"event", "done"},
                {"command", "persist"},
                {"diagrams", kept.size()},
                {"skipped", e.plans.size() - kept.size()},
                {"out", cfg.out_dir}});
}

void cmd_wasserstein(const cli_options& opt, const std::string& diagrams_dir, const std::string& p_name,
                     const std::string& matchings_path) {
    auto cfg = load_cli_config(opt);
    auto loaded = load_diagrams_dir(diagrams_dir);
    const bool use_bottleneck = p_name == "inf";
    const double p = use_bottleneck ? std::numeric_limits<double>::infinity() : std::stod(p_name);
    const int n = static_cast<int>(loaded.diagrams.size());

    std::vector<std::vector<double>> matrix(n, std::vector<double>(n, 0.0));
    std::vector<std::pair<int, int>> tasks;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) tasks.emplace_back(i, j);
    json matchings = json::array();
    const bool emit_matchings = !matchings_path.empty();

    std::vector<matching> results(tasks.size());
    parallel_for(static_cast<long>(tasks.size()), opt.threads, [&](long t) {
        auto [i, j] = tasks[t];
        results[t] = use_bottleneck ? bottleneck(loaded.diagrams[i], loaded.diagrams[j])
                                    : wasserstein(loaded.diagrams[i], loaded.diagrams[j], p);
    });
    for (size_t t = 0; t < tasks.size(); ++t) {
        auto [i, j] = tasks[t];
        matrix[i][j] = matrix[j][i] = results[t].cost;
        if (emit_matchings) {
            json jm;
            jm["i"] = i;
            jm["j"] = j;
            jm["cost"] = results[t].cost;
            jm["pairs"] = results[t].pairs;
            jm["unmatched_i"] = results[t].unmatched1;
            jm["unmatched_j"] = results[t].unmatched2;
            matchings.push_back(jm);
        }
    }

    std::filesystem::create_directories(cfg.out_dir);
    std::vector<std::string> ids;
    for (const auto& name : loaded.names) ids.push_back(name.substr(0, name.find('.')));
    save_matrix_csv(ids, matrix, cfg.out_dir + "/distances.csv");
    if (emit_matchings) std::ofstream(matchings_path) << matchings.dump(1) << "\n";
    emit_event({{"event", "done"},
                {"command", "wasserstein"},
                {"pairs", tasks.size()},
                {"out", cfg.out_dir + "/distances.csv"}});
}

json frechet_json(const frechet_result& result) {
    json j;
    j["seed_id"] = result.seed_id;
    j["iterations"] = result.iterations;
    j["converged"] = result.converged;
    j["functional_value"] = result.functional_value;
    j["functional_trace"] = result.per_iteration_functional;
    j["mean"] = json::array();
    for (const auto& pt : result.mean.points) j["mean"].push_back(point_json(pt));
    return j;
}

frechet_result frechet_of(const experiment_config& cfg, const std::vector<diagram>& diagrams,
                          int threads) {
    auto seeds = stratified_seeds(static_cast<int>(diagrams.size()), cfg.frechet_seeds);
    return frechet_mean(diagrams, seeds, cfg.frechet_max_iter, cfg.frechet_tol, threads);
}

void cmd_frechet(const cli_options& opt, const std::string& diagrams_dir) {
    auto cfg = load_cli_config(opt);
    auto loaded = load_diagrams_dir(diagrams_dir);
    auto result = frechet_of(cfg, loaded.diagrams, opt.threads);

    std::filesystem::create_directories(cfg.out_dir);
    std::ofstream(cfg.out_dir + "/frechet.json") << frechet_json(result).dump(1) << "\n";
    save_diagram_csv(result.mean, cfg.out_dir + "/mean.csv");
    save_diagram_svg({series_of(loaded.diagrams, "ensemble", "steelblue"),
                      series_of({result.mean}, "mean", "red")},
                     cfg.out_dir + "/frechet.svg");
    emit_event({{"event", "done"},
                {"command", "frechet"},
                {"functional", result.functional_value},
                {"seed", result.seed_id},
                {"out", cfg.out_dir}});
}

void cmd_zoning(const cli_options& opt, const std::string& ensemble_dir,
                const std::string& election_name) {
    auto cfg = load_cli_config(opt);
    auto g = load_cli_graph(cfg);
    const auto& election = find_election(cfg, election_name);
    auto e = load_ensemble(g, ensemble_dir);

    progress("zoning", 0, 4);
    std::vector<district_graph> dgs;
    auto diagrams = ensemble_diagrams(g, e.plans, election.rep_attr, election.dem_attr,
                                      opt.threads, &dgs);
    progress("zoning", 1, 4);
    auto mean = frechet_of(cfg, diagrams, opt.threads);
    progress("zoning", 2, 4);
    auto features = select_features(mean.mean, cfg.min_persistence);
    auto marked = mark(diagrams, mean.mean, features, opt.threads);
    auto heat = localize(marked, e.plans, g);
    progress("zoning", 3, 4);
    auto zones = zone(marked, e.plans, dgs, g);
    progress("zoning", 4, 4);

    std::filesystem::create_directories(cfg.out_dir);
    json report;
    report["election"] = election_name;
    report["frechet"] = frechet_json(mean);
    report["features"] = json::array();
    for (size_t c = 0; c < features.size(); ++c) {
        json jf = point_json(mean.mean.points[features[c]]);
        jf["label_rate"] = marked.label_rate[c];
        jf["unstable"] = static_cast<bool>(marked.unstable[c]);
        jf["nw_fraction"] = zones.zones[c].nw_fraction;
        jf["mean_cluster_size"] = zones.zones[c].mean_cluster_size;
        jf["heat_map"] = "heatmap_feature_" + std::to_string(c) + ".csv";
        jf["cluster_map"] = "cluster_feature_" + std::to_string(c) + ".csv";
        report["features"].push_back(jf);
        save_heatmap_csv(g, heat[c], cfg.out_dir + "/heatmap_feature_" + std::to_string(c) + ".csv");
        heat_map cluster;
        cluster.feature = static_cast<int>(c);
        cluster.label_rate = marked.label_rate[c];
        cluster.frequency = zones.zones[c].cluster_frequency;
        save_heatmap_csv(g, cluster, cfg.out_dir + "/cluster_feature_" + std::to_string(c) + ".csv");
    }
    std::ofstream(cfg.out_dir + "/zoning.json") << report.dump(1) << "\n";
    save_diagram_svg({series_of(diagrams, "ensemble", "steelblue"),
                      series_of({mean.mean}, "mean", "red")},
                     cfg.out_dir + "/zoning.svg");
    emit_event({{"event", "done"},
                {"command", "zoning"},
                {"features", features.size()},
                {"out", cfg.out_dir}});
}

void cmd_compare_elections(const cli_options& opt, const std::string& ensemble_dir,
                           const std::string& name_a, const std::string& name_b,
                           const std::string& mode_name) {
    auto cfg = load_cli_config(opt);
    auto g = load_cli_graph(cfg);
    const auto& ea = find_election(cfg, name_a);
    const auto& eb = find_election(cfg, name_b);
    auto e = load_ensemble(g, ensemble_dir);

    auto analyze = [&](const election_spec& election, frechet_result& mean,
                       std::vector<int>& features, std::vector<heat_map>& heat) {
        auto diagrams = ensemble_diagrams(g, e.plans, election.rep_attr, election.dem_attr,
                                          opt.threads);
        mean = frechet_of(cfg, diagrams, opt.threads);
        features = select_features(mean.mean, cfg.min_persistence);
        auto marked = mark(diagrams, mean.mean, features, opt.threads);
        heat = localize(marked, e.plans, g);
        return diagrams;
    };

    frechet_result mean_a, mean_b;
    std::vector<int> features_a, features_b;
    std::vector<heat_map> heat_a, heat_b;
    auto diagrams_a = analyze(ea, mean_a, features_a, heat_a);
    auto diagrams_b = analyze(eb, mean_b, features_b, heat_b);

    const double share_a = statewide_share(g, ea.rep_attr, ea.dem_attr);
    const double share_b = statewide_share(g, eb.rep_attr, eb.dem_attr);
    const pair_mode mode =
        mode_name == "geographic" ? pair_mode::geographic : pair_mode::optimal_l2;
    auto report = compare_features(mean_a.mean, features_a, mean_b.mean, features_b, mode,
                                   share_a, share_b, &heat_a, &heat_b);

    std::filesystem::create_directories(cfg.out_dir);
    json out;
    out["election_a"] = name_a;
    out["election_b"] = name_b;
    out["statewide_share_a"] = share_a;
    out["statewide_share_b"] = share_b;
    out["swing_delta"] = report.swing_delta;
    out["swing_reference"] = {report.swing_delta, report.swing_delta};
    out["mode"] = mode_name;
    out["mean_a"] = frechet_json(mean_a);
    out["mean_b"] = frechet_json(mean_b);
    out["pairs"] = pairs_json(report);
    std::ofstream(cfg.out_dir + "/compare_elections.json") << out.dump(1) << "\n";
    save_diagram_svg({series_of({mean_a.mean}, name_a, "green"),
                      series_of({mean_b.mean}, name_b, "red")},
                     cfg.out_dir + "/compare_elections.svg");
    emit_event({{"event", "done"},
                {"command", "compare-elections"},
                {"pairs", report.pairs.size()},
                {"out", cfg.out_dir}});
}

void cmd_compare_biased(const cli_options& opt, const std::string& dir_a, const std::string& dir_b,
                        const std::string& election_name) {
    auto cfg = load_cli_config(opt);
    auto g = load_cli_graph(cfg);
    const auto& election = find_election(cfg, election_name);
    auto ens_a = load_ensemble(g, dir_a);
    auto ens_b = load_ensemble(g, dir_b);

    analysis_options aopt;
    aopt.min_persistence = cfg.min_persistence;
    aopt.frechet_seed_count = cfg.frechet_seeds;
    aopt.frechet_max_iter = cfg.frechet_max_iter;
    aopt.frechet_tol = cfg.frechet_tol;
    aopt.threads = opt.threads;

    auto report = compare_biased(g, ens_a.plans, ens_b.plans, election.rep_attr,
                                 election.dem_attr, election.dem_attr, cfg.safe_threshold, aopt);

    std::filesystem::create_directories(cfg.out_dir);
    json out;
    out["election"] = election_name;
    out["favored_party_attr"] = election.dem_attr;
    out["safe_threshold"] = cfg.safe_threshold;
    out["mean_a"] = frechet_json(report.mean_a);
    out["mean_b"] = frechet_json(report.mean_b);
    out["safe_seat_histogram_a"] = report.safe_hist_a;
    out["safe_seat_histogram_b"] = report.safe_hist_b;
    out["l2_pairs"] = pairs_json(report.l2_pairs);
    if (report.geo_pairs) out["geographic_pairs"] = pairs_json(*report.geo_pairs);
    out["pairing_agreement"] = report.pairing_agreement;
    json point_plots = json::array();
    for (size_t c = 0; c < report.features_a.size(); ++c) {
        json jp;
        jp["feature"] = c;
        jp["labels_a"] = json::array();
        jp["labels_b"] = json::array();
        for (const auto& row : report.marked_a.labels)
            if (row[c]) jp["labels_a"].push_back({{"birth", row[c]->birth},
                                                  {"death", row[c]->death}});
        for (const auto& row : report.marked_b.labels)
            if (c < row.size() && row[c])
                jp["labels_b"].push_back({{"birth", row[c]->birth}, {"death", row[c]->death}});
        point_plots.push_back(jp);
    }
    out["feature_point_plots"] = point_plots;
    std::ofstream(cfg.out_dir + "/compare_biased.json") << out.dump(1) << "\n";
    save_diagram_svg({series_of({report.mean_a.mean}, "ensemble A", "blue"),
                      series_of({report.mean_b.mean}, "ensemble B", "red")},
                     cfg.out_dir + "/compare_biased.svg");
    for (size_t c = 0; c < report.features_a.size(); ++c) {
        svg_series a{"ensemble A", "blue", {}};
        svg_series b{"ensemble B", "red", {}};
        for (const auto& row : report.marked_a.labels)
            if (row[c]) a.points.emplace_back(row[c]->birth, row[c]->death);
        for (const auto& row : report.marked_b.labels)
            if (c < row.size() && row[c]) b.points.emplace_back(row[c]->birth, row[c]->death);
        save_diagram_svg({a, b},
                         cfg.out_dir + "/feature_points_" + std::to_string(c) + ".svg");
    }
    emit_event({{"event", "done"},
                {"command", "compare-biased"},
                {"agreement", report.pairing_agreement},
                {"out", cfg.out_dir}});
}

void cmd_stability(const cli_options& opt, const std::string& mode, const std::string& ensemble_dir,
                   long trials, long steps, int starts) {
    auto cfg = load_cli_config(opt);
    std::filesystem::create_directories(cfg.out_dir);

    if (mode == "vote-check") {
        rng r(cfg.seed);
        json cases = json::array();
        bool all = true;
        for (long t = 0; t < trials; ++t) {
            int k = 2 + static_cast<int>(r.below(9));
            std::set<std::pair<int, int>> edge_set;
            for (int v = 1; v < k; ++v) {
                int u = static_cast<int>(r.below(v));
                edge_set.emplace(u, v);
            }
            for (int u = 0; u < k; ++u)
                for (int v = u + 1; v < k; ++v)
                    if (r.uniform01() < 0.3) edge_set.emplace(u, v);
            district_graph dg;
            dg.k = k;
            dg.edges.assign(edge_set.begin(), edge_set.end());
            dg.adjacency = detail::adjacency_of(k, dg.edges);
            dg.population.assign(k, 1);
            std::vector<double> f(k), h(k);
            for (auto& x : f) x = r.uniform01();
            for (auto& x : h) x = r.uniform01();
            auto rep = vote_stability_check(dg, f, h);
            all = all && rep.satisfied;
            cases.push_back({{"bound", rep.theoretical_bound},
                             {"observed", rep.observed_bottleneck},
                             {"satisfied", rep.satisfied}});
            if ((t + 1) % cadence(trials) == 0) progress("stability", t + 1, trials);
        }
        json out;
        out["mode"] = mode;
        out["trials"] = trials;
        out["all_satisfied"] = all;
        out["cases"] = cases;
        std::ofstream(cfg.out_dir + "/vote_check.json") << out.dump(1) << "\n";
        emit_event({{"event", "done"}, {"command", "stability"}, {"all_satisfied", all}});
        if (!all) throw error(errc::range_error, "vote stability bound violated");
        return;
    }

    auto g = load_cli_graph(cfg);
    const auto& election = cfg.elections.front();

    if (mode == "geo-bound") {
        plan state = initial_plan_for(cfg, g);
        rng r(cfg.seed + 1);
        json cases = json::array();
        bool all = true;
        long collected = 0;
        for (long s = 0; s < steps && collected < trials; ++s) {
            plan next = flip_step(g, state, r);
            auto cls = classify_perturbation(g, state, next);
            if (cls.kind == perturbation_kind::one_way && cls.graph_preserving) {
                auto rep = geo_stability_bound(g, state, next, election.rep_attr,
                                               election.dem_attr);
                all = all && rep.satisfied;
                ++collected;
                cases.push_back({{"bound", rep.theoretical_bound},
                                 {"observed", rep.observed_bottleneck},
                                 {"alpha", rep.alpha},
                                 {"satisfied", rep.satisfied}});
            }
            state = std::move(next);
            if ((s + 1) % cadence(steps) == 0) progress("stability", s + 1, steps);
        }
        json out;
        out["mode"] = mode;
        out["collected"] = collected;
        out["epsilon"] = cfg.epsilon;
        out["all_satisfied"] = all;
        out["cases"] = cases;
        std::ofstream(cfg.out_dir + "/geo_bound.json") << out.dump(1) << "\n";
        emit_event({{"event", "done"},
                    {"command", "stability"},
                    {"collected", collected},
                    {"all_satisfied", all}});
        if (!all) throw error(errc::range_error, "geographic stability bound violated");
        return;
    }

    if (mode == "flip-trace") {
        std::vector<plan> start_plans;
        if (!ensemble_dir.empty()) {
            auto e = load_ensemble(g, ensemble_dir);
            const int n = static_cast<int>(e.plans.size());
            const int take = std::min(starts, n);
            for (int i = 0; i < take; ++i)
                start_plans.push_back(e.plans[static_cast<size_t>(i) * n / take]);
        } else {
            start_plans.push_back(initial_plan_for(cfg, g));
        }

        // Starts are independent; traces run in parallel into fixed slots.
        std::vector<std::vector<double>> all_traces(start_plans.size());
        std::vector<diagram> start_diagrams(start_plans.size());
        parallel_for(static_cast<long>(start_plans.size()), opt.threads, [&](long i) {
            all_traces[i] = flip_trace(g, start_plans[i], election.rep_attr, election.dem_attr,
                                       steps, cfg.seed + 100 + i);
            auto dg = build_district_graph(g, start_plans[i]);
            republican_share(dg, election.rep_attr, election.dem_attr);
            start_diagrams[i] = persistence_diagram(dg);
        });
        json traces = json::array();
        for (size_t i = 0; i < start_plans.size(); ++i) {
            const auto& trace = all_traces[i];
            std::string name = "trace_" + std::to_string(i) + ".csv";
            std::ofstream out(cfg.out_dir + "/" + name);
            out << "step,bottleneck\n";
            for (size_t s = 0; s < trace.size(); ++s)
                out << (s + 1) << "," << format_double(trace[s]) << "\n";
            traces.push_back({{"start", i}, {"file", name},
                              {"final", trace.empty() ? 0.0 : trace.back()}});
            progress("stability", static_cast<long>(i + 1),
                     static_cast<long>(start_plans.size()));
        }
        // The reference baseline: mean pairwise bottleneck distance between
        // the starting plans.
        double baseline = 0.0;
        long count = 0;
        for (size_t i = 0; i < start_diagrams.size(); ++i)
            for (size_t j = i + 1; j < start_diagrams.size(); ++j) {
                baseline += bottleneck(start_diagrams[i], start_diagrams[j]).cost;
                ++count;
            }
        json out;
        out["mode"] = mode;
        out["steps"] = steps;
        out["starts"] = start_plans.size();
        out["traces"] = traces;
        out["mean_pairwise_baseline"] = count ? baseline / count : 0.0;
        std::ofstream(cfg.out_dir + "/flip_trace.json") << out.dump(1) << "\n";
        emit_event({{"event", "done"},
                    {"command", "stability"},
                    {"starts", start_plans.size()},
                    {"baseline", count ? baseline / count : 0.0}});
        return;
    }

    if (mode == "recom-rate") {
        plan state = initial_plan_for(cfg, g);
        auto result = recom_preservation_rate(g, state, steps, cfg.chain);
        json out;
        out["mode"] = mode;
        out["steps"] = result.steps;
        out["preserved"] = result.preserved;
        if (result.rate())
            out["rate"] = *result.rate();
        else
            out["rate"] = nullptr; // vacuous: no steps taken
        std::ofstream(cfg.out_dir + "/recom_rate.json") << out.dump(1) << "\n";
        emit_event({{"event", "done"},
                    {"command", "stability"},
                    {"rate", result.rate() ? json(*result.rate()) : json(nullptr)}});
        return;
    }

    throw error(errc::invalid_config, "unknown stability mode '" + mode + "'");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"topological summaries of districting-plan ensembles"};
    app.require_subcommand(1);

    cli_options opt;
    app.add_option("--config", opt.config_path, "experiment config JSON")->envname("TOPOPLAN_CONFIG");
    auto* seed_opt = app.add_option("--seed", opt.seed, "override the config rng seed");
    app.add_option("--out", opt.out_dir, "override the config output directory");
    app.add_option("--threads", opt.threads, "worker threads for per-plan work");

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic grid state");
    synth->fallthrough();
    synth_spec spec;
    std::string synth_out = "graph.json";
    std::vector<std::string> city_flags;
    synth->add_option("--rows", spec.rows, "grid rows");
    synth->add_option("--cols", spec.cols, "grid columns");
    synth->add_option("--city", city_flags, "city as row,col,radius,dem_intensity (repeatable)");
    synth->add_option("--base-share", spec.base_dem_share, "baseline Democratic share");
    synth->add_option("--target-dem", spec.target_statewide_dem,
                      "calibrate the statewide Democratic share");
    synth->add_option("--swing", spec.swing, "uniform swing of the second election");
    synth->add_option("--base-population", spec.base_population, "population per unit");
    synth->add_option("--jitter", spec.population_jitter, "population jitter fraction");
    synth->add_option("--graph-out", synth_out, "output graph path");

    // ensemble
    auto* ens = app.add_subcommand("ensemble", "sample a plan ensemble with a Markov chain");
    ens->fallthrough();
    std::string biased, chain_name = "recom";
    ens->add_option("--biased", biased, "democratic|republican: safe-seat weighted chain")
        ->check(CLI::IsMember({"democratic", "republican"}));
    ens->add_option("--kind", chain_name, "recom|flip")->check(CLI::IsMember({"recom", "flip"}));

    // persist
    auto* per = app.add_subcommand("persist", "persistence diagrams for an ensemble");
    per->fallthrough();
    std::string ensemble_dir, election_name;
    per->add_option("--ensemble", ensemble_dir, "ensemble directory")->required();
    per->add_option("--election", election_name, "election name from the config")->required();

    // wasserstein
    auto* was = app.add_subcommand("wasserstein", "pairwise diagram distances");
    was->fallthrough();
    std::string diagrams_dir, p_name = "2", matchings_path;
    was->add_option("--diagrams", diagrams_dir, "diagrams directory")->required();
    was->add_option("--p", p_name, "2, 1, ... or inf for bottleneck");
    was->add_option("--matchings", matchings_path, "also emit matchings JSON here");

    // frechet
    auto* fre = app.add_subcommand("frechet", "Frechet mean of a diagram ensemble");
    fre->fallthrough();
    std::string fre_diagrams;
    fre->add_option("--diagrams", fre_diagrams, "diagrams directory")->required();

    // zoning
    auto* zon = app.add_subcommand("zoning", "overlay, marking, localization and zoning");
    zon->fallthrough();
    std::string zon_ensemble, zon_election;
    zon->add_option("--ensemble", zon_ensemble, "ensemble directory")->required();
    zon->add_option("--election", zon_election, "election name")->required();

    // compare-elections
    auto* cme = app.add_subcommand("compare-elections", "paired Frechet means of two elections");
    cme->fallthrough();
    std::string cme_ensemble, cme_a, cme_b, cme_mode = "optimal_l2";
    cme->add_option("--ensemble", cme_ensemble, "ensemble directory")->required();
    cme->add_option("--election-a", cme_a, "first election")->required();
    cme->add_option("--election-b", cme_b, "second election")->required();
    cme->add_option("--mode", cme_mode, "optimal_l2|geographic")
        ->check(CLI::IsMember({"optimal_l2", "geographic"}));

    // compare-biased
    auto* cmb = app.add_subcommand("compare-biased", "compare two party-biased ensembles");
    cmb->fallthrough();
    std::string cmb_a, cmb_b, cmb_election;
    cmb->add_option("--ensemble-a", cmb_a, "first (e.g. Democratic-favoring) ensemble")->required();
    cmb->add_option("--ensemble-b", cmb_b, "second (e.g. Republican-favoring) ensemble")->required();
    cmb->add_option("--election", cmb_election, "election name")->required();

    // stability
    auto* sta = app.add_subcommand("stability", "stability bounds and flip-trace experiments");
    sta->fallthrough();
    std::string sta_mode = "vote-check", sta_ensemble;
    long sta_trials = 100, sta_steps = 1000;
    int sta_starts = 1;
    sta->add_option("--mode", sta_mode, "vote-check|geo-bound|flip-trace|recom-rate")
        ->check(CLI::IsMember({"vote-check", "geo-bound", "flip-trace", "recom-rate"}));
    sta->add_option("--ensemble", sta_ensemble, "ensemble of starting plans (flip-trace)");
    sta->add_option("--trials", sta_trials, "random trials / reports to collect");
    sta->add_option("--steps", sta_steps, "chain steps");
    sta->add_option("--starts", sta_starts, "number of flip-trace starts");

    CLI11_PARSE(app, argc, argv);
    opt.seed_set = seed_opt->count() > 0;

    try {
        if (*synth) {
            for (const auto& flag : city_flags) {
                city_spec city;
                if (std::sscanf(flag.c_str(), "%d,%d,%lf,%lf", &city.row, &city.col, &city.radius,
                                &city.dem_intensity) != 4)
                    throw error(errc::invalid_config, "bad --city '" + flag + "'");
                spec.cities.push_back(city);
            }
            if (opt.seed_set) spec.seed = opt.seed;
            cmd_synth(opt, spec, synth_out);
        } else if (*ens) {
            cmd_ensemble(opt, biased, chain_name);
        } else if (*per) {
            cmd_persist(opt, ensemble_dir, election_name);
        } else if (*was) {
            cmd_wasserstein(opt, diagrams_dir, p_name, matchings_path);
        } else if (*fre) {
            cmd_frechet(opt, fre_diagrams);
        } else if (*zon) {
            cmd_zoning(opt, zon_ensemble, zon_election);
        } else if (*cme) {
            cmd_compare_elections(opt, cme_ensemble, cme_a, cme_b, cme_mode);
        } else if (*cmb) {
            cmd_compare_biased(opt, cmb_a, cmb_b, cmb_election);
        } else if (*sta) {
            cmd_stability(opt, sta_mode, sta_ensemble, sta_trials, sta_steps, sta_starts);
        }
    } catch (const error& e) {
        emit_event({{"event", "error"},
                    {"code", errc_name(e.code)},
                    {"index", e.index},
                    {"message", e.what()}});
        return e.code == errc::invalid_config || e.code == errc::io_error ? 2 : 1;
    } catch (const std::exception& e) {
        emit_event({{"event", "error"}, {"code", "unexpected"}, {"message", e.what()}});
        return 1;
    }
    return 0;
}
