#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wesim/calibration.hpp"
#include "wesim/cost.hpp"
#include "wesim/scenario.hpp"
#include "wesim/serialize.hpp"

namespace wesim::cli {

/// Exit codes.
inline constexpr int exit_ok = 0;
inline constexpr int exit_runtime = 1;
inline constexpr int exit_usage = 2;

/// Options shared by `simulate` and `sweep`. A JSON config supplies the base
/// and every flag that is given overrides it.
struct RunFlags {
    std::string config;
    std::string dag_path;
    std::optional<int> tumor, control;
    std::vector<int> regions;
    std::string mode;
    std::string cluster;
    std::string policy;
    std::optional<int> max_concurrency;
    std::optional<int> alignment_node_cap;
    std::string cache;
    std::string oversubscription;
    std::string profiles;
    std::string out;

    void add_to(CLI::App& app, bool many_regions) {
        app.add_option("--config", config, "Run configuration JSON")->check(CLI::ExistingFile);
        app.add_option("--dag", dag_path, "Simulate this DAG JSON instead of generating one")->check(CLI::ExistingFile);
        app.add_option("--tumor", tumor, "Tumor samples");
        app.add_option("--control", control, "Control samples");
        auto* r = app.add_option("--regions", regions, many_regions ? "Region counts, comma separated" : "Region count");
        if (many_regions) {
            r->delimiter(',')->required();
        } else {
            r->expected(1);
        }
        app.add_option("--mode", mode, "Alignment distribution")->check(CLI::IsMember({"broadcast", "split"}));
        app.add_option("--cluster", cluster, "Preset name (SA, YC, HPC, EC2) or cluster JSON path");
        app.add_option("--policy", policy, "Scheduling policy")
            ->check(CLI::IsMember({"sge_load_balance", "hiway_locality", "local_max_concurrency", "local_memory_aware"}));
        app.add_option("--max-concurrency", max_concurrency, "Cap for local_max_concurrency");
        app.add_option("--alignment-node-cap", alignment_node_cap, "Confine alignment to the first N nodes");
        app.add_option("--cache", cache, "Invocation cache")->check(CLI::IsMember({"on", "off"}));
        app.add_option("--oversubscription", oversubscription, "Oversubscription handling")
            ->check(CLI::IsMember({"forbid", "penalize"}));
        app.add_option("--profiles", profiles, "ProfileSet JSON")->check(CLI::ExistingFile);
        app.add_option("--out", out, "Output directory");
    }
};

struct RunSetup {
    std::optional<WorkflowDag> dag;
    WesParams wes;
    ClusterSpec cluster;
    Policy policy;
    SimOptions options;
    ProfileSet profiles;
    std::string out_dir;
};

inline ProfileSet load_profiles(const std::string& path) {
    auto p = parse_as<ProfileSet>(read_json_file(path), path);
    if (auto problems = check_profile_ranges(p); !problems.empty()) {
        throw FormatError(path + ": " + problems.front());
    }
    return p;
}

inline ClusterSpec load_cluster(const std::string& name_or_path) {
    const auto& names = preset_names();
    if (std::find(names.begin(), names.end(), name_or_path) != names.end()) return preset(name_or_path);
    if (!std::filesystem::exists(name_or_path)) {
        throw FormatError("'" + name_or_path + "' is neither a preset nor a cluster file");
    }
    auto c = parse_as<ClusterSpec>(read_json_file(name_or_path), name_or_path);
    c.check();
    return c;
}

inline Policy policy_for(const ClusterSpec& c) {
    const auto& names = preset_names();
    if (std::find(names.begin(), names.end(), c.name) != names.end()) return default_policy(c.name);
    return c.fs_regime == FsRegime::staged_dfs ? Policy::hiway_locality() : Policy::sge_load_balance();
}

/// Resolves config file plus flags into one runnable setup.
inline RunSetup resolve(const RunFlags& f) {
    json cfg = f.config.empty() ? json::object() : read_json_file(f.config);
    if (!cfg.is_object()) throw FormatError(f.config + ": expected an object");
    RunSetup s;

    std::string profiles_path = f.profiles.empty() ? cfg.value("profiles", std::string{}) : f.profiles;
    s.profiles = profiles_path.empty() ? default_profiles() : load_profiles(profiles_path);

    std::string dag_path = f.dag_path.empty() ? cfg.value("dag", std::string{}) : f.dag_path;
    const bool has_workflow = cfg.contains("workflow") || f.tumor || f.control || !f.regions.empty() || !f.mode.empty();
    if (!dag_path.empty() && has_workflow) throw FormatError("give either a DAG or workflow parameters, not both");
    if (!dag_path.empty()) {
        s.dag = parse_as<WorkflowDag>(read_json_file(dag_path), dag_path);
    } else {
        if (cfg.contains("workflow")) s.wes = parse_as<WesParams>(cfg.at("workflow"), "workflow");
        if (f.tumor) s.wes.n_tumor = *f.tumor;
        if (f.control) s.wes.n_control = *f.control;
        if (!f.regions.empty()) s.wes.n_regions = f.regions.front();
        if (!f.mode.empty()) s.wes.distribution_mode = distribution_mode_from_string(f.mode);
        s.wes.profile_set = s.profiles;
        s.wes.check();
    }

    if (!f.cluster.empty()) {
        s.cluster = load_cluster(f.cluster);
    } else if (cfg.contains("cluster") && cfg.at("cluster").is_object()) {
        s.cluster = parse_as<ClusterSpec>(cfg.at("cluster"), "cluster");
        s.cluster.check();
    } else {
        s.cluster = load_cluster(cfg.value("cluster", std::string("YC")));
    }

    s.policy = cfg.contains("policy") ? parse_as<Policy>(cfg.at("policy"), "policy") : policy_for(s.cluster);
    if (!f.policy.empty()) {
        s.policy = Policy{policy_kind_from_string(f.policy), 0, std::nullopt};
        if (s.policy.kind == Policy::Kind::local_max_concurrency) s.policy.max_concurrency = 30;
    }
    if (f.max_concurrency) s.policy.max_concurrency = *f.max_concurrency;
    if (f.alignment_node_cap) s.policy.alignment_node_cap = *f.alignment_node_cap;
    s.policy.check();

    if (cfg.contains("options")) {
        s.options = parse_as<SimOptions>(cfg.at("options"), "options");
    } else {
        s.options.oversubscription = default_oversubscription(s.cluster.name);
    }
    if (!f.cache.empty()) s.options.cache_enabled = f.cache == "on";
    if (!f.oversubscription.empty()) {
        s.options.oversubscription.kind =
            f.oversubscription == "forbid" ? Oversubscription::Kind::forbid : Oversubscription::Kind::penalize;
    }
    s.options.check();

    s.out_dir = f.out.empty() ? cfg.value("out", std::string{}) : f.out;
    return s;
}

inline SimResult run(const RunSetup& s) {
    const WorkflowDag dag = s.dag ? *s.dag : generate_wes(s.wes);
    return simulate(dag, s.cluster, s.policy, s.profiles, s.options);
}

inline std::string output_path(const std::string& dir, const std::string& file) {
    if (dir.empty()) return file;
    std::filesystem::create_directories(dir);
    return (std::filesystem::path(dir) / file).string();
}

inline std::string format(const char* fmt, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

inline int cmd_generate(const RunFlags& f, bool unfused, std::ostream& out) {
    RunFlags g = f;
    g.dag_path.clear();
    RunSetup s = resolve(g);
    s.wes.fused_alignment = !unfused;
    const WorkflowDag dag = generate_wes(s.wes);
    const std::string text = json(dag).dump() + "\n";
    if (s.out_dir.empty()) {
        out << text;
    } else {
        write_text_file(output_path(s.out_dir, "dag.json"), text);
        out << dag.tasks.size() << " tasks, " << count_tasks(dag, templates::mutect) << " mutect\n";
    }
    return exit_ok;
}

inline int cmd_simulate(const RunFlags& f, std::ostream& out) {
    const RunSetup s = resolve(f);
    const SimResult r = run(s);
    write_text_file(output_path(s.out_dir, "report.json"), json(r.report).dump(2) + "\n");
    write_text_file(output_path(s.out_dir, "trace.csv"), export_trace_csv(r.trace));
    out << format("%.4f", r.report.makespan_h) << "\n";
    return exit_ok;
}

inline int cmd_sweep(const RunFlags& f, std::ostream& out) {
    RunFlags base = f;
    std::vector<int> rs = f.regions;
    std::stable_sort(rs.begin(), rs.end());
    base.regions = {rs.front()};
    RunSetup s = resolve(base);
    if (s.dag) throw FormatError("sweep generates its own workflows; drop --dag");
    std::string csv = "R,makespan_h,tasks,network_gb\n";
    for (int R : rs) {
        s.wes.n_regions = R;
        s.wes.check();
        const auto rep = run(s).report;
        csv += std::to_string(R) + "," + format("%.4f", rep.makespan_h) + "," + std::to_string(rep.task_count) + "," +
               format("%.3f", rep.total_network_gb) + "\n";
    }
    if (!s.out_dir.empty()) write_text_file(output_path(s.out_dir, "sweep.csv"), csv);
    out << csv;
    return exit_ok;
}

/// Cost row for one simulation report, using the cost basis it carries.
inline CostReport cost_row(const RunReport& r, std::optional<long> runs_per_year) {
    std::optional<double> owned;
    if (r.acquisition_cost_eur) {
        owned = attributed_acquisition_cost(*r.acquisition_cost_eur, r.node_count, r.alignment_node_cap);
    }
    if (!owned && !r.per_run_rental_eur) throw FormatError("report for " + r.cluster + " has no cost basis");
    if (runs_per_year) return low_utilization_report(r.cluster, r.makespan_h, *runs_per_year, owned, r.per_run_rental_eur);
    if (r.per_run_rental_eur) return rental_cost_report(r.makespan_h, *r.per_run_rental_eur, r.cluster);
    return owned_cost_report(r.cluster, r.makespan_h, *owned);
}

inline int cmd_cost(const std::vector<std::string>& reports, std::optional<long> runs_per_year, const std::string& out_dir,
                    std::ostream& out) {
    std::vector<CostReport> rows;
    for (const auto& path : reports) rows.push_back(cost_row(parse_as<RunReport>(read_json_file(path), path), runs_per_year));
    const std::string csv = cost_csv(rows);
    if (!out_dir.empty()) write_text_file(output_path(out_dir, "cost.csv"), csv);
    out << csv;
    return exit_ok;
}

/// Targets file: `[{"system": "YC", "cache": true, "regions": 467, "makespan_h": 7.6}, ...]`.
inline std::vector<ObservedRun> load_targets(const std::string& path) {
    const json j = read_json_file(path);
    if (!j.is_array() || j.empty()) throw FormatError(path + ": expected a non-empty array of targets");
    std::vector<ObservedRun> runs;
    try {
        for (const auto& t : j) {
            runs.push_back({t.at("system").get<std::string>(), t.value("cache", false), t.value("regions", 467),
                            t.at("makespan_h").get<double>()});
        }
    } catch (const json::exception& e) {
        throw FormatError(path + ": " + e.what());
    }
    return runs;
}

inline int cmd_fit(const std::string& targets_path, const std::string& profiles_path, int max_evals,
                   const std::string& out_dir, std::ostream& out) {
    const auto runs = targets_path.empty() ? reference_observations() : load_targets(targets_path);
    const ProfileSet seed = profiles_path.empty() ? seed_profiles() : load_profiles(profiles_path);
    FitOptions opt;
    opt.max_evaluations = max_evals;
    opt.min_step = 0.01;
    const FitResult r = fit(reference_targets(runs), seed, default_fit_parameters(), opt);
    out << "target,observed_h,simulated_h,rel_error\n";
    for (std::size_t i = 0; i < r.labels.size(); ++i) {
        out << r.labels[i] << "," << format("%.3f", r.observed_h[i]) << "," << format("%.3f", r.simulated_h[i]) << ","
            << format("%.4f", r.rel_errors[i]) << "\n";
    }
    out << "max_rel_error," << format("%.4f", r.max_rel_error) << (r.within_tolerance ? "" : " (above tolerance)")
        << "\n";
    write_text_file(output_path(out_dir, "profiles.json"), json(r.profiles).dump(2) + "\n");
    return exit_ok;
}

inline int cmd_presets(const std::string& name, std::ostream& out) {
    if (name.empty()) {
        for (const auto& n : preset_names()) out << n << "\n";
        out << "profiles\n";
    } else if (name == "profiles") {
        out << json(default_profiles()).dump(2) << "\n";
    } else {
        const auto& names = preset_names();
        if (std::find(names.begin(), names.end(), name) == names.end()) throw FormatError("unknown preset '" + name + "'");
        out << json(preset(name)).dump(2) << "\n";
    }
    return exit_ok;
}

/// Runs the command line `args` (without the program name).
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Discrete-event simulator for exome variant-calling workflows", "wesim"};
    app.require_subcommand(1);

    RunFlags gen_flags, sim_flags, sweep_flags;
    bool unfused = false;
    auto* gen = app.add_subcommand("generate", "Write the workflow DAG as JSON");
    gen_flags.add_to(*gen, false);
    gen->add_flag("--unfused", unfused, "One task per alignment tool");
    auto* sim = app.add_subcommand("simulate", "Simulate one run; writes report.json and trace.csv");
    sim_flags.add_to(*sim, false);
    auto* sweep = app.add_subcommand("sweep", "Simulate several region counts");
    sweep_flags.add_to(*sweep, true);

    std::vector<std::string> reports;
    std::optional<long> runs_per_year;
    std::string cost_out;
    auto* cost = app.add_subcommand("cost", "Cost effectiveness table from run reports");
    cost->add_option("reports", reports, "report.json files")->required()->check(CLI::ExistingFile);
    cost->add_option("--runs-per-year", runs_per_year, "Actual runs per year")->check(CLI::PositiveNumber);
    cost->add_option("--out", cost_out, "Output directory");

    std::string targets, fit_profiles, fit_out;
    int max_evals = 400;
    auto* fitc = app.add_subcommand("fit", "Calibrate task profiles against observed makespans");
    fitc->add_option("--targets", targets, "Targets JSON (defaults to the reference runs)")->check(CLI::ExistingFile);
    fitc->add_option("--profiles", fit_profiles, "Starting ProfileSet JSON")->check(CLI::ExistingFile);
    fitc->add_option("--max-evals", max_evals, "Evaluation budget")->check(CLI::PositiveNumber);
    fitc->add_option("--out", fit_out, "Output directory for profiles.json");

    std::string preset_name;
    auto* presets = app.add_subcommand("presets", "List presets, or dump one as JSON");
    presets->add_option("name", preset_name, "Preset name or 'profiles'");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return exit_usage;
    }

    try {
        if (*gen) return cmd_generate(gen_flags, unfused, out);
        if (*sim) return cmd_simulate(sim_flags, out);
        if (*sweep) return cmd_sweep(sweep_flags, out);
        if (*cost) return cmd_cost(reports, runs_per_year, cost_out, out);
        if (*fitc) return cmd_fit(targets, fit_profiles, max_evals, fit_out, out);
        if (*presets) return cmd_presets(preset_name, out);
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const InvalidDag& e) {
        err << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_runtime;
    }
    return exit_usage;
}

} // namespace wesim::cli
