#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "wesim/error.hpp"
#include "wesim/profiles.hpp"
#include "wesim/scenario.hpp"

namespace wesim {

/// One observed makespan and a way to reproduce it from a profile set.
struct FitTarget {
    std::string label;
    std::function<double(const ProfileSet&)> simulate_h;
    double observed_h = 0.0;
};

/// A positive profile constant the search may scale, within [lo, hi].
struct FitParameter {
    std::string name;
    std::function<double&(ProfileSet&)> ref;
    double lo = 0.0;
    double hi = 0.0;
};

struct FitOptions {
    /// Initial multiplicative step, as a natural log.
    double initial_step = std::log(2.0);
    double min_step = 1e-3;
    int max_evaluations = 2000;
    /// Acceptance bound on the worst relative error.
    double tolerance = 0.20;
    /// Called after every accepted improvement.
    std::function<void(int evaluations, double max_rel_error)> progress;
};

struct FitResult {
    ProfileSet profiles;
    double max_rel_error = 0.0;
    std::vector<std::string> labels;
    std::vector<double> simulated_h;
    std::vector<double> observed_h;
    std::vector<double> rel_errors;
    int evaluations = 0;
    bool within_tolerance = false;
};

namespace detail {

inline std::vector<double> fit_errors(const std::vector<FitTarget>& targets, const ProfileSet& p,
                                      std::vector<double>* simulated = nullptr) {
    std::vector<double> errs;
    for (const auto& t : targets) {
        const double s = t.simulate_h(p);
        if (simulated) simulated->push_back(s);
        errs.push_back(std::abs(s - t.observed_h) / t.observed_h);
    }
    return errs;
}

inline double worst(const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); }

} // namespace detail

/// Minimizes the largest relative makespan error by coordinate search in log
/// space. Each sweep tries every parameter scaled down then up by the current
/// step and keeps a move only if it strictly lowers the worst error (ties are
/// broken by the sum of errors), so the outcome is fully deterministic. The
/// step halves after a sweep without progress.
inline FitResult fit(const std::vector<FitTarget>& targets, const ProfileSet& initial,
                     const std::vector<FitParameter>& params, const FitOptions& options = {}) {
    if (targets.empty()) throw InvalidArgument("fit needs at least one target");
    for (const auto& t : targets) {
        if (!(t.observed_h > 0.0)) throw InvalidArgument("target " + t.label + ": observed makespan must be > 0");
    }
    for (const auto& p : params) {
        if (!(p.lo > 0.0) || !(p.hi >= p.lo)) throw InvalidArgument("parameter " + p.name + ": bad bounds");
    }
    if (!(options.initial_step > 0.0) || !(options.min_step > 0.0)) throw InvalidArgument("fit steps must be > 0");

    ProfileSet best = initial;
    for (const auto& p : params) {
        double& v = p.ref(best);
        if (!(v > 0.0)) throw InvalidArgument("parameter " + p.name + " must start positive");
        v = std::clamp(v, p.lo, p.hi);
    }
    int evals = 1;
    std::vector<double> errs = detail::fit_errors(targets, best);
    auto key = [](const std::vector<double>& e) {
        double sum = 0.0;
        for (double x : e) sum += x;
        return std::pair{detail::worst(e), sum};
    };
    auto best_key = key(errs);

    double step = options.initial_step;
    while (step >= options.min_step && evals < options.max_evaluations) {
        bool improved = false;
        for (const auto& p : params) {
            for (int dir : {-1, +1}) {
                if (evals >= options.max_evaluations) break;
                ProfileSet cand = best;
                double& v = p.ref(cand);
                const double moved = std::clamp(v * std::exp(dir * step), p.lo, p.hi);
                if (moved == v) continue;
                v = moved;
                ++evals;
                auto e = detail::fit_errors(targets, cand);
                auto k = key(e);
                if (k.first < best_key.first - 1e-12 ||
                    (std::abs(k.first - best_key.first) <= 1e-12 && k.second < best_key.second - 1e-12)) {
                    best = std::move(cand);
                    best_key = k;
                    improved = true;
                    if (options.progress) options.progress(evals, best_key.first);
                }
            }
        }
        if (!improved) step /= 2.0;
    }

    FitResult r;
    r.profiles = best;
    r.rel_errors = detail::fit_errors(targets, best, &r.simulated_h);
    r.max_rel_error = detail::worst(r.rel_errors);
    for (const auto& t : targets) {
        r.labels.push_back(t.label);
        r.observed_h.push_back(t.observed_h);
    }
    r.evaluations = evals;
    r.within_tolerance = r.max_rel_error <= options.tolerance + 1e-12;
    return r;
}

/// Observed reference makespan of one exome run.
struct ObservedRun {
    std::string system;
    bool cache = false;
    int regions = 467;
    double makespan_h = 0.0;
};

/// Published reference runs the default profiles are fitted to.
inline std::vector<ObservedRun> reference_observations() {
    return {
        {"SA", false, 467, 65.13},  {"SA", true, 467, 24.0},  {"YC", false, 467, 11.13}, {"YC", true, 467, 7.6},
        {"HPC", false, 467, 1.14},  {"YC", true, 22, 6.35},   {"YC", true, 2863, 15.2},
    };
}

inline std::string label_of(const ObservedRun& o) {
    return o.system + (o.cache ? " cache" : " no-cache") + " R=" + std::to_string(o.regions);
}

/// Fit target that regenerates the workflow only when a size-related profile
/// constant changes, since work constants do not alter the DAG.
inline FitTarget scenario_target(const ObservedRun& obs) {
    struct Cached {
        std::optional<std::vector<double>> key;
        WorkflowDag dag;
        std::unique_ptr<DagIndex> index;
    };
    auto cache = std::make_shared<Cached>();
    FitTarget t;
    t.label = label_of(obs);
    t.observed_h = obs.makespan_h;
    t.simulate_h = [obs, cache](const ProfileSet& p) {
        Scenario s = reference_scenario(obs.system, obs.cache, obs.regions, p);
        std::vector<double> key{p.fastq_gb, p.reference_genome_gb, p.dictionary_gb};
        for (const auto& [_, tmpl] : p.templates) {
            key.push_back(tmpl.output_size.base_gb);
            key.push_back(tmpl.output_size.ratio);
        }
        if (!cache->key || *cache->key != key) {
            cache->dag = generate_wes(s.wes);
            cache->index = std::make_unique<DagIndex>(cache->dag);
            cache->key = key;
        }
        Simulator sim(cache->dag, *cache->index, s.cluster, s.policy, p, s.options);
        return sim.run().report.makespan_h;
    };
    return t;
}

inline std::vector<FitTarget> reference_targets(const std::vector<ObservedRun>& runs = reference_observations()) {
    std::vector<FitTarget> out;
    for (const auto& r : runs) out.push_back(scenario_target(r));
    return out;
}

/// Constants the default calibration adjusts. Memory footprints stay fixed
/// because they decide how many tasks share a node.
inline std::vector<FitParameter> default_fit_parameters() {
    std::vector<FitParameter> out;
    auto work = [&](const char* tmpl, double lo_s, double hi_s, double lo_p, double hi_p) {
        const std::string n = tmpl;
        out.push_back({n + ".serial_s", [n](ProfileSet& p) -> double& { return p.at(n).work.serial_s; }, lo_s, hi_s});
        if (hi_p > 0.0) {
            out.push_back({n + ".parallel_s_per_gb",
                           [n](ProfileSet& p) -> double& { return p.at(n).work.parallel_s_per_gb; }, lo_p, hi_p});
        }
    };
    work(templates::align, 10.0, 7200.0, 500.0, 100000.0);
    work(templates::split, 1.0, 3600.0, 1.0, 1000.0);
    work(templates::mutect, 1.0, 600.0, 0.01, 100.0);
    work(templates::filter, 0.1, 120.0, 0.0, 0.0);
    work(templates::merge, 1.0, 1800.0, 0.0, 0.0);
    work(templates::compress, 1.0, 1800.0, 0.0, 0.0);
    out.push_back({"fastq_gb", [](ProfileSet& p) -> double& { return p.fastq_gb; }, 2.0, 30.0});
    out.push_back({"align_pipeline.output_ratio",
                   [](ProfileSet& p) -> double& { return p.at(templates::align).output_size.ratio; }, 0.1, 3.0});
    for (const char* c : {"YC", "HPC"}) {
        const std::string n = c;
        out.push_back({n + ".speed", [n](ProfileSet& p) -> double& { return p.clusters[n].speed; }, 0.25, 8.0});
    }
    return out;
}

} // namespace wesim
