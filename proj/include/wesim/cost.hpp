#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "wesim/error.hpp"

namespace wesim {

inline constexpr double hours_per_year = 8760.0;

struct CostReport {
    std::string system;
    double makespan_h = 0.0;
    long throughput_per_year = 0;
    double cost_basis_eur = 0.0;
    double effectiveness = 0.0;
    /// Set for the low-utilization variant, where this many runs per year
    /// are actually performed.
    std::optional<long> utilization_runs;
};

/// Runs per year back to back, rounded to the nearest integer.
inline long throughput_per_year(double makespan_h) {
    if (!(makespan_h > 0.0)) throw InvalidArgument("makespan must be positive");
    return std::lround(hours_per_year / makespan_h);
}

/// Runs per Euro, unrounded.
inline double effectiveness(double runs, double cost_eur) {
    if (!(cost_eur > 0.0)) throw InvalidArgument("cost must be positive");
    return runs / cost_eur;
}

/// Effectiveness of owned hardware that runs the workflow back to back.
inline CostReport owned_cost_report(const std::string& system, double makespan_h, double cost_basis_eur) {
    CostReport r;
    r.system = system;
    r.makespan_h = makespan_h;
    r.throughput_per_year = throughput_per_year(makespan_h);
    r.cost_basis_eur = cost_basis_eur;
    r.effectiveness = effectiveness(static_cast<double>(r.throughput_per_year), cost_basis_eur);
    return r;
}

/// Rented infrastructure: the annual cost scales with the number of runs, so
/// the effectiveness is always 1 / per_run_eur.
inline CostReport rental_cost_report(double makespan_h, double per_run_eur, const std::string& system = "EC2") {
    if (!(per_run_eur > 0.0)) throw InvalidArgument("per-run cost must be positive");
    CostReport r;
    r.system = system;
    r.makespan_h = makespan_h;
    r.throughput_per_year = throughput_per_year(makespan_h);
    r.cost_basis_eur = static_cast<double>(r.throughput_per_year) * per_run_eur;
    r.effectiveness = effectiveness(static_cast<double>(r.throughput_per_year), r.cost_basis_eur);
    return r;
}

/// Effectiveness when only `runs_per_year` runs are performed.
inline double low_utilization_effectiveness(double runs_per_year, double cost_basis_eur) {
    return effectiveness(runs_per_year, cost_basis_eur);
}

/// Owned hardware that only runs `runs_per_year` times still costs its full
/// basis; rented hardware costs runs x per-run price.
inline CostReport low_utilization_report(const std::string& system, double makespan_h, long runs_per_year,
                                         std::optional<double> cost_basis_eur, std::optional<double> per_run_eur) {
    if (runs_per_year < 1) throw InvalidArgument("runs per year must be >= 1");
    CostReport r;
    r.system = system;
    r.makespan_h = makespan_h;
    r.throughput_per_year = throughput_per_year(makespan_h);
    r.utilization_runs = runs_per_year;
    if (per_run_eur) {
        r.cost_basis_eur = static_cast<double>(runs_per_year) * *per_run_eur;
    } else if (cost_basis_eur) {
        r.cost_basis_eur = *cost_basis_eur;
    } else {
        throw InvalidArgument("system " + system + " has no cost basis");
    }
    r.effectiveness = low_utilization_effectiveness(static_cast<double>(runs_per_year), r.cost_basis_eur);
    return r;
}

/// Acquisition cost attributed to one workflow: half the price when the
/// workflow is confined to at most half of the nodes.
inline double attributed_acquisition_cost(double acquisition_eur, std::size_t node_count,
                                          std::optional<int> node_cap) {
    if (node_cap && node_count > 0 && 2 * static_cast<std::size_t>(*node_cap) <= node_count) {
        return 0.5 * acquisition_eur;
    }
    return acquisition_eur;
}

/// Table-shaped CSV: `system,makespan_h,throughput,cost_eur,effectiveness`.
inline std::string cost_csv(const std::vector<CostReport>& rows) {
    std::string out = "system,makespan_h,throughput,cost_eur,effectiveness\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%s,%.2f,%ld,%.0f,%.6g\n", r.system.c_str(), r.makespan_h,
                      r.utilization_runs.value_or(r.throughput_per_year), r.cost_basis_eur, r.effectiveness);
        out += buf;
    }
    return out;
}

} // namespace wesim
