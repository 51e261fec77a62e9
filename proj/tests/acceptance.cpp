// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracle.hpp"
#include "random_case.hpp"
#include "wesim/calibration.hpp"
#include "wesim/cost.hpp"
#include "wesim/scenario.hpp"

using namespace wesim;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double round_to(double v, int digits) {
    const double f = std::pow(10.0, digits);
    return std::round(v * f) / f;
}

/// Collects failed checks for one criterion.
struct Check {
    std::vector<std::string> failures;
    void expect(bool ok, const std::string& what) {
        if (!ok) failures.push_back(what);
    }
};

int failed_criteria = 0;
/// Report lines keyed by criterion, printed in order at the end.
std::map<int, std::string> lines;

void report(int id, const std::string& title, const Check& c, const std::string& detail) {
    const bool ok = c.failures.empty();
    failed_criteria += !ok;
    std::string line = std::string(ok ? "PASS" : "FAIL") + " " + std::to_string(id) + " " + title + ": " + detail + "\n";
    for (const auto& f : c.failures) line += "       - " + f + "\n";
    lines[id] = line;
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

/// Largest number of simultaneously running (non-cached) tasks of `tmpl`,
/// overall and per node.
std::pair<int, std::map<std::string, int>> peak_concurrency(const SimTrace& trace, const std::string& tmpl) {
    std::vector<std::pair<double, int>> events;
    std::map<std::string, std::vector<std::pair<double, int>>> per_node;
    for (const auto& e : trace.entries) {
        if (e.template_name != tmpl || e.cache_hit || e.end_s <= e.start_s) continue;
        events.push_back({e.start_s, +1});
        events.push_back({e.end_s, -1});
        per_node[e.node_id].push_back({e.start_s, +1});
        per_node[e.node_id].push_back({e.end_s, -1});
    }
    auto peak = [](std::vector<std::pair<double, int>>& ev) {
        std::sort(ev.begin(), ev.end());  // ends sort before starts at equal times
        int cur = 0, best = 0;
        for (const auto& [t, d] : ev) best = std::max(best, cur += d);
        return best;
    };
    std::map<std::string, int> nodes;
    for (auto& [n, ev] : per_node) nodes[n] = peak(ev);
    return {peak(events), nodes};
}

double mutect_input_gb(const WorkflowDag& dag) {
    std::map<std::string, double> size;
    for (const auto& f : dag.files) size[f.id] = f.size_gb;
    double total = 0.0;
    for (const auto& t : dag.tasks) {
        if (t.template_name != templates::mutect) continue;
        for (const auto& in : t.inputs) total += size.at(in);
    }
    return total;
}

void criterion_counts() {
    Check c;
    const auto t0 = Clock::now();
    const auto dag = generate_wes({27, 2, 467});
    const auto big = generate_wes({27, 2, 2863});
    const double elapsed = seconds_since(t0);
    const auto pairs = count_tasks(dag, templates::merge);
    const auto align = count_tasks(dag, templates::align);
    const auto mutect = count_tasks(dag, templates::mutect);
    const auto mutect_big = count_tasks(big, templates::mutect);
    c.expect(pairs == 54, "pairs = " + std::to_string(pairs));
    c.expect(align == 108, "alignment instances = " + std::to_string(align));
    c.expect(mutect == 25218, "mutect instances = " + std::to_string(mutect));
    c.expect(mutect_big == 154602, "mutect instances at R=2863 = " + std::to_string(mutect_big));
    c.expect(elapsed < 5.0, "generation took " + fmt("%.2f s", elapsed));
    report(1, "task counts", c,
           std::to_string(pairs) + " pairs, " + std::to_string(align) + " alignments, " + std::to_string(mutect) +
               " / " + std::to_string(mutect_big) + " mutect, " + fmt("%.2f s", elapsed));
}

void criterion_dedup(const SimResult& yc_cache) {
    Check c;
    const auto& t = yc_cache.report.per_template.at(templates::align);
    const std::size_t executed = t.count - t.cache_hits;
    c.expect(t.count == 108, "alignment instances = " + std::to_string(t.count));
    c.expect(executed == 29, "executed alignment signatures = " + std::to_string(executed));
    report(2, "alignment deduplication", c,
           std::to_string(executed) + " of " + std::to_string(t.count) + " alignments executed");
}

void criterion_cost() {
    Check c;
    c.expect(throughput_per_year(24.0) == 365, "SA throughput");
    c.expect(throughput_per_year(7.6) == 1153, "YC throughput");
    c.expect(throughput_per_year(1.14) == 7684, "HPC throughput");
    const auto hpc_preset = preset("HPC");
    const double hpc_basis = attributed_acquisition_cost(*hpc_preset.acquisition_cost_eur, hpc_preset.nodes.size(), 54);
    const double sa_basis = *preset("SA").acquisition_cost_eur;
    const double yc_basis = *preset("YC").acquisition_cost_eur;
    c.expect(round_to(owned_cost_report("SA", 24.0, sa_basis).effectiveness, 3) == 0.033, "SA effectiveness");
    c.expect(round_to(owned_cost_report("YC", 7.6, yc_basis).effectiveness, 3) == 0.012, "YC effectiveness");
    c.expect(round_to(owned_cost_report("HPC", 1.14, hpc_basis).effectiveness, 3) == 0.019, "HPC effectiveness");
    c.expect(round_to(low_utilization_effectiveness(50, sa_basis), 4) == 0.0045, "SA at 50 runs");
    c.expect(round_to(low_utilization_effectiveness(50, yc_basis), 4) == 0.0005, "YC at 50 runs");
    c.expect(low_utilization_effectiveness(50, hpc_basis) == 0.000125, "HPC at 50 runs");
    const double rent = *preset("EC2").per_run_rental_eur;
    const auto ec2_low = low_utilization_report("EC2", 14.0, 50, std::nullopt, rent);
    c.expect(round_to(ec2_low.effectiveness, 3) == 0.002, "EC2 at 50 runs");
    const auto ec2 = rental_cost_report(14.0, rent);
    c.expect(std::abs(ec2.throughput_per_year - 625) <= 1, "EC2 runs/year = " + std::to_string(ec2.throughput_per_year));
    c.expect(std::abs(ec2.cost_basis_eur - 313000.0) <= 0.005 * 313000.0, "EC2 yearly cost");
    c.expect(round_to(ec2.effectiveness, 3) == 0.002, "EC2 effectiveness");
    report(3, "cost arithmetic", c,
           "EC2 " + std::to_string(ec2.throughput_per_year) + " runs, " + fmt("%.0f EUR", ec2.cost_basis_eur) +
               ", HPC low-utilization " + fmt("%.6f", low_utilization_effectiveness(50, hpc_basis)));
}

struct Calibrated {
    std::map<std::string, SimResult> runs;
    double seconds = 0.0;
};

Calibrated criterion_calibration() {
    Check c;
    Calibrated out;
    const auto t0 = Clock::now();
    std::ostringstream detail;
    double worst = 0.0;
    for (const auto& obs : reference_observations()) {
        auto r = run_scenario(reference_scenario(obs.system, obs.cache, obs.regions));
        const double err = std::abs(r.report.makespan_h - obs.makespan_h) / obs.makespan_h;
        worst = std::max(worst, err);
        c.expect(err <= 0.20, label_of(obs) + ": " + fmt("%.2f h", r.report.makespan_h) + " vs " +
                                  fmt("%.2f h", obs.makespan_h));
        detail << label_of(obs) << fmt(" %.2fh", r.report.makespan_h) << fmt("/%.2fh; ", obs.makespan_h);
        out.runs.emplace(label_of(obs), std::move(r));
    }
    out.seconds = seconds_since(t0);
    c.expect(out.seconds < 120.0, "calibration runs took " + fmt("%.1f s", out.seconds));
    detail << "worst " << fmt("%.1f%%", 100.0 * worst) << ", " << fmt("%.1f s", out.seconds);
    report(4, "calibrated makespans within 20%", c, detail.str());
    return out;
}

void criterion_orderings(const Calibrated& cal) {
    Check c;
    auto ms = [&](const std::string& label) { return cal.runs.at(label).report.makespan_h; };
    const double hpc = ms("HPC no-cache R=467"), yc = ms("YC no-cache R=467"), sa = ms("SA no-cache R=467");
    c.expect(hpc < yc && yc < sa, "HPC < YC < SA");
    const double r22 = ms("YC cache R=22"), r467 = ms("YC cache R=467"), r2863 = ms("YC cache R=2863");
    c.expect(r22 < r467 && r467 < r2863, "sweep R=22 < R=467 < R=2863");
    c.expect(ms("SA cache R=467") < sa, "cache reduces SA");
    c.expect(r467 < yc, "cache reduces YC");
    bool more_bytes = true;
    for (int regions : {2, 22, 467}) {
        WesParams split{27, 2, regions};
        WesParams broadcast = split;
        broadcast.distribution_mode = DistributionMode::broadcast;
        const double s = mutect_input_gb(generate_wes(split)), b = mutect_input_gb(generate_wes(broadcast));
        if (!(b > s)) {
            more_bytes = false;
            c.expect(false, "broadcast moves no more mutect input at R=" + std::to_string(regions));
        }
    }
    // Bytes actually staged over the network on the staged cluster.
    WesParams split{27, 2, 22};
    WesParams broadcast = split;
    broadcast.distribution_mode = DistributionMode::broadcast;
    SimOptions o;
    const auto yc_preset = preset("YC");
    const double staged_split = simulate(generate_wes(split), yc_preset, Policy::hiway_locality(), default_profiles(), o)
                                    .report.per_template.at(templates::mutect)
                                    .gb_moved;
    const double staged_bcast =
        simulate(generate_wes(broadcast), yc_preset, Policy::hiway_locality(), default_profiles(), o)
            .report.per_template.at(templates::mutect)
            .gb_moved;
    c.expect(staged_bcast > staged_split, "broadcast stages no more mutect input on YC at R=22");
    report(5, "ordering properties", c,
           fmt("HPC %.2f < ", hpc) + fmt("YC %.2f < ", yc) + fmt("SA %.2f h; ", sa) + fmt("sweep %.2f < ", r22) +
               fmt("%.2f < ", r467) + fmt("%.2f h; ", r2863) + fmt("staged mutect GB split %.1f", staged_split) +
               fmt(" vs broadcast %.1f", staged_bcast) + (more_bytes ? "" : " (static bytes not larger)"));
}

void criterion_scheduler(const Calibrated& cal) {
    Check c;
    const auto& capped = cal.runs.at("SA no-cache R=467");
    const auto [sa_peak, sa_nodes] = peak_concurrency(capped.trace, templates::mutect);
    c.expect(sa_peak == 30, "SA mutect peak concurrency = " + std::to_string(sa_peak));
    auto aware = reference_scenario("SA", false);
    aware.policy = Policy::local_memory_aware();
    const double aware_h = run_scenario(aware).report.makespan_h;
    c.expect(capped.report.makespan_h > aware_h, "capped SA not slower than memory-aware");

    const auto& yc = cal.runs.at("YC no-cache R=467");
    const auto yc_preset = preset("YC");
    const double mutect_gb = default_profiles().at(templates::mutect).memory.required_gb(0);
    const auto [yc_peak, yc_nodes] = peak_concurrency(yc.trace, templates::mutect);
    int worst_slack = 1 << 30;
    for (const auto& node : yc_preset.nodes) {
        const int bound = static_cast<int>(std::floor(node.mem_gb / mutect_gb));
        const auto it = yc_nodes.find(node.id);
        const int seen = it == yc_nodes.end() ? 0 : it->second;
        worst_slack = std::min(worst_slack, bound - seen);
        c.expect(seen <= bound, node.id + " ran " + std::to_string(seen) + " mutect tasks, bound " +
                                    std::to_string(bound));
    }
    report(6, "scheduler pathology", c,
           "SA capped peak " + std::to_string(sa_peak) + fmt(", %.2f h", capped.report.makespan_h) +
               fmt(" vs memory-aware %.2f h; ", aware_h) + "YC per-node mutect peak within floor(mem/" +
               fmt("%.0fGB)", mutect_gb) + ", min slack " + std::to_string(worst_slack));
}

void criterion_properties() {
    using testing_support::random_case;
    Check c;
    const auto t0 = Clock::now();
    std::mt19937_64 rng(424242);
    constexpr int cases = 1000;
    int failures = 0;
    auto fail = [&](int i, const std::string& what) {
        if (++failures <= 5) c.expect(false, "case " + std::to_string(i) + ": " + what);
    };
    for (int i = 0; i < cases; ++i) {
        const auto rc = random_case(rng);
        const auto r = simulate(rc.dag, rc.cluster, rc.policy, rc.profiles, rc.options);
        const auto& trace = r.trace;
        std::map<std::string, const TraceEntry*> at;
        for (const auto& e : trace.entries) at[e.task_id] = &e;

        // Oracle equivalence.
        const auto slow = oracle::StepInterpreter(rc.dag, rc.cluster, rc.policy, rc.profiles, rc.options).run();
        if (export_trace_csv(trace) != export_trace_csv(slow)) fail(i, "differs from fixed-timestep oracle");

        // Determinism.
        const auto again = simulate(rc.dag, rc.cluster, rc.policy, rc.profiles, rc.options).trace;
        if (export_trace_csv(trace) != export_trace_csv(again)) fail(i, "trace not reproducible");

        // Dependencies.
        std::map<std::string, std::string> producer;
        for (const auto& f : rc.dag.files) {
            if (f.producer) producer[f.id] = *f.producer;
        }
        for (const auto& t : rc.dag.tasks) {
            for (const auto& in : t.inputs) {
                const auto p = producer.find(in);
                if (p != producer.end() && at.at(t.id)->start_s < at.at(p->second)->end_s) {
                    fail(i, t.id + " starts before its input is produced");
                }
            }
        }

        // Resource conservation.
        std::map<std::string, std::size_t> node_ix;
        for (std::size_t n = 0; n < rc.cluster.nodes.size(); ++n) node_ix[rc.cluster.nodes[n].id] = n;
        for (const auto& probe : trace.entries) {
            std::vector<int> threads(rc.cluster.nodes.size(), 0);
            std::vector<double> mem(rc.cluster.nodes.size(), 0.0);
            int running = 0;
            for (const auto& e : trace.entries) {
                if (e.cache_hit || !(e.start_s <= probe.start_s && probe.start_s < e.end_s)) continue;
                threads[node_ix.at(e.node_id)] += e.threads;
                mem[node_ix.at(e.node_id)] += rc.profiles.templates.at(e.template_name).memory.required_gb(0);
                ++running;
            }
            for (std::size_t n = 0; n < threads.size(); ++n) {
                if (threads[n] > rc.cluster.nodes[n].threads || mem[n] > rc.cluster.nodes[n].mem_gb + 1e-9) {
                    fail(i, "node capacity exceeded");
                }
            }
            if (rc.policy.kind == Policy::Kind::local_max_concurrency && running > rc.policy.max_concurrency) {
                fail(i, "concurrency cap exceeded");
            }
        }

        // Lower bounds, checked without caching so every task does its work.
        auto uncached = rc.options;
        uncached.cache_enabled = false;
        double ms = 0.0;
        for (const auto& e : simulate(rc.dag, rc.cluster, rc.policy, rc.profiles, uncached).trace.entries) {
            ms = std::max(ms, e.end_s);
        }
        std::map<std::string, double> file_gb;
        for (const auto& f : rc.dag.files) file_gb[f.id] = f.size_gb;
        auto in_gb = [&](const TaskInstance& t) {
            double s = 0.0;
            for (const auto& f : t.inputs) s += file_gb.at(f);
            return s;
        };
        const double cp = critical_path_hours(rc.dag, [&](const TaskInstance& t) {
            const auto& tmpl = rc.profiles.templates.at(t.template_name);
            return (tmpl.work.serial_s + tmpl.work.parallel_s_per_gb * in_gb(t) / tmpl.threads.max_threads()) / 3600.0;
        });
        double thread_seconds = 0.0;
        for (const auto& t : rc.dag.tasks) {
            const auto& tmpl = rc.profiles.templates.at(t.template_name);
            thread_seconds += tmpl.threads.min_threads() * tmpl.work.serial_s + tmpl.work.parallel_s_per_gb * in_gb(t);
        }
        if (ms + 1e-6 < cp * 3600.0) fail(i, "makespan below critical path");
        if (ms + 1e-6 < thread_seconds / rc.cluster.total_threads()) fail(i, "makespan below work / threads");
    }
    const double elapsed = seconds_since(t0);
    c.expect(elapsed < 60.0, "property suite took " + fmt("%.1f s", elapsed));
    if (failures > 5) c.expect(false, std::to_string(failures - 5) + " further violations");
    report(7, "property suites", c,
           std::to_string(cases) + " random cases (<= 10 tasks x 2 nodes), " + std::to_string(failures) +
               " violations, " + fmt("%.2f s", elapsed));
}

void criterion_scale() {
    Check c;
    const auto t0 = Clock::now();
    const auto r = run_scenario(reference_scenario("YC", false, 2863));
    const double elapsed = seconds_since(t0);
    const auto mutect = r.report.per_template.at(templates::mutect).count;
    c.expect(mutect == 154602, "mutect tasks simulated = " + std::to_string(mutect));
    c.expect(r.trace.entries.size() == r.report.task_count, "trace incomplete");
    c.expect(elapsed < 60.0, "scale run took " + fmt("%.1f s", elapsed));
    report(8, "scale run", c,
           std::to_string(r.report.task_count) + " tasks (" + std::to_string(mutect) + " mutect) on YC in " +
               fmt("%.2f s", elapsed) + fmt(", makespan %.2f h", r.report.makespan_h));
}

} // namespace

int main() {
    criterion_counts();
    const auto cal = criterion_calibration();
    criterion_dedup(cal.runs.at("YC cache R=467"));
    criterion_cost();
    criterion_orderings(cal);
    criterion_scheduler(cal);
    criterion_properties();
    criterion_scale();
    for (const auto& [id, line] : lines) std::fputs(line.c_str(), stdout);
    std::printf("%d of 8 criteria failed\n", failed_criteria);
    return failed_criteria == 0 ? 0 : 1;
}
