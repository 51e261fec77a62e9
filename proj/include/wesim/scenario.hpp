#pragma once

#include <string>

#include "wesim/default_profiles.hpp"
#include "wesim/infra.hpp"
#include "wesim/sched.hpp"
#include "wesim/sim.hpp"
#include "wesim/wes_generator.hpp"

namespace wesim {

/// One fully specified run: workflow parameters, infrastructure, policy and
/// simulator options.
struct Scenario {
    WesParams wes;
    ClusterSpec cluster;
    Policy policy;
    SimOptions options;
};

/// Scheduler each infrastructure used in the reported runs: the stand-alone
/// runtime with its single concurrency cap of 30 (threads allowed to
/// oversubscribe, as the alignment phase ran 30 x 3 threads on 80), the
/// locality-aware cluster scheduler on the staged clusters, and uniform load
/// with alignment confined to 54 nodes on the HPC system.
inline Policy default_policy(const std::string& system) {
    if (system == "SA") return Policy::local_max_concurrency(30);
    if (system == "HPC") return Policy::sge_load_balance(54);
    return Policy::hiway_locality();
}

inline Oversubscription default_oversubscription(const std::string& system) {
    return system == "SA" ? Oversubscription::penalize() : Oversubscription::forbid();
}

inline Scenario reference_scenario(const std::string& system, bool cache, int regions = 467,
                                   const ProfileSet& profiles = default_profiles()) {
    Scenario s;
    s.wes.n_tumor = 27;
    s.wes.n_control = 2;
    s.wes.n_regions = regions;
    s.wes.profile_set = profiles;
    s.cluster = preset(system);
    s.policy = default_policy(system);
    s.options.cache_enabled = cache;
    s.options.oversubscription = default_oversubscription(system);
    return s;
}

inline SimResult run_scenario(const Scenario& s) {
    const WorkflowDag dag = generate_wes(s.wes);
    return simulate(dag, s.cluster, s.policy, s.wes.profile_set, s.options);
}

} // namespace wesim
