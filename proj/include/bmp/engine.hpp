#pragma once

#include "bmp/branching_law.hpp"
#include "bmp/motions.hpp"
#include "bmp/parallel.hpp"
#include "bmp/state.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace bmp {

struct Particle {
    std::uint64_t id = 0;
    std::optional<std::uint64_t> parent_id;
    double birth_time = 0.0;
    State state;
    /// Time at which `state` was last brought up to date (diffusions move lazily).
    double updated_at = 0.0;
    /// Next event of this particle: a branch, or for jump motions the first
    /// of the branch clock and the motion's own jump clock.
    double next_event_time = 0.0;
};

/// xi_t plus the bookkeeping counters, all cumulative from time 0.
struct PopulationSnapshot {
    double time = 0.0;
    std::vector<State> live_states;
    /// Particles whose motion reached the absorbing set.
    std::uint64_t absorbed_count = 0;
    /// Branch events with zero offspring.
    std::uint64_t dead_count = 0;
    std::uint64_t branch_events = 0;
    std::uint64_t offspring_total = 0;
    /// The population cap was hit at or before this time; live_states is then
    /// empty and must not be used.
    bool truncated = false;
    /// Some particle path touched (-inf, 0] by this time. Exact for the
    /// diffusions (bridge-sampled); for the killed motions it means some
    /// particle was absorbed.
    bool barrier_crossed = false;

    std::size_t size() const noexcept { return live_states.size(); }
};

struct SimulationConfig {
    double horizon = 1.0;
    std::vector<double> snapshot_times;
    std::size_t population_cap = 1'000'000;
    std::uint64_t seed = 0x5EED'0000'0001ULL;
    std::uint64_t replica_index = 0;

    /// Throws ConfigError listing every violation.
    void validate() const;
};

/// One realization of the branching process started from a single particle at
/// x0, observed at cfg.snapshot_times. Replica r draws from
/// RandomStream::derived(cfg.seed, r, stream_tag::replica).
std::vector<PopulationSnapshot> run_replica(const MotionModel& motion, const BranchingLaw& law, const State& x0,
                                            const SimulationConfig& cfg);

/// |xi_t| > 0 per snapshot; truncated snapshots count as alive.
std::vector<bool> survival_indicator(const std::vector<PopulationSnapshot>& snapshots);

/// Runs replicas 0..n-1 in parallel and returns reduce(index, snapshots) in
/// replica-index order. `reduce` keeps only what the caller needs, so memory
/// stays proportional to one population per worker.
template <typename Reduce>
auto map_replicas(const MotionModel& motion, const BranchingLaw& law, const State& x0, const SimulationConfig& base,
                  std::size_t n, unsigned threads, Reduce&& reduce) {
    base.validate();
    return map_indexed(n, threads, [&](std::size_t i) {
        SimulationConfig cfg = base;
        cfg.replica_index = i;
        return reduce(i, run_replica(motion, law, x0, cfg));
    });
}

}  // namespace bmp
