#include "bmp/engine.hpp"

#include "bmp/errors.hpp"

#include <cstdlib>
#include <queue>
#include <string>
#include <thread>
#include <tuple>

namespace bmp {

unsigned resolve_thread_count(std::optional<unsigned> requested) {
    if (requested && *requested > 0) return *requested;
    if (const char* env = std::getenv("BMPSIM_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) return static_cast<unsigned>(v);
        } catch (const std::exception&) {
            // fall through to the hardware default
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void SimulationConfig::validate() const {
    IssueList issues;
    issues.require(horizon > 0.0, "horizon must be > 0");
    issues.require(!snapshot_times.empty(), "snapshot_times must be nonempty");
    for (std::size_t i = 0; i < snapshot_times.size(); ++i) {
        const double t = snapshot_times[i];
        if (!(t > 0.0) || t > horizon) {
            issues.add("snapshot time " + std::to_string(t) + " is outside (0, horizon]");
        }
        if (i > 0 && !(t > snapshot_times[i - 1])) issues.add("snapshot_times must be strictly increasing");
    }
    issues.require(population_cap >= 1, "population_cap must be >= 1");
    issues.throw_if_any();
}

namespace {

struct Event {
    double time;
    std::uint64_t id;
    std::size_t slot;
    bool operator>(const Event& o) const { return std::tie(time, id) > std::tie(o.time, o.id); }
};

class Replica {
public:
    Replica(const MotionModel& motion, const BranchingLaw& law, const SimulationConfig& cfg)
        : motion_(motion),
          law_(law),
          cfg_(cfg),
          jump_(is_jump_motion(motion)),
          rng_(RandomStream::derived(cfg.seed, cfg.replica_index, stream_tag::replica)) {}

    std::vector<PopulationSnapshot> run(const State& x0) {
        if (is_absorbed(x0)) throw std::invalid_argument("run_replica needs a non-absorbed initial state");
        spawn(x0, 0.0, std::nullopt);

        std::vector<PopulationSnapshot> out;
        out.reserve(cfg_.snapshot_times.size());
        for (double t_snap : cfg_.snapshot_times) {
            while (!truncated_ && !events_.empty() && events_.top().time <= t_snap) {
                const Event ev = events_.top();
                events_.pop();
                handle(ev);
            }
            if (truncated_) {
                PopulationSnapshot s = counters(t_snap);
                s.truncated = true;
                out.push_back(std::move(s));
                continue;
            }
            out.push_back(snapshot(t_snap));
        }
        return out;
    }

private:
    double clock_rate(const State& s) const { return law_.rate() + (jump_ ? exit_rate(motion_, s) : 0.0); }

    void spawn(const State& s, double t, std::optional<std::uint64_t> parent) {
        std::size_t slot;
        if (!free_.empty()) {
            slot = free_.back();
            free_.pop_back();
        } else {
            slot = slots_.size();
            slots_.emplace_back();
            alive_.push_back(0);
            live_pos_.push_back(0);
        }
        Particle& p = slots_[slot];
        p.id = next_id_++;
        p.parent_id = parent;
        p.birth_time = t;
        p.state = s;
        p.updated_at = t;
        p.next_event_time = t + rng_.exponential(clock_rate(s));
        alive_[slot] = 1;
        live_pos_[slot] = live_.size();
        live_.push_back(slot);
        events_.push({p.next_event_time, p.id, slot});
    }

    void remove(std::size_t slot) {
        alive_[slot] = 0;
        const std::size_t pos = live_pos_[slot];
        const std::size_t last = live_.back();
        live_[pos] = last;
        live_pos_[last] = pos;
        live_.pop_back();
        free_.push_back(slot);
    }

    // Brings a diffusing particle to time t. Returns false if it was absorbed.
    bool advance(std::size_t slot, double t) {
        Particle& p = slots_[slot];
        if (jump_ || !(t > p.updated_at)) return true;
        MonitoredStep ms = step_monitored(motion_, p.state, t - p.updated_at, rng_);
        p.updated_at = t;
        if (ms.crossed_zero) barrier_crossed_ = true;
        if (is_absorbed(ms.state)) {
            ++absorbed_;
            remove(slot);
            return false;
        }
        p.state = std::move(ms.state);
        return true;
    }

    void handle(const Event& ev) {
        if (!alive_[ev.slot] || slots_[ev.slot].id != ev.id) return;  // stale entry
        Particle& p = slots_[ev.slot];

        if (jump_) {
            const double jump_rate = exit_rate(motion_, p.state);
            if (rng_.uniform() * (jump_rate + law_.rate()) < jump_rate) {
                State next = sample_jump(motion_, p.state, rng_);
                if (is_absorbed(next)) {
                    ++absorbed_;
                    barrier_crossed_ = true;
                    remove(ev.slot);
                    return;
                }
                p.state = std::move(next);
                p.updated_at = ev.time;
                p.next_event_time = ev.time + rng_.exponential(clock_rate(p.state));
                events_.push({p.next_event_time, p.id, ev.slot});
                return;
            }
        } else if (!advance(ev.slot, ev.time)) {
            return;
        }
        branch(ev.slot, ev.time);
    }

    void branch(std::size_t slot, double t) {
        const int m = law_.sample(rng_);
        ++branch_events_;
        offspring_total_ += static_cast<std::uint64_t>(m);
        if (m == 0) ++dead_;
        if (live_.size() - 1 + static_cast<std::size_t>(m) > cfg_.population_cap) {
            truncated_ = true;
            return;
        }
        const State at = slots_[slot].state;
        const std::uint64_t parent = slots_[slot].id;
        remove(slot);
        for (int k = 0; k < m; ++k) spawn(at, t, parent);
    }

    PopulationSnapshot counters(double t) const {
        PopulationSnapshot s;
        s.time = t;
        s.absorbed_count = absorbed_;
        s.dead_count = dead_;
        s.branch_events = branch_events_;
        s.offspring_total = offspring_total_;
        s.barrier_crossed = barrier_crossed_;
        return s;
    }

    PopulationSnapshot snapshot(double t) {
        std::size_t i = 0;
        while (i < live_.size()) {
            if (advance(live_[i], t)) ++i;  // on absorption the slot at i is replaced by the last one
        }
        PopulationSnapshot s = counters(t);
        s.live_states.reserve(live_.size());
        for (std::size_t slot : live_) s.live_states.push_back(slots_[slot].state);
        return s;
    }

    const MotionModel& motion_;
    const BranchingLaw& law_;
    const SimulationConfig& cfg_;
    const bool jump_;
    RandomStream rng_;

    std::vector<Particle> slots_;
    std::vector<char> alive_;
    std::vector<std::size_t> live_pos_;
    std::vector<std::size_t> live_;
    std::vector<std::size_t> free_;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;
    std::uint64_t next_id_ = 0;

    std::uint64_t absorbed_ = 0;
    std::uint64_t dead_ = 0;
    std::uint64_t branch_events_ = 0;
    std::uint64_t offspring_total_ = 0;
    bool truncated_ = false;
    bool barrier_crossed_ = false;
};

}  // namespace

std::vector<PopulationSnapshot> run_replica(const MotionModel& motion, const BranchingLaw& law, const State& x0,
                                            const SimulationConfig& cfg) {
    cfg.validate();
    return Replica(motion, law, cfg).run(x0);
}

std::vector<bool> survival_indicator(const std::vector<PopulationSnapshot>& snapshots) {
    std::vector<bool> out;
    out.reserve(snapshots.size());
    for (const auto& s : snapshots) out.push_back(s.truncated || !s.live_states.empty());
    return out;
}

}  // namespace bmp
