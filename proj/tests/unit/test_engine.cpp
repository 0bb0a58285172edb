#include "bmp/engine.hpp"
#include "bmp/errors.hpp"
#include "bmp/estimate.hpp"
#include "bmp/statistics.hpp"

#include <doctest.h>

#include <cmath>

using namespace bmp;

namespace {

SimulationConfig cfg(std::vector<double> times, std::uint64_t seed) {
    SimulationConfig c;
    c.horizon = times.back();
    c.snapshot_times = std::move(times);
    c.seed = seed;
    return c;
}

}  // namespace

TEST_CASE("mean population grows like e^{r(m1-1)t} without absorption") {
    const MotionModel chain = ErgodicCTMC::default_example();
    const BranchingLaw law({{0, 0.2}, {2, 0.8}}, 1.0);
    const auto sizes = map_replicas(chain, law, Count{1}, cfg({1.0}, 42), 8000, 2,
                                    [](std::size_t, const std::vector<PopulationSnapshot>& s) {
                                        return static_cast<double>(s.back().size());
                                    });
    const auto m = mean_estimate(sizes);
    CHECK(std::abs(m.value - std::exp(0.6)) < 4.0 * m.std_error);
}

TEST_CASE("pure death law") {
    const MotionModel ou = TransientOU{0.5, 1.0};
    const BranchingLaw death({{0, 1.0}}, 0.7);
    const auto dead = map_replicas(ou, death, Real{0.0}, cfg({1.0, 2.0}, 3), 6000, 1,
                                   [](std::size_t, const std::vector<PopulationSnapshot>& s) {
                                       CHECK(s[0].size() <= 1);
                                       CHECK(s[0].branch_events == s[0].dead_count);
                                       return s[1].size() == 0 ? 1.0 : 0.0;
                                   });
    const auto p = mean_estimate(dead);
    CHECK(std::abs(p.value - (1.0 - std::exp(-1.4))) < 4.0 * p.std_error);
}

TEST_CASE("bookkeeping counters are consistent") {
    const MotionModel ou = KilledOU{1.0};
    const BranchingLaw law({{0, 0.2}, {1, 0.1}, {3, 0.7}}, 2.0);
    for (std::uint64_t r = 0; r < 200; ++r) {
        auto c = cfg({0.5, 1.0, 1.5}, 9);
        c.replica_index = r;
        const auto snaps = run_replica(ou, law, RealPos{1.0}, c);
        REQUIRE(snaps.size() == 3);
        for (std::size_t k = 0; k < snaps.size(); ++k) {
            const auto& s = snaps[k];
            CHECK(s.time == c.snapshot_times[k]);
            // 1 + offspring - branch events - absorbed = live
            CHECK(1 + s.offspring_total == s.branch_events + s.absorbed_count + s.size());
            for (const auto& x : s.live_states) CHECK(real_value(x) > 0.0);
            if (k > 0) {
                CHECK(s.branch_events >= snaps[k - 1].branch_events);
                CHECK(s.absorbed_count >= snaps[k - 1].absorbed_count);
            }
            CHECK(s.barrier_crossed == (s.absorbed_count > 0));
        }
    }
}

TEST_CASE("replicas are reproducible and independent of thread count") {
    const MotionModel bm = KilledDriftBM{1.0};
    const BranchingLaw law({{2, 1.0}}, 1.25);
    auto run = [&](unsigned threads) {
        return map_replicas(bm, law, RealPos{1.0}, cfg({1.0, 2.0}, 77), 64, threads,
                            [](std::size_t, const std::vector<PopulationSnapshot>& s) { return s.back().live_states; });
    };
    const auto a = run(1);
    const auto b = run(4);
    CHECK(a == b);
}

TEST_CASE("population cap truncates and later snapshots stay truncated") {
    const MotionModel chain = ErgodicCTMC::default_example();
    const BranchingLaw law({{2, 1.0}}, 3.0);
    auto c = cfg({1.0, 3.0, 4.0}, 1);
    c.population_cap = 100;
    const auto snaps = run_replica(chain, law, Count{1}, c);
    CHECK(snaps[2].truncated);
    CHECK(snaps[2].live_states.empty());
    CHECK(survival_indicator(snaps)[2]);
    CHECK_THROWS(malthusian_D(snaps[2], eigen_data(chain), law, Count{1}));
}

TEST_CASE("simulation config validation lists every issue") {
    SimulationConfig c;
    c.horizon = 1.0;
    c.snapshot_times = {0.5, 0.2, 2.0};
    c.population_cap = 0;
    try {
        c.validate();
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.issues().size() >= 3);
    }
}

TEST_CASE("the transient OU population is exact under branching") {
    // E xi_t(R) = e^{r(m1-1)t}, independent of the motion
    const MotionModel ou = TransientOU{1.0, 25.0};
    const BranchingLaw law({{0, 0.3}, {3, 0.7}}, 0.8);
    const auto sizes = map_replicas(ou, law, Real{5.0}, cfg({1.5}, 8), 6000, 1,
                                    [](std::size_t, const std::vector<PopulationSnapshot>& s) {
                                        return static_cast<double>(s.back().size());
                                    });
    const auto m = mean_estimate(sizes);
    CHECK(std::abs(m.value - std::exp(0.8 * 1.1 * 1.5)) < 4.0 * m.std_error);
}
