#pragma once

#include "bmp/branching_law.hpp"
#include "bmp/eigen_data.hpp"
#include "bmp/estimate.hpp"
#include "bmp/motions.hpp"

#include <functional>
#include <vector>

namespace bmp {

using StateFunction = std::function<double(const State&)>;

/// Paths are simulated in chunks of this many; chunk c draws from
/// RandomStream::derived(seed, c, <estimator tag>), so results do not depend
/// on the thread count.
inline constexpr std::size_t kSpineChunk = 4096;

struct SpineRun {
    std::size_t paths = 100'000;
    std::uint64_t seed = 0x5EED'0000'0002ULL;
    unsigned threads = 1;
};

struct TwoSpinePath {
    /// Exp((m2 - m1) r) splitting time; may exceed t.
    double split_time = 0.0;
    /// State of the common path at min(E, t).
    State common;
    State terminal_1;
    State terminal_2;
};

/// Throws ConfigError when (m2 - m1) r = 0.
TwoSpinePath sample_two_spine(const MotionModel& motion, const BranchingLaw& law, const State& x0, double t,
                              RandomStream& rng);

/// e^{r(m1-1)t} E_x[f(X_t)] from single paths; f(Absorbed) is taken as 0.
EstimateWithError many_to_one(const MotionModel& motion, const BranchingLaw& law, const State& x0,
                              const StateFunction& f, double t, const SpineRun& run);

/// Same estimator for several functions and increasing times along one set of
/// paths. Result is indexed [time][function].
std::vector<std::vector<EstimateWithError>> many_to_one_table(const MotionModel& motion, const BranchingLaw& law,
                                                              const State& x0, const std::vector<StateFunction>& fs,
                                                              const std::vector<double>& times, const SpineRun& run);

/// e^{2r(m1-1)t} E[e^{(Var m + (m1-1)^2) r (E ^ t)} f(X1_t) g(X2_t)] over 2-spines.
/// The event {E >= t} is integrated out (its share is e^{r(m1-1)t} f g(X_t) on
/// an unsplit path) and E is importance-sampled on [0, t) from the density
/// proportional to e^{-r(m1-1)s}, which makes the split weight constant. Adds a
/// note when the weight's coefficient of variation exceeds 10.
EstimateWithError many_to_two(const MotionModel& motion, const BranchingLaw& law, const State& x0,
                              const StateFunction& f, const StateFunction& g, double t, const SpineRun& run);

/// many_to_two with f = g = fs[k], for increasing times along one set of
/// 2-spines (one split time per spine). Indexed [time][function].
std::vector<std::vector<EstimateWithError>> many_to_two_table(const MotionModel& motion, const BranchingLaw& law,
                                                              const State& x0, const std::vector<StateFunction>& fs,
                                                              const std::vector<double>& times, const SpineRun& run);

/// E_x[M_t f(X_t)], the expectation of f under the h-transformed law, from
/// paths simulated under P. The effective sample size (sum M)^2 / sum M^2 is
/// recorded in notes; throws EstimationError when it is below 10.
EstimateWithError doob_weighted_expectation(const MotionModel& motion, const EigenData& eigen, const State& x0,
                                            const StateFunction& f, double t, const SpineRun& run);

}  // namespace bmp
