#pragma once

#include "bmp/branching_law.hpp"
#include "bmp/eigen_data.hpp"
#include "bmp/engine.hpp"
#include "bmp/estimate.hpp"
#include "bmp/test_set.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace bmp {

/// xi_t(B).
std::size_t count_in(const PopulationSnapshot& snapshot, const TestSet& b);

/// D_t = (1 / h(x0)) sum_u h(u_t) e^{-(r(m1-1) - lambda) t}.
/// Throws ConfigError when eigen.h is a surrogate and allow_surrogate is false,
/// and std::invalid_argument for a truncated snapshot.
double malthusian_D(const PopulationSnapshot& snapshot, const EigenData& eigen, const BranchingLaw& law,
                    const State& x0, bool allow_surrogate = false);

/// W_t(B, B') = xi_t(B) / E_x[xi_t(B')], with the mean supplied by the caller.
double W_ratio(const PopulationSnapshot& snapshot, const TestSet& b, double mean_denominator);

/// nu_t(B, B') = xi_t(B) / xi_t(B'); empty when xi_t(B') = 0.
std::optional<double> nu_ratio(const PopulationSnapshot& snapshot, const TestSet& b, const TestSet& bp);

/// sup_x |F_n(x) - F(x)| for the empirical CDF of `samples`.
double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf);

/// min over live particles of h(u_t); +inf for an extinct population.
double min_h_statistic(const PopulationSnapshot& snapshot, const EigenData& eigen);
/// max over live particles of h(u_t); 0 for an extinct population. For the
/// killed diffusions Phi_x decreases in h, so this tracks min_u Phi_{u_t}.
double max_h_statistic(const PopulationSnapshot& snapshot, const EigenData& eigen);

/// CDF of the normalized quasi-stationary law on (0, inf) for the killed
/// diffusions; empty for the other motions.
std::optional<std::function<double(double)>> qsd_cdf(const MotionModel& motion);

struct MartingaleCurve {
    std::vector<double> times;
    std::vector<EstimateWithError> mean_D;
    std::vector<EstimateWithError> second_moment_D;
};

struct EnsembleRun {
    std::size_t replicas = 10'000;
    std::uint64_t seed = 0x5EED'0000'0001ULL;
    unsigned threads = 1;
    std::size_t population_cap = 1'000'000;
};

/// Engine estimates of E[D_t] and E[D_t^2]; truncated replicas are excluded
/// and counted per time.
MartingaleCurve martingale_curve(const MotionModel& motion, const EigenData& eigen, const BranchingLaw& law,
                                 const State& x0, const std::vector<double>& times, const EnsembleRun& run,
                                 bool allow_surrogate = false);

}  // namespace bmp
