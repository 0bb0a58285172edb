#pragma once

#include "bmp/branching_law.hpp"
#include "bmp/eigen_data.hpp"
#include "bmp/estimate.hpp"
#include "bmp/motions.hpp"
#include "bmp/statistics.hpp"

#include <vector>

namespace bmp {

/// Smallest root of f(s) = s in [0, 1) for the offspring pgf f, by bisection
/// to 1e-12. Throws ConfigError unless m1 > 1.
double pgf_extinction(const BranchingLaw& law);

/// P(|xi_t| = 0) at each time with Wilson standard errors. Truncated replicas
/// are alive by construction and count as survivors, so nothing is excluded.
std::vector<EstimateWithError> eta_curve(const MotionModel& motion, const BranchingLaw& law, const State& x0,
                                         const std::vector<double>& times, const EnsembleRun& run);

inline const std::vector<double> kEpsilonSweep = {1e-2, 1e-3, 1e-4};

struct SigmaEstimate {
    /// P(D_T < epsilon) at the requested epsilon.
    EstimateWithError sigma;
    /// P(|xi_T| = 0) from the same replicas.
    EstimateWithError eta;
    /// The estimate at each epsilon of kEpsilonSweep.
    std::vector<EstimateWithError> sweep;
    /// Range over the sweep exceeds 2 standard errors.
    bool epsilon_sensitive = false;
};

/// Finite-horizon proxy of sigma(x) = P_x(D_inf = 0). Truncated replicas have
/// an enormous population and count as D_T >= epsilon.
SigmaEstimate sigma_estimate(const MotionModel& motion, const EigenData& eigen, const BranchingLaw& law,
                             const State& x0, double horizon, double epsilon, const EnsembleRun& run);

}  // namespace bmp
