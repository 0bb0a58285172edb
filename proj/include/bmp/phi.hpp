#pragma once

#include "bmp/branching_law.hpp"
#include "bmp/eigen_data.hpp"
#include "bmp/motions.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace bmp {

/// E_x[M_s^2] = e^{2 lambda s} E_x[h(X_s)^2] / h(x)^2.
///
/// Ergodic chain: 1. Galton-Watson: 1 + sigma_rho^2 (e^{lambda s} - 1) / (lambda x)
/// from the second-moment equation of the chain. Transient OU: Gaussian closed
/// form. Killed OU and killed drifted BM: quadrature of h^2 against the
/// transition density, carried out in log space. Throws ConfigError for the
/// contact process (no density; see phi_quadrature's Monte Carlo fallback).
double second_moment_M(const MotionModel& motion, const EigenData& eigen, const State& x0, double s);

struct PhiOptions {
    double t_max = 60.0;
    /// Log-slope band around 0 inside which the tail is reported as ambiguous.
    double tol = 0.02;
    /// Contact process only: paths per grid time for the Monte Carlo E[M_s^2].
    std::size_t fallback_paths = 4000;
    std::uint64_t seed = 0x5EED'0000'0003ULL;
};

struct PhiResult {
    /// Phi_x, or +inf when the tail test says divergent.
    double value = 0.0;
    bool divergent = false;
    bool ambiguous = false;
    /// Mean log-slope of the integrand over [t_max / 10, t_max].
    double tail_slope = 0.0;
    /// Integral over [0, t_max] alone.
    double integral_to_t_max = 0.0;
    std::vector<std::string> notes;
};

/// Phi_x = (m2 - m1) int_0^inf E_x[M_s^2] r e^{-r(m1-1)s} ds.
///
/// Adaptive Gauss-Kronrod on [0, t_max]. The integrand's log-slope over the
/// last decade [t_max / 10, t_max] classifies the tail: >= 0 is divergent.
/// A finite result adds the exponential tail g(t_max) / |local slope|.
PhiResult phi_quadrature(const MotionModel& motion, const EigenData& eigen, const BranchingLaw& law, const State& x0,
                         const PhiOptions& options = {});

/// E_x[D_t^2] = e^{-r(m1-1)t} E_x[M_t^2] + (m2 - m1) r int_0^t E_x[M_s^2] e^{-r(m1-1)s} ds.
double second_moment_D(const MotionModel& motion, const EigenData& eigen, const BranchingLaw& law, const State& x0,
                       double t);

}  // namespace bmp
