#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace bmp {

struct EstimateWithError {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t n_effective = 0;
    std::size_t excluded_truncated = 0;
    /// Warnings attached by the estimator (heavy weights, low ESS, ...).
    std::vector<std::string> notes;
};

/// Sample mean with standard error s / sqrt(n). Summation runs in input order.
EstimateWithError mean_estimate(const std::vector<double>& xs, std::size_t excluded_truncated = 0);

/// value and std_error multiplied by `factor`.
EstimateWithError scaled(EstimateWithError e, double factor);

/// sqrt(se_a^2 + se_b^2): the standard error of a difference of independent estimates.
double joint_se(const EstimateWithError& a, const EstimateWithError& b);

/// |a - b| <= k * joint_se(a, b).
bool agree_within(const EstimateWithError& a, const EstimateWithError& b, double k);

struct WilsonInterval {
    double lo;
    double hi;
};
WilsonInterval wilson_interval(std::size_t successes, std::size_t n, double z = 1.96);

/// Proportion successes / n. std_error is the half-width of the 95% Wilson
/// interval divided by 1.96, which stays positive at 0 and 1.
EstimateWithError proportion_estimate(std::size_t successes, std::size_t n, std::size_t excluded_truncated = 0);

/// Empirical q-quantile (type 7, linear interpolation). Empty input gives NaN.
double quantile(std::vector<double> xs, double q);

/// quantile() with a distribution-free standard error from the order
/// statistics at n q +- sqrt(n q (1 - q)), halved.
EstimateWithError quantile_estimate(std::vector<double> xs, double q, std::size_t excluded_truncated = 0);

}  // namespace bmp
