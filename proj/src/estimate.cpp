#include "bmp/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bmp {

EstimateWithError mean_estimate(const std::vector<double>& xs, std::size_t excluded_truncated) {
    EstimateWithError e;
    e.n_effective = xs.size();
    e.excluded_truncated = excluded_truncated;
    if (xs.empty()) {
        e.value = std::numeric_limits<double>::quiet_NaN();
        e.std_error = std::numeric_limits<double>::quiet_NaN();
        return e;
    }
    const double n = static_cast<double>(xs.size());
    double sum = 0.0;
    for (double x : xs) sum += x;
    const double mean = sum / n;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    e.value = mean;
    e.std_error = xs.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    return e;
}

EstimateWithError scaled(EstimateWithError e, double factor) {
    e.value *= factor;
    e.std_error *= std::abs(factor);
    return e;
}

double joint_se(const EstimateWithError& a, const EstimateWithError& b) {
    return std::hypot(a.std_error, b.std_error);
}

bool agree_within(const EstimateWithError& a, const EstimateWithError& b, double k) {
    return std::abs(a.value - b.value) <= k * joint_se(a, b);
}

WilsonInterval wilson_interval(std::size_t successes, std::size_t n, double z) {
    if (n == 0) return {0.0, 1.0};
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(successes) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double centre = (p + z2 / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

EstimateWithError proportion_estimate(std::size_t successes, std::size_t n, std::size_t excluded_truncated) {
    EstimateWithError e;
    e.n_effective = n;
    e.excluded_truncated = excluded_truncated;
    if (n == 0) {
        e.value = std::numeric_limits<double>::quiet_NaN();
        e.std_error = std::numeric_limits<double>::quiet_NaN();
        return e;
    }
    const auto w = wilson_interval(successes, n);
    e.value = static_cast<double>(successes) / static_cast<double>(n);
    e.std_error = (w.hi - w.lo) / (2.0 * 1.96);
    return e;
}

double quantile(std::vector<double> xs, double q) {
    if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(xs.begin(), xs.end());
    const double pos = q * static_cast<double>(xs.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, xs.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    if (frac == 0.0 || std::isinf(xs[lo])) return xs[lo];
    return xs[lo] + frac * (xs[hi] - xs[lo]);
}

EstimateWithError quantile_estimate(std::vector<double> xs, double q, std::size_t excluded_truncated) {
    EstimateWithError e;
    e.n_effective = xs.size();
    e.excluded_truncated = excluded_truncated;
    e.value = quantile(xs, q);
    if (xs.size() < 2) {
        e.std_error = std::numeric_limits<double>::quiet_NaN();
        return e;
    }
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    const double spread = std::sqrt(n * q * (1.0 - q));
    const auto at = [&](double pos) {
        const auto i = static_cast<std::size_t>(std::clamp(std::round(pos), 0.0, n - 1.0));
        return xs[i];
    };
    e.std_error = 0.5 * (at(n * q + spread) - at(n * q - spread));
    if (!std::isfinite(e.std_error)) e.std_error = std::numeric_limits<double>::quiet_NaN();
    return e;
}

}  // namespace bmp
