#include "bmp/statistics.hpp"

#include "bmp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bmp {

std::size_t count_in(const PopulationSnapshot& snapshot, const TestSet& b) {
    std::size_t n = 0;
    for (const auto& s : snapshot.live_states)
        if (b.contains(s)) ++n;
    return n;
}

double malthusian_D(const PopulationSnapshot& snapshot, const EigenData& eigen, const BranchingLaw& law,
                    const State& x0, bool allow_surrogate) {
    if (eigen.surrogate_h && !allow_surrogate) {
        throw ConfigError("D_t with a surrogate h is only available when surrogate mode is enabled");
    }
    if (snapshot.truncated) throw std::invalid_argument("D_t is undefined on a truncated snapshot");
    const double h0 = eigen.h_at(x0);
    if (!(h0 > 0.0)) throw std::invalid_argument("D_t needs h(x0) > 0");
    double sum = 0.0;
    for (const auto& s : snapshot.live_states) sum += eigen.h_at(s);
    return sum / h0 * std::exp(-(law.growth_rate() - eigen.lambda) * snapshot.time);
}

double W_ratio(const PopulationSnapshot& snapshot, const TestSet& b, double mean_denominator) {
    if (!(mean_denominator > 0.0)) throw std::invalid_argument("W_t needs a positive mean denominator");
    return static_cast<double>(count_in(snapshot, b)) / mean_denominator;
}

std::optional<double> nu_ratio(const PopulationSnapshot& snapshot, const TestSet& b, const TestSet& bp) {
    const auto den = count_in(snapshot, bp);
    if (den == 0) return std::nullopt;
    return static_cast<double>(count_in(snapshot, b)) / static_cast<double>(den);
}

double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw std::invalid_argument("ks_distance needs samples");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    std::size_t i = 0;
    while (i < samples.size()) {
        // Treat ties as one jump of the empirical CDF.
        std::size_t j = i;
        while (j < samples.size() && samples[j] == samples[i]) ++j;
        const double f = std::clamp(cdf(samples[i]), 0.0, 1.0);
        d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(j) / n - f});
        i = j;
    }
    return std::min(d, 1.0);
}

double min_h_statistic(const PopulationSnapshot& snapshot, const EigenData& eigen) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& s : snapshot.live_states) m = std::min(m, eigen.h_at(s));
    return m;
}

double max_h_statistic(const PopulationSnapshot& snapshot, const EigenData& eigen) {
    double m = 0.0;
    for (const auto& s : snapshot.live_states) m = std::max(m, eigen.h_at(s));
    return m;
}

std::optional<std::function<double(double)>> qsd_cdf(const MotionModel& motion) {
    if (const auto* m = std::get_if<KilledOU>(&motion)) {
        const double lam = m->lambda;
        return [lam](double x) { return x <= 0.0 ? 0.0 : -std::expm1(-lam * x * x); };
    }
    if (const auto* m = std::get_if<KilledDriftBM>(&motion)) {
        const double c = m->c;
        return [c](double x) { return x <= 0.0 ? 0.0 : 1.0 - (1.0 + c * x) * std::exp(-c * x); };
    }
    return std::nullopt;
}

MartingaleCurve martingale_curve(const MotionModel& motion, const EigenData& eigen, const BranchingLaw& law,
                                 const State& x0, const std::vector<double>& times, const EnsembleRun& run,
                                 bool allow_surrogate) {
    if (eigen.surrogate_h && !allow_surrogate) {
        throw ConfigError("D_t with a surrogate h is only available when surrogate mode is enabled");
    }
    SimulationConfig cfg;
    cfg.horizon = times.empty() ? 1.0 : times.back();
    cfg.snapshot_times = times;
    cfg.seed = run.seed;
    cfg.population_cap = run.population_cap;

    // NaN marks a truncated snapshot.
    auto per_replica = map_replicas(motion, law, x0, cfg, run.replicas, run.threads,
                                    [&](std::size_t, const std::vector<PopulationSnapshot>& snaps) {
                                        std::vector<double> d;
                                        d.reserve(snaps.size());
                                        for (const auto& s : snaps) {
                                            d.push_back(s.truncated ? std::numeric_limits<double>::quiet_NaN()
                                                                    : malthusian_D(s, eigen, law, x0, true));
                                        }
                                        return d;
                                    });

    MartingaleCurve curve;
    curve.times = times;
    for (std::size_t k = 0; k < times.size(); ++k) {
        std::vector<double> d;
        std::vector<double> d2;
        std::size_t excluded = 0;
        for (const auto& rep : per_replica) {
            if (std::isnan(rep[k])) {
                ++excluded;
                continue;
            }
            d.push_back(rep[k]);
            d2.push_back(rep[k] * rep[k]);
        }
        curve.mean_D.push_back(mean_estimate(d, excluded));
        curve.second_moment_D.push_back(mean_estimate(d2, excluded));
    }
    return curve;
}

}  // namespace bmp
