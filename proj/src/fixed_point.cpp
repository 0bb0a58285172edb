#include "bmp/fixed_point.hpp"

#include "bmp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bmp {

double pgf_extinction(const BranchingLaw& law) {
    if (!(law.m1() > 1.0)) throw ConfigError("pgf_extinction needs m1 > 1");
    if (law.prob_of(0) == 0.0) return 0.0;

    // g(s) = f(s) - s is convex with g(0) > 0, g(1) = 0 and g'(1) = m1 - 1 > 0,
    // so it is negative at its minimiser and the smallest root lies left of it.
    auto dpgf = [&](double s) {
        double d = 0.0;
        for (const auto& a : law.pmf())
            if (a.k > 0) d += a.k * a.prob * std::pow(s, a.k - 1);
        return d;
    };
    double lo = 0.0;
    double hi = 1.0;
    while (hi - lo > 1e-13) {
        const double mid = 0.5 * (lo + hi);
        (dpgf(mid) < 1.0 ? lo : hi) = mid;
    }
    const double s_min = lo;

    lo = 0.0;
    hi = s_min;
    while (hi - lo > 1e-13) {
        const double mid = 0.5 * (lo + hi);
        (law.pgf(mid) - mid > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<EstimateWithError> eta_curve(const MotionModel& motion, const BranchingLaw& law, const State& x0,
                                         const std::vector<double>& times, const EnsembleRun& run) {
    SimulationConfig cfg;
    cfg.horizon = times.empty() ? 1.0 : times.back();
    cfg.snapshot_times = times;
    cfg.seed = run.seed;
    cfg.population_cap = run.population_cap;
    const auto alive = map_replicas(motion, law, x0, cfg, run.replicas, run.threads,
                                    [](std::size_t, const std::vector<PopulationSnapshot>& snaps) {
                                        return survival_indicator(snaps);
                                    });
    std::vector<EstimateWithError> out;
    for (std::size_t k = 0; k < times.size(); ++k) {
        std::size_t extinct = 0;
        for (const auto& a : alive)
            if (!a[k]) ++extinct;
        out.push_back(proportion_estimate(extinct, alive.size()));
    }
    return out;
}

SigmaEstimate sigma_estimate(const MotionModel& motion, const EigenData& eigen, const BranchingLaw& law,
                             const State& x0, double horizon, double epsilon, const EnsembleRun& run) {
    SimulationConfig cfg;
    cfg.horizon = horizon;
    cfg.snapshot_times = {horizon};
    cfg.seed = run.seed;
    cfg.population_cap = run.population_cap;
    struct Outcome {
        double d;
        bool extinct;
        bool truncated;
    };
    const auto outcomes = map_replicas(motion, law, x0, cfg, run.replicas, run.threads,
                                       [&](std::size_t, const std::vector<PopulationSnapshot>& snaps) {
                                           const auto& s = snaps.back();
                                           if (s.truncated) return Outcome{0.0, false, true};
                                           return Outcome{malthusian_D(s, eigen, law, x0, true), s.live_states.empty(),
                                                          false};
                                       });

    auto below = [&](double eps) {
        std::size_t n = 0;
        for (const auto& o : outcomes)
            if (!o.truncated && o.d < eps) ++n;
        return proportion_estimate(n, outcomes.size());
    };
    std::size_t truncated = 0;
    std::size_t extinct = 0;
    for (const auto& o : outcomes) {
        truncated += o.truncated ? 1 : 0;
        extinct += o.extinct ? 1 : 0;
    }

    SigmaEstimate out;
    out.sigma = below(epsilon);
    out.eta = proportion_estimate(extinct, outcomes.size());
    double lo = out.sigma.value;
    double hi = out.sigma.value;
    for (double eps : kEpsilonSweep) {
        out.sweep.push_back(below(eps));
        lo = std::min(lo, out.sweep.back().value);
        hi = std::max(hi, out.sweep.back().value);
    }
    out.epsilon_sensitive = hi - lo > 2.0 * out.sigma.std_error;
    if (out.epsilon_sensitive) {
        std::ostringstream os;
        os << "sigma estimate moves by " << hi - lo << " across epsilon in {1e-2, 1e-3, 1e-4}";
        out.sigma.notes.push_back(os.str());
    }
    if (truncated > 0) out.sigma.notes.push_back(std::to_string(truncated) + " truncated replicas counted as D_T >= epsilon");
    return out;
}

}  // namespace bmp
