#include "bmp/spine.hpp"

#include "bmp/errors.hpp"
#include "bmp/motion_core.hpp"
#include "bmp/parallel.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace bmp {

namespace {

double eval(const StateFunction& f, const State& s) { return is_absorbed(s) ? 0.0 : f(s); }

void check_times(const std::vector<double>& times) {
    if (times.empty()) throw std::invalid_argument("spine estimators need at least one time");
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] > 0.0) || (i > 0 && !(times[i] > times[i - 1]))) {
            throw std::invalid_argument("spine times must be positive and strictly increasing");
        }
    }
}

std::size_t chunk_count(std::size_t paths) { return (paths + kSpineChunk - 1) / kSpineChunk; }

std::size_t chunk_size(std::size_t paths, std::size_t c) {
    return std::min(kSpineChunk, paths - c * kSpineChunk);
}

State advance(const MotionModel& motion, const State& s, double dt, RandomStream& rng) {
    if (is_absorbed(s) || !(dt > 0.0)) return s;
    return step(motion, s, dt, rng);
}

// values[time][function] flattened per path, chunk results concatenated in chunk order.
using Columns = std::vector<std::vector<double>>;

Columns concat(std::vector<Columns> parts, std::size_t width) {
    Columns out(width);
    for (auto& part : parts)
        for (std::size_t k = 0; k < width; ++k) out[k].insert(out[k].end(), part[k].begin(), part[k].end());
    return out;
}

}  // namespace

TwoSpinePath sample_two_spine(const MotionModel& motion, const BranchingLaw& law, const State& x0, double t,
                              RandomStream& rng) {
    if (!(law.split_rate() > 0.0)) throw ConfigError("2-spine needs (m2 - m1) r > 0");
    if (!(t > 0.0)) throw std::invalid_argument("2-spine needs t > 0");
    TwoSpinePath p;
    p.split_time = rng.exponential(law.split_rate());
    if (p.split_time >= t) {
        p.common = advance(motion, x0, t, rng);
        p.terminal_1 = p.common;
        p.terminal_2 = p.common;
        return p;
    }
    p.common = advance(motion, x0, p.split_time, rng);
    p.terminal_1 = advance(motion, p.common, t - p.split_time, rng);
    p.terminal_2 = advance(motion, p.common, t - p.split_time, rng);
    return p;
}

std::vector<std::vector<EstimateWithError>> many_to_one_table(const MotionModel& motion, const BranchingLaw& law,
                                                              const State& x0, const std::vector<StateFunction>& fs,
                                                              const std::vector<double>& times, const SpineRun& run) {
    check_times(times);
    const std::size_t width = times.size() * fs.size();
    auto parts = map_indexed(chunk_count(run.paths), run.threads, [&](std::size_t c) {
        auto rng = RandomStream::derived(run.seed, c, stream_tag::many_to_one);
        Columns cols(width);
        for (std::size_t i = 0; i < chunk_size(run.paths, c); ++i) {
            State s = x0;
            double now = 0.0;
            for (std::size_t k = 0; k < times.size(); ++k) {
                s = advance(motion, s, times[k] - now, rng);
                now = times[k];
                for (std::size_t j = 0; j < fs.size(); ++j) cols[k * fs.size() + j].push_back(eval(fs[j], s));
            }
        }
        return cols;
    });
    const Columns cols = concat(std::move(parts), width);

    std::vector<std::vector<EstimateWithError>> out(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double growth = std::exp(law.growth_rate() * times[k]);
        for (std::size_t j = 0; j < fs.size(); ++j) out[k].push_back(scaled(mean_estimate(cols[k * fs.size() + j]), growth));
    }
    return out;
}

EstimateWithError many_to_one(const MotionModel& motion, const BranchingLaw& law, const State& x0,
                              const StateFunction& f, double t, const SpineRun& run) {
    return many_to_one_table(motion, law, x0, {f}, {t}, run)[0][0];
}

namespace {

std::vector<std::vector<EstimateWithError>> two_spine_table(const MotionModel& motion, const BranchingLaw& law,
                                                            const State& x0,
                                                            const std::vector<std::pair<StateFunction, StateFunction>>& fg,
                                                            const std::vector<double>& times, const SpineRun& run) {
    check_times(times);
    if (!(law.split_rate() > 0.0)) throw ConfigError("2-spine needs (m2 - m1) r > 0");
    const double kappa_r = law.two_spine_exponent() * law.rate();
    const std::size_t nf = fg.size();
    const std::size_t width = times.size() * (nf + 1);  // last column per time: the weight itself

    // The split indicator is integrated out: {E >= t} contributes
    // e^{(2a + kappa r - c) t} f g(X_t) = e^{a t} f g(X_t) on every path.
    // The split time itself is drawn on [0, t_max) with density proportional
    // to e^{-a s}, which is c e^{-c s} e^{kappa r s} up to a constant, so the
    // split weight is the constant c Z. Same expectation as the plain 2-spine
    // average without the rare-event weights.
    const double c_split = law.split_rate();
    const double a = law.growth_rate();
    const double t_max = times.back();
    const double tilt = kappa_r - c_split + a;  // 0 up to rounding
    const double z = std::abs(a * t_max) < 1e-12 ? t_max : -std::expm1(-a * t_max) / a;
    auto sample_split = [&](RandomStream& rng) {
        const double u = rng.uniform();
        if (std::abs(a * t_max) < 1e-12) return u * t_max;
        return std::min(-std::log1p(u * std::expm1(-a * t_max)) / a, std::nextafter(t_max, 0.0));
    };

    auto parts = map_indexed(chunk_count(run.paths), run.threads, [&](std::size_t c) {
        auto rng = RandomStream::derived(run.seed, c, stream_tag::many_to_two);
        Columns cols(width);
        for (std::size_t i = 0; i < chunk_size(run.paths, c); ++i) {
            const double split = sample_split(rng);
            State x = x0;  // unsplit path
            State y1 = x0;
            State y2 = x0;
            double now = 0.0;
            for (std::size_t k = 0; k < times.size(); ++k) {
                const double t = times[k];
                if (split >= t) {
                    x = advance(motion, x, t - now, rng);
                } else if (split > now) {
                    x = advance(motion, x, split - now, rng);
                    y1 = advance(motion, x, t - split, rng);
                    y2 = advance(motion, x, t - split, rng);
                    x = advance(motion, x, t - split, rng);
                } else {
                    x = advance(motion, x, t - now, rng);
                    y1 = advance(motion, y1, t - now, rng);
                    y2 = advance(motion, y2, t - now, rng);
                }
                now = t;
                const double w_diag = std::exp(-a * t);  // e^{at} once the e^{2at} factor is applied
                const double w_split = split < t ? c_split * z * std::exp(tilt * split) : 0.0;
                const std::size_t base = k * (nf + 1);
                for (std::size_t j = 0; j < nf; ++j) {
                    double v = w_diag * eval(fg[j].first, x) * eval(fg[j].second, x);
                    if (w_split > 0.0) v += w_split * eval(fg[j].first, y1) * eval(fg[j].second, y2);
                    cols[base + j].push_back(v);
                }
                cols[base + nf].push_back(w_diag + w_split);
            }
        }
        return cols;
    });
    const Columns cols = concat(std::move(parts), width);

    std::vector<std::vector<EstimateWithError>> out(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
        const std::size_t base = k * (nf + 1);
        const auto wstat = mean_estimate(cols[base + nf]);
        const double cv = wstat.std_error * std::sqrt(static_cast<double>(wstat.n_effective)) / wstat.value;
        const double growth = std::exp(2.0 * law.growth_rate() * times[k]);
        for (std::size_t j = 0; j < nf; ++j) {
            auto e = scaled(mean_estimate(cols[base + j]), growth);
            if (cv > 10.0) {
                std::ostringstream os;
                os << "two-spine weight coefficient of variation " << cv << " exceeds 10";
                e.notes.push_back(os.str());
            }
            out[k].push_back(std::move(e));
        }
    }
    return out;
}

}  // namespace

std::vector<std::vector<EstimateWithError>> many_to_two_table(const MotionModel& motion, const BranchingLaw& law,
                                                              const State& x0, const std::vector<StateFunction>& fs,
                                                              const std::vector<double>& times, const SpineRun& run) {
    std::vector<std::pair<StateFunction, StateFunction>> fg;
    for (const auto& f : fs) fg.emplace_back(f, f);
    return two_spine_table(motion, law, x0, fg, times, run);
}

EstimateWithError many_to_two(const MotionModel& motion, const BranchingLaw& law, const State& x0,
                              const StateFunction& f, const StateFunction& g, double t, const SpineRun& run) {
    return two_spine_table(motion, law, x0, {{f, g}}, {t}, run)[0][0];
}

EstimateWithError doob_weighted_expectation(const MotionModel& motion, const EigenData& eigen, const State& x0,
                                            const StateFunction& f, double t, const SpineRun& run) {
    if (!(eigen.h_at(x0) > 0.0)) throw std::invalid_argument("Doob transform needs h(x0) > 0");
    if (!(t > 0.0)) throw std::invalid_argument("Doob transform needs t > 0");
    auto parts = map_indexed(chunk_count(run.paths), run.threads, [&](std::size_t c) {
        auto rng = RandomStream::derived(run.seed, c, stream_tag::doob);
        Columns cols(2);
        for (std::size_t i = 0; i < chunk_size(run.paths, c); ++i) {
            const State s = advance(motion, x0, t, rng);
            const double m = martingale_weight(eigen, x0, s, t);
            cols[0].push_back(m * eval(f, s));
            cols[1].push_back(m);
        }
        return cols;
    });
    const Columns cols = concat(std::move(parts), 2);

    double sum = 0.0;
    double sum_sq = 0.0;
    for (double m : cols[1]) {
        sum += m;
        sum_sq += m * m;
    }
    const double ess = sum_sq > 0.0 ? sum * sum / sum_sq : 0.0;
    if (ess < 10.0) {
        std::ostringstream os;
        os << "effective sample size " << ess << " is below 10";
        throw EstimationError(os.str());
    }
    auto e = mean_estimate(cols[0]);
    std::ostringstream os;
    os << "ess=" << ess;
    e.notes.push_back(os.str());
    return e;
}

}  // namespace bmp
