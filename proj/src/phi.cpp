#include "bmp/phi.hpp"

#include "bmp/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace bmp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <typename F>
double gk_integrate(F f, double a, double b, double rel_tol = 1e-10, unsigned max_depth = 15) {
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, max_depth, rel_tol, &err);
}

// log of int exp(L(y)) dy over y > floor, for an integrand concentrated within
// a few `scale` of `centre`. The effective support is located on a grid first
// so the adaptive rule only sees the part that matters.
template <typename LogF>
double log_integral(LogF L, double floor, double centre, double scale) {
    const int n = 241;
    const double lo = std::max(floor, centre - 40.0 * scale);
    const double hi = centre + 40.0 * scale;
    std::vector<double> ys(n), ls(n);
    double lmax = -kInf;
    for (int i = 0; i < n; ++i) {
        ys[i] = lo + (hi - lo) * (i + 0.5) / n;
        ls[i] = L(ys[i]);
        lmax = std::max(lmax, ls[i]);
    }
    if (!std::isfinite(lmax)) return -kInf;
    int first = 0;
    int last = n - 1;
    while (first < n && ls[first] < lmax - 80.0) ++first;
    while (last > 0 && ls[last] < lmax - 80.0) --last;
    const double a = first == 0 ? lo : ys[first - 1];
    const double b = last == n - 1 ? hi : ys[last + 1];
    const double v = gk_integrate([&](double y) { return std::exp(L(y) - lmax); }, a, b);
    return lmax + std::log(v);
}

double log_h(const EigenData& eigen, double y) { return std::log(eigen.h(RealPos{y})); }

}  // namespace

double second_moment_M(const MotionModel& motion, const EigenData& eigen, const State& x0, double s) {
    if (is_absorbed(x0)) throw std::invalid_argument("E[M_s^2] needs a non-absorbed start");
    if (s <= 0.0) return 1.0;
    return std::visit(
        [&](const auto& m) -> double {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, ErgodicCTMC>) {
                return 1.0;
            } else if constexpr (std::is_same_v<M, GaltonWatson>) {
                const double x = static_cast<double>(count_value(x0));
                return 1.0 + m.sigma2() * std::expm1(m.lambda() * s) / (m.lambda() * x);
            } else if constexpr (std::is_same_v<M, TransientOU>) {
                const double x = real_value(x0);
                const double lam = m.lambda;
                const double k = 2.0 * lam / m.sigma2;  // h^2 = const * exp(-k y^2)
                const double mean = x * std::exp(lam * s);
                const double var = m.sigma2 * std::expm1(2.0 * lam * s) / (2.0 * lam);
                const double spread = 1.0 + 2.0 * k * var;
                return std::exp(2.0 * lam * s - 0.5 * std::log(spread) - k * mean * mean / spread + k * x * x);
            } else if constexpr (std::is_same_v<M, KilledOU> || std::is_same_v<M, KilledDriftBM>) {
                const double x = real_value(x0);
                double centre;
                double scale;
                if constexpr (std::is_same_v<M, KilledOU>) {
                    const double tau = std::expm1(2.0 * m.lambda * s) / (2.0 * m.lambda);
                    centre = std::exp(-m.lambda * s) * x;
                    scale = std::exp(-m.lambda * s) * std::sqrt(tau);
                } else {
                    centre = x + m.c * s;
                    scale = std::sqrt(s);
                }
                auto L = [&](double y) {
                    return 2.0 * log_h(eigen, y) + *log_transition_density(motion, x, y, s);
                };
                const double li = log_integral(L, 0.0, centre, scale);
                return std::exp(2.0 * eigen.lambda * s + li - 2.0 * log_h(eigen, x));
            } else {
                throw ConfigError("E[M_s^2] has no closed form or density for the contact process");
            }
        },
        motion);
}

namespace {

// E[M_s^2] for the contact process with the surrogate h = |z|, by simulation on a grid.
std::vector<double> contact_second_moments(const ContactProcess& cp, const EigenData& eigen, const State& x0,
                                           const std::vector<double>& grid, const PhiOptions& opt) {
    const MotionModel motion = cp;
    const double h0 = eigen.h_at(x0);
    std::vector<double> sums(grid.size(), 0.0);
    for (std::size_t i = 0; i < opt.fallback_paths; ++i) {
        auto rng = RandomStream::derived(opt.seed, i, stream_tag::phi_fallback);
        State s = x0;
        double now = 0.0;
        for (std::size_t k = 0; k < grid.size(); ++k) {
            if (!is_absorbed(s) && grid[k] > now) s = step(motion, s, grid[k] - now, rng);
            now = grid[k];
            if (is_absorbed(s)) break;
            const double h = eigen.h_at(s) / h0;
            sums[k] += h * h;
        }
    }
    std::vector<double> out(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k)
        out[k] = sums[k] / static_cast<double>(opt.fallback_paths) * std::exp(2.0 * eigen.lambda * grid[k]);
    return out;
}

PhiResult classify(PhiResult r, double log_g_decade, double log_g_end, double log_g_near_end, double g_end,
                   const PhiOptions& opt) {
    r.tail_slope = (log_g_end - log_g_decade) / (0.9 * opt.t_max);
    r.divergent = !(r.tail_slope < 0.0);
    r.ambiguous = std::isnan(r.tail_slope) || std::abs(r.tail_slope) < opt.tol;
    if (r.ambiguous) {
        std::ostringstream os;
        os << "tail log-slope " << r.tail_slope << " is within +-" << opt.tol << " of 0; classification is ambiguous";
        r.notes.push_back(os.str());
    }
    if (r.divergent) {
        r.value = kInf;
        return r;
    }
    const double local = (log_g_end - log_g_near_end) / (0.1 * opt.t_max);
    r.value = r.integral_to_t_max + (local < 0.0 ? g_end / -local : 0.0);
    return r;
}

}  // namespace

PhiResult phi_quadrature(const MotionModel& motion, const EigenData& eigen, const BranchingLaw& law, const State& x0,
                         const PhiOptions& opt) {
    if (!(opt.t_max > 0.0)) throw std::invalid_argument("phi_quadrature needs t_max > 0");
    const double a = law.growth_rate();
    const double pre = (law.m2() - law.m1()) * law.rate();
    PhiResult r;

    if (const auto* cp = std::get_if<ContactProcess>(&motion)) {
        const int steps = 200;
        std::vector<double> grid(steps + 1);
        for (int k = 0; k <= steps; ++k) grid[k] = opt.t_max * k / steps;
        const auto em2 = contact_second_moments(*cp, eigen, x0, grid, opt);
        std::vector<double> g(grid.size());
        for (std::size_t k = 0; k < grid.size(); ++k) g[k] = pre * em2[k] * std::exp(-a * grid[k]);
        for (std::size_t k = 1; k < grid.size(); ++k) r.integral_to_t_max += 0.5 * (g[k] + g[k - 1]) * (grid[k] - grid[k - 1]);
        r.notes.push_back("Monte Carlo E[M_s^2] with surrogate h = |z|");
        const auto log_at = [&](double t) {
            const auto k = static_cast<std::size_t>(std::lround(t / opt.t_max * steps));
            return std::log(g[k]);
        };
        return classify(r, log_at(opt.t_max / 10.0), log_at(opt.t_max), log_at(0.9 * opt.t_max), g.back(), opt);
    }

    auto g = [&](double s) { return pre * second_moment_M(motion, eigen, x0, s) * std::exp(-a * s); };
    auto log_g = [&](double s) {
        return std::log(pre) + std::log(second_moment_M(motion, eigen, x0, s)) - a * s;
    };
    const double lg_end = log_g(opt.t_max);
    const double lg_decade = log_g(opt.t_max / 10.0);
    if (lg_end - lg_decade >= 0.0) {
        r.integral_to_t_max = kInf;  // not computed: the integrand does not decay
        return classify(r, lg_decade, lg_end, log_g(0.9 * opt.t_max), std::exp(lg_end), opt);
    }
    r.integral_to_t_max = gk_integrate(g, 0.0, opt.t_max, 1e-8, 8);
    return classify(r, lg_decade, lg_end, log_g(0.9 * opt.t_max), std::exp(lg_end), opt);
}

double second_moment_D(const MotionModel& motion, const EigenData& eigen, const BranchingLaw& law, const State& x0,
                       double t) {
    const double a = law.growth_rate();
    const double pre = (law.m2() - law.m1()) * law.rate();
    const double first = std::exp(-a * t) * second_moment_M(motion, eigen, x0, t);
    if (t <= 0.0) return first;
    const double second =
        gk_integrate([&](double s) { return pre * second_moment_M(motion, eigen, x0, s) * std::exp(-a * s); }, 0.0, t,
                     1e-8, 8);
    return first + second;
}

}  // namespace bmp
