#include "bmp/motions.hpp"

#include "bmp/errors.hpp"
#include "lattice_internal.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace bmp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string fmt_double(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

bool strongly_connected(const Eigen::MatrixXd& q) {
    const auto n = q.rows();
    auto reach = [&](bool reverse) {
        std::vector<char> seen(static_cast<std::size_t>(n), 0);
        std::queue<Eigen::Index> todo;
        todo.push(0);
        seen[0] = 1;
        while (!todo.empty()) {
            const auto i = todo.front();
            todo.pop();
            for (Eigen::Index j = 0; j < n; ++j) {
                const double rate = reverse ? q(j, i) : q(i, j);
                if (j != i && rate > 0.0 && !seen[static_cast<std::size_t>(j)]) {
                    seen[static_cast<std::size_t>(j)] = 1;
                    todo.push(j);
                }
            }
        }
        return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
    };
    return reach(false) && reach(true);
}

double log_sinh(double u) {
    // u > 0; sinh itself is accurate for small u, the rewrite avoids overflow.
    if (u < 30.0) return std::log(std::sinh(u));
    return u + std::log1p(-std::exp(-2.0 * u)) - std::numbers::ln2;
}

double log_gauss(double y, double mean, double var) {
    const double d = y - mean;
    return -0.5 * std::log(2.0 * std::numbers::pi * var) - d * d / (2.0 * var);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// Sparse generator rows for uniformization: rows[i] lists (j, rate) with j != i.
struct SparseGenerator {
    std::vector<std::vector<std::pair<std::size_t, double>>> rows;
    std::vector<double> exit;
};

std::vector<double> uniformized_row(const SparseGenerator& g, std::size_t x, double t) {
    const std::size_t n = g.rows.size();
    double big = 0.0;
    for (double e : g.exit) big = std::max(big, e);
    std::vector<double> out(n, 0.0);
    if (big == 0.0) {
        out[x] = 1.0;
        return out;
    }
    const double mean = big * t;
    const auto kmax = static_cast<std::size_t>(mean + 12.0 * std::sqrt(mean) + 40.0);
    std::vector<double> v(n, 0.0), next(n);
    v[x] = 1.0;
    for (std::size_t k = 0; k <= kmax; ++k) {
        const double logw = -mean + static_cast<double>(k) * std::log(mean) - std::lgamma(static_cast<double>(k) + 1.0);
        const double w = std::exp(logw);
        if (w > 0.0)
            for (std::size_t i = 0; i < n; ++i) out[i] += w * v[i];
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            if (v[i] == 0.0) continue;
            next[i] += v[i] * (1.0 - g.exit[i] / big);
            for (const auto& [j, rate] : g.rows[i]) next[j] += v[i] * rate / big;
        }
        v.swap(next);
    }
    return out;
}

SparseGenerator ctmc_generator(const ErgodicCTMC& m) {
    SparseGenerator g;
    const auto n = m.size();
    g.rows.resize(n);
    g.exit.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        g.exit[i] = m.exit_rate(i);
        for (std::size_t j = 0; j < n; ++j) {
            const double r = m.generator()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            if (i != j && r > 0.0) g.rows[i].push_back({j, r});
        }
    }
    return g;
}

// Galton-Watson chain on {0, ..., cap}; 0 absorbing, upward jumps past cap dropped.
SparseGenerator gw_generator(const GaltonWatson& m, std::size_t cap) {
    SparseGenerator g;
    g.rows.resize(cap + 1);
    g.exit.assign(cap + 1, 0.0);
    for (std::size_t n = 1; n <= cap; ++n) {
        for (const auto& j : m.rho()) {
            if (j.y == 0 || j.prob <= 0.0) continue;
            const auto target = static_cast<std::int64_t>(n) + j.y;
            if (target < 0 || target > static_cast<std::int64_t>(cap)) continue;
            const double rate = static_cast<double>(n) * j.prob;
            g.rows[n].push_back({static_cast<std::size_t>(target), rate});
            g.exit[n] += rate;
        }
    }
    return g;
}

double interval_lower(const Interval& iv, double floor_value) { return std::max(iv.a, floor_value); }

double discrete_nu_mass(const TestSet& set, const std::vector<double>& weights) {
    // weights[i] is nu(Count(i + 1)).
    if (const auto* pr = std::get_if<Predicate>(&set.shape()); pr && pr->nu_mass) return *pr->nu_mass;
    double total = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i)
        if (set.contains(Count{static_cast<std::int64_t>(i + 1)})) total += weights[i];
    return total;
}

template <typename CdfTail>
double continuous_nu_mass(const TestSet& set, double floor_value, CdfTail tail, const std::string& who) {
    return std::visit(overloaded{
                          [&](const Interval& iv) {
                              const double a = interval_lower(iv, floor_value);
                              if (!(a < iv.b)) return 0.0;
                              return tail(a) - tail(iv.b);
                          },
                          [](const FiniteSet&) { return 0.0; },
                          [&](const Predicate& p) -> double {
                              if (p.nu_mass) return *p.nu_mass;
                              throw ConfigError("nu mass of predicate set '" + p.label + "' is unknown for " + who +
                                                "; supply an override");
                          },
                      },
                      set.shape());
}

State gillespie(const MotionModel& motion, State s, double dt, RandomStream& rng) {
    double elapsed = 0.0;
    for (;;) {
        const double rate = exit_rate(motion, s);
        if (rate <= 0.0) return s;
        elapsed += rng.exponential(rate);
        if (elapsed > dt) return s;
        s = sample_jump(motion, s, rng);
        if (is_absorbed(s)) return s;
    }
}

}  // namespace

// --- ErgodicCTMC --------------------------------------------------------------

ErgodicCTMC::ErgodicCTMC(const std::vector<std::vector<double>>& rates) {
    IssueList issues;
    const auto n = rates.size();
    issues.require(n >= 1, "rate matrix Q is empty");
    for (std::size_t i = 0; i < n; ++i) {
        if (rates[i].size() != n) {
            issues.add("rate matrix Q row " + std::to_string(i) + " has " + std::to_string(rates[i].size()) +
                       " entries, expected " + std::to_string(n));
        }
    }
    issues.throw_if_any();

    q_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double v = rates[i][j];
            q_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
            row += v;
            if (i != j && !(v >= 0.0)) {
                issues.add("Q(" + std::to_string(i) + "," + std::to_string(j) + ") must be a non-negative rate");
            }
        }
        if (std::abs(row) > 1e-9) issues.add("row " + std::to_string(i) + " of Q sums to " + fmt_double(row) + ", not 0");
    }
    if (issues.empty() && n > 1) issues.require(strongly_connected(q_), "Q is not irreducible");
    issues.throw_if_any();

    // Solve nu Q = 0 with sum(nu) = 1: replace one balance equation by the normalization.
    Eigen::MatrixXd a = q_.transpose();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    a.row(static_cast<Eigen::Index>(n) - 1).setOnes();
    b(static_cast<Eigen::Index>(n) - 1) = 1.0;
    const Eigen::VectorXd nu = a.fullPivLu().solve(b);
    nu_.assign(nu.data(), nu.data() + nu.size());
}

ErgodicCTMC ErgodicCTMC::default_example() {
    // 1 <-> 2 <-> 3 <-> 4 <-> 5, plus 5 -> 1.
    std::vector<std::vector<double>> q = {
        {0.0, 1.0, 0.0, 0.0, 0.0},
        {0.5, 0.0, 1.0, 0.0, 0.0},
        {0.0, 0.7, 0.0, 0.6, 0.0},
        {0.0, 0.0, 1.2, 0.0, 0.4},
        {0.3, 0.0, 0.0, 0.9, 0.0},
    };
    for (std::size_t i = 0; i < q.size(); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < q.size(); ++j) row += q[i][j];
        q[i][i] = -row;
    }
    return ErgodicCTMC(q);
}

// --- GaltonWatson ----------------------------------------------------------------

GaltonWatson::GaltonWatson(std::vector<Jump> rho) : rho_(std::move(rho)) {
    IssueList issues;
    double total = 0.0;
    double rho_minus_one = 0.0;
    for (const auto& j : rho_) {
        issues.require(j.y >= -1, "Galton-Watson jump y must be >= -1 (got " + std::to_string(j.y) + ")");
        issues.require(j.prob >= 0.0, "Galton-Watson rho(" + std::to_string(j.y) + ") must be >= 0");
        total += j.prob;
        lambda_ -= j.y * j.prob;
        sigma2_ += static_cast<double>(j.y) * j.y * j.prob;
        if (j.y == -1) rho_minus_one += j.prob;
        if (j.y == 0) stay_ += j.prob;
    }
    if (std::abs(total - 1.0) > 1e-12) issues.add("Galton-Watson rho sums to " + fmt_double(total) + ", not 1");
    issues.require(lambda_ > 0.0, "Galton-Watson motion must be subcritical: sum_y y rho(y) = " +
                                      fmt_double(-lambda_) + " is not < 0");
    issues.require(rho_minus_one > 0.0 && rho_minus_one < 1.0,
                   "Galton-Watson rho(-1) = " + fmt_double(rho_minus_one) + " must lie in (0,1)");
    issues.throw_if_any();

    // Left Perron vector of the generator restricted to {1..N} (killed at 0 and above N).
    const int n = kTruncation;
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i <= n; ++i) {
        q(i - 1, i - 1) -= i * (1.0 - stay_);
        for (const auto& j : rho_) {
            if (j.y == 0) continue;
            const int target = i + j.y;
            if (target >= 1 && target <= n) q(i - 1, target - 1) += i * j.prob;
        }
    }
    Eigen::EigenSolver<Eigen::MatrixXd> solver(q.transpose());
    const auto& values = solver.eigenvalues();
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < values.size(); ++k)
        if (values(k).real() > values(best).real()) best = k;
    Eigen::VectorXd vec = solver.eigenvectors().col(best).real();
    if (vec.sum() < 0.0) vec = -vec;
    yaglom_.resize(static_cast<std::size_t>(n));
    double mass = 0.0;
    for (int i = 0; i < n; ++i) {
        yaglom_[static_cast<std::size_t>(i)] = std::max(0.0, vec(i));
        mass += yaglom_[static_cast<std::size_t>(i)];
    }
    yaglom_mean_ = 0.0;
    for (int i = 0; i < n; ++i) {
        yaglom_[static_cast<std::size_t>(i)] /= mass;
        yaglom_mean_ += (i + 1) * yaglom_[static_cast<std::size_t>(i)];
    }
}

// --- ContactProcess --------------------------------------------------------------

ContactProcess::ContactProcess(int dim, double gamma, std::optional<double> decay_rate)
    : dim_(dim), gamma_(gamma), decay_rate_(decay_rate) {
    IssueList issues;
    issues.require(dim_ >= 1, "contact process dimension d must be >= 1");
    issues.require(gamma_ > 0.0, "contact process infection rate gamma must be > 0");
    if (decay_rate_) issues.require(*decay_rate_ > 0.0, "contact process decay rate lambda must be > 0");
    issues.throw_if_any();
}

// --- shared surface ------------------------------------------------------------------

void validate(const MotionModel& motion) {
    IssueList issues;
    std::visit(overloaded{
                   [](const ErgodicCTMC&) {},
                   [](const GaltonWatson&) {},
                   [](const ContactProcess&) {},
                   [&](const KilledOU& m) { issues.require(m.lambda > 0.0, "killed OU drift lambda must be > 0"); },
                   [&](const TransientOU& m) {
                       issues.require(m.lambda > 0.0, "transient OU drift lambda must be > 0");
                       issues.require(m.sigma2 > 0.0, "transient OU dispersion sigma2 must be > 0");
                   },
                   [&](const KilledDriftBM& m) { issues.require(m.c > 0.0, "drift magnitude c must be > 0"); },
               },
               motion);
    issues.throw_if_any();
}

std::string motion_name(const MotionModel& motion) {
    return std::visit(overloaded{
                          [](const ErgodicCTMC&) { return std::string("ergodic-ctmc"); },
                          [](const GaltonWatson&) { return std::string("galton-watson"); },
                          [](const ContactProcess&) { return std::string("contact"); },
                          [](const KilledOU&) { return std::string("killed-ou"); },
                          [](const TransientOU&) { return std::string("transient-ou"); },
                          [](const KilledDriftBM&) { return std::string("killed-drift-bm"); },
                      },
                      motion);
}

bool is_jump_motion(const MotionModel& motion) {
    return std::holds_alternative<ErgodicCTMC>(motion) || std::holds_alternative<GaltonWatson>(motion) ||
           std::holds_alternative<ContactProcess>(motion);
}

bool has_absorption(const MotionModel& motion) {
    return !(std::holds_alternative<ErgodicCTMC>(motion) || std::holds_alternative<TransientOU>(motion));
}

EigenData eigen_data(const MotionModel& motion) {
    validate(motion);
    EigenData e;
    e.p = [](double) { return 1.0; };
    std::visit(
        overloaded{
            [&](const ErgodicCTMC& m) {
                e.lambda = 0.0;
                e.h = [](const State&) { return 1.0; };
                auto nu = m.stationary();
                e.nu_mass = [nu](const TestSet& b) { return discrete_nu_mass(b, nu); };
                e.nu_density = [nu](const State& s) {
                    const auto* c = std::get_if<Count>(&s);
                    if (!c || c->n < 1 || c->n > static_cast<std::int64_t>(nu.size())) return 0.0;
                    return nu[static_cast<std::size_t>(c->n - 1)];
                };
            },
            [&](const GaltonWatson& m) {
                e.lambda = m.lambda();
                const double scale = m.yaglom_mean();
                e.h = [scale](const State& s) { return static_cast<double>(count_value(s)) / scale; };
                auto nu = m.yaglom();
                e.nu_mass = [nu](const TestSet& b) { return discrete_nu_mass(b, nu); };
                e.nu_density = [nu](const State& s) {
                    const auto* c = std::get_if<Count>(&s);
                    if (!c || c->n < 1 || c->n > static_cast<std::int64_t>(nu.size())) return 0.0;
                    return nu[static_cast<std::size_t>(c->n - 1)];
                };
                e.note = "nu is the Yaglom law on {1.." + std::to_string(GaltonWatson::kTruncation) +
                         "} from a truncated generator; h(n) = n / nu(n)";
            },
            [&](const ContactProcess& m) {
                if (!m.decay_rate()) {
                    throw ConfigError("contact process eigendata needs a decay rate lambda "
                                      "(supply motion.lambda or estimate it)");
                }
                e.lambda = *m.decay_rate();
                e.h = [](const State& s) {
                    const auto& cfg = std::get<LatticeConfig>(s);
                    return static_cast<double>(cfg.size());
                };
                e.surrogate_h = true;
                e.nu_mass = [](const TestSet& b) -> double {
                    if (const auto* pr = std::get_if<Predicate>(&b.shape()); pr && pr->nu_mass) return *pr->nu_mass;
                    throw ConfigError("nu has no closed form for the contact process; supply a predicate override");
                };
                e.note = "surrogate h(z) = |z|: the true h is only known up to c1|z| <= h(z) <= c2|z|";
            },
            [&](const KilledOU& m) {
                const double lam = m.lambda;
                e.lambda = lam;
                const double k = std::sqrt(4.0 * lam / std::numbers::pi);
                e.h = [k](const State& s) { return k * real_value(s); };
                e.nu_mass = [lam](const TestSet& b) {
                    return continuous_nu_mass(
                        b, 0.0, [lam](double u) { return std::isinf(u) ? 0.0 : std::exp(-lam * u * u); }, "killed-ou");
                };
                e.nu_density = [lam](const State& s) {
                    const double x = real_value(s);
                    return 2.0 * lam * x * std::exp(-lam * x * x);
                };
            },
            [&](const TransientOU& m) {
                const double lam = m.lambda;
                const double s2 = m.sigma2;
                e.lambda = lam;
                const double k = std::sqrt(lam / (std::numbers::pi * s2));
                e.h = [k, lam, s2](const State& s) {
                    const double x = real_value(s);
                    return k * std::exp(-lam * x * x / s2);
                };
                e.nu_mass = [](const TestSet& b) -> double {
                    if (const auto* iv = std::get_if<Interval>(&b.shape())) {
                        if (!b.is_bounded()) {
                            throw ConfigError("transient OU: nu is Lebesgue measure, test set " + b.label() +
                                              " must be bounded");
                        }
                        return iv->b - iv->a;
                    }
                    return continuous_nu_mass(b, -kInf, [](double u) { return -u; }, "transient-ou");
                };
                e.nu_density = [](const State&) { return 1.0; };
                e.note = "nu = Lebesgue; h normalized so that nu(h) = 1";
            },
            [&](const KilledDriftBM& m) {
                const double c = m.c;
                const double lam = m.lambda();
                e.lambda = lam;
                const double k = 1.0 / std::sqrt(2.0 * std::numbers::pi * lam * lam);
                e.h = [k, c](const State& s) {
                    const double x = real_value(s);
                    return k * x * std::exp(c * x);
                };
                e.p = [](double t) { return std::pow(t, -1.5); };
                e.nu_mass = [c](const TestSet& b) {
                    return continuous_nu_mass(
                        b, 0.0, [c](double u) { return std::isinf(u) ? 0.0 : (1.0 + c * u) * std::exp(-c * u); },
                        "killed-drift-bm");
                };
                e.nu_density = [c, lam](const State& s) {
                    const double x = real_value(s);
                    return 2.0 * lam * x * std::exp(-c * x);
                };
            },
        },
        motion);
    return e;
}

// --- sampling ---------------------------------------------------------------------

MonitoredStep step_monitored(const MotionModel& motion, const State& x, double dt, RandomStream& rng) {
    if (!(dt > 0.0)) throw std::invalid_argument("step needs dt > 0");
    if (is_absorbed(x)) throw std::invalid_argument("step from an absorbed state");

    return std::visit(
        overloaded{
            [&](const KilledOU& m) -> MonitoredStep {
                const double x0 = real_value(x);
                const double tau = std::expm1(2.0 * m.lambda * dt) / (2.0 * m.lambda);
                const double z = x0 + std::sqrt(tau) * rng.normal();
                if (z <= 0.0 || rng.uniform() < std::exp(-2.0 * x0 * z / tau)) return {Absorbed{}, true};
                return {make_real_pos(std::exp(-m.lambda * dt) * z), false};
            },
            [&](const TransientOU& m) -> MonitoredStep {
                const double x0 = real_value(x);
                const double s = m.sigma2 * (-std::expm1(-2.0 * m.lambda * dt)) / (2.0 * m.lambda);
                const double z = x0 + std::sqrt(s) * rng.normal();
                bool crossed = x0 <= 0.0 || z <= 0.0;
                if (!crossed) crossed = rng.uniform() < std::exp(-2.0 * x0 * z / s);
                return {Real{std::exp(m.lambda * dt) * z}, crossed};
            },
            [&](const KilledDriftBM& m) -> MonitoredStep {
                const double x0 = real_value(x);
                const double z = x0 - m.c * dt + std::sqrt(dt) * rng.normal();
                if (z <= 0.0 || rng.uniform() < std::exp(-2.0 * x0 * z / dt)) return {Absorbed{}, true};
                return {make_real_pos(z), false};
            },
            [&](const auto&) -> MonitoredStep {
                State s = gillespie(motion, x, dt, rng);
                const bool absorbed = is_absorbed(s);
                return {std::move(s), absorbed};
            },
        },
        motion);
}

State step(const MotionModel& motion, const State& x, double dt, RandomStream& rng) {
    return step_monitored(motion, x, dt, rng).state;
}

double exit_rate(const MotionModel& motion, const State& x) {
    if (is_absorbed(x)) return 0.0;
    return std::visit(overloaded{
                          [&](const ErgodicCTMC& m) {
                              return m.exit_rate(static_cast<std::size_t>(count_value(x) - 1));
                          },
                          [&](const GaltonWatson& m) {
                              return static_cast<double>(count_value(x)) * (1.0 - m.stay_prob());
                          },
                          [&](const ContactProcess& m) {
                              const auto& cfg = std::get<LatticeConfig>(x);
                              return static_cast<double>(cfg.size()) +
                                     m.gamma() * static_cast<double>(detail::contact_boundary_pairs(cfg));
                          },
                          [](const auto&) { return 0.0; },
                      },
                      motion);
}

State sample_jump(const MotionModel& motion, const State& x, RandomStream& rng) {
    return std::visit(overloaded{
                          [&](const ErgodicCTMC& m) -> State {
                              const auto i = static_cast<Eigen::Index>(count_value(x) - 1);
                              const double total = m.exit_rate(static_cast<std::size_t>(i));
                              double u = rng.uniform() * total;
                              const auto n = static_cast<Eigen::Index>(m.size());
                              Eigen::Index last = i;
                              for (Eigen::Index j = 0; j < n; ++j) {
                                  if (j == i) continue;
                                  const double r = m.generator()(i, j);
                                  if (r <= 0.0) continue;
                                  last = j;
                                  if (u < r) return Count{j + 1};
                                  u -= r;
                              }
                              return Count{last + 1};
                          },
                          [&](const GaltonWatson& m) -> State {
                              const auto n = count_value(x);
                              double u = rng.uniform() * (1.0 - m.stay_prob());
                              int last = -1;
                              for (const auto& j : m.rho()) {
                                  if (j.y == 0 || j.prob <= 0.0) continue;
                                  last = j.y;
                                  if (u < j.prob) return make_count(n + j.y);
                                  u -= j.prob;
                              }
                              return make_count(n + last);
                          },
                          [&](const ContactProcess& m) -> State {
                              return detail::contact_jump(std::get<LatticeConfig>(x), m.gamma(), rng);
                          },
                          [](const auto&) -> State {
                              throw std::invalid_argument("sample_jump called on a diffusion");
                          },
                      },
                      motion);
}

double sample_tilted(const TransientOU& m, double x, double t, RandomStream& rng) {
    const double mean = x * std::exp(-m.lambda * t);
    const double var = m.sigma2 * (-std::expm1(-2.0 * m.lambda * t)) / (2.0 * m.lambda);
    return mean + std::sqrt(var) * rng.normal();
}

double tilted_density(const TransientOU& m, double x, double y, double t) {
    const double mean = x * std::exp(-m.lambda * t);
    const double var = m.sigma2 * (-std::expm1(-2.0 * m.lambda * t)) / (2.0 * m.lambda);
    return std::exp(log_gauss(y, mean, var));
}

// --- densities ----------------------------------------------------------------------

std::optional<double> log_transition_density(const MotionModel& motion, double x, double y, double t) {
    return std::visit(
        overloaded{
            [&](const KilledOU& m) -> std::optional<double> {
                if (x <= 0.0 || y <= 0.0) return -kInf;
                const double lam = m.lambda;
                const double tau = std::expm1(2.0 * lam * t) / (2.0 * lam);
                const double shrink = std::exp(-lam * t);
                return 0.5 * std::log(2.0 / (std::numbers::pi * shrink * shrink * tau)) - x * x / (2.0 * tau) -
                       y * y / (2.0 * shrink * shrink * tau) + log_sinh(x * y / (shrink * tau));
            },
            [&](const TransientOU& m) -> std::optional<double> {
                const double mean = x * std::exp(m.lambda * t);
                const double var = m.sigma2 * std::expm1(2.0 * m.lambda * t) / (2.0 * m.lambda);
                return log_gauss(y, mean, var);
            },
            [&](const KilledDriftBM& m) -> std::optional<double> {
                if (x <= 0.0 || y <= 0.0) return -kInf;
                const double d = x - y;
                return m.c * x - 0.5 * std::log(2.0 * std::numbers::pi * t) - m.lambda() * t - m.c * y -
                       d * d / (2.0 * t) + std::log(-std::expm1(-2.0 * x * y / t));
            },
            [](const auto&) -> std::optional<double> { return std::nullopt; },
        },
        motion);
}

std::optional<double> transition_density(const MotionModel& motion, const State& x, const State& y, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("transition_density needs t > 0");
    if (is_absorbed(x) || is_absorbed(y)) throw std::invalid_argument("transition_density needs non-absorbed states");

    return std::visit(
        overloaded{
            [&](const ErgodicCTMC& m) -> std::optional<double> {
                const auto row = uniformized_row(ctmc_generator(m), static_cast<std::size_t>(count_value(x) - 1), t);
                return row.at(static_cast<std::size_t>(count_value(y) - 1));
            },
            [&](const GaltonWatson& m) -> std::optional<double> {
                const auto from = static_cast<std::size_t>(count_value(x));
                const auto to = static_cast<std::size_t>(count_value(y));
                const std::size_t cap = std::max<std::size_t>(GaltonWatson::kTruncation, 4 * std::max(from, to) + 50);
                return uniformized_row(gw_generator(m, cap), from, t).at(to);
            },
            [](const ContactProcess&) -> std::optional<double> { return std::nullopt; },
            [&](const auto&) -> std::optional<double> {
                const auto lf = log_transition_density(motion, real_value(x), real_value(y), t);
                return std::exp(*lf);
            },
        },
        motion);
}

std::optional<double> transition_probability(const MotionModel& motion, const State& x, const TestSet& b, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("transition_probability needs t > 0");
    if (is_absorbed(x)) return 0.0;

    if (std::holds_alternative<ErgodicCTMC>(motion) || std::holds_alternative<GaltonWatson>(motion)) {
        std::vector<double> row;
        if (const auto* m = std::get_if<ErgodicCTMC>(&motion)) {
            row = uniformized_row(ctmc_generator(*m), static_cast<std::size_t>(count_value(x) - 1), t);
            row.insert(row.begin(), 0.0);  // index by count label
        } else {
            const auto& gw = std::get<GaltonWatson>(motion);
            const auto from = static_cast<std::size_t>(count_value(x));
            row = uniformized_row(gw_generator(gw, std::max<std::size_t>(GaltonWatson::kTruncation, 4 * from + 50)), from, t);
        }
        double total = 0.0;
        for (std::size_t n = 1; n < row.size(); ++n)
            if (b.contains(Count{static_cast<std::int64_t>(n)})) total += row[n];
        return total;
    }
    if (std::holds_alternative<ContactProcess>(motion)) return std::nullopt;

    const auto* iv = std::get_if<Interval>(&b.shape());
    if (!iv) {
        if (std::holds_alternative<FiniteSet>(b.shape())) return 0.0;
        return std::nullopt;
    }
    const double x0 = real_value(x);
    if (const auto* m = std::get_if<TransientOU>(&motion)) {
        const double mean = x0 * std::exp(m->lambda * t);
        const double sd = std::sqrt(m->sigma2 * std::expm1(2.0 * m->lambda * t) / (2.0 * m->lambda));
        return normal_cdf((iv->b - mean) / sd) - normal_cdf((iv->a - mean) / sd);
    }
    // Killed diffusions: the mass sits within a few standard deviations of the free path.
    double centre;
    double scale;
    if (const auto* m = std::get_if<KilledOU>(&motion)) {
        const double tau = std::expm1(2.0 * m->lambda * t) / (2.0 * m->lambda);
        centre = std::exp(-m->lambda * t) * x0;
        scale = std::exp(-m->lambda * t) * std::sqrt(tau);
    } else {
        const auto& bm = std::get<KilledDriftBM>(motion);
        centre = x0 - bm.c * t;
        scale = std::sqrt(t);
    }
    const double lo = std::max({iv->a, 0.0, centre - 40.0 * scale});
    const double hi = std::min(iv->b, std::max(centre, 0.0) + 40.0 * scale);
    if (!(lo < hi)) return 0.0;
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [&](double y) { return y <= 0.0 ? 0.0 : std::exp(*log_transition_density(motion, x0, y, t)); }, lo, hi, 15,
        1e-10, &err);
}

std::optional<double> survival_probability(const MotionModel& motion, const State& x, double t) {
    if (is_absorbed(x)) return 0.0;
    return std::visit(overloaded{
                          [&](const KilledOU& m) -> std::optional<double> {
                              const double tau = std::expm1(2.0 * m.lambda * t) / (2.0 * m.lambda);
                              return std::erf(real_value(x) / std::sqrt(2.0 * tau));
                          },
                          [&](const KilledDriftBM& m) -> std::optional<double> {
                              const double x0 = real_value(x);
                              const double st = std::sqrt(t);
                              // P(min_{s<=t} (x0 - c s + B_s) > 0)
                              const double tail = 0.5 * std::erfc((x0 + m.c * t) / (st * std::numbers::sqrt2));
                              return normal_cdf((x0 - m.c * t) / st) - std::exp(2.0 * m.c * x0) * tail;
                          },
                          [](const ErgodicCTMC&) -> std::optional<double> { return 1.0; },
                          [](const TransientOU&) -> std::optional<double> { return 1.0; },
                          [](const auto&) -> std::optional<double> { return std::nullopt; },
                      },
                      motion);
}

double estimate_contact_decay_rate(const ContactProcess& motion, std::size_t paths, std::uint64_t seed, double t1,
                                   double t2) {
    if (!(t2 > t1 && t1 > 0.0)) throw std::invalid_argument("decay-rate window needs 0 < t1 < t2");
    const MotionModel m = motion;
    const State start = canonicalize(motion.dim(), std::vector<std::int32_t>(static_cast<std::size_t>(motion.dim()), 0));
    std::size_t alive1 = 0;
    std::size_t alive2 = 0;
    for (std::size_t i = 0; i < paths; ++i) {
        auto rng = RandomStream::derived(seed, i, stream_tag::decay_rate);
        State s = step(m, start, t1, rng);
        if (is_absorbed(s)) continue;
        ++alive1;
        s = step(m, s, t2 - t1, rng);
        if (!is_absorbed(s)) ++alive2;
    }
    if (alive2 == 0) throw EstimationError("no contact-process path survived the decay-rate window");
    return -std::log(static_cast<double>(alive2) / static_cast<double>(alive1)) / (t2 - t1);
}

}  // namespace bmp
