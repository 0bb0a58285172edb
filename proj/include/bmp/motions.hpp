#pragma once

#include "bmp/eigen_data.hpp"
#include "bmp/random.hpp"
#include "bmp/state.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace bmp {

/// Irreducible finite-state chain without absorption. States are Count(1..n).
/// lambda = 0, h = 1, p = 1, nu = the stationary law (solved from nu Q = 0).
class ErgodicCTMC {
public:
    /// Throws ConfigError unless Q is square, has non-negative off-diagonal
    /// rates, zero row sums and is irreducible.
    explicit ErgodicCTMC(const std::vector<std::vector<double>>& rates);

    /// Five-state ring-like chain used by the test battery.
    static ErgodicCTMC default_example();

    std::size_t size() const noexcept { return static_cast<std::size_t>(q_.rows()); }
    const Eigen::MatrixXd& generator() const noexcept { return q_; }
    const std::vector<double>& stationary() const noexcept { return nu_; }
    double exit_rate(std::size_t i) const { return -q_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)); }

private:
    Eigen::MatrixXd q_;
    std::vector<double> nu_;
};

/// Continuous-time Galton-Watson process used as a motion: from n, jump to
/// n + y at rate n rho(y), y >= -1. Subcritical, absorbed at 0.
class GaltonWatson {
public:
    struct Jump {
        int y;
        double prob;
    };
    /// Throws ConfigError unless rho sums to 1, y >= -1, sum y rho(y) < 0 and
    /// rho(-1) lies in (0, 1).
    explicit GaltonWatson(std::vector<Jump> rho);

    const std::vector<Jump>& rho() const noexcept { return rho_; }
    /// lambda = -sum_y y rho(y).
    double lambda() const noexcept { return lambda_; }
    /// sigma_rho^2 = sum_y y^2 rho(y).
    double sigma2() const noexcept { return sigma2_; }
    double stay_prob() const noexcept { return stay_; }

    /// Yaglom limit on {1, 2, ..., truncation}, from the left Perron vector of
    /// the generator truncated to that range. Computed once at construction.
    const std::vector<double>& yaglom() const noexcept { return yaglom_; }
    /// nu(h) for h(n) = n.
    double yaglom_mean() const noexcept { return yaglom_mean_; }

    static constexpr int kTruncation = 400;

private:
    std::vector<Jump> rho_;
    double lambda_ = 0.0;
    double sigma2_ = 0.0;
    double stay_ = 0.0;
    std::vector<double> yaglom_;
    double yaglom_mean_ = 1.0;
};

/// Contact process on Z^d modulo translations. Subcriticality (gamma < gamma_c)
/// is asserted by the caller, not computed.
class ContactProcess {
public:
    ContactProcess(int dim, double gamma, std::optional<double> decay_rate = std::nullopt);

    int dim() const noexcept { return dim_; }
    double gamma() const noexcept { return gamma_; }
    /// lambda, when known (user supplied or estimated); eigen_data needs it.
    std::optional<double> decay_rate() const noexcept { return decay_rate_; }
    ContactProcess with_decay_rate(double lambda) const { return ContactProcess(dim_, gamma_, lambda); }

private:
    int dim_;
    double gamma_;
    std::optional<double> decay_rate_;
};

/// dY = -lambda Y dt + dB, killed at 0.
struct KilledOU {
    double lambda;
};

/// Generator (sigma^2 / 2) f'' + lambda x f' on the whole line.
struct TransientOU {
    double lambda;
    double sigma2;
};

/// Brownian motion with drift -c, killed at 0; lambda = c^2 / 2.
struct KilledDriftBM {
    double c;
    double lambda() const noexcept { return 0.5 * c * c; }
};

using MotionModel = std::variant<ErgodicCTMC, GaltonWatson, ContactProcess, KilledOU, TransientOU, KilledDriftBM>;

/// Throws ConfigError listing all violated per-motion invariants.
void validate(const MotionModel& motion);

std::string motion_name(const MotionModel& motion);
bool is_jump_motion(const MotionModel& motion);
bool has_absorption(const MotionModel& motion);

/// Eigendata with the normalizations documented in README: killed OU and
/// killed drifted BM use the classical closed forms; the transient OU uses
/// nu = Lebesgue and h normalized so that nu(h) = 1; Galton-Watson uses the
/// Yaglom law as nu and h(n) = n / nu(h); the ergodic chain uses h = 1; the
/// contact process returns the surrogate h(z) = |z| and needs a decay rate.
EigenData eigen_data(const MotionModel& motion);

// --- sampling ---------------------------------------------------------------

/// State at time dt of a path started at x. Exact in distribution for every
/// motion in the zoo. Returns Absorbed if the path is absorbed in (0, dt].
/// Throws std::invalid_argument for dt <= 0 or x absorbed.
State step(const MotionModel& motion, const State& x, double dt, RandomStream& rng);

struct MonitoredStep {
    State state;
    /// The path touched (-inf, 0] during the step. For killed motions this
    /// coincides with absorption; for the transient OU it is sampled exactly
    /// from the Brownian-bridge crossing law of the time-changed path.
    bool crossed_zero = false;
};
MonitoredStep step_monitored(const MotionModel& motion, const State& x, double dt, RandomStream& rng);

/// Total jump rate out of x (jump motions only; 0 for diffusions).
double exit_rate(const MotionModel& motion, const State& x);
/// One jump of a jump motion, target drawn proportionally to its rate.
State sample_jump(const MotionModel& motion, const State& x, RandomStream& rng);

/// Exact sample of X_t under the h-transformed law of the transient OU
/// (Gaussian with mean x e^{-lambda t}, variance sigma^2 (1 - e^{-2 lambda t}) / (2 lambda)).
double sample_tilted(const TransientOU& motion, double x, double t, RandomStream& rng);
double tilted_density(const TransientOU& motion, double x, double y, double t);

// --- densities ----------------------------------------------------------------

/// Sub-probability transition density P_x(X_t in dy, not absorbed)/dy w.r.t.
/// Lebesgue (diffusions) or counting measure (chains). Empty for the contact
/// process. Requires t > 0 and non-absorbed x, y.
std::optional<double> transition_density(const MotionModel& motion, const State& x, const State& y, double t);

/// log of transition_density for the diffusions (may be -inf). Empty otherwise.
std::optional<double> log_transition_density(const MotionModel& motion, double x, double y, double t);

/// P_x(X_t in B, not absorbed) by quadrature of the transition density
/// (diffusions) or summation of transition probabilities (chains). Empty for
/// the contact process and for predicate sets on diffusions.
std::optional<double> transition_probability(const MotionModel& motion, const State& x, const TestSet& b, double t);

/// P_x(X_t not absorbed), closed form for the killed diffusions; 1 when the
/// motion has no absorption; empty otherwise.
std::optional<double> survival_probability(const MotionModel& motion, const State& x, double t);

// --- event enumeration -------------------------------------------------------

struct Transition {
    State next;
    double rate;
};

/// Canonical translate of a nonempty set of sites (row-major, dim entries per
/// site). Duplicate sites collapse. Returns Absorbed for an empty input.
State canonicalize(int dim, std::vector<std::int32_t> coords);

/// All recoveries (rate 1 each) and boundary infections (rate gamma times the
/// number of infected neighbours), targets canonicalized and merged when they
/// fall in the same class.
std::vector<Transition> contact_event_rates(const LatticeConfig& config, double gamma);

/// For each y with rho(y) > 0: (Count(n + y) or Absorbed, n rho(y)).
std::vector<Transition> gw_event_rates(std::int64_t n, const std::vector<GaltonWatson::Jump>& rho);

/// Monte Carlo estimate of the contact-process decay rate from the survival
/// curve of a single infected site: -log(S(t2) / S(t1)) / (t2 - t1).
double estimate_contact_decay_rate(const ContactProcess& motion, std::size_t paths, std::uint64_t seed,
                                   double t1 = 2.0, double t2 = 6.0);

}  // namespace bmp
