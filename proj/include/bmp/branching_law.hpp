#pragma once

#include "bmp/random.hpp"

#include <utility>
#include <vector>

namespace bmp {

/// Offspring law of the branching mechanism plus the constant branching rate r.
///
/// Construction validates the pmf (non-negative k, distinct k, probabilities
/// summing to 1 within 1e-12) and r > 0. Supercriticality (m1 > 1, finite m2,
/// r(m1 - 1) > lambda) is a property of the pair (law, motion) and is checked
/// by require_supercritical(), so the engine can still run degenerate laws.
class BranchingLaw {
public:
    struct Atom {
        int k;
        double prob;
    };

    BranchingLaw(std::vector<Atom> pmf, double rate);

    const std::vector<Atom>& pmf() const noexcept { return pmf_; }
    double rate() const noexcept { return rate_; }
    double m1() const noexcept { return m1_; }
    double m2() const noexcept { return m2_; }
    double variance() const noexcept { return m2_ - m1_ * m1_; }
    /// r (m1 - 1): the Malthusian growth rate of the total population.
    double growth_rate() const noexcept { return rate_ * (m1_ - 1.0); }
    /// (m2 - m1) r: rate of the exponential splitting time of a 2-spine.
    double split_rate() const noexcept { return (m2_ - m1_) * rate_; }
    /// Var(m) + (m1 - 1)^2: exponent coefficient in the many-to-two weight.
    double two_spine_exponent() const noexcept { return variance() + (m1_ - 1.0) * (m1_ - 1.0); }

    /// Probability generating function f(s) = sum_k p_k s^k.
    double pgf(double s) const noexcept;
    double prob_of(int k) const noexcept;

    int sample(RandomStream& rng) const;

    /// Throws ConfigError listing every violation of m1 > 1 and r(m1 - 1) > lambda.
    void require_supercritical(double lambda) const;

private:
    std::vector<Atom> pmf_;
    std::vector<double> cumulative_;
    double rate_;
    double m1_ = 0.0;
    double m2_ = 0.0;
};

}  // namespace bmp
