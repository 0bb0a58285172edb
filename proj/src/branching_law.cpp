#include "bmp/branching_law.hpp"

#include "bmp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace bmp {

BranchingLaw::BranchingLaw(std::vector<Atom> pmf, double rate) : pmf_(std::move(pmf)), rate_(rate) {
    IssueList issues;
    issues.require(!pmf_.empty(), "offspring pmf is empty");
    issues.require(std::isfinite(rate_) && rate_ > 0.0, "branching rate r must be > 0");
    std::set<int> seen;
    double total = 0.0;
    for (const auto& atom : pmf_) {
        issues.require(atom.k >= 0, "offspring count k must be >= 0 (got " + std::to_string(atom.k) + ")");
        issues.require(seen.insert(atom.k).second, "offspring count k=" + std::to_string(atom.k) + " listed twice");
        issues.require(std::isfinite(atom.prob) && atom.prob >= 0.0,
                       "probability for k=" + std::to_string(atom.k) + " must be in [0,1]");
        total += atom.prob;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        std::ostringstream os;
        os.precision(17);
        os << "offspring probabilities sum to " << total << ", not 1";
        issues.add(os.str());
    }
    issues.throw_if_any();

    std::sort(pmf_.begin(), pmf_.end(), [](const Atom& a, const Atom& b) { return a.k < b.k; });
    double acc = 0.0;
    for (const auto& atom : pmf_) {
        acc += atom.prob;
        cumulative_.push_back(acc);
        m1_ += atom.k * atom.prob;
        m2_ += static_cast<double>(atom.k) * atom.k * atom.prob;
    }
    cumulative_.back() = 1.0;
}

double BranchingLaw::pgf(double s) const noexcept {
    double v = 0.0;
    for (const auto& atom : pmf_) v += atom.prob * std::pow(s, atom.k);
    return v;
}

double BranchingLaw::prob_of(int k) const noexcept {
    for (const auto& atom : pmf_)
        if (atom.k == k) return atom.prob;
    return 0.0;
}

int BranchingLaw::sample(RandomStream& rng) const {
    if (pmf_.size() == 1) return pmf_.front().k;
    const double u = rng.uniform();
    const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), u);
    const auto idx = static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cumulative_.begin(),
                                                                       static_cast<std::ptrdiff_t>(pmf_.size() - 1)));
    return pmf_[idx].k;
}

void BranchingLaw::require_supercritical(double lambda) const {
    IssueList issues;
    std::ostringstream m1s;
    m1s << "offspring mean m1 = " << m1_ << " must exceed 1";
    issues.require(m1_ > 1.0, m1s.str());
    if (!(growth_rate() > lambda)) {
        std::ostringstream os;
        os << "r(m1 - 1) = " << growth_rate() << " must exceed the motion's lambda = " << lambda;
        issues.add(os.str());
    }
    issues.throw_if_any();
}

}  // namespace bmp
