#pragma once

#include "bmp/state.hpp"
#include "bmp/test_set.hpp"

#include <functional>
#include <optional>
#include <string>

namespace bmp {

/// Eigen-triple (lambda, h, nu) of a motion plus the scaling function p(t):
/// -lambda is an eigenvalue of the generator with right eigenfunction h and
/// P_x(X_t in B) ~ h(x) p(t) e^{-lambda t} nu(B).
///
/// h vanishes on Absorbed and is positive elsewhere. nu_mass throws
/// ConfigError for test sets it cannot measure (unbounded sets under an
/// infinite nu, or motions whose nu has no closed form).
struct EigenData {
    double lambda = 0.0;
    std::function<double(const State&)> h;
    std::function<double(const TestSet&)> nu_mass;
    std::function<double(double)> p;
    /// Density of nu w.r.t. Lebesgue (diffusions) or counting measure, when known.
    std::optional<std::function<double(const State&)>> nu_density;
    /// True when h is a stand-in with the right order of growth (contact process).
    bool surrogate_h = false;
    std::string note;

    double h_at(const State& s) const { return is_absorbed(s) ? 0.0 : h(s); }
};

}  // namespace bmp
