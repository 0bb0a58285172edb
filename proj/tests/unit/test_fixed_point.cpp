#include "bmp/errors.hpp"
#include "bmp/fixed_point.hpp"

#include <doctest.h>

#include <cmath>

using namespace bmp;

TEST_CASE("extinction probability is the smallest fixed point of the pgf") {
    CHECK(pgf_extinction(BranchingLaw({{0, 0.2}, {2, 0.8}}, 1.0)) == doctest::Approx(0.25).epsilon(1e-10));
    CHECK(pgf_extinction(BranchingLaw({{2, 1.0}}, 1.0)) == doctest::Approx(0.0).epsilon(1e-10));
    // p0 + p3 s^3 = s with p0 = .2, p3 = .8: root of .8 s^2 + .8 s - .2 on (0, 1)
    CHECK(pgf_extinction(BranchingLaw({{0, 0.2}, {3, 0.8}}, 1.0)) ==
          doctest::Approx((-0.8 + std::sqrt(0.64 + 0.64)) / 1.6).epsilon(1e-10));
    CHECK_THROWS_AS(pgf_extinction(BranchingLaw({{0, 0.5}, {2, 0.5}}, 1.0)), ConfigError);
}

TEST_CASE("eta approaches the pgf root on an ergodic chain") {
    const MotionModel chain = ErgodicCTMC::default_example();
    const BranchingLaw law({{0, 0.2}, {2, 0.8}}, 1.0);
    const auto eta = eta_curve(chain, law, Count{1}, {1.0, 8.0}, EnsembleRun{4000, 3, 1, 100'000});
    REQUIRE(eta.size() == 2);
    CHECK(eta[0].value <= eta[1].value);
    CHECK(std::abs(eta[1].value - 0.25) < 4.0 * eta[1].std_error);
}

TEST_CASE("sigma sweep") {
    const MotionModel chain = ErgodicCTMC::default_example();
    const BranchingLaw law({{0, 0.2}, {2, 0.8}}, 1.0);
    const auto s = sigma_estimate(chain, eigen_data(chain), law, Count{1}, 8.0, 1e-3, EnsembleRun{3000, 5, 2, 100'000});
    REQUIRE(s.sweep.size() == kEpsilonSweep.size());
    CHECK(s.sigma.value >= s.eta.value);
    CHECK(std::abs(s.sigma.value - s.eta.value) < 4.0 * joint_se(s.sigma, s.eta));
}
