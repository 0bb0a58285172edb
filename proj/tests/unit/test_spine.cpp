#include "bmp/errors.hpp"
#include "bmp/spine.hpp"

#include <doctest.h>

#include <cmath>

using namespace bmp;

namespace {

StateFunction indicator(TestSet b) {
    return [b = std::move(b)](const State& x) { return b.contains(x) ? 1.0 : 0.0; };
}

}  // namespace

TEST_CASE("many-to-one agrees with the transition probability") {
    const MotionModel ou = KilledOU{1.0};
    const BranchingLaw law({{2, 1.0}}, 2.0);
    const auto e = many_to_one(ou, law, RealPos{1.0}, indicator(TestSet::interval(0.5, 1.5)), 1.0,
                               SpineRun{40'000, 1, 2});
    const double expected = 0.286641819243 * std::exp(2.0);
    CHECK(std::abs(e.value - expected) < 4.0 * e.std_error);
}

TEST_CASE("many-to-one table is reproducible across thread counts") {
    const MotionModel bm = KilledDriftBM{1.0};
    const BranchingLaw law({{2, 1.0}}, 1.25);
    const std::vector<StateFunction> fs = {indicator(TestSet::interval(0, 1)), indicator(TestSet::interval(1, 3))};
    const auto a = many_to_one_table(bm, law, RealPos{1.0}, fs, {0.5, 1.0}, SpineRun{10'000, 4, 1});
    const auto b = many_to_one_table(bm, law, RealPos{1.0}, fs, {0.5, 1.0}, SpineRun{10'000, 4, 3});
    for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t j = 0; j < 2; ++j) CHECK(a[k][j].value == b[k][j].value);
}

TEST_CASE("many-to-two gives E[Z_t^2] of the branching process") {
    // f = g = 1 on an ergodic chain: E Z_t^2 for continuous-time GW with
    // a = r(m1-1), c = r(m2-m1): e^{at} + (c/a)(e^{2at} - e^{at}).
    const MotionModel chain = ErgodicCTMC::default_example();
    const BranchingLaw law({{0, 0.2}, {2, 0.8}}, 1.0);
    const double t = 1.0;
    const double a = 0.6;
    const double c = 1.6;
    const double expected = std::exp(a * t) + c / a * (std::exp(2 * a * t) - std::exp(a * t));
    const auto one = [](const State& x) { return is_absorbed(x) ? 0.0 : 1.0; };
    const auto e = many_to_two(chain, law, Count{1}, one, one, t, SpineRun{40'000, 2, 2});
    // nothing is absorbed, so every path returns the same value
    CHECK(e.value == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("two-spine split times") {
    const MotionModel chain = ErgodicCTMC::default_example();
    RandomStream rng(8);
    const BranchingLaw law({{2, 1.0}}, 1.0);
    double total = 0.0;
    const int n = 20'000;
    for (int i = 0; i < n; ++i) total += std::min(sample_two_spine(chain, law, Count{1}, 100.0, rng).split_time, 100.0);
    CHECK(total / n == doctest::Approx(0.5).epsilon(0.03));  // Exp(2)
    CHECK_THROWS_AS(sample_two_spine(chain, BranchingLaw({{1, 1.0}}, 1.0), Count{1}, 1.0, rng), ConfigError);
}

TEST_CASE("Doob-weighted expectation of the transient OU") {
    // Under the h-transform the transient OU is again Gaussian; check its mean.
    const TransientOU tou{1.0, 1.0};
    const MotionModel m = tou;
    const auto e = doob_weighted_expectation(m, eigen_data(m), Real{0.5}, [](const State& x) { return real_value(x); },
                                             0.5, SpineRun{40'000, 3, 1});
    const double expected = 0.5 * std::exp(-0.5);
    CHECK(std::abs(e.value - expected) < 4.0 * e.std_error + 1e-3);
}
