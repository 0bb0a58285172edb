#include "bmp/errors.hpp"
#include "bmp/estimate.hpp"
#include "bmp/motions.hpp"
#include "bmp/statistics.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace bmp;

namespace {

PopulationSnapshot snap(std::vector<State> states, double t = 1.0) {
    PopulationSnapshot s;
    s.time = t;
    s.live_states = std::move(states);
    return s;
}

}  // namespace

TEST_CASE("counts and ratios") {
    const auto s = snap({RealPos{0.2}, RealPos{0.7}, RealPos{1.4}, RealPos{3.0}});
    CHECK(count_in(s, TestSet::interval(0, 1)) == 2);
    CHECK(W_ratio(s, TestSet::interval(0, 1), 4.0) == 0.5);
    CHECK(*nu_ratio(s, TestSet::interval(0, 1), TestSet::interval(0, 2)) == doctest::Approx(2.0 / 3.0));
    CHECK_FALSE(nu_ratio(s, TestSet::interval(0, 1), TestSet::interval(5, 6)).has_value());
}

TEST_CASE("nu ratios of the killed diffusions in the long-time limit") {
    // nu(B) / nu(B') from the closed-form quasi-stationary laws
    const auto ou = eigen_data(KilledOU{1.0});
    const double r1 = ou.nu_mass(TestSet::interval(0, 0.5)) / ou.nu_mass(TestSet::interval(0, 1));
    CHECK(r1 == doctest::Approx((1 - std::exp(-0.25)) / (1 - std::exp(-1.0))));
    const auto bm = eigen_data(KilledDriftBM{1.0});
    const double r2 = bm.nu_mass(TestSet::interval(0, 1)) / bm.nu_mass(TestSet::interval(0, 2));
    CHECK(r2 == doctest::Approx((1 - 2 * std::exp(-1.0)) / (1 - 3 * std::exp(-2.0))));
}

TEST_CASE("Malthusian D") {
    const auto e = eigen_data(KilledOU{1.0});
    const BranchingLaw law({{2, 1.0}}, 2.0);
    const auto s = snap({RealPos{1.0}, RealPos{3.0}}, 0.5);
    // (1 + 3) / 1 * e^{-(2 - 1) 0.5}
    CHECK(malthusian_D(s, e, law, RealPos{1.0}) == doctest::Approx(4.0 * std::exp(-0.5)));
    CHECK(malthusian_D(snap({}), e, law, RealPos{1.0}) == 0.0);
    auto cp = ContactProcess(1, 0.5, 0.3);
    const auto ce = eigen_data(cp);
    const auto cs = snap({LatticeConfig{1, {0}}});
    CHECK_THROWS_AS(malthusian_D(cs, ce, law, LatticeConfig{1, {0}}), ConfigError);
    CHECK_NOTHROW(malthusian_D(cs, ce, law, LatticeConfig{1, {0}}, true));
}

TEST_CASE("KS distance") {
    const auto uniform = [](double x) { return std::clamp(x, 0.0, 1.0); };
    CHECK(ks_distance({0.5}, uniform) == doctest::Approx(0.5));
    CHECK(ks_distance({0.25, 0.75}, uniform) == doctest::Approx(0.25));
    // ties jump together
    CHECK(ks_distance({0.5, 0.5}, uniform) == doctest::Approx(0.5));
    const auto cdf = *qsd_cdf(KilledOU{1.0});
    CHECK(cdf(1.0) == doctest::Approx(1 - std::exp(-1.0)));
    CHECK_FALSE(qsd_cdf(TransientOU{1.0, 1.0}).has_value());
    const auto bm = *qsd_cdf(KilledDriftBM{1.0});
    CHECK(bm(2.0) == doctest::Approx(1 - 3 * std::exp(-2.0)));
}

TEST_CASE("min and max of h") {
    const auto e = eigen_data(KilledOU{1.0});
    const auto s = snap({RealPos{0.5}, RealPos{2.0}});
    CHECK(min_h_statistic(s, e) == doctest::Approx(e.h(RealPos{0.5})));
    CHECK(max_h_statistic(s, e) == doctest::Approx(e.h(RealPos{2.0})));
    CHECK(std::isinf(min_h_statistic(snap({}), e)));
    CHECK(max_h_statistic(snap({}), e) == 0.0);
}

TEST_CASE("estimators") {
    const auto m = mean_estimate({1.0, 2.0, 3.0, 4.0});
    CHECK(m.value == 2.5);
    CHECK(m.std_error == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
    const auto p = proportion_estimate(0, 100);
    CHECK(p.value == 0.0);
    CHECK(p.std_error > 0.0);
    const auto w = wilson_interval(50, 100);
    CHECK(w.lo == doctest::Approx(0.4038).epsilon(1e-3));
    CHECK(w.hi == doctest::Approx(0.5962).epsilon(1e-3));
    CHECK(quantile({1.0, 2.0, 3.0, 4.0, 5.0}, 0.1) == doctest::Approx(1.4));
    CHECK(std::isnan(quantile({}, 0.5)));
    EstimateWithError a{1.0, 0.3};
    EstimateWithError b{2.0, 0.4};
    CHECK(joint_se(a, b) == doctest::Approx(0.5));
    CHECK(agree_within(a, b, 2.0));
    CHECK_FALSE(agree_within(a, b, 1.9));
}
