#include "bmp/errors.hpp"
#include "bmp/motion_core.hpp"
#include "bmp/motions.hpp"
#include "bmp/phi.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace bmp;

// Reference values below come from tests/oracle/oracle.py (scipy), not from this library.

TEST_CASE("killed drifted BM transition density") {
    const MotionModel m = KilledDriftBM{1.0};
    CHECK(*transition_density(m, RealPos{1.0}, RealPos{1.0}, 1.0) == doctest::Approx(0.209223547981).epsilon(1e-9));
    CHECK(*survival_probability(m, RealPos{1.0}, 2.0) == doctest::Approx(0.114524574014).epsilon(1e-9));
}

TEST_CASE("killed OU transition density and survival") {
    const MotionModel m = KilledOU{1.0};
    CHECK(*transition_density(m, RealPos{1.0}, RealPos{0.5}, 0.7) == doctest::Approx(0.476047707746).epsilon(1e-9));
    CHECK(*survival_probability(m, RealPos{1.0}, 1.0) == doctest::Approx(0.42417644178).epsilon(1e-9));
    CHECK(*transition_probability(m, RealPos{1.0}, TestSet::interval(0.5, 1.5), 1.0) ==
          doctest::Approx(0.286641819243).epsilon(1e-7));
}

TEST_CASE("transient OU transition probability") {
    const MotionModel m = TransientOU{0.5, 1.0};
    CHECK(*transition_probability(m, Real{0.0}, TestSet::interval(0.0, 1.0), 1.0) ==
          doctest::Approx(0.277230721821).epsilon(1e-9));
    CHECK(*survival_probability(m, Real{0.0}, 3.0) == 1.0);
}

TEST_CASE("ergodic chain: stationary law and transition probabilities") {
    const auto chain = ErgodicCTMC::default_example();
    const double expected[] = {0.150760719225, 0.268326417704, 0.359612724758, 0.165975103734, 0.0553250345781};
    for (std::size_t i = 0; i < 5; ++i) CHECK(chain.stationary()[i] == doctest::Approx(expected[i]).epsilon(1e-9));
    const MotionModel m = chain;
    CHECK(*transition_probability(m, Count{1}, TestSet::interval(2, 4), 1.0) ==
          doctest::Approx(0.513839557137).epsilon(1e-8));
    const auto e = eigen_data(m);
    CHECK(e.lambda == 0.0);
    CHECK(e.h(Count{3}) == 1.0);
    CHECK(e.nu_mass(TestSet::everything()) == doctest::Approx(1.0));
}

TEST_CASE("ergodic chain rejects bad generators") {
    CHECK_THROWS_AS(ErgodicCTMC({{-1, 1}, {0, 0}}), ConfigError);           // not irreducible
    CHECK_THROWS_AS(ErgodicCTMC({{-1, 0.5}, {1, -1}}), ConfigError);        // row sum
    CHECK_THROWS_AS(ErgodicCTMC({{-1, 1, 0}, {1, -1, 0}}), ConfigError);    // not square
    CHECK_THROWS_AS(ErgodicCTMC({{1, -1}, {1, -1}}), ConfigError);          // negative rate
}

TEST_CASE("Galton-Watson motion: Yaglom law is geometric") {
    const GaltonWatson gw({{-1, 0.6}, {1, 0.4}});
    CHECK(gw.lambda() == doctest::Approx(0.2));
    CHECK(gw.yaglom()[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-8));
    CHECK(gw.yaglom()[1] == doctest::Approx(2.0 / 9.0).epsilon(1e-8));
    CHECK(gw.yaglom()[2] == doctest::Approx(4.0 / 27.0).epsilon(1e-8));
    CHECK(gw.yaglom_mean() == doctest::Approx(3.0).epsilon(1e-8));
    const MotionModel m = gw;
    CHECK(*transition_probability(m, Count{2}, TestSet::interval(1, 2), 1.0) ==
          doctest::Approx(0.352022272831).epsilon(1e-8));
    CHECK(*transition_probability(m, Count{2}, TestSet::interval(2, 4), 1.0) ==
          doctest::Approx(0.416567647552).epsilon(1e-8));
    const auto e = eigen_data(m);
    CHECK(e.h(Count{6}) == doctest::Approx(2.0));
    CHECK_THROWS_AS(GaltonWatson({{-1, 0.4}, {1, 0.6}}), ConfigError);  // supercritical
    CHECK_THROWS_AS(GaltonWatson({{-2, 0.5}, {1, 0.5}}), ConfigError);
}

TEST_CASE("martingale weight") {
    const auto e = eigen_data(KilledOU{1.0});
    CHECK(martingale_weight(e, RealPos{1.0}, RealPos{2.0}, 0.5) == doctest::Approx(2.0 * std::exp(0.5)));
    CHECK(martingale_weight(e, RealPos{1.0}, Absorbed{}, 0.5) == 0.0);
    CHECK_THROWS(martingale_weight(e, Absorbed{}, RealPos{1.0}, 0.5));
}

TEST_CASE("eigen data of the killed diffusions") {
    const auto ou = eigen_data(KilledOU{1.0});
    CHECK(ou.lambda == 1.0);
    CHECK(ou.nu_mass(TestSet::interval(0.0, std::numeric_limits<double>::infinity())) == doctest::Approx(1.0));
    CHECK(ou.nu_mass(TestSet::interval(0.0, 1.0)) == doctest::Approx(1.0 - std::exp(-1.0)));
    const auto bm = eigen_data(KilledDriftBM{2.0});
    CHECK(bm.lambda == 2.0);
    CHECK(bm.p(4.0) == doctest::Approx(0.125));
    CHECK(bm.nu_mass(TestSet::interval(0.0, std::numeric_limits<double>::infinity())) == doctest::Approx(1.0));
    const auto tou = eigen_data(TransientOU{0.5, 1.0});
    CHECK_THROWS_AS(tou.nu_mass(TestSet::interval(0.0, std::numeric_limits<double>::infinity())), ConfigError);
}

TEST_CASE("second moment of the martingale against quadrature") {
    const MotionModel ou = KilledOU{1.0};
    CHECK(second_moment_M(ou, eigen_data(ou), RealPos{1.0}, 2.0) == doctest::Approx(8.3122295864).epsilon(1e-7));
    const MotionModel bm = KilledDriftBM{1.0};
    CHECK(second_moment_M(bm, eigen_data(bm), RealPos{1.0}, 2.0) == doctest::Approx(78.5001694926).epsilon(1e-7));
    const MotionModel chain = ErgodicCTMC::default_example();
    CHECK(second_moment_M(chain, eigen_data(chain), Count{2}, 5.0) == 1.0);
}

TEST_CASE("phi for an ergodic chain is (m2 - m1) / (m1 - 1)") {
    const MotionModel chain = ErgodicCTMC::default_example();
    const BranchingLaw law({{0, 0.2}, {2, 0.8}}, 1.0);
    const auto r = phi_quadrature(chain, eigen_data(chain), law, Count{1});
    CHECK_FALSE(r.divergent);
    CHECK(r.value == doctest::Approx(8.0 / 3.0).epsilon(1e-6));
    CHECK(second_moment_D(chain, eigen_data(chain), law, Count{1}, 6.0) ==
          doctest::Approx(std::exp(-3.6) + 8.0 / 3.0 * (1.0 - std::exp(-3.6))).epsilon(1e-8));
}

TEST_CASE("phi and E[D_t^2] for the killed diffusions") {
    const MotionModel ou = KilledOU{1.0};
    const BranchingLaw binary2({{2, 1.0}}, 2.0);
    const auto r = phi_quadrature(ou, eigen_data(ou), binary2, RealPos{1.0});
    CHECK_FALSE(r.divergent);
    CHECK(r.value == doctest::Approx(4.294474212).epsilon(1e-5));
    CHECK(second_moment_D(ou, eigen_data(ou), binary2, RealPos{1.0}, 6.0) == doctest::Approx(4.286083296).epsilon(1e-6));

    const MotionModel bm = KilledDriftBM{1.0};
    const auto e = eigen_data(bm);
    const BranchingLaw k25({{2, 1.0}}, 1.25);
    const BranchingLaw k30({{2, 1.0}}, 1.5);
    CHECK(second_moment_D(bm, e, k25, RealPos{1.0}, 2.0) == doctest::Approx(25.4243001).epsilon(1e-6));
    CHECK(second_moment_D(bm, e, k25, RealPos{1.0}, 6.0) == doctest::Approx(126.7308363).epsilon(1e-6));
    CHECK(second_moment_D(bm, e, k30, RealPos{1.0}, 6.0) == doctest::Approx(61.84788448).epsilon(1e-6));
    const auto p30 = phi_quadrature(bm, e, k30, RealPos{1.0});
    CHECK_FALSE(p30.divergent);
    CHECK(p30.value == doctest::Approx(84.6337411).epsilon(2e-3));
    const auto p25 = phi_quadrature(bm, e, k25, RealPos{1.0});
    CHECK_FALSE(p25.divergent);
    CHECK(p25.value == doctest::Approx(411.0858024).epsilon(2e-2));
    const auto p15 = phi_quadrature(bm, e, BranchingLaw({{2, 1.0}}, 0.75), RealPos{1.0});
    CHECK(p15.divergent);
    CHECK(std::isinf(p15.value));
}

TEST_CASE("exact samplers reproduce their laws") {
    RandomStream rng(11);
    const MotionModel ou = KilledOU{1.0};
    const int n = 20'000;
    int alive = 0;
    for (int i = 0; i < n; ++i) alive += is_absorbed(step(ou, RealPos{1.0}, 1.0, rng)) ? 0 : 1;
    const double p = 0.42417644178;
    CHECK(std::abs(alive / double(n) - p) < 4.0 * std::sqrt(p * (1 - p) / n));

    const MotionModel bm = KilledDriftBM{1.0};
    alive = 0;
    for (int i = 0; i < n; ++i) alive += is_absorbed(step(bm, RealPos{1.0}, 2.0, rng)) ? 0 : 1;
    const double q = 0.114524574014;
    CHECK(std::abs(alive / double(n) - q) < 4.0 * std::sqrt(q * (1 - q) / n));

    // two half steps compose to one full step in law
    alive = 0;
    for (int i = 0; i < n; ++i) {
        auto s = step(ou, RealPos{1.0}, 0.5, rng);
        if (!is_absorbed(s)) s = step(ou, s, 0.5, rng);
        alive += is_absorbed(s) ? 0 : 1;
    }
    CHECK(std::abs(alive / double(n) - p) < 4.0 * std::sqrt(p * (1 - p) / n));

    CHECK_THROWS(step(ou, RealPos{1.0}, 0.0, rng));
    CHECK_THROWS(step(ou, Absorbed{}, 1.0, rng));
}

TEST_CASE("chain sampling matches the transition matrix") {
    RandomStream rng(5);
    const MotionModel gw = GaltonWatson({{-1, 0.6}, {1, 0.4}});
    const int n = 20'000;
    int hits = 0;
    for (int i = 0; i < n; ++i) {
        const auto s = step(gw, Count{2}, 1.0, rng);
        hits += (!is_absorbed(s) && count_value(s) == 1) ? 1 : 0;
    }
    const double p = 0.352022272831;
    CHECK(std::abs(hits / double(n) - p) < 4.0 * std::sqrt(p * (1 - p) / n));
}

TEST_CASE("contact process") {
    const ContactProcess cp(1, 0.5);
    const MotionModel m = cp;
    CHECK(is_jump_motion(m));
    CHECK(has_absorption(m));
    CHECK(exit_rate(m, LatticeConfig{1, {0}}) == doctest::Approx(2.0));
    CHECK_THROWS_AS(eigen_data(m), ConfigError);
    const double lambda = estimate_contact_decay_rate(cp, 4000, 17);
    // subcritical in one dimension: decay rate below the pure-death rate 1
    CHECK(lambda > 0.0);
    CHECK(lambda < 1.0);
    CHECK(estimate_contact_decay_rate(cp, 4000, 17) == lambda);
    const auto e = eigen_data(cp.with_decay_rate(lambda));
    CHECK(e.surrogate_h);
    CHECK(e.h(LatticeConfig{1, {0, 1, 2}}) == 3.0);
    CHECK_THROWS_AS(ContactProcess(0, 1.0), ConfigError);
}
