#include "bmp/motions.hpp"

#include <doctest.h>

#include <algorithm>

using namespace bmp;

namespace {

double total_rate(const std::vector<Transition>& ts) {
    double s = 0.0;
    for (const auto& t : ts) s += t.rate;
    return s;
}

}  // namespace

TEST_CASE("canonical form is translation invariant") {
    const auto a = canonicalize(2, {3, 4, 4, 4, 3, 5});
    const auto b = canonicalize(2, {-1, 0, 0, 0, -1, 1});
    CHECK(a == b);
    const auto& c = std::get<LatticeConfig>(a);
    CHECK(c.coords == std::vector<std::int32_t>{0, 0, 0, 1, 1, 0});
    CHECK(canonicalize(1, {5, 5, 5}) == canonicalize(1, {0}));
    CHECK(is_absorbed(canonicalize(3, {})));
    CHECK_THROWS(canonicalize(2, {1, 2, 3}));
}

TEST_CASE("single site in one dimension") {
    const auto ts = contact_event_rates(LatticeConfig{1, {0}}, 2.0);
    // recovery to the empty set at rate 1, infection of either neighbour at 2 each
    CHECK(total_rate(ts) == doctest::Approx(5.0));
    REQUIRE(ts.size() == 2);
    for (const auto& t : ts) {
        if (is_absorbed(t.next)) CHECK(t.rate == doctest::Approx(1.0));
        else {
            CHECK(t.next == canonicalize(1, {0, 1}));
            CHECK(t.rate == doctest::Approx(4.0));
        }
    }
}

TEST_CASE("rates of a two-site configuration in two dimensions") {
    const LatticeConfig s{2, {0, 0, 1, 0}};
    const auto ts = contact_event_rates(s, 0.5);
    // 2 recoveries (both to a single site) and 6 boundary pairs
    CHECK(total_rate(ts) == doctest::Approx(2.0 + 0.5 * 6));
    const auto single = std::find_if(ts.begin(), ts.end(), [](const Transition& t) { return t.next == canonicalize(2, {0, 0}); });
    REQUIRE(single != ts.end());
    CHECK(single->rate == doctest::Approx(2.0));
    // the straight extension can be reached from either end
    const auto line = std::find_if(ts.begin(), ts.end(), [](const Transition& t) { return t.next == canonicalize(2, {0, 0, 1, 0, 2, 0}); });
    REQUIRE(line != ts.end());
    CHECK(line->rate == doctest::Approx(1.0));
}

TEST_CASE("a healthy site with two infected neighbours is counted twice") {
    const LatticeConfig s{1, {0, 2}};
    const auto ts = contact_event_rates(s, 1.0);
    const auto filled = std::find_if(ts.begin(), ts.end(), [](const Transition& t) { return t.next == canonicalize(1, {0, 1, 2}); });
    REQUIRE(filled != ts.end());
    CHECK(filled->rate == doctest::Approx(2.0));
    CHECK(total_rate(ts) == doctest::Approx(2.0 + 4.0));
}

TEST_CASE("Galton-Watson rates scale with n") {
    const std::vector<GaltonWatson::Jump> rho = {{-1, 0.6}, {1, 0.4}};
    const auto ts = gw_event_rates(3, rho);
    REQUIRE(ts.size() == 2);
    CHECK(ts[0].next == State{Count{2}});
    CHECK(ts[0].rate == doctest::Approx(1.8));
    CHECK(ts[1].next == State{Count{4}});
    CHECK(ts[1].rate == doctest::Approx(1.2));
    CHECK(is_absorbed(gw_event_rates(1, rho)[0].next));
    CHECK_THROWS(gw_event_rates(0, rho));
}
