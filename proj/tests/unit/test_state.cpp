#include "bmp/random.hpp"
#include "bmp/state.hpp"
#include "bmp/test_set.hpp"
#include "bmp/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace bmp;

TEST_CASE("constructors map the boundary to Absorbed") {
    CHECK(is_absorbed(make_real_pos(0.0)));
    CHECK(is_absorbed(make_real_pos(-1e-300)));
    CHECK(std::get<RealPos>(make_real_pos(0.5)).x == 0.5);
    CHECK(is_absorbed(make_count(0)));
    CHECK(count_value(make_count(7)) == 7);
    CHECK_THROWS(make_count(-1));
    CHECK_THROWS(real_value(Count{3}));
    CHECK(real_value(Real{-2.0}) == -2.0);
}

TEST_CASE("intervals are half open and never contain Absorbed") {
    const auto b = TestSet::interval(1.0, 2.0);
    CHECK(b.contains(RealPos{1.0}));
    CHECK_FALSE(b.contains(RealPos{2.0}));
    CHECK(b.contains(Count{1}));
    CHECK_FALSE(b.contains(Count{2}));
    CHECK_FALSE(b.contains(Absorbed{}));
    CHECK(b.is_bounded());
    const auto tail = TestSet::interval(4.0, std::numeric_limits<double>::infinity());
    CHECK(tail.contains(Count{1'000'000}));
    CHECK_FALSE(tail.is_bounded());
    CHECK_THROWS_AS(TestSet::interval(2.0, 2.0), ConfigError);
    CHECK_FALSE(TestSet::everything().contains(Absorbed{}));
    CHECK(TestSet::everything().contains(Real{-3.0}));
}

TEST_CASE("derived streams are reproducible and distinct") {
    CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
    CHECK(derive_seed(1, 2, 3) != derive_seed(1, 2, 4));
    CHECK(derive_seed(1, 2, 0) != derive_seed(1, 3, 0));
    CHECK(derive_seed(1, 2, 0) != derive_seed(2, 2, 0));
    auto a = RandomStream::derived(99, 5);
    auto b = RandomStream::derived(99, 5);
    for (int i = 0; i < 10; ++i) CHECK(a.next_u64() == b.next_u64());
    RandomStream r(1);
    for (int i = 0; i < 1000; ++i) {
        const double u = r.uniform();
        CHECK((u > 0.0 && u < 1.0));
    }
    CHECK(std::isinf(r.exponential(0.0)));
}

TEST_CASE("splitmix64 matches the reference output") {
    // First output of the reference generator seeded with 0.
    CHECK(splitmix64(0) == 0xE220A8397B1DCDAFULL);
}
