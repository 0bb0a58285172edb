#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace bmp {

/// The absorbing marker. Every motion maps its absorbing set to this single value.
struct Absorbed {
    auto operator<=>(const Absorbed&) const = default;
};

/// Point of (0, inf) for killed diffusions. Never holds x <= 0.
struct RealPos {
    double x;
    auto operator<=>(const RealPos&) const = default;
};

/// Point of the real line (transient Ornstein-Uhlenbeck).
struct Real {
    double x;
    auto operator<=>(const Real&) const = default;
};

/// Positive integer state: Galton-Watson population size, or the 1-based label
/// of a finite ergodic chain. Never holds 0.
struct Count {
    std::int64_t n;
    auto operator<=>(const Count&) const = default;
};

/// Nonempty finite subset of Z^d modulo translations, in canonical form:
/// translated so that the coordinate-wise minimum is the origin, sites sorted
/// lexicographically. `coords` is row-major, `dim` entries per site.
struct LatticeConfig {
    int dim = 1;
    std::vector<std::int32_t> coords;

    std::size_t size() const noexcept { return dim > 0 ? coords.size() / static_cast<std::size_t>(dim) : 0; }
    auto operator<=>(const LatticeConfig&) const = default;
};

using State = std::variant<Absorbed, RealPos, Real, Count, LatticeConfig>;

inline bool is_absorbed(const State& s) noexcept { return std::holds_alternative<Absorbed>(s); }

/// RealPos(x) for x > 0, Absorbed otherwise.
State make_real_pos(double x) noexcept;
/// Count(n) for n >= 1, Absorbed for n == 0. Throws on n < 0.
State make_count(std::int64_t n);

/// Coordinate of a RealPos or Real state; throws std::invalid_argument otherwise.
double real_value(const State& s);
/// Payload of a Count state; throws std::invalid_argument otherwise.
std::int64_t count_value(const State& s);

std::string to_string(const State& s);

}  // namespace bmp
