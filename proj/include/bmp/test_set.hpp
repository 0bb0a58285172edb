#pragma once

#include "bmp/state.hpp"

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace bmp {

/// Half-open interval [a, b) on the real coordinate of RealPos/Real states, or
/// on the integer payload of Count states. b may be +inf.
struct Interval {
    double a;
    double b;
};

struct FiniteSet {
    std::vector<State> members;
};

struct Predicate {
    std::function<bool(const State&)> contains;
    /// Used as nu(B) when the motion cannot compute it.
    std::optional<double> nu_mass;
    std::string label = "predicate";
};

/// A test set B on which particle counts xi_t(B) are evaluated.
/// Membership is deterministic and Absorbed is never a member.
class TestSet {
public:
    using Variant = std::variant<Interval, FiniteSet, Predicate>;

    /// Throws ConfigError unless a < b.
    static TestSet interval(double a, double b);
    static TestSet finite(std::vector<State> members);
    static TestSet predicate(std::function<bool(const State&)> contains, std::optional<double> nu_mass = std::nullopt,
                             std::string label = "predicate");
    /// The whole non-absorbed state space.
    static TestSet everything();

    bool contains(const State& s) const;
    bool is_bounded() const;
    std::string label() const;
    const Variant& shape() const noexcept { return shape_; }

private:
    explicit TestSet(Variant v) : shape_(std::move(v)) {}
    Variant shape_;
};

}  // namespace bmp
