#pragma once

#include <cstdint>
#include <random>

namespace bmp {

/// SplitMix64 output function (Steele, Lea & Flood). Used only for seed
/// derivation, never as a simulation generator.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed for stream `index` under `master`, in lane `tag`.
///
///   s = splitmix64(splitmix64(master) ^ splitmix64(index + 0x9E3779B97F4A7C15 * (tag + 1)))
///
/// Replica r of a run uses tag 0; spine estimators use chunk indices under
/// their own tags. Anyone reimplementing the tool can reproduce streams by
/// feeding `s` into a std::mt19937_64.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, std::uint64_t tag = 0) noexcept;

namespace stream_tag {
inline constexpr std::uint64_t replica = 0;
inline constexpr std::uint64_t many_to_one = 1;
inline constexpr std::uint64_t many_to_two = 2;
inline constexpr std::uint64_t doob = 3;
inline constexpr std::uint64_t tilted = 4;
inline constexpr std::uint64_t decay_rate = 5;
inline constexpr std::uint64_t phi_fallback = 6;
}  // namespace stream_tag

/// The only mutable object in a simulation. One stream is owned by exactly one
/// replica (or one chunk of spine paths) at a time.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    static RandomStream derived(std::uint64_t master, std::uint64_t index, std::uint64_t tag = 0) {
        return RandomStream(derive_seed(master, index, tag));
    }

    /// Uniform on the open interval (0, 1).
    double uniform();
    double normal();
    /// Exponential with the given rate; +inf when rate == 0.
    double exponential(double rate);
    std::uint64_t next_u64() { return engine_(); }
    /// Uniform integer in [0, n).
    std::size_t index(std::size_t n);

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace bmp
