#include "bmp/random.hpp"

#include <cmath>
#include <limits>

namespace bmp {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    std::uint64_t z = x + UINT64_C(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)) * UINT64_C(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)) * UINT64_C(0x94D049BB133111EB);
    return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, std::uint64_t tag) noexcept {
    const std::uint64_t lane = index + UINT64_C(0x9E3779B97F4A7C15) * (tag + 1);
    return splitmix64(splitmix64(master) ^ splitmix64(lane));
}

double RandomStream::uniform() {
    // 53 random bits, shifted off zero.
    constexpr double scale = 1.0 / 9007199254740992.0;
    return (static_cast<double>(engine_() >> 11) + 0.5) * scale;
}

double RandomStream::normal() { return normal_(engine_); }

double RandomStream::exponential(double rate) {
    if (rate <= 0.0) return std::numeric_limits<double>::infinity();
    return -std::log(uniform()) / rate;
}

std::size_t RandomStream::index(std::size_t n) {
    if (n <= 1) return 0;
    std::uniform_int_distribution<std::size_t> dist(0, n - 1);
    return dist(engine_);
}

}  // namespace bmp
