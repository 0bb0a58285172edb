#include "bmp/state.hpp"

#include <sstream>
#include <stdexcept>

namespace bmp {

State make_real_pos(double x) noexcept {
    if (!(x > 0.0)) return Absorbed{};
    return RealPos{x};
}

State make_count(std::int64_t n) {
    if (n < 0) throw std::invalid_argument("count state must be non-negative");
    if (n == 0) return Absorbed{};
    return Count{n};
}

double real_value(const State& s) {
    if (const auto* p = std::get_if<RealPos>(&s)) return p->x;
    if (const auto* p = std::get_if<Real>(&s)) return p->x;
    throw std::invalid_argument("state " + to_string(s) + " has no real coordinate");
}

std::int64_t count_value(const State& s) {
    if (const auto* p = std::get_if<Count>(&s)) return p->n;
    throw std::invalid_argument("state " + to_string(s) + " is not a count");
}

std::string to_string(const State& s) {
    std::ostringstream os;
    os.precision(17);
    std::visit(
        [&os](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Absorbed>) {
                os << "Absorbed";
            } else if constexpr (std::is_same_v<T, RealPos>) {
                os << "RealPos(" << v.x << ")";
            } else if constexpr (std::is_same_v<T, Real>) {
                os << "Real(" << v.x << ")";
            } else if constexpr (std::is_same_v<T, Count>) {
                os << "Count(" << v.n << ")";
            } else {
                os << "Lattice{";
                for (std::size_t i = 0; i < v.size(); ++i) {
                    if (i) os << ",";
                    os << "(";
                    for (int k = 0; k < v.dim; ++k) {
                        if (k) os << ",";
                        os << v.coords[i * static_cast<std::size_t>(v.dim) + static_cast<std::size_t>(k)];
                    }
                    os << ")";
                }
                os << "}";
            }
        },
        s);
    return os.str();
}

}  // namespace bmp
