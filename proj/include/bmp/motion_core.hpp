#pragma once

#include "bmp/eigen_data.hpp"
#include "bmp/state.hpp"

namespace bmp {

/// M_t = h(x_t) e^{lambda t} / h(x_0). Zero when x_t is absorbed.
/// Throws std::invalid_argument when h(x_0) = 0 (which includes x_0 absorbed).
double martingale_weight(const EigenData& eigen, const State& x0, const State& xt, double t);

}  // namespace bmp
