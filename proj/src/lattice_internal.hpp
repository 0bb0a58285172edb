#pragma once

#include "bmp/random.hpp"
#include "bmp/state.hpp"

namespace bmp::detail {

/// Number of ordered pairs (infected y, healthy x) with |x - y|_1 = 1.
std::size_t contact_boundary_pairs(const LatticeConfig& config);

/// One jump of the contact process: recovery w.p. |s| / total, otherwise an
/// infection along a uniformly chosen boundary pair.
State contact_jump(const LatticeConfig& config, double gamma, RandomStream& rng);

}  // namespace bmp::detail
