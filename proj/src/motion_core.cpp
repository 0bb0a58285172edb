#include "bmp/motion_core.hpp"

#include <cmath>
#include <stdexcept>

namespace bmp {

double martingale_weight(const EigenData& eigen, const State& x0, const State& xt, double t) {
    const double h0 = eigen.h_at(x0);
    if (!(h0 > 0.0)) throw std::invalid_argument("martingale weight needs h(x0) > 0, got x0 = " + to_string(x0));
    if (is_absorbed(xt)) return 0.0;
    return eigen.h(xt) * std::exp(eigen.lambda * t) / h0;
}

}  // namespace bmp
