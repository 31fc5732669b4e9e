#include "cantor/rng.hpp"

#include <cmath>
#include <numbers>

namespace cantor {

void RngStream::unit_circle(double& cx, double& cy) {
    double theta = 2.0 * std::numbers::pi * uniform01();
    cx = std::cos(theta);
    cy = std::sin(theta);
}

} // namespace cantor
