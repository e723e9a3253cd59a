#include "dicho/potentials.hpp"

#include <cmath>
#include <limits>

namespace dicho {

namespace {
double sech(double x) { return 1.0 / std::cosh(x); }
}

PotentialShape sech2_shape(double depth) {
  return {"sech2(" + std::to_string(depth) + ")",
          [depth](double x) { return -depth * sech(x) * sech(x); }, 1.0};
}

PotentialShape gaussian_shape(double depth, double sigma) {
  return {"gaussian(" + std::to_string(depth) + "," + std::to_string(sigma) + ")",
          [depth, sigma](double x) { return -depth * std::exp(-x * x / (2.0 * sigma * sigma)); },
          sigma};
}

PotentialShape constant_shape(double value) {
  return {"constant(" + std::to_string(value) + ")", [value](double) { return value; },
          std::numeric_limits<double>::infinity()};
}

PotentialTrack linear_track(PotentialShape shape, double x0, double velocity) {
  return {std::move(shape), [x0, velocity](double t) { return x0 + velocity * t; },
          [velocity](double) { return velocity; }};
}

Eigen::VectorXd centered_potential(const GridSpec& g, const PotentialShape& shape) {
  const double c0 = 0.5 * (g.x_lo + g.x_hi);
  return sample_function(g, [&](double x) { return shape.f(x - c0); });
}

}  // namespace dicho
