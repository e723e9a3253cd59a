#pragma once

#include <functional>
#include <string>

#include "dicho/grid.hpp"

namespace dicho {

/// Closed-form potential profile with a decay length used by the
/// wall-distance checks.
struct PotentialShape {
  std::string name;
  std::function<double(double)> f;
  double decay_length = 1.0;
};

PotentialShape sech2_shape(double depth);                   // -depth sech^2(x)
PotentialShape gaussian_shape(double depth, double sigma);  // -depth exp(-x^2/(2 sigma^2))
PotentialShape constant_shape(double value);

/// Potential profile moving along a C^1 trajectory. The velocity doubles as
/// the boost parameter for relativistic modules.
struct PotentialTrack {
  PotentialShape shape;
  std::function<double(double)> position;
  std::function<double(double)> velocity;
};

PotentialTrack linear_track(PotentialShape shape, double x0, double velocity);

/// Potential sample of the shape centered at the grid midpoint (the frame
/// in which per-shape spectral data is computed; shifted eigenfunctions are
/// interpolated from it).
Eigen::VectorXd centered_potential(const GridSpec& g, const PotentialShape& shape);

}  // namespace dicho
