#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace dicho {

// Error hierarchy shared by all modules. Every throw carries a message that
// names the violated precondition or hypothesis.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Caller violated a documented precondition.
struct ContractError : Error {
  using Error::Error;
};

// Spectral gap required by a hypothesis is absent (split or SVD gap).
struct GapViolationError : Error {
  using Error::Error;
};

// Covector family or propagated frame is numerically dependent.
struct DegeneracyError : Error {
  using Error::Error;
};

// Stable/unstable sum is not numerically direct.
struct TransversalityError : Error {
  using Error::Error;
};

// Propagated basis lost rank.
struct CollapseError : Error {
  using Error::Error;
};

// A quantitative hypothesis of a certification theorem fails.
struct HypothesisError : Error {
  using Error::Error;
};

// A linear solve needed by a construction is too ill-conditioned.
struct ConditioningError : Error {
  using Error::Error;
};

// Truncated computational domain too small, or cutoff supports overlap.
struct DomainError : Error {
  using Error::Error;
};

enum class Direction { Forward, Backward };

inline std::string to_string(Direction d) {
  return d == Direction::Forward ? "forward" : "backward";
}

using Rng = std::mt19937_64;

inline Eigen::VectorXd random_unit_vector(Rng& rng, int dim) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd v(dim);
  do {
    for (int i = 0; i < dim; ++i) v[i] = gauss(rng);
  } while (v.norm() < 1e-12);
  return v / v.norm();
}

inline Eigen::MatrixXd random_gaussian_matrix(Rng& rng, int rows, int cols) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = gauss(rng);
  return m;
}

// Relative margin of "lhs <= rhs"; negative means violated.
inline double relative_margin(double lhs, double rhs) {
  const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
  return (rhs - lhs) / scale;
}

}  // namespace dicho
