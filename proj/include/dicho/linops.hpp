#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "dicho/common.hpp"

namespace dicho {

/// Indexed family of dense square operators. Forward sequences step
/// v_{n+1} = B_n v_n; backward sequences step v_{n-1} = A_n v_n.
/// Operators are not assumed invertible or uniformly bounded.
class OperatorSequence {
 public:
  using Provider = std::function<Eigen::MatrixXd(int)>;

  OperatorSequence(int dim, Direction direction, Provider provider)
      : dim_(dim), direction_(direction), provider_(std::move(provider)) {
    if (dim_ <= 0) throw ContractError("OperatorSequence: dim must be positive");
    if (!provider_) throw ContractError("OperatorSequence: provider required");
  }

  int dim() const { return dim_; }
  Direction direction() const { return direction_; }

  /// Operator at index n, shape- and finiteness-checked.
  Eigen::MatrixXd at(int n) const;

 private:
  int dim_;
  Direction direction_;
  Provider provider_;
};

/// Linear subspace stored with an orthonormal basis (columns).
/// The zero-dimensional subspace has an ambient_dim x 0 basis.
class Subspace {
 public:
  /// Orthonormalizes the columns of `spanning`. Throws DegeneracyError if the
  /// columns are numerically dependent (relative rank tolerance 1e-10).
  explicit Subspace(const Eigen::MatrixXd& spanning);

  static Subspace zero(int ambient_dim);

  /// Trusts that `basis` is already orthonormal (checked to 1e-10).
  static Subspace from_orthonormal(Eigen::MatrixXd basis);

  const Eigen::MatrixXd& basis() const { return basis_; }
  int ambient_dim() const { return static_cast<int>(basis_.rows()); }
  int dim() const { return static_cast<int>(basis_.cols()); }
  int codim() const { return ambient_dim() - dim(); }

  /// Orthogonal projector basis * basis^T.
  Eigen::MatrixXd projector() const { return basis_ * basis_.transpose(); }

  Subspace orthogonal_complement() const;

  /// Distance of v to the subspace (norm of the orthogonal residual).
  double residual(const Eigen::VectorXd& v) const;

 private:
  Subspace() = default;
  Eigen::MatrixXd basis_;
};

/// Ordered operator product over the index range [from, to); identity when
/// from == to. For forward sequences this is B_{to-1}...B_{from}; for
/// backward sequences A_{from+1}...A_{to} (the map from index `to` down to
/// `from`).
struct TransitionProduct {
  int from = 0;
  int to = 0;
  Eigen::MatrixXd matrix;
  double condition_estimate = 0.0;  // sigma_max / sigma_min (inf if singular)
};

/// Product over [n, m). Precondition 0 <= n <= m.
TransitionProduct compose(const OperatorSequence& seq, int m, int n);

/// Principal angles between two subspaces of the same ambient dimension,
/// non-decreasing, in [0, pi/2], min(dim, dim) values.
std::vector<double> principal_angles(const Subspace& y, const Subspace& z);

/// Hausdorff distance of the unit spheres of two equal-dimensional
/// subspaces, measured with squared chordal distances. Equals
/// 2 (1 - cos theta_max) with theta_max the largest principal angle
/// (see docs/sphere-distance.md for the derivation).
double sphere_distance(const Subspace& y, const Subspace& z);

/// Splits R^d by the spectrum of B^T B: eigenvalues <= a^2 span the first
/// factor, eigenvalues >= b^2 the second. An eigenvalue strictly inside
/// (a^2, b^2) beyond relative tolerance 1e-9 raises GapViolationError; ties
/// at a^2 go to the first factor, at b^2 to the second.
std::pair<Subspace, Subspace> split_spectrum(const Eigen::MatrixXd& b_matrix,
                                             double a, double b);

}  // namespace dicho
