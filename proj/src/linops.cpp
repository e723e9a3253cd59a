#include "dicho/linops.hpp"

#include <algorithm>
#include <cmath>

namespace dicho {

namespace {
constexpr double kOrthoTol = 1e-10;
}

Eigen::MatrixXd OperatorSequence::at(int n) const {
  if (n < 0) throw ContractError("OperatorSequence::at: negative index");
  Eigen::MatrixXd m = provider_(n);
  if (m.rows() != dim_ || m.cols() != dim_)
    throw ContractError("OperatorSequence::at: provider returned wrong shape at n=" +
                        std::to_string(n));
  if (!m.allFinite())
    throw ContractError("OperatorSequence::at: non-finite entries at n=" + std::to_string(n));
  return m;
}

Subspace::Subspace(const Eigen::MatrixXd& spanning) {
  const int cols = static_cast<int>(spanning.cols());
  if (spanning.rows() == 0) throw ContractError("Subspace: ambient dimension must be positive");
  if (cols == 0) {
    basis_ = Eigen::MatrixXd(spanning.rows(), 0);
    return;
  }
  if (!spanning.allFinite()) throw ContractError("Subspace: non-finite spanning vectors");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(spanning);
  qr.setThreshold(kOrthoTol);
  if (qr.rank() < cols)
    throw DegeneracyError("Subspace: spanning set is rank-deficient (rank " +
                          std::to_string(qr.rank()) + " < " + std::to_string(cols) + ")");
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(spanning.rows(), cols);
  basis_ = q;
}

Subspace Subspace::zero(int ambient_dim) {
  if (ambient_dim <= 0) throw ContractError("Subspace::zero: ambient dimension must be positive");
  Subspace s;
  s.basis_ = Eigen::MatrixXd(ambient_dim, 0);
  return s;
}

Subspace Subspace::from_orthonormal(Eigen::MatrixXd basis) {
  if (basis.cols() > 0) {
    const Eigen::MatrixXd gram = basis.transpose() * basis;
    const double err =
        (gram - Eigen::MatrixXd::Identity(basis.cols(), basis.cols())).cwiseAbs().maxCoeff();
    if (err > kOrthoTol)
      throw ContractError("Subspace::from_orthonormal: basis not orthonormal (err " +
                          std::to_string(err) + ")");
  }
  Subspace s;
  s.basis_ = std::move(basis);
  return s;
}

Subspace Subspace::orthogonal_complement() const {
  const int n = ambient_dim();
  const int k = dim();
  if (k == 0) return Subspace(Eigen::MatrixXd::Identity(n, n));
  if (k == n) return Subspace::zero(n);
  // Full QR of the basis; trailing columns of Q span the complement.
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis_);
  Eigen::MatrixXd q = qr.householderQ();
  return Subspace::from_orthonormal(q.rightCols(n - k));
}

double Subspace::residual(const Eigen::VectorXd& v) const {
  if (v.size() != ambient_dim()) throw ContractError("Subspace::residual: dimension mismatch");
  if (dim() == 0) return v.norm();
  return (v - basis_ * (basis_.transpose() * v)).norm();
}

TransitionProduct compose(const OperatorSequence& seq, int m, int n) {
  if (n < 0 || n > m)
    throw ContractError("compose: require 0 <= n <= m, got n=" + std::to_string(n) +
                        " m=" + std::to_string(m));
  const int d = seq.dim();
  Eigen::MatrixXd prod = Eigen::MatrixXd::Identity(d, d);
  if (seq.direction() == Direction::Forward) {
    // B(m, n) = B_{m-1} ... B_n
    for (int k = n; k < m; ++k) prod = seq.at(k) * prod;
  } else {
    // A(n, m) = A_{n+1} ... A_m
    for (int k = m; k > n; --k) prod = seq.at(k) * prod;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(prod);
  const double smin = svd.singularValues()(d - 1);
  const double smax = svd.singularValues()(0);
  TransitionProduct out;
  out.from = n;
  out.to = m;
  out.matrix = std::move(prod);
  out.condition_estimate =
      smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  return out;
}

std::vector<double> principal_angles(const Subspace& y, const Subspace& z) {
  if (y.ambient_dim() != z.ambient_dim())
    throw ContractError("principal_angles: ambient dimension mismatch");
  const int k = std::min(y.dim(), z.dim());
  if (k == 0) return {};
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(y.basis().transpose() * z.basis());
  std::vector<double> angles(k);
  for (int i = 0; i < k; ++i) {
    const double c = std::clamp(svd.singularValues()(i), 0.0, 1.0);
    angles[i] = std::acos(c);
  }
  std::sort(angles.begin(), angles.end());
  return angles;
}

double sphere_distance(const Subspace& y, const Subspace& z) {
  if (y.ambient_dim() != z.ambient_dim())
    throw ContractError("sphere_distance: ambient dimension mismatch");
  if (y.dim() != z.dim()) throw ContractError("sphere_distance: subspace dimensions differ");
  if (y.dim() < 1) throw ContractError("sphere_distance: subspaces must have dimension >= 1");
  // 2 (1 - cos theta_max); cos theta_max is the smallest singular value of
  // Y^T Z, used directly to avoid acos round-off near zero angles.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(y.basis().transpose() * z.basis());
  const double cmin = std::clamp(svd.singularValues()(y.dim() - 1), 0.0, 1.0);
  return 2.0 * (1.0 - cmin);
}

std::pair<Subspace, Subspace> split_spectrum(const Eigen::MatrixXd& b_matrix, double a,
                                             double b) {
  if (!(0.0 <= a && a < b)) throw ContractError("split_spectrum: require 0 <= a < b");
  if (b_matrix.rows() != b_matrix.cols())
    throw ContractError("split_spectrum: matrix must be square");
  const int d = static_cast<int>(b_matrix.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b_matrix.transpose() * b_matrix);
  if (es.info() != Eigen::Success) throw Error("split_spectrum: eigensolver failed");
  const Eigen::VectorXd evals = es.eigenvalues();  // ascending
  const double tol = 1e-9 * std::max({1.0, a * a, b * b});
  int n_low = 0;
  for (int i = 0; i < d; ++i) {
    const double lam = evals(i);
    if (lam <= a * a + tol) {
      ++n_low;
    } else if (lam < b * b - tol) {
      throw GapViolationError("split_spectrum: eigenvalue " + std::to_string(lam) +
                              " lies strictly inside (" + std::to_string(a * a) + ", " +
                              std::to_string(b * b) + ")");
    }
  }
  Eigen::MatrixXd low = es.eigenvectors().leftCols(n_low);
  Eigen::MatrixXd high = es.eigenvectors().rightCols(d - n_low);
  return {n_low > 0 ? Subspace::from_orthonormal(low) : Subspace::zero(d),
          d - n_low > 0 ? Subspace::from_orthonormal(high) : Subspace::zero(d)};
}

}  // namespace dicho
