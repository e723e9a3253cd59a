#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "dicho/common.hpp"

namespace dicho {

/// Uniform 1-D grid with homogeneous Dirichlet walls. n_points counts
/// interior nodes; dx = (x_hi - x_lo)/(n_points + 1). The
/// TruncatedLineDirichlet flavour marks a whole-line problem truncated to a
/// box (wall-distance checks apply); the discrete operators are identical.
struct GridSpec {
  enum class Boundary { Dirichlet, TruncatedLineDirichlet };

  double x_lo = 0.0;
  double x_hi = 1.0;
  int n_points = 0;
  double dt = 0.0;
  Boundary boundary = Boundary::Dirichlet;

  double dx() const { return (x_hi - x_lo) / (n_points + 1); }
  double node(int i) const { return x_lo + (i + 1) * dx(); }
  double parabolic_ratio() const { return dt / (dx() * dx()); }
  void validate() const;
};

/// Trapezoidal L2 inner product (boundary values vanish, so this is
/// dx * sum over interior nodes). All "L2" norms in the PDE modules are
/// this grid norm.
double grid_ip(const GridSpec& g, const Eigen::VectorXd& u, const Eigen::VectorXd& v);
double grid_norm(const GridSpec& g, const Eigen::VectorXd& u);

/// Central-difference first derivative with Dirichlet walls.
Eigen::VectorXd grid_derivative(const GridSpec& g, const Eigen::VectorXd& u);

Eigen::VectorXd sample_function(const GridSpec& g, const std::function<double(double)>& f);

/// Symmetric tridiagonal operator with constant off-diagonal.
struct Tridiag {
  Eigen::VectorXd diag;
  double off = 0.0;
  int size() const { return static_cast<int>(diag.size()); }
};

/// Second-order discretization of -Laplacian + V with Dirichlet rows
/// eliminated.
Tridiag schrodinger_tridiag(const GridSpec& g, const Eigen::VectorXd& v_pot);

/// Dense form of the same matrix.
Eigen::MatrixXd discretize_schrodinger(const GridSpec& g, const Eigen::VectorXd& v_pot);

/// Thomas solve of (alpha I + beta T) x = rhs.
Eigen::VectorXd solve_shifted_tridiag(const Tridiag& t, double alpha, double beta,
                                      const Eigen::VectorXd& rhs);

Eigen::VectorXd tridiag_apply(const Tridiag& t, const Eigen::VectorXd& u);

/// Discrete Dirichlet form <u, -Lap u> in the grid inner product.
double dirichlet_form(const GridSpec& g, const Eigen::VectorXd& u);

/// Number of eigenvalues of T strictly below x (Sturm / LDL sign count).
int tridiag_count_below(const Tridiag& t, double x);

/// k-th smallest eigenvalue (0-based) by bisection.
double tridiag_kth_eigenvalue(const Tridiag& t, int k);

/// Eigenvector for an isolated eigenvalue by shifted inverse iteration,
/// normalized in the grid L2 norm of `g`.
Eigen::VectorXd tridiag_eigenvector(const GridSpec& g, const Tridiag& t, double lambda);

/// All eigenpairs with eigenvalue < threshold, ascending.
std::vector<std::pair<double, Eigen::VectorXd>> tridiag_eigs_below(const GridSpec& g,
                                                                   const Tridiag& t,
                                                                   double threshold);

/// Piecewise-cubic (4-point Lagrange) interpolation of grid values on the
/// uniform grid, zero outside the walls.
class CubicInterpolant {
 public:
  CubicInterpolant(const GridSpec& g, Eigen::VectorXd values);
  double operator()(double x) const;
  double derivative(double x) const;

 private:
  double x_lo_, dx_;
  Eigen::VectorXd vals_;  // with both wall zeros attached
};

}  // namespace dicho
