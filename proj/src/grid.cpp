#include "dicho/grid.hpp"

#include <algorithm>
#include <cmath>

namespace dicho {

void GridSpec::validate() const {
  if (!(x_hi > x_lo)) throw ContractError("GridSpec: empty domain");
  if (n_points < 3) throw ContractError("GridSpec: need at least 3 interior points");
  if (!(dt > 0.0)) throw ContractError("GridSpec: dt must be positive");
}

double grid_ip(const GridSpec& g, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  if (u.size() != g.n_points || v.size() != g.n_points)
    throw ContractError("grid_ip: size mismatch");
  return g.dx() * u.dot(v);
}

double grid_norm(const GridSpec& g, const Eigen::VectorXd& u) {
  return std::sqrt(grid_ip(g, u, u));
}

Eigen::VectorXd grid_derivative(const GridSpec& g, const Eigen::VectorXd& u) {
  const int n = g.n_points;
  if (u.size() != n) throw ContractError("grid_derivative: size mismatch");
  Eigen::VectorXd d(n);
  const double inv2dx = 1.0 / (2.0 * g.dx());
  for (int i = 0; i < n; ++i) {
    const double left = i > 0 ? u[i - 1] : 0.0;
    const double right = i + 1 < n ? u[i + 1] : 0.0;
    d[i] = (right - left) * inv2dx;
  }
  return d;
}

Eigen::VectorXd sample_function(const GridSpec& g, const std::function<double(double)>& f) {
  Eigen::VectorXd v(g.n_points);
  for (int i = 0; i < g.n_points; ++i) v[i] = f(g.node(i));
  return v;
}

Tridiag schrodinger_tridiag(const GridSpec& g, const Eigen::VectorXd& v_pot) {
  if (v_pot.size() != g.n_points) throw ContractError("schrodinger_tridiag: size mismatch");
  if (!v_pot.allFinite()) throw ContractError("schrodinger_tridiag: non-finite potential");
  const double inv_dx2 = 1.0 / (g.dx() * g.dx());
  Tridiag t;
  t.diag = v_pot.array() + 2.0 * inv_dx2;
  t.off = -inv_dx2;
  return t;
}

Eigen::MatrixXd discretize_schrodinger(const GridSpec& g, const Eigen::VectorXd& v_pot) {
  const Tridiag t = schrodinger_tridiag(g, v_pot);
  const int n = t.size();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    m(i, i) = t.diag[i];
    if (i + 1 < n) {
      m(i, i + 1) = t.off;
      m(i + 1, i) = t.off;
    }
  }
  return m;
}

Eigen::VectorXd solve_shifted_tridiag(const Tridiag& t, double alpha, double beta,
                                      const Eigen::VectorXd& rhs) {
  const int n = t.size();
  if (rhs.size() != n) throw ContractError("solve_shifted_tridiag: size mismatch");
  Eigen::VectorXd b(n), c(n), x(n);
  const double off = beta * t.off;
  // Thomas with a tiny pivot guard (used by inverse iteration near
  // singular shifts).
  double piv = alpha + beta * t.diag[0];
  if (std::abs(piv) < 1e-300) piv = piv >= 0 ? 1e-300 : -1e-300;
  b[0] = piv;
  x[0] = rhs[0];
  for (int i = 1; i < n; ++i) {
    c[i - 1] = off / b[i - 1];
    double p = alpha + beta * t.diag[i] - c[i - 1] * off;
    if (std::abs(p) < 1e-300) p = p >= 0 ? 1e-300 : -1e-300;
    b[i] = p;
    x[i] = rhs[i] - c[i - 1] * x[i - 1];
  }
  x[n - 1] /= b[n - 1];
  for (int i = n - 2; i >= 0; --i) x[i] = (x[i] - off * x[i + 1]) / b[i];
  return x;
}

Eigen::VectorXd tridiag_apply(const Tridiag& t, const Eigen::VectorXd& u) {
  const int n = t.size();
  if (u.size() != n) throw ContractError("tridiag_apply: size mismatch");
  Eigen::VectorXd y = t.diag.cwiseProduct(u);
  y.head(n - 1) += t.off * u.tail(n - 1);
  y.tail(n - 1) += t.off * u.head(n - 1);
  return y;
}

double dirichlet_form(const GridSpec& g, const Eigen::VectorXd& u) {
  const Tridiag lap = schrodinger_tridiag(g, Eigen::VectorXd::Zero(g.n_points));
  return grid_ip(g, u, tridiag_apply(lap, u));
}

int tridiag_count_below(const Tridiag& t, double x) {
  const int n = t.size();
  const double e2 = t.off * t.off;
  int count = 0;
  double q = t.diag[0] - x;
  if (q < 0) ++count;
  for (int i = 1; i < n; ++i) {
    if (std::abs(q) < 1e-300) q = -1e-300;
    q = t.diag[i] - x - e2 / q;
    if (q < 0) ++count;
  }
  return count;
}

double tridiag_kth_eigenvalue(const Tridiag& t, int k) {
  const int n = t.size();
  if (k < 0 || k >= n) throw ContractError("tridiag_kth_eigenvalue: k out of range");
  double lo = t.diag.minCoeff() - 2.0 * std::abs(t.off);
  double hi = t.diag.maxCoeff() + 2.0 * std::abs(t.off);
  for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max({1.0, std::abs(lo), std::abs(hi)});
       ++it) {
    const double mid = 0.5 * (lo + hi);
    if (tridiag_count_below(t, mid) >= k + 1)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

Eigen::VectorXd tridiag_eigenvector(const GridSpec& g, const Tridiag& t, double lambda) {
  const int n = t.size();
  Rng rng(1u);
  Eigen::VectorXd v = random_unit_vector(rng, n);
  // Offset the shift slightly so the Thomas factorization stays usable.
  const double scale = std::max(1.0, t.diag.cwiseAbs().maxCoeff());
  const double shift = lambda + 1e-12 * scale;
  for (int it = 0; it < 8; ++it) {
    v = solve_shifted_tridiag(t, -shift, 1.0, v);
    v /= v.norm();
  }
  // One Rayleigh-quotient refinement step to settle the direction.
  const double rq = v.dot(t.diag.cwiseProduct(v)) +
                    2.0 * t.off * (v.head(n - 1).dot(v.tail(n - 1)));
  v = solve_shifted_tridiag(t, -(rq + 1e-13 * scale), 1.0, v);
  v /= grid_norm(g, v);
  return v;
}

std::vector<std::pair<double, Eigen::VectorXd>> tridiag_eigs_below(const GridSpec& g,
                                                                   const Tridiag& t,
                                                                   double threshold) {
  const int count = tridiag_count_below(t, threshold);
  std::vector<std::pair<double, Eigen::VectorXd>> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const double lam = tridiag_kth_eigenvalue(t, k);
    out.emplace_back(lam, tridiag_eigenvector(g, t, lam));
  }
  return out;
}

CubicInterpolant::CubicInterpolant(const GridSpec& g, Eigen::VectorXd values)
    : x_lo_(g.x_lo), dx_(g.dx()) {
  if (values.size() != g.n_points) throw ContractError("CubicInterpolant: size mismatch");
  vals_ = Eigen::VectorXd::Zero(g.n_points + 2);
  vals_.segment(1, g.n_points) = values;
}

double CubicInterpolant::operator()(double x) const {
  const int n = static_cast<int>(vals_.size());
  const double s = (x - x_lo_) / dx_;  // node index in the padded array
  if (s <= 0.0 || s >= n - 1) return 0.0;
  int i = static_cast<int>(std::floor(s));
  i = std::clamp(i, 1, n - 3);
  const double u = s - i;
  const double f0 = vals_[i - 1], f1 = vals_[i], f2 = vals_[i + 1], f3 = vals_[i + 2];
  // 4-point Lagrange basis on nodes -1, 0, 1, 2.
  const double w0 = -u * (u - 1.0) * (u - 2.0) / 6.0;
  const double w1 = (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0;
  const double w2 = -(u + 1.0) * u * (u - 2.0) / 2.0;
  const double w3 = (u + 1.0) * u * (u - 1.0) / 6.0;
  return w0 * f0 + w1 * f1 + w2 * f2 + w3 * f3;
}

double CubicInterpolant::derivative(double x) const {
  const int n = static_cast<int>(vals_.size());
  const double s = (x - x_lo_) / dx_;
  if (s <= 0.0 || s >= n - 1) return 0.0;
  int i = static_cast<int>(std::floor(s));
  i = std::clamp(i, 1, n - 3);
  const double u = s - i;
  const double f0 = vals_[i - 1], f1 = vals_[i], f2 = vals_[i + 1], f3 = vals_[i + 2];
  const double w0 = -(3.0 * u * u - 6.0 * u + 2.0) / 6.0;
  const double w1 = (3.0 * u * u - 4.0 * u - 1.0) / 2.0;
  const double w2 = -(3.0 * u * u - 2.0 * u - 2.0) / 2.0;
  const double w3 = (3.0 * u * u - 1.0) / 6.0;
  return (w0 * f0 + w1 * f1 + w2 * f2 + w3 * f3) / dx_;
}

}  // namespace dicho
