#include "dicho/avalanche.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace dicho {

namespace {

// Sphere distance tolerant to a collapsed image: measured on the surviving
// principal angles only.
double restricted_phi(const Subspace& z, const Subspace& y) {
  if (z.dim() == 0 || y.dim() == 0) return 0.0;
  const auto angles = principal_angles(z, y);
  return 2.0 * (1.0 - std::cos(angles.back()));
}

// Orthonormalized image B * Y, with rank detection.
std::pair<Subspace, bool> image_subspace(const Eigen::MatrixXd& op, const Subspace& y) {
  if (y.dim() == 0) return {Subspace::zero(y.ambient_dim()), false};
  const Eigen::MatrixXd img = op * y.basis();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(img);
  qr.setThreshold(1e-10);
  const int rank = static_cast<int>(qr.rank());
  if (rank == 0) return {Subspace::zero(y.ambient_dim()), true};
  Eigen::MatrixXd q =
      qr.householderQ() * Eigen::MatrixXd::Identity(y.ambient_dim(), rank);
  return {Subspace::from_orthonormal(q), rank < y.dim()};
}

}  // namespace

AvalancheSystem build_avalanche(const OperatorSequence& seq, double a, double b, int first,
                                int last) {
  if (seq.direction() != Direction::Forward)
    throw ContractError("build_avalanche: forward sequences only");
  if (first > last) throw ContractError("build_avalanche: empty window");
  AvalancheSystem sys{seq, a, b, 0, 0, first, last, {}, {}, {}, {}, {}, {}, {}, {}, 0.0};
  for (int n = first; n <= last; ++n) {
    auto [ys, yu] = split_spectrum(seq.at(n), a, b);
    if (n == first) {
      sys.d_s = ys.dim();
      sys.d_u = yu.dim();
    } else if (ys.dim() != sys.d_s || yu.dim() != sys.d_u) {
      throw GapViolationError("build_avalanche: splitting dimensions change at n=" +
                              std::to_string(n));
    }
    const Eigen::MatrixXd op = seq.at(n);
    auto [zs, cs] = image_subspace(op, ys);
    auto [zu, cu] = image_subspace(op, yu);
    sys.y_s.push_back(std::move(ys));
    sys.y_u.push_back(std::move(yu));
    sys.z_s.push_back(std::move(zs));
    sys.z_u.push_back(std::move(zu));
    sys.collapsed_s.push_back(cs);
    sys.collapsed_u.push_back(cu);
  }
  for (int n = first; n < last; ++n) {
    const std::size_t i = static_cast<std::size_t>(n - first);
    const double ds = restricted_phi(sys.z_s[i], sys.y_s[i + 1]);
    const double du = restricted_phi(sys.z_u[i], sys.y_u[i + 1]);
    sys.delta_s.push_back(ds);
    sys.delta_u.push_back(du);
    sys.delta = std::max({sys.delta, ds, du});
  }
  return sys;
}

ConeFunctionalPair avalanche_functionals(const AvalancheSystem& sys) {
  auto ys = std::make_shared<std::vector<Subspace>>(sys.y_s);
  auto yu = std::make_shared<std::vector<Subspace>>(sys.y_u);
  const int first = sys.first;
  const int last = sys.last;
  auto fibre = [first, last](const std::vector<Subspace>& fam, int n) -> const Subspace& {
    if (n < first || n > last)
      throw ContractError("avalanche functionals: index outside window");
    return fam[static_cast<std::size_t>(n - first)];
  };
  ConeFunctionalPair pair;
  pair.side = CovectorSide::Plus;
  pair.K = sys.d_u;
  pair.c1 = 1.0 / std::sqrt(2.0);
  pair.c2 = sys.d_u > 0 ? 1.0 / std::sqrt(static_cast<double>(sys.d_u)) : 1.0;
  pair.eval_minus = [ys, fibre](int n, const Eigen::VectorXd& v) {
    const Subspace& s = fibre(*ys, n);
    return s.dim() == 0 ? 0.0 : (s.basis().transpose() * v).norm();
  };
  pair.eval_plus = [yu, fibre](int n, const Eigen::VectorXd& v) {
    const Subspace& s = fibre(*yu, n);
    return s.dim() == 0 ? 0.0 : (s.basis().transpose() * v).norm();
  };
  pair.covector = [yu, fibre](int k, int n) -> Eigen::VectorXd {
    const Subspace& s = fibre(*yu, n);
    if (k < 0 || k >= s.dim()) throw ContractError("avalanche functionals: covector index");
    return s.basis().col(k);
  };
  return pair;
}

AvalancheCertificateResult avalanche_certificate(const AvalancheSystem& sys, double epsilon,
                                                 const AvalancheCertificateOptions& opts) {
  if (!(epsilon > 0.0)) throw ContractError("avalanche_certificate: epsilon must be positive");
  AvalancheCertificateResult result;
  result.epsilon = epsilon;

  ConeFunctionalPair pair = avalanche_functionals(sys);
  ConeParams params;
  params.direction = Direction::Forward;
  params.c3 = opts.c3;
  const double gate_bound =
      (1.0 / 3.0) * std::pow(pair.c1 * pair.c2, 2) * params.c3 / (1.0 + params.c3);
  params.c4 = opts.c4 > 0.0 ? opts.c4 : 0.5 * std::min(gate_bound, 1.0);
  params.rate_a = sys.a + epsilon;
  params.rate_b = sys.b - epsilon;
  result.params = params;
  result.gate = constants_gate(pair, params);

  const double delta = sys.delta;
  result.eps_growth =
      sys.b * (1.0 - std::sqrt(std::max(0.0, 1.0 - delta))) + sys.a * std::sqrt(delta) / params.c4;
  result.eps_contract =
      delta < params.c3 ? sys.a * (1.0 / (1.0 - delta / params.c3) - 1.0)
                        : std::numeric_limits<double>::infinity();
  if (result.eps_growth > epsilon)
    throw HypothesisError(
        "avalanche_certificate: measured delta too large for epsilon; limiting formula "
        "b(1-sqrt(1-delta)) + a sqrt(delta)/c4 = " +
        std::to_string(result.eps_growth));
  if (result.eps_contract > epsilon)
    throw HypothesisError(
        "avalanche_certificate: measured delta too large for epsilon; limiting formula "
        "a((1-delta/c3)^{-1}-1) = " +
        std::to_string(result.eps_contract));
  if (!(params.rate_a < params.rate_b))
    throw HypothesisError("avalanche_certificate: a+epsilon >= b-epsilon; no gap left");

  DichotomyCertificate cert;
  cert.direction = Direction::Forward;
  cert.first = sys.first;
  cert.last = sys.last;
  cert.rate_a = params.rate_a;
  cert.rate_b = params.rate_b;

  const int K = sys.d_u;
  const int horizon =
      opts.horizon > 0 ? opts.horizon : std::max(4, auto_horizon(sys.seq, K, sys.first));
  for (int n = sys.first; n <= sys.last; ++n)
    cert.stable.push_back(stable_subspace_forward(sys.seq, K, n, horizon));
  cert.unstable = unstable_family_forward(sys.seq, sys.y_u_at(sys.first), sys.first, sys.last);

  double proj_sup = 0.0;
  for (int i = 0; i <= sys.last - sys.first; ++i) {
    const Projections p = build_projections(cert.stable[static_cast<std::size_t>(i)],
                                            cert.unstable[static_cast<std::size_t>(i)]);
    proj_sup = std::max(proj_sup, p.norm_s + p.norm_u);
  }
  cert.proj_bound = proj_sup;

  CertifyOptions copts;
  copts.rate_rel_tol = 1e-9;
  // Proof-side constant for the decay bound, reported next to the measured C.
  copts.proof_C_bound = (1.0 + params.c3) / (pair.c1 * pair.c1);
  result.report = certify(sys.seq, cert, copts);
  cert.decay_C = result.report.measured_C;

  for (int n = sys.first; n <= sys.last; ++n) {
    const Subspace& xs = cert.stable[static_cast<std::size_t>(n - sys.first)];
    result.phi_xs_ys.push_back(xs.dim() > 0 && sys.y_s_at(n).dim() == xs.dim()
                                   ? sphere_distance(xs, sys.y_s_at(n))
                                   : restricted_phi(xs, sys.y_s_at(n)));
  }
  result.certificate = std::move(cert);
  return result;
}

}  // namespace dicho
