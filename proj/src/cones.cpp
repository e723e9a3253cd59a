#include "dicho/cones.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <ostream>

#include <nlohmann/json.hpp>

namespace dicho {

namespace {
constexpr double kBoundaryTol = 1e-12;
constexpr double kProjTol = 1e-10;
}  // namespace

ConeLocation membership(const ConeFunctionalPair& pair, double c, int n,
                        const Eigen::VectorXd& v) {
  if (!(c > 0.0)) throw ContractError("membership: cone parameter must be positive");
  if (!v.allFinite()) throw ContractError("membership: non-finite vector");
  const double ip = pair.eval_plus(n, v);
  const double im = c * pair.eval_minus(n, v);
  const double scale = std::max({std::abs(ip), std::abs(im), 1e-300});
  if (std::abs(ip - im) <= kBoundaryTol * scale) return ConeLocation::Boundary;
  return ip < im ? ConeLocation::Stable : ConeLocation::Unstable;
}

GateReport constants_gate(const ConeFunctionalPair& pair, const ConeParams& params) {
  if (!(pair.c1 > 0.0 && pair.c2 > 0.0 && params.c3 > 0.0 && params.c4 > 0.0))
    throw ContractError("constants_gate: constants must be positive");
  GateReport report;
  report.direction = params.direction;
  const double c1c2 = pair.c1 * pair.c2;
  if (params.direction == Direction::Forward) {
    report.bound = (1.0 / 3.0) * c1c2 * c1c2 * params.c3 / (1.0 + params.c3);
    report.pass = params.c4 < report.bound;
    report.slack = report.bound - params.c4;
  } else {
    report.bound = 3.0 / (c1c2 * c1c2) * (params.c3 + 1.0);
    report.pass = params.c4 > report.bound;
    report.slack = params.c4 - report.bound;
  }
  return report;
}

C1Estimate estimate_c1(const ConeFunctionalPair& pair,
                       const std::vector<std::pair<int, Eigen::VectorXd>>& samples) {
  if (samples.empty()) throw ContractError("estimate_c1: no samples");
  C1Estimate est;
  est.lower = std::numeric_limits<double>::infinity();
  est.upper = 0.0;
  for (const auto& [n, v] : samples) {
    const double nv = v.norm();
    if (!(nv > 0.0)) throw ContractError("estimate_c1: zero vector in samples");
    const double ratio = (pair.eval_minus(n, v) + pair.eval_plus(n, v)) / nv;
    est.lower = std::min(est.lower, ratio);
    est.upper = std::max(est.upper, ratio);
  }
  est.positivity_ok = est.lower > 0.0;
  est.c1 = est.positivity_ok ? std::min(est.lower, 1.0 / est.upper) : 0.0;
  return est;
}

namespace {

// Vector on the cone boundary I^+ = c I^- found by bisection along a random
// 2-plane; nullopt when the plane does not cross the boundary.
std::optional<Eigen::VectorXd> boundary_vector(const ConeFunctionalPair& pair, double c, int n,
                                               int dim, Rng& rng) {
  const Eigen::VectorXd p = random_unit_vector(rng, dim);
  Eigen::VectorXd q = random_unit_vector(rng, dim);
  q -= p * p.dot(q);
  if (q.norm() < 1e-8) return std::nullopt;
  q.normalize();
  auto g = [&](double theta) {
    const Eigen::VectorXd v = std::cos(theta) * p + std::sin(theta) * q;
    return pair.eval_plus(n, v) - c * pair.eval_minus(n, v);
  };
  const int scan = 64;
  double prev_theta = 0.0;
  double prev_g = g(0.0);
  for (int i = 1; i <= scan; ++i) {
    const double theta = M_PI * i / scan;
    const double gi = g(theta);
    if ((prev_g < 0.0 && gi > 0.0) || (prev_g > 0.0 && gi < 0.0)) {
      double lo = prev_theta, hi = theta, glo = prev_g;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        if ((glo < 0.0) == (gm < 0.0)) {
          lo = mid;
          glo = gm;
        } else {
          hi = mid;
        }
      }
      const double theta_star = 0.5 * (lo + hi);
      return std::cos(theta_star) * p + std::sin(theta_star) * q;
    }
    prev_theta = theta;
    prev_g = gi;
  }
  return std::nullopt;
}

}  // namespace

void StepCheckReport::to_jsonl(std::ostream& os) const {
  for (const auto& v : violations) {
    nlohmann::json j{{"n", v.n},     {"sample_id", v.sample_id}, {"inequality", v.inequality},
                     {"lhs", v.lhs}, {"rhs", v.rhs},             {"margin", v.margin}};
    os << j.dump() << "\n";
  }
}

StepCheckReport check_step_inequalities(const OperatorSequence& seq,
                                        const ConeFunctionalPair& pair, const ConeParams& params,
                                        int n_first, int n_last, const SampleSpec& spec) {
  if (n_first >= n_last) throw ContractError("check_step_inequalities: empty index range");
  if (!(params.rate_a > 0.0 && params.rate_a < params.rate_b))
    throw ContractError("check_step_inequalities: require 0 < rate_a < rate_b");
  const int dim = seq.dim();
  const bool forward = params.direction == Direction::Forward;
  if ((seq.direction() == Direction::Forward) != forward)
    throw ContractError("check_step_inequalities: sequence/params direction mismatch");
  const int n_boundary = spec.boundary_per_side >= 0 ? spec.boundary_per_side
                                                     : std::max(1, pair.K);
  Rng rng(spec.seed);
  StepCheckReport report;

  // Steps: forward pairs (n, n+1) with samples at n; backward pairs
  // (n, n-1) with samples at n.
  const int step_lo = forward ? n_first : n_first + 1;
  const int step_hi = forward ? n_last - 1 : n_last;
  for (int n = step_lo; n <= step_hi; ++n) {
    std::vector<Eigen::VectorXd> samples;
    samples.reserve(static_cast<std::size_t>(spec.unit_samples + 2 * n_boundary));
    for (int i = 0; i < spec.unit_samples; ++i) samples.push_back(random_unit_vector(rng, dim));
    for (double c : {params.c3, params.c4})
      for (int i = 0; i < n_boundary; ++i)
        if (auto v = boundary_vector(pair, c, n, dim, rng)) samples.push_back(*v);

    const Eigen::MatrixXd op = seq.at(n);
    const int n_img = forward ? n + 1 : n - 1;
    int sample_id = 0;
    for (const auto& v : samples) {
      const Eigen::VectorXd w = op * v;
      if (forward) {
        // minus: conditioned on B_n v landing in the stable cone at n+1
        if (membership(pair, params.c3, n_img, w) != ConeLocation::Unstable) {
          ++report.checks_minus;
          const double lhs = pair.eval_minus(n_img, w);
          const double rhs = params.rate_a * pair.eval_minus(n, v);
          const double margin = relative_margin(lhs, rhs);
          if (margin < -spec.rel_tol)
            report.violations.push_back({n, sample_id, "minus", lhs, rhs, margin});
        }
        // plus: conditioned on v lying in the unstable cone at n
        if (membership(pair, params.c4, n, v) != ConeLocation::Stable) {
          ++report.checks_plus;
          const double lhs = params.rate_b * pair.eval_plus(n, v);
          const double rhs = pair.eval_plus(n_img, w);
          const double margin = relative_margin(lhs, rhs);
          if (margin < -spec.rel_tol)
            report.violations.push_back({n, sample_id, "plus", rhs, lhs, margin});
        }
      } else {
        // minus: conditioned on v lying in the stable cone at n
        if (membership(pair, params.c4, n, v) != ConeLocation::Unstable) {
          ++report.checks_minus;
          const double lhs = pair.eval_minus(n, v);
          const double rhs = params.rate_a * pair.eval_minus(n_img, w);
          const double margin = relative_margin(lhs, rhs);
          if (margin < -spec.rel_tol)
            report.violations.push_back({n, sample_id, "minus", lhs, rhs, margin});
        }
        // plus: conditioned on A_n v landing in the unstable cone at n-1
        if (membership(pair, params.c3, n_img, w) != ConeLocation::Stable) {
          ++report.checks_plus;
          const double lhs = params.rate_b * pair.eval_plus(n_img, w);
          const double rhs = pair.eval_plus(n, v);
          const double margin = relative_margin(lhs, rhs);
          if (margin < -spec.rel_tol)
            report.violations.push_back({n, sample_id, "plus", rhs, lhs, margin});
        }
      }
      ++sample_id;
    }
  }
  return report;
}

namespace {

// z_k = normalized projection of alpha_k onto the joint kernel of the other
// covectors; <alpha_j, z_k> = 0 for j != k by construction.
std::vector<Eigen::VectorXd> cone_frame_vectors(const std::vector<Eigen::VectorXd>& alphas) {
  const int K = static_cast<int>(alphas.size());
  if (K == 0) throw ContractError("subspace_in_cone: empty covector family");
  const int dim = static_cast<int>(alphas.front().size());
  for (const auto& a : alphas)
    if (a.size() != dim) throw ContractError("subspace_in_cone: covector dimension mismatch");
  std::vector<Eigen::VectorXd> zs;
  zs.reserve(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    Eigen::VectorXd z = alphas[static_cast<std::size_t>(k)];
    if (K > 1) {
      Eigen::MatrixXd others(dim, K - 1);
      int c = 0;
      for (int j = 0; j < K; ++j)
        if (j != k) others.col(c++) = alphas[static_cast<std::size_t>(j)];
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(others);
      Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(dim, K - 1);
      z -= q * (q.transpose() * z);
    }
    const double norm = z.norm();
    if (norm < kProjTol)
      throw DegeneracyError("subspace_in_cone: covector " + std::to_string(k) +
                            " is numerically dependent on the others");
    zs.push_back(z / norm);
  }
  return zs;
}

}  // namespace

double measure_c6(const std::vector<Eigen::VectorXd>& alphas) {
  // min_k dist(alpha_k, span of the others); valid because on each face
  // b_k = +-1 of the max-norm sphere, ||sum b_j alpha_j|| >= that distance.
  const auto zs = cone_frame_vectors(alphas);
  double c6 = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < alphas.size(); ++k)
    c6 = std::min(c6, zs[k].dot(alphas[k]));
  return c6;
}

Subspace subspace_in_cone(const std::vector<Eigen::VectorXd>& alphas, double c6,
                          CovectorSide side) {
  (void)side;  // construction is identical on both sides
  if (!(c6 > 0.0)) throw ContractError("subspace_in_cone: c6 must be positive");
  const auto zs = cone_frame_vectors(alphas);
  const int dim = static_cast<int>(zs.front().size());
  Eigen::MatrixXd frame(dim, static_cast<int>(zs.size()));
  for (std::size_t k = 0; k < zs.size(); ++k) {
    const double pairing = zs[k].dot(alphas[k]);
    if (pairing < 0.5 * c6)
      throw ContractError("subspace_in_cone: pairing <alpha_k, z_k> = " +
                          std::to_string(pairing) + " below c6/2; uniform independence with c6=" +
                          std::to_string(c6) + " does not hold");
    frame.col(static_cast<int>(k)) = zs[k];
  }
  return Subspace(frame);
}

double kspace_c_threshold(double c1, double c2, double c6, int K, CovectorSide side) {
  if (!(c1 > 0.0 && c2 > 0.0 && c6 > 0.0 && K > 0))
    throw ContractError("kspace_c_threshold: constants must be positive");
  const double base = c1 * c2 * c6 / (2.0 * K);
  return side == CovectorSide::Minus ? 1.0 / base : base;
}

namespace {

struct CertificateFunctionalData {
  int first = 0, last = 0, K = 0;
  double rate_a = 0.0, rate_b = 0.0;
  std::vector<Projections> proj;  // per index
  // Scaled unstable transitions F[n][m] ~ B(n, m) U_m for m <= n, stored as
  // QR factorizations of the scaled matrices plus their log scales.
  std::vector<std::vector<Eigen::ColPivHouseholderQR<Eigen::MatrixXd>>> unstable_qr;
  std::vector<std::vector<double>> unstable_logscale;
  std::vector<Eigen::MatrixXd> ops;  // B_n for n in [first, last)
  std::vector<Subspace> unstable;
};

}  // namespace

ConeFunctionalPair functionals_from_certificate(const DichotomyCertificate& cert,
                                                const OperatorSequence& seq) {
  if (cert.direction != Direction::Forward || seq.direction() != Direction::Forward)
    throw ContractError("functionals_from_certificate: forward systems only");
  const int window = cert.window_size();
  if (window < 2) throw ContractError("functionals_from_certificate: window too small");

  auto data = std::make_shared<CertificateFunctionalData>();
  data->first = cert.first;
  data->last = cert.last;
  data->rate_a = cert.rate_a;
  data->rate_b = cert.rate_b;
  data->K = cert.unstable.front().dim();
  data->unstable = cert.unstable;
  for (int i = 0; i < window; ++i)
    data->proj.push_back(build_projections(cert.stable[static_cast<std::size_t>(i)],
                                           cert.unstable[static_cast<std::size_t>(i)]));
  for (int n = cert.first; n < cert.last; ++n) data->ops.push_back(seq.at(n));

  // Propagate each unstable fibre forward, keeping scaled QR factors of
  // B(n, m) U_m for every m <= n in the window.
  data->unstable_qr.resize(static_cast<std::size_t>(window));
  data->unstable_logscale.resize(static_cast<std::size_t>(window));
  for (int m = cert.first; m <= cert.last; ++m) {
    Eigen::MatrixXd f = cert.unstable_at(m).basis();
    double logscale = 0.0;
    for (int n = m; n <= cert.last; ++n) {
      if (n > m) {
        f = data->ops[static_cast<std::size_t>(n - 1 - cert.first)] * f;
        const double s = f.norm();
        if (!(s > 0.0))
          throw ConditioningError("functionals_from_certificate: unstable transition vanished");
        f /= s;
        logscale += std::log(s);
      }
      if (data->K > 0) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(f);
        if (qr.rank() < data->K)
          throw ConditioningError(
              "functionals_from_certificate: unstable transition numerically singular (m=" +
              std::to_string(m) + ", n=" + std::to_string(n) + ")");
        data->unstable_qr[static_cast<std::size_t>(n - cert.first)].push_back(std::move(qr));
        data->unstable_logscale[static_cast<std::size_t>(n - cert.first)].push_back(logscale);
      }
    }
  }

  ConeFunctionalPair pair;
  pair.side = CovectorSide::Plus;
  pair.K = data->K;

  pair.eval_plus = [data](int n, const Eigen::VectorXd& v) -> double {
    if (n < data->first || n > data->last)
      throw ContractError("certificate functionals: index outside window");
    if (data->K == 0) return 0.0;
    const int i = n - data->first;
    const Eigen::VectorXd pu = data->proj[static_cast<std::size_t>(i)].pi_u * v;
    double best = 0.0;
    // Entry j of the stored lists corresponds to start index m = first + j
    // for j <= i (fibres propagated from m up to n).
    const auto& qrs = data->unstable_qr[static_cast<std::size_t>(i)];
    const auto& scales = data->unstable_logscale[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < qrs.size(); ++j) {
      const int m = data->first + static_cast<int>(j);
      const Eigen::VectorXd coords = qrs[j].solve(pu);
      const double term =
          std::exp((n - m) * std::log(data->rate_b) - scales[j]) * coords.norm();
      best = std::max(best, term);
    }
    return best;
  };

  pair.eval_minus = [data](int n, const Eigen::VectorXd& v) -> double {
    if (n < data->first || n > data->last)
      throw ContractError("certificate functionals: index outside window");
    const int i = n - data->first;
    Eigen::VectorXd s = data->proj[static_cast<std::size_t>(i)].pi_s * v;
    double best = s.norm();
    double logscale = 0.0;
    Eigen::VectorXd cur = s;
    const double nrm0 = std::max(best, 1e-300);
    cur /= nrm0;
    logscale = std::log(nrm0);
    for (int m = n + 1; m <= data->last; ++m) {
      cur = data->ops[static_cast<std::size_t>(m - 1 - data->first)] * cur;
      const double nn = cur.norm();
      if (!(nn > 0.0)) break;
      cur /= nn;
      logscale += std::log(nn);
      best = std::max(best, std::exp((n - m) * std::log(data->rate_a) + logscale));
    }
    return best;
  };

  pair.covector = [data](int k, int n) -> Eigen::VectorXd {
    if (k < 0 || k >= data->K) throw ContractError("certificate functionals: covector index");
    if (n < data->first || n > data->last)
      throw ContractError("certificate functionals: index outside window");
    const int i = n - data->first;
    // <alpha_k, v> = k-th coordinate of the oblique unstable component.
    return data->proj[static_cast<std::size_t>(i)].pi_u.transpose() *
           data->unstable[static_cast<std::size_t>(i)].basis().col(k);
  };

  // Measure the sandwich constants on a deterministic sample set.
  {
    Rng rng(20240315u);
    const int dim = seq.dim();
    double lo_norm = std::numeric_limits<double>::infinity(), hi_norm = 0.0;
    double lo_cov = std::numeric_limits<double>::infinity(), hi_cov = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
      const int n = data->first + static_cast<int>(rng() % static_cast<std::uint64_t>(window));
      const Eigen::VectorXd v = random_unit_vector(rng, dim);
      const double sum = pair.eval_minus(n, v) + pair.eval_plus(n, v);
      lo_norm = std::min(lo_norm, sum);
      hi_norm = std::max(hi_norm, sum);
      if (data->K > 0) {
        const double ip = pair.eval_plus(n, v);
        double mx = 0.0;
        for (int k = 0; k < data->K; ++k)
          mx = std::max(mx, std::abs(pair.covector(k, n).dot(v)));
        if (mx > 1e-300 && ip > 1e-300) {
          lo_cov = std::min(lo_cov, ip / mx);
          hi_cov = std::max(hi_cov, ip / mx);
        }
      }
    }
    pair.c1 = lo_norm > 0.0 ? std::min(lo_norm, 1.0 / hi_norm) : 0.0;
    pair.c2 = data->K > 0 && hi_cov > 0.0 ? std::min(lo_cov, 1.0 / hi_cov) : 1.0;
  }
  return pair;
}

}  // namespace dicho
