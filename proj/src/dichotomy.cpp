#include "dicho/dichotomy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <set>

#include <nlohmann/json.hpp>

namespace dicho {

namespace {

constexpr double kGapTol = 1e-8;
constexpr double kCollapseTol = 1e-10;

// Ordered product accumulator with norm rescaling so that long products
// never overflow; only singular-value ratios and log-magnitudes are used.
struct ScaledProduct {
  Eigen::MatrixXd m;
  double logscale = 0.0;

  explicit ScaledProduct(int dim) : m(Eigen::MatrixXd::Identity(dim, dim)) {}

  void apply_left(const Eigen::MatrixXd& op) {
    m = op * m;
    rescale();
  }
  void apply_right(const Eigen::MatrixXd& op) {
    m = m * op;
    rescale();
  }
  void rescale() {
    const double s = m.norm();
    if (s <= 0.0) return;  // zero product stays zero
    m /= s;
    logscale += std::log(s);
  }
};

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const int n = static_cast<int>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double det = n * sxx - sx * sx;
  LineFit f;
  if (std::abs(det) < 1e-300) return f;
  f.slope = (n * sxy - sx * sy) / det;
  f.intercept = (sy * sxx - sx * sxy) / det;
  return f;
}

Eigen::JacobiSVD<Eigen::MatrixXd> svd_of(const Eigen::MatrixXd& m, unsigned options = 0) {
  return Eigen::JacobiSVD<Eigen::MatrixXd>(m, options);
}

double operator_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  return svd_of(m).singularValues()(0);
}

Subspace extract_stable(const OperatorSequence& seq, int K, int n, int horizon,
                        double* gap_out) {
  const int d = seq.dim();
  if (K < 0 || K > d) throw ContractError("stable subspace: K out of range");
  if (horizon < 1) throw ContractError("stable subspace: horizon must be >= 1");
  ScaledProduct prod(d);
  if (seq.direction() == Direction::Forward) {
    for (int k = n; k < n + horizon; ++k) prod.apply_left(seq.at(k));
  } else {
    for (int k = n + horizon; k > n; --k) prod.apply_left(seq.at(k));
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(prod.m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd sv = svd.singularValues();
  double gap = 1.0;
  if (K > 0 && K < d) {
    const double hi = sv(K - 1);
    gap = hi > 0.0 ? (hi - sv(K)) / hi : 0.0;
    if (gap < kGapTol)
      throw GapViolationError("stable subspace: singular-value gap at position " +
                              std::to_string(K) + " is " + std::to_string(gap) +
                              " (dichotomy hypothesis violated or horizon too short)");
  }
  if (gap_out) *gap_out = gap;
  if (seq.direction() == Direction::Forward) {
    // Smallest d-K right singular directions.
    if (K == d) return Subspace::zero(d);
    return Subspace::from_orthonormal(svd.matrixV().rightCols(d - K));
  }
  // Backward: K dominant left singular directions (the reachable fibre).
  if (K == 0) return Subspace::zero(d);
  return Subspace::from_orthonormal(svd.matrixU().leftCols(K));
}

Subspace stable_with_diag(const OperatorSequence& seq, int K, int n, int horizon,
                          HorizonDiagnostics* diag) {
  double gap = 0.0;
  Subspace s = extract_stable(seq, K, n, horizon, &gap);
  if (diag) {
    diag->horizon = horizon;
    diag->singular_gap = gap;
    diag->inter_horizon_distance = 0.0;
    if (s.dim() >= 1 && s.dim() < seq.dim()) {
      Subspace next = extract_stable(seq, K, n, horizon + 1, nullptr);
      diag->inter_horizon_distance = sphere_distance(s, next);
    } else if (s.dim() == seq.dim()) {
      diag->inter_horizon_distance = 0.0;
    }
  }
  return s;
}

}  // namespace

const Subspace& DichotomyCertificate::stable_at(int n) const {
  if (n < first || n > last) throw ContractError("certificate: index outside window");
  return stable[static_cast<std::size_t>(n - first)];
}

const Subspace& DichotomyCertificate::unstable_at(int n) const {
  if (n < first || n > last) throw ContractError("certificate: index outside window");
  return unstable[static_cast<std::size_t>(n - first)];
}

Subspace stable_subspace_forward(const OperatorSequence& seq, int K, int n, int horizon,
                                 HorizonDiagnostics* diag) {
  if (seq.direction() != Direction::Forward)
    throw ContractError("stable_subspace_forward: sequence is not forward");
  return stable_with_diag(seq, K, n, horizon, diag);
}

Subspace stable_subspace_backward(const OperatorSequence& seq, int K, int n, int horizon,
                                  HorizonDiagnostics* diag) {
  if (seq.direction() != Direction::Backward)
    throw ContractError("stable_subspace_backward: sequence is not backward");
  return stable_with_diag(seq, K, n, horizon, diag);
}

int auto_horizon(const OperatorSequence& seq, int K, int n, double tol, int cap) {
  Subspace prev = extract_stable(seq, K, n, 1, nullptr);
  if (prev.dim() == 0 || prev.dim() == seq.dim()) return 1;
  for (int h = 2; h <= cap; ++h) {
    Subspace cur = extract_stable(seq, K, n, h, nullptr);
    if (sphere_distance(prev, cur) < tol) return h - 1;
    prev = cur;
  }
  return cap;
}

std::vector<Subspace> unstable_family_forward(const OperatorSequence& seq, const Subspace& seed,
                                              int first, int last) {
  if (seq.direction() != Direction::Forward)
    throw ContractError("unstable_family_forward: sequence is not forward");
  if (seed.ambient_dim() != seq.dim())
    throw ContractError("unstable_family_forward: seed dimension mismatch");
  if (first > last) throw ContractError("unstable_family_forward: empty window");
  std::vector<Subspace> family;
  family.reserve(static_cast<std::size_t>(last - first + 1));
  family.push_back(seed);
  Eigen::MatrixXd frame = seed.basis();
  for (int n = first; n < last; ++n) {
    Eigen::MatrixXd image = seq.at(n) * frame;
    if (frame.cols() > 0) {
      const double smin = svd_of(image).singularValues().minCoeff();
      if (smin < kCollapseTol)
        throw CollapseError("unstable_family_forward: propagated frame rank-deficient at n=" +
                            std::to_string(n) + " (sigma_min=" + std::to_string(smin) + ")");
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(image);
    frame = qr.householderQ() * Eigen::MatrixXd::Identity(image.rows(), image.cols());
    family.push_back(Subspace::from_orthonormal(frame));
  }
  return family;
}

Subspace unstable_subspace_forward(const OperatorSequence& seq, const Subspace& seed, int n) {
  return unstable_family_forward(seq, seed, 0, n).back();
}

std::vector<Subspace> unstable_family_backward(const OperatorSequence& seq,
                                               const std::vector<Eigen::VectorXd>& covectors0,
                                               int first, int last) {
  if (seq.direction() != Direction::Backward)
    throw ContractError("unstable_family_backward: sequence is not backward");
  if (first < 0 || first > last) throw ContractError("unstable_family_backward: bad window");
  const int d = seq.dim();
  const int K = static_cast<int>(covectors0.size());
  for (const auto& a : covectors0)
    if (a.size() != d) throw ContractError("unstable_family_backward: covector dimension");

  auto kernel_of = [d](const Eigen::MatrixXd& constraints) {
    if (constraints.rows() == 0) return Subspace(Eigen::MatrixXd::Identity(d, d));
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(constraints, Eigen::ComputeFullV);
    const Eigen::VectorXd sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv(0) : 0.0;
    const double tol = std::max(1e-12 * smax, 1e-300);
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
      if (sv(i) > tol) ++rank;
    if (rank == d) throw DegeneracyError("unstable_family_backward: constraint map has no kernel");
    return Subspace::from_orthonormal(svd.matrixV().rightCols(d - rank));
  };

  Eigen::MatrixXd c0(K, d);
  for (int k = 0; k < K; ++k) c0.row(k) = covectors0[static_cast<std::size_t>(k)].transpose();
  std::vector<Subspace> all;
  all.push_back(kernel_of(c0));
  for (int n = 1; n <= last; ++n) {
    const Subspace& prev = all.back();
    const Subspace complement = prev.orthogonal_complement();
    // X_u(n) = {v : A_n v in X_u(n-1)} = ker(W^T A_n), W spanning the
    // complement of X_u(n-1).
    Eigen::MatrixXd constraints = complement.basis().transpose() * seq.at(n);
    Subspace next = kernel_of(constraints);
    if (next.codim() > K)
      throw DegeneracyError("unstable_family_backward: preimage codimension " +
                            std::to_string(next.codim()) + " exceeds K=" + std::to_string(K));
    all.push_back(std::move(next));
  }
  return {all.begin() + first, all.begin() + last + 1};
}

Subspace unstable_subspace_backward(const OperatorSequence& seq,
                                    const std::vector<Eigen::VectorXd>& covectors0, int n) {
  return unstable_family_backward(seq, covectors0, n, n).front();
}

Projections build_projections(const Subspace& stable, const Subspace& unstable) {
  const int d = stable.ambient_dim();
  if (unstable.ambient_dim() != d) throw ContractError("build_projections: ambient mismatch");
  if (stable.dim() + unstable.dim() != d)
    throw ContractError("build_projections: dimensions do not sum to ambient");
  Eigen::MatrixXd t(d, d);
  t.leftCols(stable.dim()) = stable.basis();
  t.rightCols(unstable.dim()) = unstable.basis();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(t);
  const double smin = svd.singularValues()(d - 1);
  const double smax = svd.singularValues()(0);
  if (!(smin > 0.0) || smax / smin > 1e12)
    throw TransversalityError("build_projections: combined basis condition number " +
                              std::to_string(smin > 0 ? smax / smin
                                                      : std::numeric_limits<double>::infinity()));
  Eigen::MatrixXd t_inv = t.partialPivLu().inverse();
  Eigen::MatrixXd selector = Eigen::MatrixXd::Zero(d, d);
  selector.topLeftCorner(stable.dim(), stable.dim()).setIdentity();
  Projections p;
  p.pi_s = t * selector * t_inv;
  p.pi_u = Eigen::MatrixXd::Identity(d, d) - p.pi_s;
  p.norm_s = operator_norm(p.pi_s);
  p.norm_u = operator_norm(p.pi_u);
  return p;
}

bool CertifyReport::pass() const {
  return std::all_of(items.begin(), items.end(), [](const CertifyItem& i) { return i.pass; });
}

void CertifyReport::print(std::ostream& os) const {
  for (const auto& item : items) {
    os << (item.pass ? "PASS" : "FAIL") << " " << item.name << ": " << item.detail
       << " (measured " << item.measured << ", margin " << item.margin << ")\n";
  }
  os << "measured C = " << measured_C << ", rates (" << measured_rate_a << ", "
     << measured_rate_b << ")";
  if (proof_C_bound > 0.0) os << ", proof-side C bound " << proof_C_bound;
  os << "\n";
}

CertifyReport certify(const OperatorSequence& seq, const DichotomyCertificate& cert,
                      const CertifyOptions& options) {
  const int d = seq.dim();
  const int first = cert.first;
  const int last = cert.last;
  const int window = cert.window_size();
  if (window < 2) throw ContractError("certify: window must contain at least 2 indices");
  if (static_cast<int>(cert.stable.size()) != window ||
      static_cast<int>(cert.unstable.size()) != window)
    throw ContractError("certify: certificate families do not match the window");
  const double a = cert.rate_a;
  const double b = cert.rate_b;
  if (!(0.0 < a && a < b)) throw ContractError("certify: require 0 < rate_a < rate_b");
  const bool forward = cert.direction == Direction::Forward;
  if ((seq.direction() == Direction::Forward) != forward)
    throw ContractError("certify: sequence/certificate direction mismatch");

  // Which offsets m-n to visit for each n: everything if it fits the pair
  // budget, otherwise a dyadic subsample (cocycle redundancy makes the full
  // sweep unnecessary).
  std::set<int> offsets;
  const long full_pairs = static_cast<long>(window) * (window + 1) / 2;
  if (full_pairs <= options.max_pairs) {
    for (int h = 0; h < window; ++h) offsets.insert(h);
  } else {
    offsets.insert(0);
    offsets.insert(1);
    for (int h = 2; h < window; h *= 2) {
      offsets.insert(h);
      if (h + 1 < window) offsets.insert(h + 1);
    }
    offsets.insert(window - 1);
  }

  std::vector<Projections> projections;
  projections.reserve(static_cast<std::size_t>(window));
  for (int i = 0; i < window; ++i)
    projections.push_back(build_projections(cert.stable[static_cast<std::size_t>(i)],
                                            cert.unstable[static_cast<std::size_t>(i)]));

  double max_commut = 0.0;
  double proj_sup = 0.0;
  for (const auto& p : projections) proj_sup = std::max(proj_sup, p.norm_s + p.norm_u);
  double min_invert = std::numeric_limits<double>::infinity();
  double log_C_decay = -std::numeric_limits<double>::infinity();
  double log_C_growth = -std::numeric_limits<double>::infinity();
  // Per-offset extremes of log norms, for the rate fits.
  std::map<int, double> dec_h;  // max over n of log ||restricted contraction||
  std::map<int, double> gro_h;  // min over n of log (restricted expansion)

  const int sdim = cert.stable.front().dim();
  const int udim = cert.unstable.front().dim();

  for (int n = first; n <= last; ++n) {
    ScaledProduct prod(d);
    for (int m = n; m <= last; ++m) {
      if (m > n) {
        if (forward)
          prod.apply_left(seq.at(m - 1));
        else
          prod.apply_right(seq.at(m));
      }
      if (!offsets.count(m - n)) continue;
      const int h = m - n;
      const Projections& pn = projections[static_cast<std::size_t>(n - first)];
      const Projections& pm = projections[static_cast<std::size_t>(m - first)];
      const Eigen::MatrixXd& P = prod.m;
      const double pnorm = std::max(P.norm(), 1e-300);
      // (1) commutation, scale-invariant residual
      const Eigen::MatrixXd resid =
          forward ? (P * pn.pi_s - pm.pi_s * P).eval() : (P * pm.pi_s - pn.pi_s * P).eval();
      max_commut = std::max(max_commut, resid.norm() / pnorm);

      if (forward) {
        if (sdim > 0) {
          const Eigen::MatrixXd ps = P * cert.stable_at(n).basis();
          const double smax = operator_norm(ps);
          const double logv = prod.logscale + std::log(std::max(smax, 1e-300));
          log_C_decay = std::max(log_C_decay, logv - h * std::log(a));
          auto it = dec_h.find(h);
          dec_h[h] = it == dec_h.end() ? logv : std::max(it->second, logv);
        }
        if (udim > 0) {
          const Eigen::MatrixXd pu = P * cert.unstable_at(n).basis();
          Eigen::JacobiSVD<Eigen::MatrixXd> svd(pu);
          const double smin = svd.singularValues().minCoeff();
          const double smax = svd.singularValues().maxCoeff();
          min_invert = std::min(min_invert, smax > 0 ? smin / smax : 0.0);
          const double logv = prod.logscale + std::log(std::max(smin, 1e-300));
          log_C_growth = std::max(log_C_growth, h * std::log(b) - logv);
          auto it = gro_h.find(h);
          gro_h[h] = it == gro_h.end() ? logv : std::min(it->second, logv);
        }
      } else {
        // Backward: stable fibres map down invertibly, unstable contract.
        if (sdim > 0) {
          const Eigen::MatrixXd ps = P * cert.stable_at(m).basis();
          Eigen::JacobiSVD<Eigen::MatrixXd> svd(ps);
          const double smin = svd.singularValues().minCoeff();
          const double smax = svd.singularValues().maxCoeff();
          min_invert = std::min(min_invert, smax > 0 ? smin / smax : 0.0);
          // ||A(n,m)^{-1} v|| <= C a^{m-n} on X_s(n): C = a^{-h}/sigma_min.
          const double logv = -(prod.logscale + std::log(std::max(smin, 1e-300)));
          log_C_decay = std::max(log_C_decay, logv - h * std::log(a));
          auto it = dec_h.find(h);
          dec_h[h] = it == dec_h.end() ? logv : std::max(it->second, logv);
        }
        if (udim > 0) {
          const Eigen::MatrixXd pu = P * cert.unstable_at(m).basis();
          const double smax = operator_norm(pu);
          // ||A(n,m) w|| <= C b^{-h} on X_u(m): C = sigma_max b^{h}.
          const double logv = prod.logscale + std::log(std::max(smax, 1e-300));
          log_C_growth = std::max(log_C_growth, logv + h * std::log(b));
          auto it = gro_h.find(h);
          gro_h[h] = it == gro_h.end() ? logv : std::max(it->second, logv);
        }
      }
    }
  }

  // Rate fits. Forward: stable slope vs log a (<=), unstable slope vs log b
  // (>=). Backward: the fitted quantities are the inverse-restriction norms,
  // so the same comparisons apply after the sign conventions above.
  auto fit_of = [](const std::map<int, double>& data) {
    std::vector<double> xs, ys;
    for (const auto& [h, v] : data) {
      xs.push_back(h);
      ys.push_back(v);
    }
    return fit_line(xs, ys);
  };

  CertifyReport report;
  report.proof_C_bound = options.proof_C_bound;

  // Sign conventions: dec_h stores log restricted-contraction norms in both
  // directions (slope approx log a); gro_h stores log expansion norms
  // forward (slope approx log b) and log contraction norms backward
  // (slope approx -log b).
  double rate_a_meas = 0.0, rate_b_meas = 0.0;
  if (dec_h.size() >= 2) {
    const LineFit f = fit_of(dec_h);
    rate_a_meas = std::exp(f.slope);
  }
  if (gro_h.size() >= 2) {
    const LineFit f = fit_of(gro_h);
    rate_b_meas = forward ? std::exp(f.slope) : std::exp(-f.slope);
  }
  report.measured_rate_a = rate_a_meas;
  report.measured_rate_b = rate_b_meas;
  const double c_decay = std::isfinite(log_C_decay) ? std::exp(log_C_decay) : 0.0;
  const double c_growth = std::isfinite(log_C_growth) ? std::exp(log_C_growth) : 0.0;
  report.measured_C = std::max({c_decay, c_growth, proj_sup});

  {
    CertifyItem item;
    item.name = "projection_commutation";
    item.measured = max_commut;
    item.margin = options.residual_tol - max_commut;
    item.pass = max_commut <= options.residual_tol;
    item.detail = "transition product commutes with projections, relative residual";
    report.items.push_back(item);
  }
  {
    CertifyItem item;
    item.name = "projection_bound";
    item.measured = proj_sup;
    const double claimed = cert.proj_bound;
    item.pass = std::isfinite(proj_sup) &&
                (claimed <= 0.0 || proj_sup <= claimed * (1.0 + 1e-8) + 1e-12);
    item.margin = claimed > 0.0 ? claimed - proj_sup : 0.0;
    double min_angle = std::numeric_limits<double>::infinity();
    for (int i = 0; i < window; ++i) {
      const auto ang = principal_angles(cert.stable[static_cast<std::size_t>(i)],
                                        cert.unstable[static_cast<std::size_t>(i)]);
      if (!ang.empty()) min_angle = std::min(min_angle, ang.front());
    }
    item.detail = "sup ||pi_s|| + ||pi_u||; smallest stable/unstable angle " +
                  std::to_string(min_angle) + " vs arcsin(1/bound) " +
                  std::to_string(std::asin(std::min(1.0, 1.0 / std::max(proj_sup, 1.0))));
    report.items.push_back(item);
  }
  {
    CertifyItem item;
    item.name = forward ? "unstable_invertibility" : "stable_invertibility";
    item.measured = std::isfinite(min_invert) ? min_invert : 1.0;
    item.pass = item.measured > 1e-12;
    item.margin = item.measured - 1e-12;
    item.detail = "restricted transition is invertible (min relative sigma)";
    report.items.push_back(item);
  }
  {
    CertifyItem item;
    item.name = "stable_decay";
    item.measured = rate_a_meas;
    const double bound = a * (1.0 + options.rate_rel_tol);
    item.pass = sdim == 0 || (rate_a_meas > 0.0 && rate_a_meas <= bound);
    item.margin = bound - rate_a_meas;
    item.detail = "fitted stable rate vs claimed " + std::to_string(a) + ", prefactor C " +
                  std::to_string(c_decay);
    report.items.push_back(item);
  }
  {
    CertifyItem item;
    item.name = "unstable_growth";
    item.measured = rate_b_meas;
    const double bound = b * (1.0 - options.rate_rel_tol);
    item.pass = udim == 0 || rate_b_meas >= bound;
    item.margin = rate_b_meas - bound;
    item.detail = "fitted unstable rate vs claimed " + std::to_string(b) + ", prefactor C " +
                  std::to_string(c_growth);
    report.items.push_back(item);
  }
  return report;
}

RateFit measure_rates(const OperatorSequence& seq, const std::vector<Subspace>& family,
                      int first, RateKind kind) {
  const int len = static_cast<int>(family.size());
  if (len < 5) throw ContractError("measure_rates: need at least 5 indices");
  for (const auto& s : family)
    if (s.ambient_dim() != seq.dim()) throw ContractError("measure_rates: ambient mismatch");
  if (family.front().dim() == 0) throw ContractError("measure_rates: empty start fibre");

  std::vector<double> xs, ys;
  const bool forward = seq.direction() == Direction::Forward;
  Eigen::MatrixXd frame = forward ? family.front().basis() : family.back().basis();
  double logscale = 0.0;
  for (int h = 0; h < len; ++h) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(frame);
    const double sigma = kind == RateKind::Dominant ? svd.singularValues().maxCoeff()
                                                    : svd.singularValues().minCoeff();
    if (!(sigma > 0.0)) throw ContractError("measure_rates: non-positive norm in fit");
    xs.push_back(h);
    ys.push_back(logscale + std::log(sigma));
    if (h + 1 < len) {
      if (forward)
        frame = seq.at(first + h) * frame;
      else
        frame = seq.at(first + len - 1 - h) * frame;
      const double s = frame.norm();
      if (!(s > 0.0)) throw ContractError("measure_rates: propagated frame vanished");
      frame /= s;
      logscale += std::log(s);
    }
  }
  const LineFit f = fit_line(xs, ys);
  return {std::exp(f.slope), std::exp(f.intercept)};
}

namespace {

nlohmann::json subspace_to_json(const Subspace& s) {
  nlohmann::json j;
  j["dim"] = s.dim();
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(s.basis().size()));
  for (int r = 0; r < s.basis().rows(); ++r)
    for (int c = 0; c < s.basis().cols(); ++c) data.push_back(s.basis()(r, c));
  j["basis"] = data;  // row-major
  return j;
}

Subspace subspace_from_json(const nlohmann::json& j, int ambient) {
  const int dim = j.at("dim").get<int>();
  const auto data = j.at("basis").get<std::vector<double>>();
  if (static_cast<int>(data.size()) != ambient * dim)
    throw ContractError("certificate: basis size mismatch");
  if (dim == 0) return Subspace::zero(ambient);
  Eigen::MatrixXd basis(ambient, dim);
  std::size_t idx = 0;
  for (int r = 0; r < ambient; ++r)
    for (int c = 0; c < dim; ++c) basis(r, c) = data[idx++];
  // Re-orthonormalize on load; certify detects semantically wrong fibres.
  return Subspace(basis);
}

}  // namespace

nlohmann::json DichotomyCertificate::to_json() const {
  nlohmann::json j;
  j["format"] = "dicho-certificate-v1";
  j["direction"] = to_string(direction);
  j["first"] = first;
  j["last"] = last;
  j["dim"] = stable.empty() ? 0 : stable.front().ambient_dim();
  j["rate_a"] = rate_a;
  j["rate_b"] = rate_b;
  j["decay_C"] = decay_C;
  j["proj_bound"] = proj_bound;
  j["stable"] = nlohmann::json::array();
  j["unstable"] = nlohmann::json::array();
  for (const auto& s : stable) j["stable"].push_back(subspace_to_json(s));
  for (const auto& s : unstable) j["unstable"].push_back(subspace_to_json(s));
  return j;
}

DichotomyCertificate DichotomyCertificate::from_json(const nlohmann::json& j) {
  if (j.value("format", "") != std::string("dicho-certificate-v1"))
    throw ContractError("certificate: unknown format");
  DichotomyCertificate cert;
  cert.direction =
      j.at("direction").get<std::string>() == "backward" ? Direction::Backward : Direction::Forward;
  cert.first = j.at("first").get<int>();
  cert.last = j.at("last").get<int>();
  cert.rate_a = j.at("rate_a").get<double>();
  cert.rate_b = j.at("rate_b").get<double>();
  cert.decay_C = j.value("decay_C", 0.0);
  cert.proj_bound = j.value("proj_bound", 0.0);
  const int dim = j.at("dim").get<int>();
  for (const auto& js : j.at("stable")) cert.stable.push_back(subspace_from_json(js, dim));
  for (const auto& js : j.at("unstable")) cert.unstable.push_back(subspace_from_json(js, dim));
  if (static_cast<int>(cert.stable.size()) != cert.window_size() ||
      static_cast<int>(cert.unstable.size()) != cert.window_size())
    throw ContractError("certificate: family length does not match window");
  return cert;
}

void DichotomyCertificate::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("certificate: cannot write " + path);
  out << to_json().dump(2) << "\n";
}

DichotomyCertificate DichotomyCertificate::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("certificate: cannot read " + path);
  nlohmann::json j;
  in >> j;
  return from_json(j);
}

}  // namespace dicho
