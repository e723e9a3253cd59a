#pragma once

#include <vector>

#include "dicho/cones.hpp"
#include "dicho/dichotomy.hpp"
#include "dicho/linops.hpp"

namespace dicho {

/// Per-index spectral splitting of B_n^T B_n together with the image
/// splittings Z = B_n Y and the measured alignment defect delta (the worst
/// sphere distance between an image splitting and the next spectral one).
struct AvalancheSystem {
  OperatorSequence seq;
  double a = 0.0;
  double b = 0.0;
  int d_s = 0;
  int d_u = 0;
  int first = 0;
  int last = 0;
  std::vector<Subspace> y_s, y_u;  // spectral splittings, indices [first, last]
  std::vector<Subspace> z_s, z_u;  // image splittings (orthonormalized)
  std::vector<bool> collapsed_s, collapsed_u;  // image lost dimension at n
  std::vector<double> delta_s, delta_u;        // per step n -> n+1
  double delta = 0.0;

  const Subspace& y_s_at(int n) const { return y_s.at(static_cast<std::size_t>(n - first)); }
  const Subspace& y_u_at(int n) const { return y_u.at(static_cast<std::size_t>(n - first)); }
};

/// Builds the splittings over [first, last] and measures delta. Propagates
/// GapViolationError from the underlying spectral splits. A collapsed image
/// (dim Z < dim Y, possible since B_n need not be invertible) is recorded
/// and its distance measured on the surviving dimensions.
AvalancheSystem build_avalanche(const OperatorSequence& seq, double a, double b, int first,
                                int last);

/// I_n^- / I_n^+ are the lengths of the orthogonal projections onto
/// Y_s(n) / Y_u(n); covectors are the Y_u basis vectors (plus side);
/// c1 = 1/sqrt(2), c2 = 1/sqrt(d_u).
ConeFunctionalPair avalanche_functionals(const AvalancheSystem& sys);

struct AvalancheCertificateResult {
  DichotomyCertificate certificate;
  CertifyReport report;
  GateReport gate;
  ConeParams params;
  double eps_growth = 0.0;    // b (1 - sqrt(1-delta)) + a sqrt(delta)/c4
  double eps_contract = 0.0;  // a ((1 - delta/c3)^{-1} - 1)
  double epsilon = 0.0;       // requested value
  std::vector<double> phi_xs_ys;  // sphere distance X_s(n) vs Y_s(n)
};

struct AvalancheCertificateOptions {
  double c3 = 1.0;
  double c4 = 0.0;  // 0: min(gate bound, 1)/2
  int horizon = 0;  // 0: automatic
};

/// Certifies the splitting with values a+epsilon, b-epsilon. The measured
/// delta must satisfy both proof formulas for the requested epsilon,
/// otherwise HypothesisError names the limiting one.
AvalancheCertificateResult avalanche_certificate(const AvalancheSystem& sys, double epsilon,
                                                 const AvalancheCertificateOptions& opts = {});

}  // namespace dicho
