#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dicho/linops.hpp"

namespace dicho {

/// Per-index stable/unstable splitting with measured constants.
/// For forward systems rates mean: stable vectors contract by <= rate_a per
/// step (up to the constant decay_C) and unstable vectors expand by
/// >= rate_b per step. For backward systems the roles follow the backward
/// splitting convention (stable fibres extend upward with factor rate_a,
/// unstable ones contract downward with factor 1/rate_b).
struct DichotomyCertificate {
  Direction direction = Direction::Forward;
  int first = 0;
  int last = 0;  // inclusive window [first, last]
  std::vector<Subspace> stable;
  std::vector<Subspace> unstable;
  double rate_a = 0.0;
  double rate_b = 0.0;
  double decay_C = 0.0;
  double proj_bound = 0.0;

  int window_size() const { return last - first + 1; }
  const Subspace& stable_at(int n) const;
  const Subspace& unstable_at(int n) const;

  nlohmann::json to_json() const;
  static DichotomyCertificate from_json(const nlohmann::json& j);
  void save(const std::string& path) const;
  static DichotomyCertificate load(const std::string& path);
};

struct HorizonDiagnostics {
  int horizon = 0;
  double singular_gap = 0.0;            // relative gap at split position
  double inter_horizon_distance = 0.0;  // sphere distance vs horizon+1 result
};

/// Stable subspace of a forward system at index n: span of the dim-K
/// smallest right singular directions of the product over [n, n+horizon).
/// K is the unstable dimension. Throws GapViolationError when the singular
/// gap at position K is below 1e-8 relative.
Subspace stable_subspace_forward(const OperatorSequence& seq, int K, int n, int horizon,
                                 HorizonDiagnostics* diag = nullptr);

/// Backward variant: span of the K dominant left singular directions of the
/// product mapping index n+horizon down to n.
Subspace stable_subspace_backward(const OperatorSequence& seq, int K, int n, int horizon,
                                  HorizonDiagnostics* diag = nullptr);

/// Smallest horizon whose result is within `tol` (sphere distance) of the
/// next horizon's, capped at `cap`.
int auto_horizon(const OperatorSequence& seq, int K, int n, double tol = 1e-8, int cap = 200);

/// Unstable family of a forward system: the seed propagated through the
/// operators with re-orthonormalization at every step. Throws CollapseError
/// if the propagated frame loses rank (smallest singular value < 1e-10).
std::vector<Subspace> unstable_family_forward(const OperatorSequence& seq, const Subspace& seed,
                                              int first, int last);
Subspace unstable_subspace_forward(const OperatorSequence& seq, const Subspace& seed, int n);

/// Unstable family of a backward system: X_u at index 0 is the joint kernel
/// of the covectors; later fibres are preimages under the step operators.
std::vector<Subspace> unstable_family_backward(const OperatorSequence& seq,
                                               const std::vector<Eigen::VectorXd>& covectors0,
                                               int first, int last);
Subspace unstable_subspace_backward(const OperatorSequence& seq,
                                    const std::vector<Eigen::VectorXd>& covectors0, int n);

struct Projections {
  Eigen::MatrixXd pi_s;
  Eigen::MatrixXd pi_u;
  double norm_s = 0.0;
  double norm_u = 0.0;
};

/// Oblique projections of the direct sum stable (+) unstable. Throws
/// TransversalityError when the combined basis has condition number > 1e12.
Projections build_projections(const Subspace& stable, const Subspace& unstable);

struct CertifyItem {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double margin = 0.0;
  std::string detail;
};

struct CertifyOptions {
  double residual_tol = 1e-8;   // commutation residual (relative)
  double rate_rel_tol = 1e-9;   // slack on fitted rates vs claimed rates
  int max_pairs = 20000;        // (n, m) pair budget before subsampling
  double proof_C_bound = 0.0;   // optional proof-side bound to report alongside
};

struct CertifyReport {
  std::vector<CertifyItem> items;
  double measured_C = 0.0;       // max of decay/growth prefactors
  double measured_rate_a = 0.0;  // fitted per-step stable rate
  double measured_rate_b = 0.0;  // fitted per-step unstable rate
  double proof_C_bound = 0.0;    // echoed from options (0 = not supplied)
  bool pass() const;
  void print(std::ostream& os) const;
};

/// Checks the five splitting properties numerically over all window pairs
/// n <= m (subsampled beyond options.max_pairs): projection commutation,
/// uniform projection bound, invertibility of the transition restricted to
/// the expanding family, decay at rate_a on stable vectors, growth at
/// rate_b on unstable vectors.
CertifyReport certify(const OperatorSequence& seq, const DichotomyCertificate& cert,
                      const CertifyOptions& options = {});

enum class RateKind { Dominant, Weakest };

struct RateFit {
  double rate = 0.0;      // geometric rate per operator application
  double constant = 0.0;  // prefactor exp(intercept)
};

/// Least-squares slope of log frame norm vs index along the propagated
/// family (Dominant fits sigma_max, Weakest sigma_min). Requires at least
/// 5 indices. `first` is the index of family[0].
RateFit measure_rates(const OperatorSequence& seq, const std::vector<Subspace>& family,
                      int first, RateKind kind = RateKind::Dominant);

}  // namespace dicho
