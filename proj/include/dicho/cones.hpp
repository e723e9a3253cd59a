#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "dicho/dichotomy.hpp"
#include "dicho/linops.hpp"

namespace dicho {

enum class CovectorSide { Plus, Minus };
enum class ConeLocation { Stable, Unstable, Boundary };

/// Pair of homogeneous functionals I_n^- / I_n^+ with the covector family
/// sandwiching the finite-rank side (plus side for forward systems, minus
/// side for backward ones). c1 is the norm-equivalence constant of
/// I^- + I^+, c2 the max-vs-functional sandwich constant, K the covector
/// count per index.
struct ConeFunctionalPair {
  std::function<double(int, const Eigen::VectorXd&)> eval_minus;
  std::function<double(int, const Eigen::VectorXd&)> eval_plus;
  std::function<Eigen::VectorXd(int, int)> covector;  // (k, n), k in [0, K)
  CovectorSide side = CovectorSide::Plus;
  double c1 = 0.0;
  double c2 = 0.0;
  int K = 0;
};

/// Constants required by the dichotomy theorems. Rates are per step; for
/// time-sampled continuous systems pass exp(lambda dt), exp(mu dt).
struct ConeParams {
  double c3 = 0.0;
  double c4 = 0.0;
  double rate_a = 0.0;
  double rate_b = 0.0;
  Direction direction = Direction::Forward;
};

/// Cone membership of v at index n: stable when I^+ <= c I^-, unstable when
/// >=, boundary when equal within 1e-12 relative.
ConeLocation membership(const ConeFunctionalPair& pair, double c, int n,
                        const Eigen::VectorXd& v);

struct GateReport {
  bool pass = false;
  double bound = 0.0;  // the c4 threshold implied by c1..c3
  double slack = 0.0;  // distance of c4 from the threshold (positive = pass)
  Direction direction = Direction::Forward;
};

/// Forward gate: c4 < (1/3)(c1 c2)^2 c3/(1+c3). Backward gate:
/// c4 > 3 (c1 c2)^{-2} (c3 + 1). Non-positive constants are contract errors.
GateReport constants_gate(const ConeFunctionalPair& pair, const ConeParams& params);

struct C1Estimate {
  double lower = 0.0;  // min over samples of (I^- + I^+)/||v||
  double upper = 0.0;  // max over samples of (I^- + I^+)/||v||
  double c1 = 0.0;     // tightest admissible constant: min(lower, 1/upper)
  bool positivity_ok = false;
};

/// Tightest norm-equivalence constant consistent with the samples
/// (each sample is an (index, vector) pair; zero vectors are rejected).
C1Estimate estimate_c1(const ConeFunctionalPair& pair,
                       const std::vector<std::pair<int, Eigen::VectorXd>>& samples);

struct StepViolation {
  int n = 0;
  int sample_id = 0;
  std::string inequality;  // "minus" or "plus"
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // relative, negative = violated
};

struct StepCheckReport {
  std::vector<StepViolation> violations;
  long checks_minus = 0;
  long checks_plus = 0;
  bool pass() const { return violations.empty(); }
  void to_jsonl(std::ostream& os) const;
};

struct SampleSpec {
  int unit_samples = 1000;
  int boundary_per_side = -1;  // -1: use K (min 1)
  std::uint64_t seed = 1234;
  double rel_tol = 1e-10;
};

/// Verifies the conditioned one-step inequalities over [n_first, n_last]
/// on random unit vectors plus vectors constructed on both cone boundaries.
/// The hypothesis side is tested exactly as stated: on the image cone for
/// the minus inequality of forward systems, on the source cone for plus
/// (mirrored for backward systems).
StepCheckReport check_step_inequalities(const OperatorSequence& seq,
                                        const ConeFunctionalPair& pair, const ConeParams& params,
                                        int n_first, int n_last, const SampleSpec& spec = {});

/// Builds unit vectors z_k with <alpha_k, z_k> >= c6/2 and <alpha_j, z_k> = 0
/// for j != k by projecting each covector onto the orthogonal complement of
/// the others; returns their span. Numerically dependent covectors raise
/// DegeneracyError.
Subspace subspace_in_cone(const std::vector<Eigen::VectorXd>& alphas, double c6,
                          CovectorSide side);

/// Largest (minus side) / smallest (plus side) cone parameter for which the
/// constructed K-dimensional subspace is guaranteed inside the cone:
/// 2K/(c1 c2 c6) for the minus side, c1 c2 c6/(2K) for the plus side.
double kspace_c_threshold(double c1, double c2, double c6, int K, CovectorSide side);

/// Exact uniform-independence constant of a covector family in finite
/// dimension: min over k of the distance from alpha_k to the span of the
/// others (a valid constant for ||sum b_k alpha_k|| >= c6 max |b_k|).
double measure_c6(const std::vector<Eigen::VectorXd>& alphas);

/// Functionals built from a verified certificate by the finite-horizon
/// supremum construction: I_n^+ = sup over m <= n of b^{n-m} norms of the
/// inverse unstable transition, I_n^- = sup over window m >= n of a^{n-m}
/// decayed stable norms. The suprema are truncated to the certificate's
/// window; the truncation only sharpens the monotonicity inequalities.
ConeFunctionalPair functionals_from_certificate(const DichotomyCertificate& cert,
                                                const OperatorSequence& seq);

}  // namespace dicho
