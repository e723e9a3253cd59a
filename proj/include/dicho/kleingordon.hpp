#pragma once

#include <memory>
#include <string>
#include <vector>

#include "dicho/grid.hpp"
#include "dicho/potentials.hpp"

namespace dicho {

/// Sub-light boost. At d = 1 the spatial part of the Lorentz map reduces to
/// the dilation x -> gamma x.
struct BoostFrame {
  double beta = 0.0;
  double gamma = 1.0;
  explicit BoostFrame(double beta_velocity);
};

/// Resamples phi at gamma x by cubic interpolation (boost about the
/// origin of the grid coordinates).
Eigen::VectorXd boost_function(const GridSpec& g, const Eigen::VectorXd& phi,
                               const BoostFrame& frame);

/// Two-component grid state (u, u_dot).
struct KGPair {
  Eigen::VectorXd u;
  Eigen::VectorXd ud;
};

double kg_energy_norm(const GridSpec& g, const KGPair& s);
/// Pairing <(p,q), (u,w)> = <p,u> + <q,w> in the grid inner product.
double kg_pairing(const GridSpec& g, const KGPair& a, const KGPair& b);
/// J (u, w) = (w, -u).
KGPair kg_j(const KGPair& s);

/// Spectrum of L = -Lap + 1 + V on the grid: strictly negative modes
/// (nu = sqrt(-lambda)) and zero modes (|lambda| < 10 dx^2). Eigenvectors
/// are grid-L2 normalized functions of the centered coordinate.
struct KGMode {
  double nu = 0.0;       // growth rate, lambda = -nu^2
  double lambda = 0.0;   // raw grid eigenvalue
  Eigen::VectorXd phi;
};
struct KGSpectrum {
  std::vector<KGMode> negative;
  std::vector<KGMode> zero;  // nu = 0, lambda = the small grid eigenvalue
  int K() const { return static_cast<int>(negative.size()); }
  int M() const { return static_cast<int>(zero.size()); }
};
KGSpectrum kg_spectrum(const GridSpec& g, const Eigen::VectorXd& v_pot);

/// Boosted, exponentially tilted eigen-objects of a single potential:
/// Y^-(x) = e^{gamma nu beta x} (phi, gamma beta phi' + gamma nu phi)(gamma x),
/// Y^+ with the opposite tilt and derivative sign, Y^0 = (phi0, -gamma beta
/// phi0')(gamma x), and the dual covectors alpha^- = J Y^+, alpha^+ = J Y^-,
/// alpha^0 = J Y^0. Tilted products are clamped to zero below 1e-14 of
/// their peak; all objects must decay below 1e-8 at the walls.
struct KGEigenObjects {
  BoostFrame frame;
  std::vector<double> nu;
  std::vector<KGPair> y_minus, y_plus, y_zero;
  std::vector<KGPair> alpha_minus, alpha_plus, alpha_zero;
  int K() const { return static_cast<int>(nu.size()); }
  int M() const { return static_cast<int>(y_zero.size()); }
};
KGEigenObjects build_eigen_objects(const GridSpec& g, const Eigen::VectorXd& v_pot,
                                   const BoostFrame& frame);

struct KGState {
  KGPair s;
  double t = 0.0;
};

struct KGTrajectory {
  std::vector<double> times;
  std::vector<KGPair> states;
  double dt = 0.0;
  std::vector<std::string> warnings;
};

/// Strang-split evolution of u_tt = Lap u - u - sum_j (V_j)_{beta_j(t)}
/// (. - y_j(t)) u: half kick with the potential frozen at the step
/// midpoint, implicit-midpoint drift for the free wave part. Potentials are
/// boosted by their instantaneous velocity. Emits a warning when
/// dt > dx/2 (accuracy, not stability).
KGTrajectory kg_evolve(const GridSpec& g, const std::vector<PotentialTrack>& tracks,
                       const KGPair& state0, double dt, double big_t, int store_stride = 1);

enum class KGModeKind { Minus, Plus, Zero };

struct ResidualCurve {
  std::vector<double> times;
  std::vector<double> residual;   // energy-norm relative deviation
  double max_residual = 0.0;
  double growth_exponent = 0.0;   // fitted log energy norm slope of the run
  double nu_oracle = 0.0;         // grid nu of the tracked mode
};

/// Evolves the closed-form traveling mode with constant velocity
/// y(t) = beta t + xi and measures the relative deviation from the
/// closed form along the way.
ResidualCurve exact_solution_residual(const GridSpec& g, const PotentialShape& shape,
                                      const BoostFrame& frame, double xi, KGModeKind kind,
                                      int mode_index, double dt, double big_t,
                                      int store_stride = 1);

struct ComponentSeries {
  std::vector<double> times;
  // [track][mode][time]
  std::vector<std::vector<std::vector<double>>> a_minus, a_plus, a_zero;
};

/// Pairings of the trajectory with the covectors re-assembled at each
/// stored time for the instantaneous (beta_j(t), y_j(t)).
ComponentSeries track_components(const GridSpec& g, const KGTrajectory& traj,
                                 const std::vector<PotentialTrack>& tracks,
                                 const std::vector<KGSpectrum>& spectra);

/// Localized energy form: (1/2) integral of (ud^2 + 2 sum_j chi_j ud
/// (beta_j u') + u'^2 + (1 + V(t)) u^2) with plateau cutoffs
/// chi(eta_cutoff (x - y_j(t))). eta_cutoff <= 0 disables the cutoffs
/// (single-potential form; requires exactly one track). Overlapping cutoff
/// supports raise DomainError.
double q_form(const GridSpec& g, const std::vector<PotentialTrack>& tracks, double eta_cutoff,
              double t, const KGPair& state);

struct ConservationReport {
  double q_drift_rel = 0.0;        // sup |Q(t) - Q(0)| / scale
  double pairing_self_max = 0.0;   // sup |<J u(t), u(t)>| (skew, exactly 0)
};

/// Drift of the single-well traveling energy form Q_beta(beta t + xi) and
/// of the self-pairing along a stored trajectory.
ConservationReport conservation_diagnostics(const GridSpec& g, const KGTrajectory& traj,
                                            const PotentialTrack& track);

/// Relative drift of the symplectic pairing <J a(t), b(t)> of two stored
/// solutions of the same system.
double symplectic_pairing_drift(const GridSpec& g, const KGTrajectory& a,
                                const KGTrajectory& b);

struct KGDichotomyConfig {
  double big_t = 10.0;
  double dt = 0.02;
  double v = 0.3;    // speed bound of hypothesis checks
  double eta = 0.02; // acceleration/separation parameter
  int frame_extra = 5;
  int ortho_stride = 10;
  int store_stride = 10;
  double eps_stable = 0.1;
  double unstable_margin = 0.2;  // unstable exponents >= nu sqrt(1-v^2) - margin
  double rate_rel_tol = 0.01;    // per-track oracle comparison (constant-velocity tracks)
  double c3 = 1.0;
  double c4 = 0.05;
  std::uint64_t seed = 11;
};

struct KGDichotomyReport {
  int K = 0;
  double nu_min = 0.0;
  double unstable_bound = 0.0;  // nu_min sqrt(1 - v^2) - margin
  std::vector<double> oracle_exponents;  // nu_jk / gamma_j, descending
  std::vector<double> exponents;         // measured, descending
  int codim_measured = 0;
  bool codim_pass = false;
  bool unstable_rate_pass = false;  // top-K exponents vs oracle within tolerance
  bool unstable_bound_pass = false;
  bool stable_rate_pass = false;
  bool hypothesis_pass = false;
  std::vector<std::string> hypothesis_notes;
  long ineq_checked_plus = 0;
  long ineq_checked_minus = 0;
  double eps_tilde_plus = 0.0;
  double eps_tilde_minus = 0.0;
  bool pass() const {
    return codim_pass && unstable_bound_pass && stable_rate_pass && hypothesis_pass;
  }
};

/// Growth-filtering verification of the moving-potential splitting in the
/// energy space: evolves a (K + extra)-dimensional random frame with
/// energy-orthonormal QR, measures exponents and codimension, and checks
/// the conditioned differential inequalities of the functionals
/// I^+ = l2 of plus components, I^- = sqrt(max(0, Q + minus/zero
/// components)) at every stored step.
KGDichotomyReport kg_dichotomy_verify(const GridSpec& g,
                                      const std::vector<PotentialTrack>& tracks,
                                      const KGDichotomyConfig& cfg);

}  // namespace dicho
