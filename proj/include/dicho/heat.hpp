#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dicho/grid.hpp"
#include "dicho/potentials.hpp"

namespace dicho {

struct SpectralData {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  Eigen::VectorXd phi1;  // positive, grid-L2 normalized
  std::vector<std::pair<double, Eigen::VectorXd>> negative_modes;  // (rate = -eig, Y)
};

/// Two smallest eigenpairs of -Laplacian + V plus all strictly negative
/// modes (threshold 10 dx^2). Verifies lambda1 <= -mu, lambda2 >= mu and
/// throws HypothesisError otherwise (mu_required = 0 skips nothing: it
/// still demands a sign change between the two).
SpectralData spectral_data(const GridSpec& g, const Eigen::VectorXd& v_pot, double mu_required);

using TimePotential = std::function<Eigen::VectorXd(double)>;

/// The normalized bump exp(-1/(1-(2t)^2)) on (-1/2, 1/2).
double mollifier_bump(double t);

/// W(t) = quadrature of chi(t - tau) V(tau); quadrature mass renormalized
/// to 1 so constants are preserved exactly.
TimePotential mollify_potential(const TimePotential& v, int quad_points = 65);

/// Integrates the backward equation u_t = -Lap u + V u from data at tau
/// down to t (Crank-Nicolson in reversed time, potential frozen at the
/// half-step midpoint). Steps of size grid.dt, rounded to divide tau - t.
Eigen::VectorXd backward_heat_evolve(const GridSpec& g, const TimePotential& v,
                                     const Eigen::VectorXd& v_tau, double tau, double t);

struct RayResult {
  std::vector<double> times;             // ascending, 0 .. T
  std::vector<Eigen::VectorXd> states;   // normalized ray
  std::vector<double> lognorm;           // log ||u(t)|| relative to the seed
  double rate = 0.0;                     // fitted d/dt log ||u||, approx lambda1
  double measured_delta = 0.0;           // sup of ||V(t1)-V(t2)|| over |t1-t2|<=1
  double mu_measured = 0.0;              // worst gap margin of the mollified potential
};

struct RayOptions {
  double delta_max = 0.0;   // 0: no oscillation-hypothesis enforcement
  int store_stride = 1;
  int gap_check_points = 9;
  double fit_fraction = 0.8;  // fit window [0, fit_fraction * T]
};

/// One-dimensional stable ray: phi_1 of the mollified potential at the
/// horizon, evolved backward and normalized. Throws HypothesisError when
/// the spectral gap or the oscillation bound fails.
RayResult stable_ray_backward_heat(const GridSpec& g, const TimePotential& v, double big_t,
                                   double mu_required, const RayOptions& opts = {});

struct HeatTrajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  double dt = 0.0;
};

/// Forward heat flow with moving potentials, Crank-Nicolson, potentials
/// re-sampled at shifted positions each step. Tracks closer than 10 decay
/// lengths to a wall raise DomainError.
HeatTrajectory heat_moving_evolve(const GridSpec& g, const std::vector<PotentialTrack>& tracks,
                                  const Eigen::VectorXd& u0, double big_t, int store_stride = 1);

/// Time-continuous functional pair (continuous systems are checked on the
/// stored time samples).
struct TimeFunctionalPair {
  std::function<double(double, const Eigen::VectorXd&)> eval_minus;
  std::function<double(double, const Eigen::VectorXd&)> eval_plus;
  std::function<Eigen::VectorXd(int, double)> covector;
  double c1 = 0.0;
  double c2 = 0.0;
  int K = 0;
};

/// I_t^+ = sum of |<Y_jk(. - x_j(t)), u>| over shifted negative modes,
/// I_t^- = grid L2 norm. spectral[j] must come from centered_potential of
/// track j's shape.
TimeFunctionalPair moving_cone_functionals(const GridSpec& g,
                                           const std::vector<PotentialTrack>& tracks,
                                           const std::vector<SpectralData>& spectral);

/// Functionals of the backward problem: I_t^- = c0 |<phi_1(W(t)), u>|,
/// I_t^+ = sqrt(max(0, <u, (-Lap + W(t)) u>)), with W the mollified
/// potential. The single covector (minus side) is c0 phi_1(W(t)).
TimeFunctionalPair backward_heat_functionals(const GridSpec& g, const TimePotential& w,
                                             double c0_scale);

struct CoercivityReport {
  double min_value = 0.0;       // min over samples of (form + penalty)/||u||^2
  double c0_min = 0.0;          // smallest admissible C0 found by bisection
  bool pass = false;
  std::vector<int> failed_samples;
};

/// Evaluates the Dirichlet-plus-potential form with the component penalty
/// C0 sum <Y, u>^2 on a smooth random ensemble; admissible means
/// >= -epsilon ||u||^2.
CoercivityReport coercivity_check(const GridSpec& g, const std::vector<PotentialTrack>& tracks,
                                  double c0, double epsilon, int samples, std::uint64_t seed,
                                  double t = 0.0);

/// Conditioned differential-inequality statistics measured on a stored
/// series: eps_tilde_plus = sup (nu' I+ - dI+/dt)+ / ||u|| on the unstable
/// cone, eps_tilde_minus = sup (dI-/dt)+ / ||u|| on the stable cone.
struct DiffIneqStats {
  long checked_plus = 0;
  long checked_minus = 0;
  double eps_tilde_plus = 0.0;
  double eps_tilde_minus = 0.0;
};

DiffIneqStats diff_inequality_stats(const std::vector<double>& times,
                                    const std::vector<double>& i_plus,
                                    const std::vector<double>& i_minus,
                                    const std::vector<double>& norms, double growth_rate,
                                    double c3, double c4);

struct HeatDichotomyConfig {
  double big_t = 10.0;
  double eta = 0.02;
  int frame_extra = 5;
  int ortho_stride = 10;
  int store_stride = 10;
  double eps_stable = 0.1;           // stable directions must grow slower than this
  double rate_rel_tol = 0.05;        // unstable exponents vs oracle eigenvalues
  double c3 = 0.1;
  double c4 = 0.01;
  double coercivity_c0 = 50.0;
  std::uint64_t seed = 7;
};

struct HeatDichotomyReport {
  int K = 0;
  double lambda_min = 0.0;                  // smallest oracle growth rate
  std::vector<double> oracle_rates;          // all lambda_{j,k}, descending
  std::vector<double> exponents;             // measured, descending
  int codim_measured = 0;
  bool codim_pass = false;
  bool unstable_rate_pass = false;
  bool stable_rate_pass = false;
  bool hypothesis_pass = false;              // velocity / separation / walls
  std::vector<std::string> hypothesis_notes;
  DiffIneqStats ineq;
  CoercivityReport coercivity;
  bool pass() const {
    return codim_pass && unstable_rate_pass && stable_rate_pass && hypothesis_pass;
  }
};

/// Growth-filtering verification of the moving-potential splitting: evolves
/// a (K + extra)-dimensional random frame with QR re-orthonormalization,
/// measures per-direction exponents, counts the expanding ones against K,
/// and measures the conditioned differential inequalities on sample
/// solutions.
HeatDichotomyReport heat_moving_dichotomy(const GridSpec& g,
                                          const std::vector<PotentialTrack>& tracks,
                                          const HeatDichotomyConfig& cfg);

}  // namespace dicho
