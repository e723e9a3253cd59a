#include "dicho/kleingordon.hpp"

#include <algorithm>
#include <cmath>

#include "dicho/heat.hpp"  // diff_inequality_stats

namespace dicho {

namespace {

constexpr double kTiltClamp = 1e-14;
constexpr double kWallDecay = 1e-8;

double grid_center(const GridSpec& g) { return 0.5 * (g.x_lo + g.x_hi); }

// Plateau cutoff: 1 on |s| <= 1/4, 0 on |s| >= 1/2, C^2 in between.
double plateau(double s) {
  const double a = std::abs(s);
  if (a <= 0.25) return 1.0;
  if (a >= 0.5) return 0.0;
  const double tau = (0.5 - a) / 0.25;
  return tau * tau * tau * (10.0 + tau * (-15.0 + 6.0 * tau));
}

void check_wall_distance(const GridSpec& g, const std::vector<PotentialTrack>& tracks,
                         double t) {
  for (const auto& tr : tracks) {
    const double y = tr.position(t);
    const double margin = 10.0 * tr.shape.decay_length;
    if (y - g.x_lo < margin || g.x_hi - y < margin)
      throw DomainError("kleingordon: track '" + tr.shape.name + "' at t=" + std::to_string(t) +
                        " is closer than 10 decay lengths to a wall");
  }
}

enum class ObjectKind { Minus, Plus, Zero };

// Tilted boosted eigen-object centered at y; interp holds the rest-frame
// eigenfunction in grid coordinates (centered at the grid midpoint).
KGPair assemble_object(const GridSpec& g, const CubicInterpolant& interp, double nu,
                       const BoostFrame& frame, double y, ObjectKind kind) {
  const double c0 = grid_center(g);
  const double gamma = frame.gamma;
  const double beta = frame.beta;
  KGPair out{Eigen::VectorXd::Zero(g.n_points), Eigen::VectorXd::Zero(g.n_points)};
  for (int i = 0; i < g.n_points; ++i) {
    const double xi = g.node(i) - y;
    const double phi = interp(c0 + gamma * xi);
    const double dphi = interp.derivative(c0 + gamma * xi);
    double tilt_exp = 0.0;
    double first = phi, second = 0.0;
    switch (kind) {
      case ObjectKind::Minus:
        tilt_exp = gamma * nu * beta * xi;
        second = gamma * beta * dphi + gamma * nu * phi;
        break;
      case ObjectKind::Plus:
        tilt_exp = -gamma * nu * beta * xi;
        second = -gamma * beta * dphi + gamma * nu * phi;
        break;
      case ObjectKind::Zero:
        tilt_exp = 0.0;
        second = -gamma * beta * dphi;
        break;
    }
    const double tilt = std::exp(std::min(tilt_exp, 600.0));
    out.u[i] = phi == 0.0 && second == 0.0 ? 0.0 : tilt * first;
    out.ud[i] = second == 0.0 ? 0.0 : tilt * second;
  }
  // Clamp the far tails of the tilted product.
  const double peak = std::max(out.u.cwiseAbs().maxCoeff(), out.ud.cwiseAbs().maxCoeff());
  for (int i = 0; i < g.n_points; ++i) {
    if (std::abs(out.u[i]) < kTiltClamp * peak) out.u[i] = 0.0;
    if (std::abs(out.ud[i]) < kTiltClamp * peak) out.ud[i] = 0.0;
  }
  return out;
}

void check_object_walls(const GridSpec& g, const KGPair& p, const std::string& what) {
  const double peak = std::max(p.u.cwiseAbs().maxCoeff(), p.ud.cwiseAbs().maxCoeff());
  const int n = g.n_points;
  const double wall = std::max({std::abs(p.u[0]), std::abs(p.u[n - 1]), std::abs(p.ud[0]),
                                std::abs(p.ud[n - 1])});
  if (peak > 0.0 && wall > kWallDecay * peak)
    throw DomainError("kleingordon: " + what + " does not decay at the truncation walls (" +
                      std::to_string(wall / peak) + " of peak)");
}

// Boosted instantaneous potential of all tracks at time t.
Eigen::VectorXd boosted_potential(const GridSpec& g, const std::vector<PotentialTrack>& tracks,
                                  double t) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(g.n_points);
  for (const auto& tr : tracks) {
    const BoostFrame frame(tr.velocity(t));
    const double y = tr.position(t);
    for (int i = 0; i < g.n_points; ++i)
      v[i] += tr.shape.f(frame.gamma * (g.node(i) - y));
  }
  return v;
}

// Strang step machinery shared by kg_evolve and the frame filtering.
struct KGStepper {
  const GridSpec& g;
  const std::vector<PotentialTrack>& tracks;
  double dt;
  Tridiag l0;  // -Lap + 1

  KGStepper(const GridSpec& grid, const std::vector<PotentialTrack>& trs, double step)
      : g(grid), tracks(trs), dt(step),
        l0(schrodinger_tridiag(grid, Eigen::VectorXd::Ones(grid.n_points))) {}

  Eigen::VectorXd potential_at(double t_mid) const {
    check_wall_distance(g, tracks, t_mid);
    return boosted_potential(g, tracks, t_mid);
  }

  void step(KGPair& s, const Eigen::VectorXd& v_mid) const {
    // half kick
    s.ud -= 0.5 * dt * v_mid.cwiseProduct(s.u);
    // implicit-midpoint free drift
    const Eigen::VectorXd rhs =
        s.ud - tridiag_apply(l0, (dt * s.u + 0.25 * dt * dt * s.ud).eval());
    const Eigen::VectorXd ud_new = solve_shifted_tridiag(l0, 1.0, 0.25 * dt * dt, rhs);
    s.u += 0.5 * dt * (s.ud + ud_new);
    s.ud = ud_new;
    // half kick
    s.ud -= 0.5 * dt * v_mid.cwiseProduct(s.u);
  }
};

struct LsqFit {
  double slope = 0.0, intercept = 0.0;
};

LsqFit lsq(const std::vector<double>& x, const std::vector<double>& y) {
  const int n = static_cast<int>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double det = n * sxx - sx * sx;
  if (std::abs(det) < 1e-300) return {};
  return {(n * sxy - sx * sy) / det, (sy * sxx - sx * sxy) / det};
}

// Interpolants of a spectrum's eigenfunctions, built once per potential.
struct TrackModes {
  std::vector<CubicInterpolant> neg;
  std::vector<double> nu;
  std::vector<CubicInterpolant> zero;
};

TrackModes make_track_modes(const GridSpec& g, const KGSpectrum& spec) {
  TrackModes tm;
  for (const auto& m : spec.negative) {
    tm.neg.emplace_back(g, m.phi);
    tm.nu.push_back(m.nu);
  }
  for (const auto& m : spec.zero) tm.zero.emplace_back(g, m.phi);
  return tm;
}

}  // namespace

BoostFrame::BoostFrame(double beta_velocity) : beta(beta_velocity) {
  if (!(std::abs(beta_velocity) < 1.0))
    throw ContractError("BoostFrame: |beta| must be < 1");
  gamma = 1.0 / std::sqrt(1.0 - beta * beta);
}

Eigen::VectorXd boost_function(const GridSpec& g, const Eigen::VectorXd& phi,
                               const BoostFrame& frame) {
  if (phi.size() != g.n_points) throw ContractError("boost_function: size mismatch");
  const CubicInterpolant interp(g, phi);
  const double c0 = grid_center(g);
  Eigen::VectorXd out(g.n_points);
  for (int i = 0; i < g.n_points; ++i)
    out[i] = interp(c0 + frame.gamma * (g.node(i) - c0));
  return out;
}

double kg_energy_norm(const GridSpec& g, const KGPair& s) {
  return std::sqrt(dirichlet_form(g, s.u) + grid_ip(g, s.u, s.u) + grid_ip(g, s.ud, s.ud));
}

double kg_pairing(const GridSpec& g, const KGPair& a, const KGPair& b) {
  return grid_ip(g, a.u, b.u) + grid_ip(g, a.ud, b.ud);
}

KGPair kg_j(const KGPair& s) { return {s.ud, -s.u}; }

KGSpectrum kg_spectrum(const GridSpec& g, const Eigen::VectorXd& v_pot) {
  const Tridiag l = schrodinger_tridiag(g, (v_pot.array() + 1.0).matrix());
  const double zero_tol = 10.0 * g.dx() * g.dx();
  KGSpectrum spec;
  for (const auto& [lam, vec] : tridiag_eigs_below(g, l, zero_tol)) {
    KGMode mode;
    mode.lambda = lam;
    mode.phi = vec;
    if (lam < -zero_tol) {
      mode.nu = std::sqrt(-lam);
      spec.negative.push_back(std::move(mode));
    } else {
      mode.nu = 0.0;
      spec.zero.push_back(std::move(mode));
    }
  }
  return spec;
}

KGEigenObjects build_eigen_objects(const GridSpec& g, const Eigen::VectorXd& v_pot,
                                   const BoostFrame& frame) {
  const KGSpectrum spec = kg_spectrum(g, v_pot);
  const double c0 = grid_center(g);
  KGEigenObjects obj{frame, {}, {}, {}, {}, {}, {}, {}};
  for (const auto& m : spec.negative) {
    const CubicInterpolant interp(g, m.phi);
    obj.nu.push_back(m.nu);
    obj.y_minus.push_back(assemble_object(g, interp, m.nu, frame, c0, ObjectKind::Minus));
    obj.y_plus.push_back(assemble_object(g, interp, m.nu, frame, c0, ObjectKind::Plus));
    obj.alpha_minus.push_back(kg_j(obj.y_plus.back()));
    obj.alpha_plus.push_back(kg_j(obj.y_minus.back()));
    check_object_walls(g, obj.y_minus.back(), "Y^- object");
    check_object_walls(g, obj.y_plus.back(), "Y^+ object");
  }
  for (const auto& m : spec.zero) {
    const CubicInterpolant interp(g, m.phi);
    obj.y_zero.push_back(assemble_object(g, interp, 0.0, frame, c0, ObjectKind::Zero));
    obj.alpha_zero.push_back(kg_j(obj.y_zero.back()));
    check_object_walls(g, obj.y_zero.back(), "Y^0 object");
  }
  return obj;
}

KGTrajectory kg_evolve(const GridSpec& g, const std::vector<PotentialTrack>& tracks,
                       const KGPair& state0, double dt, double big_t, int store_stride) {
  g.validate();
  if (state0.u.size() != g.n_points || state0.ud.size() != g.n_points)
    throw ContractError("kg_evolve: state size mismatch");
  if (!(dt > 0.0) || !(big_t > 0.0)) throw ContractError("kg_evolve: dt and T must be positive");
  if (store_stride < 1) throw ContractError("kg_evolve: store_stride >= 1");
  KGTrajectory traj;
  if (dt > 0.5 * g.dx())
    traj.warnings.push_back("dt > dx/2: time step too coarse for wave accuracy");
  const int steps = std::max(1, static_cast<int>(std::llround(big_t / dt)));
  const double dt_used = big_t / steps;
  traj.dt = dt_used;
  KGStepper stepper(g, tracks, dt_used);
  KGPair s = state0;
  traj.times.push_back(0.0);
  traj.states.push_back(s);
  for (int k = 0; k < steps; ++k) {
    const Eigen::VectorXd v_mid = stepper.potential_at((k + 0.5) * dt_used);
    stepper.step(s, v_mid);
    if ((k + 1) % store_stride == 0 || k + 1 == steps) {
      traj.times.push_back((k + 1) * dt_used);
      traj.states.push_back(s);
    }
  }
  return traj;
}

ResidualCurve exact_solution_residual(const GridSpec& g, const PotentialShape& shape,
                                      const BoostFrame& frame, double xi, KGModeKind kind,
                                      int mode_index, double dt, double big_t,
                                      int store_stride) {
  const KGSpectrum spec = kg_spectrum(g, centered_potential(g, shape));
  const double c0 = grid_center(g);
  double nu = 0.0;
  ObjectKind okind = ObjectKind::Zero;
  const Eigen::VectorXd* phi = nullptr;
  switch (kind) {
    case KGModeKind::Minus:
    case KGModeKind::Plus: {
      if (mode_index < 0 || mode_index >= spec.K())
        throw ContractError("exact_solution_residual: mode index out of range");
      nu = spec.negative[static_cast<std::size_t>(mode_index)].nu;
      phi = &spec.negative[static_cast<std::size_t>(mode_index)].phi;
      okind = kind == KGModeKind::Minus ? ObjectKind::Minus : ObjectKind::Plus;
      break;
    }
    case KGModeKind::Zero: {
      if (mode_index < 0 || mode_index >= spec.M())
        throw ContractError("exact_solution_residual: zero-mode index out of range");
      phi = &spec.zero[static_cast<std::size_t>(mode_index)].phi;
      okind = ObjectKind::Zero;
      break;
    }
  }
  const CubicInterpolant interp(g, *phi);
  const double rate = kind == KGModeKind::Plus    ? nu / frame.gamma
                      : kind == KGModeKind::Minus ? -nu / frame.gamma
                                                  : 0.0;
  auto reference = [&](double t) {
    return assemble_object(g, interp, nu, frame, c0 + xi + frame.beta * t, okind);
  };

  const KGPair start = reference(0.0);
  const std::vector<PotentialTrack> tracks{
      {shape, [c0, xi, b = frame.beta](double t) { return c0 + xi + b * t; },
       [b = frame.beta](double) { return b; }}};
  const KGTrajectory traj = kg_evolve(g, tracks, start, dt, big_t, store_stride);

  ResidualCurve curve;
  curve.nu_oracle = nu;
  std::vector<double> ts, lognorm;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const double t = traj.times[i];
    KGPair ref = reference(t);
    const double factor = std::exp(rate * t);
    ref.u *= factor;
    ref.ud *= factor;
    const KGPair diff{traj.states[i].u - ref.u, traj.states[i].ud - ref.ud};
    const double rel = kg_energy_norm(g, diff) / kg_energy_norm(g, ref);
    curve.times.push_back(t);
    curve.residual.push_back(rel);
    curve.max_residual = std::max(curve.max_residual, rel);
    ts.push_back(t);
    lognorm.push_back(std::log(kg_energy_norm(g, traj.states[i])));
  }
  curve.growth_exponent = lsq(ts, lognorm).slope;
  return curve;
}

ComponentSeries track_components(const GridSpec& g, const KGTrajectory& traj,
                                 const std::vector<PotentialTrack>& tracks,
                                 const std::vector<KGSpectrum>& spectra) {
  if (tracks.size() != spectra.size())
    throw ContractError("track_components: tracks/spectra size mismatch");
  std::vector<TrackModes> modes;
  for (const auto& spec : spectra) modes.push_back(make_track_modes(g, spec));

  ComponentSeries series;
  series.times = traj.times;
  const std::size_t nj = tracks.size();
  series.a_minus.resize(nj);
  series.a_plus.resize(nj);
  series.a_zero.resize(nj);
  for (std::size_t j = 0; j < nj; ++j) {
    series.a_minus[j].resize(modes[j].nu.size());
    series.a_plus[j].resize(modes[j].nu.size());
    series.a_zero[j].resize(modes[j].zero.size());
  }
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const double t = traj.times[i];
    for (std::size_t j = 0; j < nj; ++j) {
      const BoostFrame frame(tracks[j].velocity(t));
      const double y = tracks[j].position(t);
      for (std::size_t k = 0; k < modes[j].nu.size(); ++k) {
        const double nu = modes[j].nu[k];
        const KGPair am =
            kg_j(assemble_object(g, modes[j].neg[k], nu, frame, y, ObjectKind::Plus));
        const KGPair ap =
            kg_j(assemble_object(g, modes[j].neg[k], nu, frame, y, ObjectKind::Minus));
        series.a_minus[j][k].push_back(kg_pairing(g, am, traj.states[i]));
        series.a_plus[j][k].push_back(kg_pairing(g, ap, traj.states[i]));
      }
      for (std::size_t m = 0; m < modes[j].zero.size(); ++m) {
        const KGPair a0 =
            kg_j(assemble_object(g, modes[j].zero[m], 0.0, frame, y, ObjectKind::Zero));
        series.a_zero[j][m].push_back(kg_pairing(g, a0, traj.states[i]));
      }
    }
  }
  return series;
}

double q_form(const GridSpec& g, const std::vector<PotentialTrack>& tracks, double eta_cutoff,
              double t, const KGPair& state) {
  if (state.u.size() != g.n_points || state.ud.size() != g.n_points)
    throw ContractError("q_form: state size mismatch");
  if (eta_cutoff <= 0.0 && tracks.size() > 1)
    throw ContractError("q_form: the uncut form is only defined for a single track");
  if (eta_cutoff > 0.0) {
    for (std::size_t j = 0; j < tracks.size(); ++j)
      for (std::size_t l = j + 1; l < tracks.size(); ++l)
        if (std::abs(tracks[j].position(t) - tracks[l].position(t)) < 1.0 / eta_cutoff)
          throw DomainError("q_form: cutoff supports overlap (separation below 1/eta)");
  }
  const Eigen::VectorXd v_pot = boosted_potential(g, tracks, t);
  const Eigen::VectorXd du = grid_derivative(g, state.u);
  double cross = 0.0;
  for (const auto& tr : tracks) {
    const double beta = tr.velocity(t);
    const double y = tr.position(t);
    double acc = 0.0;
    for (int i = 0; i < g.n_points; ++i) {
      const double chi = eta_cutoff > 0.0 ? plateau(eta_cutoff * (g.node(i) - y)) : 1.0;
      acc += chi * state.ud[i] * du[i];
    }
    cross += beta * acc * g.dx();
  }
  const double quad = grid_ip(g, state.ud, state.ud) + dirichlet_form(g, state.u) +
                      grid_ip(g, ((v_pot.array() + 1.0).matrix()).cwiseProduct(state.u), state.u);
  return 0.5 * quad + cross;
}

ConservationReport conservation_diagnostics(const GridSpec& g, const KGTrajectory& traj,
                                            const PotentialTrack& track) {
  ConservationReport report;
  const std::vector<PotentialTrack> tracks{track};
  double q0 = 0.0;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const double q = q_form(g, tracks, 0.0, traj.times[i], traj.states[i]);
    if (i == 0) q0 = q;
    report.q_drift_rel =
        std::max(report.q_drift_rel, std::abs(q - q0) / std::max(std::abs(q0), 1e-300));
    report.pairing_self_max =
        std::max(report.pairing_self_max,
                 std::abs(kg_pairing(g, kg_j(traj.states[i]), traj.states[i])));
  }
  return report;
}

double symplectic_pairing_drift(const GridSpec& g, const KGTrajectory& a,
                                const KGTrajectory& b) {
  if (a.times.size() != b.times.size())
    throw ContractError("symplectic_pairing_drift: trajectories differ in length");
  double p0 = 0.0, drift = 0.0;
  const double scale0 = kg_energy_norm(g, a.states.front()) * kg_energy_norm(g, b.states.front());
  for (std::size_t i = 0; i < a.times.size(); ++i) {
    const double p = kg_pairing(g, kg_j(a.states[i]), b.states[i]);
    if (i == 0) p0 = p;
    drift = std::max(drift, std::abs(p - p0));
  }
  return drift / std::max({std::abs(p0), 1e-12 * scale0, 1e-300});
}

KGDichotomyReport kg_dichotomy_verify(const GridSpec& g,
                                      const std::vector<PotentialTrack>& tracks,
                                      const KGDichotomyConfig& cfg) {
  g.validate();
  KGDichotomyReport report;

  std::vector<KGSpectrum> spectra;
  std::vector<TrackModes> modes;
  for (const auto& tr : tracks) {
    spectra.push_back(kg_spectrum(g, centered_potential(g, tr.shape)));
    modes.push_back(make_track_modes(g, spectra.back()));
  }
  report.nu_min = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < tracks.size(); ++j) {
    const BoostFrame frame(tracks[j].velocity(0.5 * cfg.big_t));
    for (const double nu : modes[j].nu) {
      report.nu_min = std::min(report.nu_min, nu);
      report.oracle_exponents.push_back(nu / frame.gamma);
    }
  }
  std::sort(report.oracle_exponents.rbegin(), report.oracle_exponents.rend());
  report.K = static_cast<int>(report.oracle_exponents.size());
  if (report.K == 0) throw HypothesisError("kg_dichotomy_verify: no unstable modes");
  report.unstable_bound =
      report.nu_min * std::sqrt(1.0 - cfg.v * cfg.v) - cfg.unstable_margin;

  // Hypotheses: speed bound, acceleration bound, pairwise separation.
  report.hypothesis_pass = true;
  const int checks = 33;
  const double h_acc = cfg.big_t / 997.0;
  for (int i = 0; i <= checks; ++i) {
    const double t = cfg.big_t * i / checks;
    for (std::size_t j = 0; j < tracks.size(); ++j) {
      if (std::abs(tracks[j].velocity(t)) > cfg.v + 1e-12) {
        report.hypothesis_pass = false;
        report.hypothesis_notes.push_back("speed bound |beta_j| <= v fails at t=" +
                                          std::to_string(t));
      }
      const double acc =
          (tracks[j].velocity(std::min(t + h_acc, cfg.big_t)) -
           tracks[j].velocity(std::max(t - h_acc, 0.0))) /
          (std::min(t + h_acc, cfg.big_t) - std::max(t - h_acc, 0.0));
      if (std::abs(acc) > cfg.eta + 1e-9) {
        report.hypothesis_pass = false;
        report.hypothesis_notes.push_back("acceleration bound |beta_j'| <= eta fails at t=" +
                                          std::to_string(t));
      }
      for (std::size_t l = j + 1; l < tracks.size(); ++l) {
        if (std::abs(tracks[j].position(t) - tracks[l].position(t)) < 1.0 / cfg.eta) {
          report.hypothesis_pass = false;
          report.hypothesis_notes.push_back("separation |y_j - y_l| >= 1/eta fails at t=" +
                                            std::to_string(t));
        }
      }
    }
  }
  check_wall_distance(g, tracks, 0.0);
  check_wall_distance(g, tracks, cfg.big_t);

  // QR-filtered random frame in the energy inner product.
  const int m = report.K + cfg.frame_extra;
  Rng rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double len = g.x_hi - g.x_lo;
  auto smooth_random = [&]() {
    KGPair p{Eigen::VectorXd::Zero(g.n_points), Eigen::VectorXd::Zero(g.n_points)};
    for (int k = 1; k <= 40 && k <= g.n_points; ++k) {
      const double au = gauss(rng) / k, aw = gauss(rng) / k;
      for (int i = 0; i < g.n_points; ++i) {
        const double s = std::sin(k * M_PI * (g.node(i) - g.x_lo) / len);
        p.u[i] += au * s;
        p.ud[i] += aw * s;
      }
    }
    return p;
  };
  std::vector<KGPair> frame;
  for (int c = 0; c < m; ++c) frame.push_back(smooth_random());

  auto energy_ip = [&](const KGPair& a, const KGPair& b) {
    const Tridiag l0 = schrodinger_tridiag(g, Eigen::VectorXd::Ones(g.n_points));
    return grid_ip(g, a.u, tridiag_apply(l0, b.u)) + grid_ip(g, a.ud, b.ud);
  };
  auto orthonormalize = [&](std::vector<KGPair>& cols, std::vector<double>* logr) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      for (std::size_t i = 0; i < j; ++i) {
        const double c = energy_ip(cols[i], cols[j]);
        cols[j].u -= c * cols[i].u;
        cols[j].ud -= c * cols[i].ud;
      }
      const double r = std::sqrt(std::max(energy_ip(cols[j], cols[j]), 0.0));
      if (!(r > 1e-300)) throw CollapseError("kg_dichotomy_verify: frame collapsed");
      cols[j].u /= r;
      cols[j].ud /= r;
      if (logr) (*logr)[j] += std::log(r);
    }
  };
  std::vector<double> logr(static_cast<std::size_t>(m), 0.0);
  orthonormalize(frame, nullptr);

  const int steps = std::max(1, static_cast<int>(std::llround(cfg.big_t / cfg.dt)));
  const double dt = cfg.big_t / steps;
  KGStepper stepper(g, tracks, dt);
  const double burn_time = 0.2 * cfg.big_t;
  std::vector<double> logr_at_burn(static_cast<std::size_t>(m), 0.0);
  bool burn_recorded = false;
  for (int k = 0; k < steps; ++k) {
    const Eigen::VectorXd v_mid = stepper.potential_at((k + 0.5) * dt);
    for (auto& col : frame) stepper.step(col, v_mid);
    if ((k + 1) % cfg.ortho_stride == 0 || k + 1 == steps) orthonormalize(frame, &logr);
    if (!burn_recorded && (k + 1) * dt >= burn_time) {
      logr_at_burn = logr;
      burn_recorded = true;
    }
  }
  const double effective_t = cfg.big_t - (burn_recorded ? burn_time : 0.0);
  for (int j = 0; j < m; ++j)
    report.exponents.push_back(
        (logr[static_cast<std::size_t>(j)] - logr_at_burn[static_cast<std::size_t>(j)]) /
        effective_t);
  std::sort(report.exponents.rbegin(), report.exponents.rend());

  const double thresh = 0.5 * (cfg.eps_stable + std::max(report.unstable_bound, cfg.eps_stable));
  report.codim_measured = static_cast<int>(std::count_if(
      report.exponents.begin(), report.exponents.end(), [thresh](double e) { return e > thresh; }));
  report.codim_pass = report.codim_measured == report.K;
  report.unstable_bound_pass = true;
  report.unstable_rate_pass = true;
  for (int i = 0; i < report.K && i < static_cast<int>(report.exponents.size()); ++i) {
    const double e = report.exponents[static_cast<std::size_t>(i)];
    if (e < report.unstable_bound) report.unstable_bound_pass = false;
    const double oracle = report.oracle_exponents[static_cast<std::size_t>(i)];
    if (std::abs(e - oracle) / oracle > cfg.rate_rel_tol) report.unstable_rate_pass = false;
  }
  report.stable_rate_pass =
      static_cast<int>(report.exponents.size()) <= report.K ||
      report.exponents[static_cast<std::size_t>(report.K)] <= cfg.eps_stable;

  // Conditioned differential inequalities of the certification functionals
  // along sample solutions.
  const double eta_cutoff = tracks.size() > 1 ? cfg.eta : 0.0;
  auto eval_functionals = [&](double t, const KGPair& s, double& ip_out, double& im_out) {
    double sum_plus = 0.0, sum_minus = 0.0, sum_zero = 0.0;
    for (std::size_t j = 0; j < tracks.size(); ++j) {
      const BoostFrame bf(tracks[j].velocity(t));
      const double y = tracks[j].position(t);
      for (std::size_t k = 0; k < modes[j].nu.size(); ++k) {
        const double nu = modes[j].nu[k];
        const double ap = kg_pairing(
            g, kg_j(assemble_object(g, modes[j].neg[k], nu, bf, y, ObjectKind::Minus)), s);
        const double am = kg_pairing(
            g, kg_j(assemble_object(g, modes[j].neg[k], nu, bf, y, ObjectKind::Plus)), s);
        sum_plus += ap * ap;
        sum_minus += am * am;
      }
      for (std::size_t mm = 0; mm < modes[j].zero.size(); ++mm) {
        const double a0 = kg_pairing(
            g, kg_j(assemble_object(g, modes[j].zero[mm], 0.0, bf, y, ObjectKind::Zero)), s);
        sum_zero += a0 * a0;
      }
    }
    ip_out = std::sqrt(sum_plus);
    const double q = q_form(g, tracks, eta_cutoff, t, s);
    im_out = std::sqrt(std::max(0.0, q + sum_minus + sum_zero));
  };

  std::vector<KGPair> starters;
  for (std::size_t j = 0; j < tracks.size(); ++j) {
    const BoostFrame bf(tracks[j].velocity(0.0));
    const double y = tracks[j].position(0.0);
    for (std::size_t k = 0; k < modes[j].nu.size(); ++k) {
      starters.push_back(
          assemble_object(g, modes[j].neg[k], modes[j].nu[k], bf, y, ObjectKind::Plus));
      starters.push_back(
          assemble_object(g, modes[j].neg[k], modes[j].nu[k], bf, y, ObjectKind::Minus));
    }
  }
  starters.push_back(smooth_random());
  const double nu_rate = report.nu_min * std::sqrt(1.0 - cfg.v * cfg.v);
  for (const auto& s0 : starters) {
    const double nn = kg_energy_norm(g, s0);
    if (!(nn > 1e-12)) continue;
    KGPair start{s0.u / nn, s0.ud / nn};
    const KGTrajectory traj = kg_evolve(g, tracks, start, dt, cfg.big_t, cfg.store_stride);
    std::vector<double> ip, im, nrm;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
      double a = 0.0, b = 0.0;
      eval_functionals(traj.times[i], traj.states[i], a, b);
      ip.push_back(a);
      im.push_back(b);
      nrm.push_back(kg_energy_norm(g, traj.states[i]));
    }
    const DiffIneqStats s =
        diff_inequality_stats(traj.times, ip, im, nrm, nu_rate, cfg.c3, cfg.c4);
    report.ineq_checked_plus += s.checked_plus;
    report.ineq_checked_minus += s.checked_minus;
    report.eps_tilde_plus = std::max(report.eps_tilde_plus, s.eps_tilde_plus);
    report.eps_tilde_minus = std::max(report.eps_tilde_minus, s.eps_tilde_minus);
  }
  return report;
}

}  // namespace dicho
