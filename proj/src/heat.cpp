#include "dicho/heat.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>

namespace dicho {

namespace {

// One Crank-Nicolson step of u_t = -(T) u with the operator frozen.
Eigen::VectorXd cn_step(const Tridiag& t, double dt, const Eigen::VectorXd& u) {
  const Eigen::VectorXd rhs = u - 0.5 * dt * tridiag_apply(t, u);
  return solve_shifted_tridiag(t, 1.0, 0.5 * dt, rhs);
}

Eigen::VectorXd moving_potential_sample(const GridSpec& g,
                                        const std::vector<PotentialTrack>& tracks, double t) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(g.n_points);
  for (const auto& tr : tracks) {
    const double y = tr.position(t);
    for (int i = 0; i < g.n_points; ++i) v[i] += tr.shape.f(g.node(i) - y);
  }
  return v;
}

void check_wall_distance(const GridSpec& g, const std::vector<PotentialTrack>& tracks,
                         double t) {
  for (const auto& tr : tracks) {
    const double y = tr.position(t);
    const double margin = 10.0 * tr.shape.decay_length;
    if (y - g.x_lo < margin || g.x_hi - y < margin)
      throw DomainError("heat: track '" + tr.shape.name + "' at t=" + std::to_string(t) +
                        " is closer than 10 decay lengths to a wall");
  }
}

}  // namespace

SpectralData spectral_data(const GridSpec& g, const Eigen::VectorXd& v_pot, double mu_required) {
  if (mu_required < 0.0) throw ContractError("spectral_data: mu_required must be >= 0");
  const Tridiag t = schrodinger_tridiag(g, v_pot);
  SpectralData data;
  data.lambda1 = tridiag_kth_eigenvalue(t, 0);
  data.lambda2 = tridiag_kth_eigenvalue(t, 1);
  if (!(data.lambda1 <= -mu_required && data.lambda2 >= mu_required))
    throw HypothesisError("spectral_data: gap condition fails (lambda1=" +
                          std::to_string(data.lambda1) + ", lambda2=" +
                          std::to_string(data.lambda2) + ", mu=" + std::to_string(mu_required) +
                          ")");
  data.phi1 = tridiag_eigenvector(g, t, data.lambda1);
  if (data.phi1.sum() < 0.0) data.phi1 = -data.phi1;
  const double zero_tol = 10.0 * g.dx() * g.dx();
  for (auto& [lam, vec] : tridiag_eigs_below(g, t, -zero_tol))
    data.negative_modes.emplace_back(-lam, std::move(vec));
  return data;
}

double mollifier_bump(double t) {
  const double s = 2.0 * t;
  if (std::abs(s) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - s * s));
}

TimePotential mollify_potential(const TimePotential& v, int quad_points) {
  if (quad_points < 3) throw ContractError("mollify_potential: need at least 3 nodes");
  auto nodes = std::make_shared<std::vector<std::pair<double, double>>>();
  double mass = 0.0;
  for (int q = 0; q < quad_points; ++q) {
    const double tau = -0.5 + (q + 0.5) / quad_points;
    const double w = mollifier_bump(tau);
    nodes->emplace_back(tau, w);
    mass += w;
  }
  for (auto& [tau, w] : *nodes) w /= mass;
  return [v, nodes](double t) {
    Eigen::VectorXd acc;
    for (const auto& [tau, w] : *nodes) {
      const Eigen::VectorXd term = w * v(t - tau);
      if (acc.size() == 0)
        acc = term;
      else
        acc += term;
    }
    return acc;
  };
}

Eigen::VectorXd backward_heat_evolve(const GridSpec& g, const TimePotential& v,
                                     const Eigen::VectorXd& v_tau, double tau, double t) {
  g.validate();
  if (t > tau) throw ContractError("backward_heat_evolve: require t <= tau");
  if (v_tau.size() != g.n_points) throw ContractError("backward_heat_evolve: state size");
  if (tau == t) return v_tau;
  const int steps = std::max(1, static_cast<int>(std::llround((tau - t) / g.dt)));
  const double dt = (tau - t) / steps;
  Eigen::VectorXd u = v_tau;
  // Reversed time s = tau - t': u_s = Lap u - V(tau - s) u.
  for (int k = 0; k < steps; ++k) {
    const double s_mid = (k + 0.5) * dt;
    const Tridiag op = schrodinger_tridiag(g, v(tau - s_mid));
    u = cn_step(op, dt, u);
  }
  return u;
}

namespace {

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

}  // namespace

RayResult stable_ray_backward_heat(const GridSpec& g, const TimePotential& v, double big_t,
                                   double mu_required, const RayOptions& opts) {
  g.validate();
  if (!(big_t > 0.0)) throw ContractError("stable_ray_backward_heat: horizon must be positive");
  const TimePotential w = mollify_potential(v);

  RayResult result;
  // Spectral-gap hypothesis for the mollified potential, sampled in time.
  result.mu_measured = std::numeric_limits<double>::infinity();
  for (int i = 0; i < opts.gap_check_points; ++i) {
    const double t = big_t * i / std::max(1, opts.gap_check_points - 1);
    const SpectralData sd = spectral_data(g, w(t), mu_required);
    result.mu_measured = std::min({result.mu_measured, -sd.lambda1, sd.lambda2});
  }
  // Oscillation hypothesis, measured on a coarse time grid.
  {
    const double step = 0.25;
    std::vector<std::pair<double, Eigen::VectorXd>> snaps;
    for (double t = 0.0; t <= big_t + 1e-12; t += step) snaps.emplace_back(t, v(t));
    double delta = 0.0;
    for (std::size_t i = 0; i < snaps.size(); ++i)
      for (std::size_t j = i + 1; j < snaps.size(); ++j) {
        if (snaps[j].first - snaps[i].first > 1.0 + 1e-12) break;
        delta = std::max(delta, grid_norm(g, snaps[i].second - snaps[j].second));
      }
    result.measured_delta = delta;
    if (opts.delta_max > 0.0 && delta > opts.delta_max)
      throw HypothesisError("stable_ray_backward_heat: oscillation " + std::to_string(delta) +
                            " exceeds configured delta " + std::to_string(opts.delta_max));
  }

  // Backward evolution of the terminal ground state, normalized each step.
  const int steps = std::max(1, static_cast<int>(std::llround(big_t / g.dt)));
  const double dt = big_t / steps;
  Eigen::VectorXd u = spectral_data(g, w(big_t), mu_required).phi1;
  double lognorm = 0.0;
  std::vector<double> rev_times{big_t}, rev_lognorm{lognorm};
  std::vector<Eigen::VectorXd> rev_states{u};
  for (int k = 0; k < steps; ++k) {
    const double t_mid = big_t - (k + 0.5) * dt;
    const Tridiag op = schrodinger_tridiag(g, v(t_mid));
    u = cn_step(op, dt, u);
    const double nn = grid_norm(g, u);
    if (!(nn > 0.0)) throw Error("stable_ray_backward_heat: state vanished");
    u /= nn;
    lognorm += std::log(nn);
    if ((k + 1) % opts.store_stride == 0 || k + 1 == steps) {
      rev_times.push_back(big_t - (k + 1) * dt);
      rev_lognorm.push_back(lognorm);
      rev_states.push_back(u);
    }
  }
  for (std::size_t i = rev_times.size(); i-- > 0;) {
    result.times.push_back(rev_times[i]);
    result.lognorm.push_back(rev_lognorm[i]);
    result.states.push_back(rev_states[i]);
  }
  // Fitted forward-time rate over [0, fit_fraction * T].
  std::vector<double> ts, ys;
  for (std::size_t i = 0; i < result.times.size(); ++i) {
    if (result.times[i] <= opts.fit_fraction * big_t) {
      ts.push_back(result.times[i]);
      ys.push_back(result.lognorm[i]);
    }
  }
  result.rate = lsq(ts, ys).slope;
  return result;
}

HeatTrajectory heat_moving_evolve(const GridSpec& g, const std::vector<PotentialTrack>& tracks,
                                  const Eigen::VectorXd& u0, double big_t, int store_stride) {
  g.validate();
  if (u0.size() != g.n_points) throw ContractError("heat_moving_evolve: state size");
  if (store_stride < 1) throw ContractError("heat_moving_evolve: store_stride >= 1");
  const int steps = std::max(1, static_cast<int>(std::llround(big_t / g.dt)));
  const double dt = big_t / steps;
  check_wall_distance(g, tracks, 0.0);
  HeatTrajectory traj;
  traj.dt = dt;
  traj.times.push_back(0.0);
  traj.states.push_back(u0);
  Eigen::VectorXd u = u0;
  for (int k = 0; k < steps; ++k) {
    const double t_mid = (k + 0.5) * dt;
    check_wall_distance(g, tracks, t_mid);
    // u_t = Lap u - sum_j V_j(. - x_j(t)) u, i.e. u_t = -(T) u with
    // T = -Lap + V.
    const Tridiag op = schrodinger_tridiag(g, moving_potential_sample(g, tracks, t_mid));
    u = cn_step(op, dt, u);
    if ((k + 1) % store_stride == 0 || k + 1 == steps) {
      traj.times.push_back((k + 1) * dt);
      traj.states.push_back(u);
    }
  }
  return traj;
}

TimeFunctionalPair moving_cone_functionals(const GridSpec& g,
                                           const std::vector<PotentialTrack>& tracks,
                                           const std::vector<SpectralData>& spectral) {
  if (tracks.size() != spectral.size())
    throw ContractError("moving_cone_functionals: tracks/spectral size mismatch");
  struct ModeRef {
    std::shared_ptr<CubicInterpolant> interp;
    std::size_t track;
  };
  auto modes = std::make_shared<std::vector<ModeRef>>();
  const double c0 = 0.5 * (g.x_lo + g.x_hi);
  for (std::size_t j = 0; j < tracks.size(); ++j)
    for (const auto& [rate, vec] : spectral[j].negative_modes)
      modes->push_back({std::make_shared<CubicInterpolant>(g, vec), j});
  const int K = static_cast<int>(modes->size());
  auto tracks_copy = std::make_shared<std::vector<PotentialTrack>>(tracks);
  auto grid = std::make_shared<GridSpec>(g);

  auto shifted_mode = [modes, tracks_copy, grid, c0](int k, double t) {
    const auto& mode = (*modes)[static_cast<std::size_t>(k)];
    const double y = (*tracks_copy)[mode.track].position(t);
    Eigen::VectorXd out(grid->n_points);
    for (int i = 0; i < grid->n_points; ++i) out[i] = (*mode.interp)(grid->node(i) - y + c0);
    return out;
  };

  TimeFunctionalPair pair;
  pair.K = K;
  pair.c1 = 1.0 / (1.0 + std::max(1, K));
  pair.c2 = K > 0 ? 1.0 / K : 1.0;
  pair.covector = shifted_mode;
  pair.eval_minus = [grid](double, const Eigen::VectorXd& u) { return grid_norm(*grid, u); };
  pair.eval_plus = [shifted_mode, K, grid](double t, const Eigen::VectorXd& u) {
    double acc = 0.0;
    for (int k = 0; k < K; ++k) acc += std::abs(grid_ip(*grid, shifted_mode(k, t), u));
    return acc;
  };
  return pair;
}

TimeFunctionalPair backward_heat_functionals(const GridSpec& g, const TimePotential& w,
                                             double c0_scale) {
  auto grid = std::make_shared<GridSpec>(g);
  auto cache = std::make_shared<std::map<double, Eigen::VectorXd>>();
  auto ground_state = [grid, cache, w](double t) -> const Eigen::VectorXd& {
    auto it = cache->find(t);
    if (it == cache->end()) {
      const Tridiag op = schrodinger_tridiag(*grid, w(t));
      Eigen::VectorXd phi =
          tridiag_eigenvector(*grid, op, tridiag_kth_eigenvalue(op, 0));
      if (phi.sum() < 0.0) phi = -phi;
      it = cache->emplace(t, std::move(phi)).first;
    }
    return it->second;
  };
  TimeFunctionalPair pair;
  pair.K = 1;
  pair.c2 = 1.0;
  pair.c1 = 0.0;  // measured per application; depends on the potential scale
  pair.covector = [ground_state, c0_scale](int k, double t) -> Eigen::VectorXd {
    if (k != 0) throw ContractError("backward_heat_functionals: single covector");
    return c0_scale * ground_state(t);
  };
  pair.eval_minus = [grid, ground_state, c0_scale](double t, const Eigen::VectorXd& u) {
    return c0_scale * std::abs(grid_ip(*grid, ground_state(t), u));
  };
  pair.eval_plus = [grid, w](double t, const Eigen::VectorXd& u) {
    const double form = dirichlet_form(*grid, u) + grid_ip(*grid, w(t).cwiseProduct(u), u);
    return std::sqrt(std::max(0.0, form));
  };
  return pair;
}

CoercivityReport coercivity_check(const GridSpec& g, const std::vector<PotentialTrack>& tracks,
                                  double c0, double epsilon, int samples, std::uint64_t seed,
                                  double t) {
  if (!(c0 > 0.0)) throw ContractError("coercivity_check: C0 must be positive");
  std::vector<SpectralData> spectral;
  for (const auto& tr : tracks)
    spectral.push_back(spectral_data(g, centered_potential(g, tr.shape), 0.0));
  TimeFunctionalPair pair = moving_cone_functionals(g, tracks, spectral);
  const Eigen::VectorXd v_pot = moving_potential_sample(g, tracks, t);
  const Tridiag op = schrodinger_tridiag(g, v_pot);

  // Smooth ensemble: shifted negative modes plus low-frequency sines.
  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double len = g.x_hi - g.x_lo;
  std::vector<Eigen::VectorXd> ensemble;
  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(g.n_points);
    for (int k = 0; k < pair.K; ++k) u += gauss(rng) * pair.covector(k, t);
    for (int m = 1; m <= 10; ++m) {
      const double amp = gauss(rng) / m;
      for (int i = 0; i < g.n_points; ++i)
        u[i] += amp * std::sin(m * M_PI * (g.node(i) - g.x_lo) / len);
    }
    const double nn = grid_norm(g, u);
    if (nn > 1e-12) ensemble.push_back(u / nn);
  }

  auto normalized_value = [&](const Eigen::VectorXd& u, double c0_val) {
    const double form = grid_ip(g, u, tridiag_apply(op, u));
    double penalty = 0.0;
    for (int k = 0; k < pair.K; ++k) {
      const double a = grid_ip(g, pair.covector(k, t), u);
      penalty += a * a;
    }
    return form + c0_val * penalty;  // samples are unit vectors
  };

  CoercivityReport report;
  report.min_value = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < ensemble.size(); ++s) {
    const double val = normalized_value(ensemble[s], c0);
    report.min_value = std::min(report.min_value, val);
    if (val < -epsilon) report.failed_samples.push_back(static_cast<int>(s));
  }
  report.pass = report.failed_samples.empty();

  auto admissible = [&](double c0_val) {
    for (const auto& u : ensemble)
      if (normalized_value(u, c0_val) < -epsilon) return false;
    return true;
  };
  if (admissible(0.0)) {
    report.c0_min = 0.0;
  } else if (!admissible(c0)) {
    report.c0_min = std::numeric_limits<double>::infinity();
  } else {
    double lo = 0.0, hi = c0;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (admissible(mid) ? hi : lo) = mid;
    }
    report.c0_min = hi;
  }
  return report;
}

DiffIneqStats diff_inequality_stats(const std::vector<double>& times,
                                    const std::vector<double>& i_plus,
                                    const std::vector<double>& i_minus,
                                    const std::vector<double>& norms, double growth_rate,
                                    double c3, double c4) {
  const std::size_t n = times.size();
  if (i_plus.size() != n || i_minus.size() != n || norms.size() != n || n < 3)
    throw ContractError("diff_inequality_stats: inconsistent series");
  DiffIneqStats stats;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double dt2 = times[i + 1] - times[i - 1];
    if (!(dt2 > 0.0)) throw ContractError("diff_inequality_stats: times not increasing");
    const double nrm = std::max(norms[i], 1e-300);
    if (i_plus[i] >= c4 * i_minus[i]) {
      ++stats.checked_plus;
      const double d_ip = (i_plus[i + 1] - i_plus[i - 1]) / dt2;
      stats.eps_tilde_plus =
          std::max(stats.eps_tilde_plus, (growth_rate * i_plus[i] - d_ip) / nrm);
    }
    if (i_plus[i] <= c3 * i_minus[i]) {
      ++stats.checked_minus;
      const double d_im = (i_minus[i + 1] - i_minus[i - 1]) / dt2;
      stats.eps_tilde_minus = std::max(stats.eps_tilde_minus, d_im / nrm);
    }
  }
  stats.eps_tilde_plus = std::max(stats.eps_tilde_plus, 0.0);
  stats.eps_tilde_minus = std::max(stats.eps_tilde_minus, 0.0);
  return stats;
}

HeatDichotomyReport heat_moving_dichotomy(const GridSpec& g,
                                          const std::vector<PotentialTrack>& tracks,
                                          const HeatDichotomyConfig& cfg) {
  g.validate();
  HeatDichotomyReport report;

  std::vector<SpectralData> spectral;
  for (const auto& tr : tracks)
    spectral.push_back(spectral_data(g, centered_potential(g, tr.shape), 0.0));
  for (const auto& sd : spectral)
    for (const auto& [rate, vec] : sd.negative_modes) report.oracle_rates.push_back(rate);
  std::sort(report.oracle_rates.rbegin(), report.oracle_rates.rend());
  report.K = static_cast<int>(report.oracle_rates.size());
  if (report.K == 0) throw HypothesisError("heat_moving_dichotomy: no negative modes");
  report.lambda_min = report.oracle_rates.back();

  // Hypotheses: velocity bound, pairwise separation, wall distance.
  report.hypothesis_pass = true;
  const int checks = 33;
  for (int i = 0; i <= checks; ++i) {
    const double t = cfg.big_t * i / checks;
    for (std::size_t j = 0; j < tracks.size(); ++j) {
      if (std::abs(tracks[j].velocity(t)) > cfg.eta + 1e-12) {
        report.hypothesis_pass = false;
        report.hypothesis_notes.push_back("velocity bound |x_j'| <= eta fails at t=" +
                                          std::to_string(t));
      }
      for (std::size_t l = j + 1; l < tracks.size(); ++l) {
        if (std::abs(tracks[j].position(t) - tracks[l].position(t)) < 1.0 / cfg.eta) {
          report.hypothesis_pass = false;
          report.hypothesis_notes.push_back("separation |x_j - x_l| >= 1/eta fails at t=" +
                                            std::to_string(t));
        }
      }
    }
  }
  check_wall_distance(g, tracks, 0.0);
  check_wall_distance(g, tracks, cfg.big_t);

  report.coercivity =
      coercivity_check(g, tracks, cfg.coercivity_c0, cfg.eps_stable / 2.0, 200, cfg.seed + 1);

  // QR-filtered frame: exponents per direction, burn-in discarded.
  const int m = report.K + cfg.frame_extra;
  Rng rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double len = g.x_hi - g.x_lo;
  std::vector<Eigen::VectorXd> frame;
  for (int c = 0; c < m; ++c) {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(g.n_points);
    for (int k = 1; k <= 40 && k <= g.n_points; ++k) {
      const double amp = gauss(rng) / k;
      for (int i = 0; i < g.n_points; ++i)
        u[i] += amp * std::sin(k * M_PI * (g.node(i) - g.x_lo) / len);
    }
    frame.push_back(u);
  }
  auto orthonormalize = [&](std::vector<Eigen::VectorXd>& cols, std::vector<double>* logr) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      for (std::size_t i = 0; i < j; ++i)
        cols[j] -= grid_ip(g, cols[i], cols[j]) * cols[i];
      const double r = grid_norm(g, cols[j]);
      if (!(r > 1e-300)) throw CollapseError("heat_moving_dichotomy: frame collapsed");
      cols[j] /= r;
      if (logr) (*logr)[j] += std::log(r);
    }
  };
  std::vector<double> logr(static_cast<std::size_t>(m), 0.0);
  orthonormalize(frame, nullptr);

  const int steps = std::max(1, static_cast<int>(std::llround(cfg.big_t / g.dt)));
  const double dt = cfg.big_t / steps;
  const double burn_time = 0.2 * cfg.big_t;
  std::vector<double> logr_at_burn(static_cast<std::size_t>(m), 0.0);
  bool burn_recorded = false;
  for (int k = 0; k < steps; ++k) {
    const double t_mid = (k + 0.5) * dt;
    const Tridiag op = schrodinger_tridiag(g, moving_potential_sample(g, tracks, t_mid));
    for (auto& col : frame) col = cn_step(op, dt, col);
    const bool last = k + 1 == steps;
    if ((k + 1) % cfg.ortho_stride == 0 || last) orthonormalize(frame, &logr);
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

  const double thresh = 0.5 * (cfg.eps_stable + report.lambda_min * (1.0 - cfg.rate_rel_tol));
  report.codim_measured = static_cast<int>(
      std::count_if(report.exponents.begin(), report.exponents.end(),
                    [thresh](double e) { return e > thresh; }));
  report.codim_pass = report.codim_measured == report.K;
  report.unstable_rate_pass = true;
  for (int i = 0; i < report.K && i < static_cast<int>(report.exponents.size()); ++i) {
    const double rel =
        std::abs(report.exponents[static_cast<std::size_t>(i)] -
                 report.oracle_rates[static_cast<std::size_t>(i)]) /
        report.oracle_rates[static_cast<std::size_t>(i)];
    if (rel > cfg.rate_rel_tol) report.unstable_rate_pass = false;
  }
  report.stable_rate_pass =
      static_cast<int>(report.exponents.size()) <= report.K ||
      report.exponents[static_cast<std::size_t>(report.K)] <= cfg.eps_stable;

  // Conditioned differential inequalities along sample solutions.
  TimeFunctionalPair pair = moving_cone_functionals(g, tracks, spectral);
  std::vector<Eigen::VectorXd> starters;
  for (int k = 0; k < pair.K; ++k) starters.push_back(pair.covector(k, 0.0));
  {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(g.n_points);
    for (int k = 1; k <= 20; ++k) {
      const double amp = gauss(rng) / k;
      for (int i = 0; i < g.n_points; ++i)
        u[i] += amp * std::sin(k * M_PI * (g.node(i) - g.x_lo) / len);
    }
    starters.push_back(u);
  }
  DiffIneqStats agg;
  for (const auto& u0 : starters) {
    const double nn = grid_norm(g, u0);
    if (!(nn > 1e-12)) continue;
    HeatTrajectory traj = heat_moving_evolve(g, tracks, u0 / nn, cfg.big_t, cfg.store_stride);
    std::vector<double> ip, im, nrm;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
      ip.push_back(pair.eval_plus(traj.times[i], traj.states[i]));
      im.push_back(pair.eval_minus(traj.times[i], traj.states[i]));
      nrm.push_back(grid_norm(g, traj.states[i]));
    }
    const DiffIneqStats s = diff_inequality_stats(traj.times, ip, im, nrm, report.lambda_min,
                                                  cfg.c3, cfg.c4);
    agg.checked_plus += s.checked_plus;
    agg.checked_minus += s.checked_minus;
    agg.eps_tilde_plus = std::max(agg.eps_tilde_plus, s.eps_tilde_plus);
    agg.eps_tilde_minus = std::max(agg.eps_tilde_minus, s.eps_tilde_minus);
  }
  report.ineq = agg;
  return report;
}

}  // namespace dicho
