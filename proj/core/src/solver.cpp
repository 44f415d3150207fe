#include "pmelab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pmelab/errors.hpp"
#include "pmelab/quadrature.hpp"
#include "pmelab/util.hpp"

namespace pmelab {

namespace {

constexpr double kTiny = 1e-300;

double signed_power(double u, double m) {
  // u^m = |u|^{m-1} u
  if (u == 0.0) return 0.0;
  return std::copysign(std::pow(std::abs(u), m), u);
}

double mass_of(const std::vector<double>& u, const RadialGrid& grid) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * grid.volumes[i];
  return s;
}

double mass_of_abs(const std::vector<double>& u, const RadialGrid& grid) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += std::abs(u[i]) * grid.volumes[i];
  return s;
}

// Tridiagonal solve by the Thomas algorithm; diag is strictly dominant here.
void solve_tridiagonal(std::vector<double>& lower, std::vector<double>& diag,
                       std::vector<double>& upper, std::vector<double>& rhs) {
  const std::size_t n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double w = lower[i] / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  rhs[n - 1] /= diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) {
    rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
  }
}

struct SchemeGeometry {
  std::vector<double> gap;  // gap[j], j = 1..M: distance between the unknowns
                            // coupled through interface j (centers, or center
                            // to wall for j = M)
  explicit SchemeGeometry(const RadialGrid& g) {
    const std::size_t m = g.cell_count();
    gap.assign(m + 1, 1.0);
    for (std::size_t j = 1; j < m; ++j) gap[j] = g.centers[j] - g.centers[j - 1];
    gap[m] = g.interfaces[m] - g.centers[m - 1];
  }
};

// Residual of the backward-Euler system; fluxes are centered differences of
// w = u^m with a zero ghost value at the wall.
void residual(const std::vector<double>& u_old, const std::vector<double>& u_new,
              const std::vector<double>& w_new, double dt, const RadialGrid& grid,
              const SchemeGeometry& geo, std::vector<double>& out) {
  const std::size_t m = u_old.size();
  out.resize(m);
  auto flux = [&](std::size_t j) {
    if (j == 0) return 0.0;
    const double wl = w_new[j - 1];
    const double wr = j < m ? w_new[j] : 0.0;
    return grid.areas[j] * (wr - wl) / geo.gap[j];
  };
  double f_left = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double f_right = flux(i + 1);
    out[i] = grid.volumes[i] * (u_new[i] - u_old[i]) - dt * (f_right - f_left);
    f_left = f_right;
  }
}

double norm1(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

}  // namespace

void SolverConfig::validate() const {
  if (!(m > 1.0)) throw ValidationError("solver: m must exceed 1");
  if (!(dt_init > 0.0)) throw ValidationError("solver: dt_init must be positive");
  if (!(dt_growth >= 1.0)) throw ValidationError("solver: dt_growth must be >= 1");
  if (!(dt_max_ratio > 0.0)) throw ValidationError("solver: dt_max_ratio must be positive");
  if (!(t_end > 0.0)) throw ValidationError("solver: t_end must be positive");
  if (!(newton_tol > 0.0)) throw ValidationError("solver: newton_tol must be positive");
  if (newton_max_iter < 1) throw ValidationError("solver: newton_max_iter must be >= 1");
  if (jacobian_regularization < 0.0) {
    throw ValidationError("solver: jacobian regularization must be >= 0");
  }
  if (cells < 16) throw ValidationError("solver: need at least 16 cells");
  if (!(grading > 0.0)) throw ValidationError("solver: grading must be positive");
  if (!(snapshot_start > 0.0)) throw ValidationError("solver: snapshot_start must be positive");
  if (snapshots_per_decade < 1) throw ValidationError("solver: snapshots_per_decade >= 1");
}

double SolverConfig::alpha() const { return double(dimension_) / ((m - 1.0) * dimension_ + 2.0); }
double SolverConfig::beta() const { return 2.0 / ((m - 1.0) * dimension_ + 2.0); }

RadialField Trajectory::field_at(std::size_t snapshot_index) const {
  return RadialField(grid, snapshots.at(snapshot_index).values);
}

const TrajectorySnapshot& Trajectory::snapshot_nearest(double t) const {
  if (snapshots.empty()) throw ValidationError("trajectory has no snapshots");
  std::size_t best = 0;
  for (std::size_t i = 1; i < snapshots.size(); ++i) {
    if (std::abs(snapshots[i].t - t) < std::abs(snapshots[best].t - t)) best = i;
  }
  return snapshots[best];
}

std::shared_ptr<const RadialGrid> build_grid(std::shared_ptr<const ManifoldProfile> profile,
                                             double R, int cells, double grading) {
  if (!(R > 0.0)) throw ValidationError("build_grid: R must be positive");
  if (R > profile->max_radius()) throw ValidationError("build_grid: R beyond profile range");
  if (cells < 16) throw ValidationError("build_grid: need at least 16 cells");
  if (!(grading > 0.0)) throw ValidationError("build_grid: grading must be positive");

  auto grid = std::make_shared<RadialGrid>();
  grid->profile = profile;
  grid->interfaces.resize(cells + 1);
  grid->interfaces[0] = 0.0;
  double w0;
  if (std::abs(grading - 1.0) < 1e-14) {
    w0 = R / cells;
  } else {
    w0 = R * (grading - 1.0) / std::expm1(cells * std::log(grading));
  }
  if (!(w0 > R * 1e-12)) throw ValidationError("build_grid: grading collapses the first cell");
  double w = w0;
  for (int i = 0; i < cells; ++i) {
    grid->interfaces[i + 1] = grid->interfaces[i] + w;
    w *= grading;
  }
  grid->interfaces[cells] = R;  // kill accumulated roundoff

  grid->centers.resize(cells);
  grid->volumes.resize(cells);
  grid->areas.resize(cells + 1);
  const ManifoldProfile& p = *profile;
  const double pw = double(p.dimension() - 1);
  const double omega = p.unit_sphere_area();
  grid->areas[0] = 0.0;
  auto integrand = [&](double s) { return s == 0.0 ? 0.0 : p.psi_power(s, pw); };
  for (int i = 0; i < cells; ++i) {
    const double a = grid->interfaces[i], b = grid->interfaces[i + 1];
    grid->centers[i] = 0.5 * (a + b);
    grid->volumes[i] = omega * integrate(integrand, a, b);
    grid->areas[i + 1] = omega * p.psi_power(b, pw);
  }
  return grid;
}

StepResult step_implicit(std::vector<double>& state, double dt, const RadialGrid& grid,
                         const SolverConfig& cfg) {
  const std::size_t m_cells = grid.cell_count();
  if (state.size() != m_cells) throw ValidationError("step_implicit: state/grid mismatch");
  if (!(dt > 0.0)) throw ValidationError("step_implicit: dt must be positive");
  const double m = cfg.m;

  const SchemeGeometry geo(grid);
  const std::vector<double> u_old = state;
  std::vector<double> u = state;  // Newton iterate

  double linf_old = 0.0;
  for (double v : u_old) linf_old = std::max(linf_old, std::abs(v));
  const double eps_j = cfg.jacobian_regularization * std::pow(linf_old, m - 1.0);
  const double scale = std::max(mass_of_abs(u_old, grid), kTiny);
  const double tol = cfg.newton_tol * scale;

  std::vector<double> w(m_cells), res(m_cells), lower(m_cells), diag(m_cells),
      upper(m_cells), rhs(m_cells);

  auto eval_residual = [&](const std::vector<double>& un, std::vector<double>& out) {
    for (std::size_t i = 0; i < m_cells; ++i) w[i] = signed_power(un[i], m);
    residual(u_old, un, w, dt, grid, geo, out);
  };

  eval_residual(u, res);
  double rnorm = norm1(res);
  StepResult result;
  for (int iter = 0; iter < cfg.newton_max_iter; ++iter) {
    if (rnorm <= tol) {
      result.converged = true;
      result.iterations = iter;
      result.residual = rnorm;
      break;
    }
    // Tridiagonal Jacobian with dw/du = m|u|^{m-1} + eps_J on the chain rule.
    for (std::size_t i = 0; i < m_cells; ++i) {
      const double dwi = m * std::pow(std::abs(u[i]), m - 1.0) + eps_j;
      const double c_left = grid.areas[i] / geo.gap[i];
      const double c_right = grid.areas[i + 1] / geo.gap[i + 1];
      diag[i] = grid.volumes[i] + dt * (c_left + c_right) * dwi;
      if (i > 0) {
        const double dwl = m * std::pow(std::abs(u[i - 1]), m - 1.0) + eps_j;
        lower[i] = -dt * c_left * dwl;
      }
      if (i + 1 < m_cells) {
        const double dwr = m * std::pow(std::abs(u[i + 1]), m - 1.0) + eps_j;
        upper[i] = -dt * c_right * dwr;
      }
    }
    rhs = res;
    solve_tridiagonal(lower, diag, upper, rhs);

    // Damped update: halve until the residual stops growing.
    double lambda = 1.0;
    std::vector<double> trial(m_cells), trial_res(m_cells);
    double trial_norm = 0.0;
    for (int ls = 0; ls < 8; ++ls) {
      for (std::size_t i = 0; i < m_cells; ++i) trial[i] = u[i] - lambda * rhs[i];
      eval_residual(trial, trial_res);
      trial_norm = norm1(trial_res);
      if (trial_norm < rnorm || trial_norm <= tol) break;
      lambda *= 0.5;
    }
    u.swap(trial);
    res.swap(trial_res);
    rnorm = trial_norm;
    result.iterations = iter + 1;
  }
  if (!result.converged && rnorm <= tol) {
    result.converged = true;
    result.residual = rnorm;
  }
  if (!result.converged) {
    result.residual = rnorm;
    return result;  // caller halves dt; state untouched
  }

  if (!cfg.signed_mode) {
    // The converged system is an M-matrix problem: genuine negatives signal
    // non-convergence, anything smaller is roundoff.
    for (double& v : u) {
      if (v < 0.0) v = 0.0;
    }
  }
  state.swap(u);
  return result;
}

RadialField mollify_measure(const RadialMeasure& mu, double eps,
                            std::shared_ptr<const RadialGrid> grid) {
  if (!(eps > 0.0)) throw ValidationError("mollify: eps must be positive");
  if (eps > grid->radius()) throw ValidationError("mollify: eps exceeds the ball radius");
  const ManifoldProfile& p = *grid->profile;
  const double pw = double(p.dimension() - 1);
  const double omega = p.unit_sphere_area();
  const std::size_t m = grid->cell_count();
  std::vector<double> values(m, 0.0);

  if (mu.has_density()) {
    const RadialField& f = mu.density_field();
    if (f.grid()->radius() > grid->radius() * (1.0 + 1e-12)) {
      throw ValidationError("mollify: density support exceeds the ball");
    }
    for (std::size_t i = 0; i < m; ++i) {
      auto integrand = [&](double s) { return s == 0.0 ? 0.0 : f(s) * p.psi_power(s, pw); };
      values[i] = omega * integrate(integrand, grid->interfaces[i], grid->interfaces[i + 1]) /
                  grid->volumes[i];
    }
  }

  if (mu.atom_mass() != 0.0) {
    // C^2 bump (1 - (s/eps)^2)^3, cell-averaged and rescaled so the discrete
    // mass equals the atom exactly.
    std::vector<double> raw(m, 0.0);
    double total = 0.0;
    auto bump = [&](double s) {
      const double x = s / eps;
      if (x >= 1.0 || s == 0.0) return 0.0;
      const double q = 1.0 - x * x;
      return q * q * q * p.psi_power(s, pw);
    };
    for (std::size_t i = 0; i < m && grid->interfaces[i] < eps; ++i) {
      const double hi = std::min(grid->interfaces[i + 1], eps);
      raw[i] = omega * integrate(bump, grid->interfaces[i], hi);
      total += raw[i];
    }
    if (!(total > 0.0)) throw NumericalError("mollify: empty bump quadrature");
    const double scalef = mu.atom_mass() / total;
    for (std::size_t i = 0; i < m; ++i) values[i] += scalef * raw[i] / grid->volumes[i];
  }
  return RadialField(grid, std::move(values));
}

Trajectory integrate_pme(std::shared_ptr<const RadialGrid> grid, std::vector<double> initial,
                         const SolverConfig& cfg) {
  cfg.validate();
  if (initial.size() != grid->cell_count()) {
    throw ValidationError("integrate_pme: initial state does not match the grid");
  }

  Trajectory traj;
  traj.grid = grid;
  traj.exponent_m = cfg.m;
  traj.initial_mass = mass_of(initial, *grid);

  const SchemeGeometry geo(*grid);
  const std::size_t mc = grid->cell_count();
  std::vector<double> state = std::move(initial);

  auto record_diag = [&](double t, double dt, int iters, double diss_cum, double outflux_cum) {
    TrajectoryDiagnostics d;
    d.t = t;
    d.dt = dt;
    d.mass = mass_of(state, *grid);
    for (double v : state) d.linf = std::max(d.linf, std::abs(v));
    for (std::size_t i = 0; i < mc; ++i) {
      d.mp1_integral += std::pow(std::abs(state[i]), cfg.m + 1.0) * grid->volumes[i];
    }
    d.lmp1 = std::pow(d.mp1_integral, 1.0 / (cfg.m + 1.0));
    d.dissipation_cum = diss_cum;
    d.boundary_outflux_cum = outflux_cum;
    d.newton_iterations = iters;
    traj.diagnostics.push_back(d);
  };

  double t = 0.0, dt = cfg.dt_init;
  double diss_cum = 0.0, outflux_cum = 0.0;
  record_diag(0.0, 0.0, 0, 0.0, 0.0);
  traj.snapshots.push_back({0.0, state});

  const double snap_ratio = std::pow(10.0, 1.0 / cfg.snapshots_per_decade);
  double next_snap = cfg.snapshot_start;
  const double dt_floor = std::max(1e-300, cfg.dt_init * 1e-12);

  while (t < cfg.t_end * (1.0 - 1e-14)) {
    double dt_eff = std::min(dt, cfg.t_end - t);
    if (t > 0.0) dt_eff = std::min(dt_eff, cfg.dt_max_ratio * t);
    if (next_snap <= cfg.t_end && next_snap > t) dt_eff = std::min(dt_eff, next_snap - t);

    std::vector<double> attempt = state;
    const StepResult sr = step_implicit(attempt, dt_eff, *grid, cfg);
    if (!sr.converged) {
      dt = 0.5 * dt_eff;
      if (dt < dt_floor) {
        traj.completed = false;
        traj.abort_reason = "dt underflow after repeated Newton failures";
        throw NumericalError(traj.abort_reason);
      }
      continue;
    }

    // Ledger updates from the accepted state.
    double diss = 0.0;
    std::vector<double> w(mc);
    for (std::size_t i = 0; i < mc; ++i) w[i] = signed_power(attempt[i], cfg.m);
    for (std::size_t j = 1; j < mc; ++j) {
      const double dwdr = (w[j] - w[j - 1]) / geo.gap[j];
      diss += grid->areas[j] * dwdr * dwdr * geo.gap[j];
    }
    const double wall_grad = (0.0 - w[mc - 1]) / geo.gap[mc];
    diss += grid->areas[mc] * wall_grad * wall_grad * geo.gap[mc];
    const double outflux_rate = grid->areas[mc] * w[mc - 1] / geo.gap[mc];

    const double mass_before = mass_of(state, *grid);
    state.swap(attempt);
    t += dt_eff;
    diss_cum += dt_eff * diss;
    outflux_cum += dt_eff * outflux_rate;
    const double defect =
        std::abs(mass_of(state, *grid) - mass_before + dt_eff * outflux_rate);
    traj.max_conservation_defect = std::max(traj.max_conservation_defect, defect);

    record_diag(t, dt_eff, sr.iterations, diss_cum, outflux_cum);
    if (next_snap <= t * (1.0 + 1e-12)) {
      traj.snapshots.push_back({t, state});
      while (next_snap <= t * (1.0 + 1e-12)) next_snap *= snap_ratio;
    }
    dt = dt_eff * cfg.dt_growth;
  }
  if (traj.snapshots.back().t < cfg.t_end * (1.0 - 1e-12)) {
    traj.snapshots.push_back({t, state});
  }
  traj.completed = true;
  return traj;
}

Trajectory solve_ball(std::shared_ptr<const ManifoldProfile> profile, double R,
                      const RadialMeasure& mu, double eps, const SolverConfig& cfg) {
  auto grid = build_grid(profile, R, cfg.cells, cfg.grading);
  RadialField u0 = mollify_measure(mu, eps, grid);
  SolverConfig c = cfg;
  c.set_dimension(profile->dimension());
  std::vector<double> init = u0.values();
  return integrate_pme(grid, std::move(init), c);
}

CauchyResult solve_cauchy(std::shared_ptr<const ManifoldProfile> profile,
                          const RadialMeasure& mu, const SolverConfig& cfg,
                          const std::vector<double>& R_schedule,
                          const std::vector<double>& eps_schedule) {
  if (R_schedule.empty() || R_schedule.size() != eps_schedule.size()) {
    throw ValidationError("solve_cauchy: R and eps schedules must have equal nonzero length");
  }
  for (std::size_t i = 0; i + 1 < R_schedule.size(); ++i) {
    if (!(R_schedule[i] < R_schedule[i + 1])) {
      throw ValidationError("solve_cauchy: R schedule must increase");
    }
    if (eps_schedule[i] < eps_schedule[i + 1]) {
      throw ValidationError("solve_cauchy: eps schedule must not increase");
    }
  }

  const double R_max = R_schedule.back();
  auto master = build_grid(profile, R_max, cfg.cells, cfg.grading);

  CauchyResult result;
  for (std::size_t k = 0; k < R_schedule.size(); ++k) {
    // Snap the requested radius to the nearest master interface so every run
    // is a prefix of the same grid and comparable cell by cell.
    const auto& xs = master->interfaces;
    auto it = std::lower_bound(xs.begin(), xs.end(), R_schedule[k]);
    std::size_t idx = std::size_t(std::distance(xs.begin(), it));
    if (idx > 0 && (idx == xs.size() ||
                    std::abs(xs[idx - 1] - R_schedule[k]) < std::abs(xs[idx] - R_schedule[k]))) {
      --idx;
    }
    idx = std::max<std::size_t>(idx, 16);
    idx = std::min(idx, xs.size() - 1);

    auto sub = std::make_shared<RadialGrid>();
    sub->profile = master->profile;
    sub->interfaces.assign(xs.begin(), xs.begin() + idx + 1);
    sub->centers.assign(master->centers.begin(), master->centers.begin() + idx);
    sub->volumes.assign(master->volumes.begin(), master->volumes.begin() + idx);
    sub->areas.assign(master->areas.begin(), master->areas.begin() + idx + 1);
    result.radii_used.push_back(sub->radius());

    RadialField u0 = mollify_measure(mu, eps_schedule[k], sub);
    SolverConfig c = cfg;
    c.set_dimension(profile->dimension());
    result.runs.push_back(integrate_pme(sub, u0.values(), c));
  }

  const bool check_monotone = mu.is_nonnegative() && !cfg.signed_mode;
  if (check_monotone && result.runs.size() >= 2) {
    for (std::size_t k = 0; k + 1 < result.runs.size(); ++k) {
      const Trajectory& lo = result.runs[k];
      const Trajectory& hi = result.runs[k + 1];
      const std::size_t shared_cells = lo.grid->cell_count();
      const std::size_t n_snap = std::min(lo.snapshots.size(), hi.snapshots.size());
      for (std::size_t s = 0; s < n_snap; ++s) {
        for (std::size_t i = 0; i < shared_cells; ++i) {
          const double v = lo.snapshots[s].values[i] - hi.snapshots[s].values[i];
          result.max_monotonicity_violation =
              std::max(result.max_monotonicity_violation, v);
        }
      }
    }
    result.monotone_in_R = result.max_monotonicity_violation <= 1e-9;
  }

  if (result.runs.size() >= 2) {
    const Trajectory& a = result.runs[result.runs.size() - 2];
    const Trajectory& b = result.runs.back();
    const auto& ua = a.snapshots.back().values;
    const auto& ub = b.snapshots.back().values;
    const std::size_t shared_cells = a.grid->cell_count();
    for (std::size_t i = 0; i < shared_cells; ++i) {
      const double d = std::abs(ua[i] - ub[i]);
      result.final_max_difference = std::max(result.final_max_difference, d);
      result.final_l1_difference += d * a.grid->volumes[i];
    }
    for (std::size_t i = shared_cells; i < ub.size(); ++i) {
      result.final_l1_difference += std::abs(ub[i]) * b.grid->volumes[i];
    }
  }
  return result;
}

std::pair<double, double> smoothing_exponent_fit(const Trajectory& traj, double t_lo,
                                                 double t_hi) {
  std::vector<double> lx, ly;
  for (const auto& d : traj.diagnostics) {
    if (d.t >= t_lo && d.t <= t_hi && d.linf > 0.0) {
      lx.push_back(std::log(d.t));
      ly.push_back(std::log(d.linf));
    }
  }
  if (lx.size() < 5) {
    throw ValidationError("smoothing fit: fewer than 5 steps in the fit window");
  }
  return linear_fit(lx, ly);
}

double energy_ledger_defect(const Trajectory& traj, double t1, double t2) {
  if (!(t1 < t2)) throw ValidationError("energy ledger: need t1 < t2");
  const TrajectoryDiagnostics* d1 = nullptr;
  const TrajectoryDiagnostics* d2 = nullptr;
  for (const auto& d : traj.diagnostics) {
    if (!d1 || std::abs(d.t - t1) < std::abs(d1->t - t1)) d1 = &d;
    if (!d2 || std::abs(d.t - t2) < std::abs(d2->t - t2)) d2 = &d;
  }
  const double mp1 = traj.exponent_m + 1.0;
  const double e1 = d1->mp1_integral / mp1;
  const double e2 = d2->mp1_integral / mp1;
  const double diss = d2->dissipation_cum - d1->dissipation_cum;
  return std::abs(e1 - e2 - diss) / std::max(e1, kTiny);
}

}  // namespace pmelab
