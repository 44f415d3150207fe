#ifndef PMELAB_SOLVER_HPP
#define PMELAB_SOLVER_HPP

#include <memory>
#include <string>
#include <vector>

#include "pmelab/radial_field.hpp"

namespace pmelab {

/// Parameters of the implicit finite-volume integrator.
struct SolverConfig {
  double m = 2.0;  // porous-medium exponent, > 1

  // Time stepping: dt starts at dt_init, grows by dt_growth per accepted step,
  // is capped at dt_max_ratio * t, and halves on Newton failure.
  double dt_init = 1e-8;
  double dt_growth = 1.05;
  double dt_max_ratio = 0.02;
  double t_end = 1.0;

  int newton_max_iter = 40;
  double newton_tol = 1e-12;                // scaled by the current mass
  double jacobian_regularization = 1e-12;   // epsilon_J as a fraction of |u|_inf^{m-1}

  int cells = 1024;       // grid cells, >= 16
  double grading = 1.0;   // geometric interface ratio; > 1 refines near the pole

  bool signed_mode = false;  // u^m = |u|^{m-1} u, data may change sign

  // Snapshot cadence: geometric times from snapshot_start.
  double snapshot_start = 1e-6;
  int snapshots_per_decade = 24;

  void validate() const;
  double alpha() const;  // N-dependent smoothing exponents at dimension N
  double beta() const;
  void set_dimension(int n) { dimension_ = n; }
  int dimension() const { return dimension_; }

private:
  int dimension_ = 3;
};

struct TrajectorySnapshot {
  double t = 0.0;
  std::vector<double> values;
};

/// Per-step diagnostics; the *_cum entries are ledgers accumulated from t = 0.
struct TrajectoryDiagnostics {
  double t = 0.0;
  double dt = 0.0;
  double mass = 0.0;
  double linf = 0.0;
  double lmp1 = 0.0;          // L^{m+1} norm
  double mp1_integral = 0.0;  // int |u|^{m+1} dV
  double dissipation_cum = 0.0;       // int_0^t int |grad u^m|^2
  double boundary_outflux_cum = 0.0;  // mass lost through the Dirichlet wall
  int newton_iterations = 0;
};

struct Trajectory {
  std::shared_ptr<const RadialGrid> grid;
  double exponent_m = 2.0;
  std::vector<TrajectorySnapshot> snapshots;
  std::vector<TrajectoryDiagnostics> diagnostics;
  bool completed = false;
  std::string abort_reason;
  double initial_mass = 0.0;
  double max_conservation_defect = 0.0;  // per-step closure of the mass ledger

  RadialField field_at(std::size_t snapshot_index) const;
  /// Snapshot closest to time t.
  const TrajectorySnapshot& snapshot_nearest(double t) const;
};

/// Builds the finite-volume grid on [0, R] with M cells whose widths grow by
/// the grading factor away from the pole.
std::shared_ptr<const RadialGrid> build_grid(std::shared_ptr<const ManifoldProfile> profile,
                                             double R, int cells, double grading);

/// One backward-Euler step of u_t = Delta(u^m) with Dirichlet 0 at the wall
/// and the natural zero-flux symmetry at the pole. Returns false when Newton
/// failed to converge (the caller halves dt).
struct StepResult {
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;
};
StepResult step_implicit(std::vector<double>& state, double dt, const RadialGrid& grid,
                         const SolverConfig& cfg);

/// Replaces the pole atom by a C^2 bump of the same discrete mass supported
/// in [0, eps] and cell-averages the density part. Total mass is preserved to
/// roundoff by construction.
RadialField mollify_measure(const RadialMeasure& mu, double eps,
                            std::shared_ptr<const RadialGrid> grid);

/// Integrates from a given initial field to cfg.t_end with adaptive dt,
/// recording snapshots and the diagnostic ledgers.
Trajectory integrate_pme(std::shared_ptr<const RadialGrid> grid, std::vector<double> initial,
                         const SolverConfig& cfg);

/// Mollifies mu at scale eps on a fresh grid over [0, R] and integrates.
Trajectory solve_ball(std::shared_ptr<const ManifoldProfile> profile, double R,
                      const RadialMeasure& mu, double eps, const SolverConfig& cfg);

/// Nested-limit driver: solves over an increasing ball schedule with a
/// decreasing mollification schedule on nested prefixes of one master grid,
/// so runs are comparable cell by cell.
struct CauchyResult {
  std::vector<Trajectory> runs;        // one per schedule entry, coarsest first
  std::vector<double> radii_used;      // schedule radii snapped to interfaces
  bool monotone_in_R = true;           // nonnegative data only
  double max_monotonicity_violation = 0.0;
  double final_max_difference = 0.0;   // between the two finest runs, last snapshot
  double final_l1_difference = 0.0;

  const Trajectory& finest() const { return runs.back(); }
};
CauchyResult solve_cauchy(std::shared_ptr<const ManifoldProfile> profile,
                          const RadialMeasure& mu, const SolverConfig& cfg,
                          const std::vector<double>& R_schedule,
                          const std::vector<double>& eps_schedule);

/// Least-squares fit of log |u(t)|_inf against log t over [t_lo, t_hi];
/// returns {slope, intercept}. Throws when fewer than 5 steps fall inside.
std::pair<double, double> smoothing_exponent_fit(const Trajectory& traj, double t_lo,
                                                 double t_hi);

/// Energy-ledger defect between the diagnostic rows nearest t1 < t2:
///   [E(t1) - E(t2) - int_{t1}^{t2} int |grad u^m|^2] / E(t1),
/// with E = (1/(m+1)) int |u|^{m+1}. Nonnegative up to Newton noise for the
/// backward-Euler scheme; small when dt resolves the decay.
double energy_ledger_defect(const Trajectory& traj, double t1, double t2);

}  // namespace pmelab

#endif
