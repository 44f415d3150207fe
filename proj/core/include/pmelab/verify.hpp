#ifndef PMELAB_VERIFY_HPP
#define PMELAB_VERIFY_HPP

#include <memory>
#include <utility>
#include <vector>

#include "pmelab/manifold.hpp"
#include "pmelab/radial_field.hpp"
#include "pmelab/report.hpp"
#include "pmelab/solver.hpp"

namespace pmelab {

/// Domain and discretization knobs shared by the solver-backed checks.
struct VerifyRunOptions {
  double ball_radius = 8.0;
  double mollify_eps = 1e-3;
  SolverConfig solver;
};

/// Green-Barenblatt identity G(r) = int_0^inf u^m(r, t) dt for the solution
/// with unit Dirac data. Nonparabolic profiles: time-quadrature of snapshots
/// plus a fitted power-law tail, compared with green_radial at every sample
/// radius (ratio entries: relative error over `tolerance`, fitted tail over
/// the 20% budget). Parabolic profiles: the partial integrals must instead
/// exceed `parabolic_floor` and keep growing.
///
/// Entries are measured/limit ratios with tolerance 1.
struct GreenBarenblattOptions {
  VerifyRunOptions run;
  double t_max = 2000.0;
  double tolerance = 0.05;
  double tail_fraction_limit = 0.2;
  double parabolic_floor = 0.278;  // 3x the largest hyperbolic target
};
VerificationReport verify_green_barenblatt(std::shared_ptr<const ManifoldProfile> profile,
                                           double m, const std::vector<double>& radii,
                                           const GreenBarenblattOptions& opt);

/// Weak form of dG/dt = -u^m for the potential of the evolving solution,
/// tested against a three-bump battery, plus pointwise monotonicity of the
/// potential in time. Ratio entries with tolerance 1.
struct PotentialEvolutionOptions {
  VerifyRunOptions run;
  std::vector<std::pair<double, double>> t_pairs = {{0.5, 1.0}, {0.25, 0.75}};
  double defect_limit = 0.01;
  double monotonicity_limit = 1e-9;  // relative pointwise increase
};
VerificationReport verify_potential_evolution(std::shared_ptr<const ManifoldProfile> profile,
                                              const RadialMeasure& mu,
                                              const PotentialEvolutionOptions& opt);

/// Initial trace: the potential of u(t) converges to the potential of mu
/// monotonically from below as t -> 0, and the mass is carried to the limit.
struct InitialTraceOptions {
  VerifyRunOptions run;
  std::vector<double> t_sequence = {1e-1, 1e-2, 1e-3};
  std::vector<double> sample_radii = {0.5, 1.0, 2.0};
  double gap_limit = 0.01;       // relative gap at the smallest time
  double monotone_limit = 1e-9;  // relative monotonicity violation
  double mass_limit = 1e-6;
};
VerificationReport verify_initial_trace(std::shared_ptr<const ManifoldProfile> profile,
                                        const RadialMeasure& mu,
                                        const InitialTraceOptions& opt);

/// Smoothing exponent fit against alpha(m, N) and the discrete energy ledger.
struct SmoothingEnergyOptions {
  VerifyRunOptions run;
  double fit_lo = 1e-2;
  double fit_hi = 1e-1;
  double slope_limit = 0.05;   // relative exponent error
  double ledger_limit = 0.01;  // relative energy defect
};
VerificationReport verify_smoothing_and_energy(std::shared_ptr<const ManifoldProfile> profile,
                                               double m, const SmoothingEnergyOptions& opt);

/// G = int_0^inf h dt against the closed-form heat kernels of R^3 and H^3.
/// Unsupported profiles get a not-applicable (passing) report.
VerificationReport verify_heat_green_identity(std::shared_ptr<const ManifoldProfile> profile,
                                              const std::vector<double>& radii);

/// Named suites for the CLI: geometry, potential, solver, barenblatt, all.
/// max_workers <= 1 runs sequentially; checks are independent.
std::vector<VerificationReport> run_suite(const std::string& name, int max_workers = 1);
bool suite_name_valid(const std::string& name);

}  // namespace pmelab

#endif
