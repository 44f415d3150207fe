#ifndef PMELAB_CONFIG_HPP
#define PMELAB_CONFIG_HPP

#include <memory>
#include <string>
#include <vector>

#include "pmelab/manifold.hpp"
#include "pmelab/radial_field.hpp"
#include "pmelab/solver.hpp"

namespace pmelab {

/// One additive term of a radial measure specification.
struct MeasureTerm {
  enum class Kind { Atom, Shell, Bump };
  Kind kind = Kind::Atom;
  double mass = 0.0;
  double a = 0.0;  // shell inner radius / bump center
  double b = 0.0;  // shell outer radius / bump width
};

/// Parsed and validated run configuration. The file format is strict INI:
/// [section] headers, key = value lines, full-line # comments, no unknown
/// sections or keys.
struct RunConfig {
  // [manifold]
  std::string manifold_kind;
  int dimension = 3;
  double exponent = 1.0;       // exponential_power
  std::string table_path;      // tabulated

  // [problem]
  double m = 2.0;
  std::vector<MeasureTerm> measure;
  double radius = 8.0;
  double eps = 1e-3;
  std::vector<double> radius_schedule;  // optional; enables solve_cauchy
  std::vector<double> eps_schedule;

  // [solver]
  SolverConfig solver;

  // [green]
  std::vector<double> green_radii;

  // [meanvalue]
  double alpha = 1.0;
  std::vector<double> meanvalue_radii;
  std::string field_csv;

  // [verify]
  std::string suite = "all";

  // [output]
  std::string output_directory = "out";

  std::shared_ptr<const ManifoldProfile> build_profile() const;
  /// Realizes the measure terms as an atom plus cell-averaged densities on
  /// the given grid.
  RadialMeasure build_measure(std::shared_ptr<const RadialGrid> grid) const;
};

/// Parses and validates; throws ValidationError whose message lists every
/// problem found (one per line, with line numbers).
RunConfig parse_config(const std::string& path);

/// Loads a (r, psi[, psi'[, psi'']]) whitespace table for tabulated profiles.
std::shared_ptr<const ManifoldProfile> load_profile_table(const std::string& path,
                                                          int dimension);

}  // namespace pmelab

#endif
