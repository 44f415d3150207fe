#ifndef PMELAB_RADIAL_FIELD_HPP
#define PMELAB_RADIAL_FIELD_HPP

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "pmelab/manifold.hpp"

namespace pmelab {

/// Finite-volume grid on [0, R]: cell interfaces 0 = x_0 < ... < x_M = R,
/// geometrically graded toward the pole, with exact cell volumes
/// V_i = omega_N int psi^{N-1} and interface areas A_i = omega_N psi^{N-1}(x_i).
struct RadialGrid {
  std::shared_ptr<const ManifoldProfile> profile;
  std::vector<double> interfaces;  // size M+1, interfaces[0] = 0
  std::vector<double> centers;     // size M
  std::vector<double> volumes;     // size M
  std::vector<double> areas;       // size M+1; areas[0] = 0 at the pole

  std::size_t cell_count() const { return centers.size(); }
  double radius() const { return interfaces.back(); }
  double total_volume() const;
  /// Index of the cell containing r (clamped to the boundary cells).
  std::size_t locate(double r) const;
};

/// A radial function stored as cell values on a RadialGrid, interpolated
/// piecewise linearly between cell centers and extended as a constant beyond
/// the first and last center.
///
/// pole_green_coeff marks fields that behave like c*g(r) near the pole
/// (potentials of measures with an atom); operators that integrate across the
/// pole split that part off analytically.
class RadialField {
public:
  RadialField() = default;
  RadialField(std::shared_ptr<const RadialGrid> grid, std::vector<double> values);

  const std::shared_ptr<const RadialGrid>& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  double operator()(double r) const;

  bool pole_is_infinite() const { return pole_infinite_; }
  double pole_green_coeff() const { return pole_green_coeff_; }
  void mark_pole_singularity(double green_coeff) {
    pole_green_coeff_ = green_coeff;
    pole_infinite_ = green_coeff != 0.0;
  }

  double max_abs() const;

private:
  std::shared_ptr<const RadialGrid> grid_;
  std::vector<double> values_;
  bool pole_infinite_ = false;
  double pole_green_coeff_ = 0.0;
};

/// A radial function given by an arbitrary evaluator; the common currency of
/// the mean-value operators. pole_value is the limit at r -> 0+ of the
/// regular part; pole_green_coeff as in RadialField.
struct RadialFunction {
  std::function<double(double)> eval;
  double pole_value = 0.0;
  double pole_green_coeff = 0.0;

  double operator()(double r) const { return eval(r); }
};

/// Views a field as a RadialFunction (shares the underlying data).
RadialFunction as_function(const RadialField& field);

/// A finite radial Radon measure: a point mass at the pole plus a signed
/// radial density.
class RadialMeasure {
public:
  RadialMeasure() = default;
  static RadialMeasure atom(double mass);
  static RadialMeasure density(RadialField f);
  static RadialMeasure atom_and_density(double mass, RadialField f);

  double atom_mass() const { return atom_; }
  bool has_density() const { return density_.has_value(); }
  const RadialField& density_field() const { return *density_; }

  /// |atom| + omega_N int |f| psi^{N-1}; must be finite for a Radon measure.
  double total_variation(const ManifoldProfile& profile) const;
  /// atom + omega_N int f psi^{N-1}.
  double total_mass(const ManifoldProfile& profile) const;
  bool is_nonnegative() const;

private:
  double atom_ = 0.0;
  std::optional<RadialField> density_;
};

}  // namespace pmelab

#endif
