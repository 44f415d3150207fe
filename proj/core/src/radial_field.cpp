#include "pmelab/radial_field.hpp"

#include <algorithm>
#include <cmath>

#include "pmelab/errors.hpp"
#include "pmelab/quadrature.hpp"

namespace pmelab {

double RadialGrid::total_volume() const {
  double v = 0.0;
  for (double vi : volumes) v += vi;
  return v;
}

std::size_t RadialGrid::locate(double r) const {
  auto it = std::upper_bound(interfaces.begin(), interfaces.end(), r);
  if (it == interfaces.begin()) return 0;
  std::size_t i = std::size_t(std::distance(interfaces.begin(), it)) - 1;
  return std::min(i, cell_count() - 1);
}

RadialField::RadialField(std::shared_ptr<const RadialGrid> grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_ || values_.size() != grid_->cell_count()) {
    throw ValidationError("RadialField: values size must match the grid");
  }
}

double RadialField::operator()(double r) const {
  const auto& c = grid_->centers;
  if (r <= c.front()) return values_.front();
  if (r >= c.back()) return values_.back();
  auto it = std::upper_bound(c.begin(), c.end(), r);
  const std::size_t i = std::size_t(std::distance(c.begin(), it)) - 1;
  const double t = (r - c[i]) / (c[i + 1] - c[i]);
  return (1.0 - t) * values_[i] + t * values_[i + 1];
}

double RadialField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

RadialFunction as_function(const RadialField& field) {
  RadialFunction f;
  f.eval = [field](double r) { return field(r); };
  f.pole_value = field.values().empty() ? 0.0 : field.values().front();
  f.pole_green_coeff = field.pole_green_coeff();
  return f;
}

RadialMeasure RadialMeasure::atom(double mass) {
  RadialMeasure m;
  m.atom_ = mass;
  return m;
}

RadialMeasure RadialMeasure::density(RadialField f) {
  RadialMeasure m;
  m.density_ = std::move(f);
  return m;
}

RadialMeasure RadialMeasure::atom_and_density(double mass, RadialField f) {
  RadialMeasure m;
  m.atom_ = mass;
  m.density_ = std::move(f);
  return m;
}

namespace {
// Densities enter measure integrals cell-conservatively: cell i contributes
// exactly value_i * V_i, matching the solver's discrete mass ledger.
double density_integral(const RadialField& f, const ManifoldProfile& profile, bool absolute) {
  const RadialGrid& grid = *f.grid();
  if (grid.profile->dimension() != profile.dimension()) {
    throw ValidationError("density integral: dimension mismatch");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < grid.cell_count(); ++i) {
    const double v = f.values()[i];
    total += (absolute ? std::abs(v) : v) * grid.volumes[i];
  }
  return total;
}
}  // namespace

double RadialMeasure::total_variation(const ManifoldProfile& profile) const {
  double tv = std::abs(atom_);
  if (density_) tv += density_integral(*density_, profile, true);
  if (!std::isfinite(tv)) throw ValidationError("measure has infinite total variation");
  return tv;
}

double RadialMeasure::total_mass(const ManifoldProfile& profile) const {
  double m = atom_;
  if (density_) m += density_integral(*density_, profile, false);
  return m;
}

bool RadialMeasure::is_nonnegative() const {
  if (atom_ < 0.0) return false;
  if (density_) {
    for (double v : density_->values()) {
      if (v < 0.0) return false;
    }
  }
  return true;
}

}  // namespace pmelab
