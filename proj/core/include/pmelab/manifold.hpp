#ifndef PMELAB_MANIFOLD_HPP
#define PMELAB_MANIFOLD_HPP

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace pmelab {

/// Result of the structural checks a model manifold has to pass before the
/// solution theory applies: nonpositive sectional curvature, a quadratic
/// lower bound on the radial Ricci curvature, and nonparabolicity.
struct HypothesisReport {
  bool is_cartan_hadamard = false;
  bool ricci_bound_is_finite = false;
  double ricci_bound_constant = 0.0;  // smallest C with Ric_o >= -C(1+r^2) on the sampled range
  bool is_nonparabolic = false;
  bool nonparabolicity_is_heuristic = false;  // tabulated profiles: tail extrapolated
  double green_tail_integral = 0.0;           // int_1^inf psi^{1-N}; +inf when divergent
  bool model_only_validity = true;            // curvature formulas assume a model manifold
};

/// A rotationally symmetric model manifold. All of the geometry is encoded in
/// the warping function psi: the metric is ds^2 = drho^2 + psi^2(rho) dtheta^2,
/// cell volumes and sphere areas are powers of psi, and the curvatures are
/// ratios of its derivatives.
///
/// Profiles are immutable after construction and cheap to share.
class ManifoldProfile {
public:
  enum class Kind { Euclidean, Hyperbolic, ExponentialPower, Tabulated };

  /// psi(r) = r, i.e. R^N.
  static std::shared_ptr<const ManifoldProfile> euclidean(int dimension);
  /// psi(r) = sinh r, i.e. hyperbolic space of curvature -1.
  static std::shared_ptr<const ManifoldProfile> hyperbolic(int dimension);
  /// psi(r) = r*exp(r^a s(r)) with a C-infinity switch s that vanishes
  /// identically near 0 and equals 1 for r >= 1, so psi(r) = r near the pole
  /// and psi(r) = r e^{r^a} beyond radius one. Requires a in (0, 2].
  static std::shared_ptr<const ManifoldProfile> exponential_power(int dimension, double a);
  /// Monotone cubic interpolation of sampled (r, psi) pairs; derivatives come
  /// from the interpolant. The slope column, when given, pins the Hermite
  /// slopes instead of the Fritsch-Carlson estimates.
  static std::shared_ptr<const ManifoldProfile> tabulated(
      int dimension, std::vector<double> radii, std::vector<double> psi_values,
      std::optional<std::vector<double>> psi_slopes = std::nullopt);

  Kind kind() const { return kind_; }
  int dimension() const { return dimension_; }
  /// Area of the unit (N-1)-sphere.
  double unit_sphere_area() const { return omega_; }
  /// Largest usable radius: +inf for closed-form profiles, the last sample
  /// for tabulated ones.
  double max_radius() const { return r_max_; }
  double exponent() const { return exponent_; }  // ExponentialPower only

  double psi(double r) const;
  double psi_prime(double r) const;
  double psi_second(double r) const;
  /// log psi(r), computed without forming psi when it would overflow.
  double log_psi(double r) const;
  /// psi(r)^p through the logarithm; underflows to 0, overflow throws.
  double psi_power(double r, double p) const;
  /// psi''(r)/psi(r), the negative of the sectional curvature. Safe at radii
  /// where psi itself overflows a double.
  double convexity_ratio(double r) const;
  /// psi'(r)/psi(r).
  double slope_ratio(double r) const;

  /// True when int_1^inf psi^{1-N} converges. Closed-form profiles answer
  /// analytically; tabulated ones by quadrature plus tail extrapolation.
  bool nonparabolic() const;
  /// The integral behind nonparabolic(); +inf when divergent.
  double green_tail_integral() const;
  /// int_r^inf psi^{1-N} ds, the radial Green integral without its 1/omega_N
  /// normalization. Exact for the closed-form kinds, cutoff quadrature for
  /// exponential-power, extrapolated beyond the table for tabulated kinds.
  double psi_tail_integral_from(double r) const;

  std::string describe() const;

private:
  struct Table;  // tabulated-profile data
  ManifoldProfile(Kind kind, int dimension);

  void validate_radius(double r, bool strictly_positive) const;

  Kind kind_;
  int dimension_;
  double omega_;
  double r_max_;
  double exponent_ = 0.0;
  std::shared_ptr<const Table> table_;
};

/// K_omega(r) = -psi''(r)/psi(r) for radial 2-sections.
double sectional_curvature(const ManifoldProfile& profile, double r);

/// Ric_o(r) = -(N-1) psi''(r)/psi(r) in the radial direction.
double ricci_radial(const ManifoldProfile& profile, double r);

/// Volume of the geodesic ball of radius R about the pole:
/// omega_N int_0^R psi^{N-1}.
double ball_volume(const ManifoldProfile& profile, double R);

/// Samples the hypothesis checks on [0, r_max]: convexity of psi, the fitted
/// quadratic Ricci bound, and the nonparabolicity test.
HypothesisReport check_hypothesis(const ManifoldProfile& profile, double r_max);

}  // namespace pmelab

#endif
