#ifndef PMELAB_GREEN_HPP
#define PMELAB_GREEN_HPP

#include <cmath>
#include <memory>
#include <vector>

#include "pmelab/manifold.hpp"
#include "pmelab/report.hpp"

namespace pmelab {

/// Radial Green function of -Delta with pole at the origin, either on the
/// whole manifold or on a geodesic ball with Dirichlet boundary:
///
///   g(r) = (1/omega_N) int_r^{R or inf} psi^{1-N}(s) ds.
///
/// The evaluator is backed by a suffix table of psi^{1-N} antiderivative
/// chunks built at construction, so value() costs one short quadrature and the
/// differences g(r1) - g(r2) share their cached suffix exactly (the errors
/// cancel, which the flux-normalization check relies on).
///
/// Immutable and safe to evaluate concurrently.
class GreenProfile {
public:
  /// Whole-manifold Green function; throws ParabolicManifoldError when
  /// int^inf psi^{1-N} diverges.
  static GreenProfile whole_manifold(std::shared_ptr<const ManifoldProfile> profile);
  /// Dirichlet Green function of the ball of radius R.
  static GreenProfile ball(std::shared_ptr<const ManifoldProfile> profile, double R);

  double value(double r) const;       // g(r); +inf at r = 0
  double derivative(double r) const;  // g'(r) = -psi^{1-N}(r)/omega_N
  /// Unique s with g(s) = level, by monotone bisection to relative 1e-12.
  double level_radius(double level) const;

  bool is_ball() const { return std::isfinite(radius_); }
  double radius() const { return radius_; }  // +inf for whole manifold
  const std::shared_ptr<const ManifoldProfile>& profile() const { return profile_; }

private:
  GreenProfile(std::shared_ptr<const ManifoldProfile> profile, double radius);

  std::shared_ptr<const ManifoldProfile> profile_;
  double radius_;
  // nodes_[k] with suffix_[k] = int_{nodes_[k]}^{domain end} psi^{1-N}.
  std::vector<double> nodes_;
  std::vector<double> suffix_;
};

/// G(r) on the whole manifold by direct quadrature (no caching); the slow
/// exact route the cached evaluator is checked against.
double green_radial(const ManifoldProfile& profile, double r);

/// G_R(r) on the ball of radius R, vanishing at r = R.
double green_ball(const ManifoldProfile& profile, double R, double r);

/// Checks G(r) <= C r^{2-N} with the Euclidean-saturating constant
/// C = 1/((N-2) omega_N) at each sample; reports the max ratio G/bound.
VerificationReport green_upper_bound_check(const ManifoldProfile& profile,
                                           const std::vector<double>& samples);

}  // namespace pmelab

#endif
