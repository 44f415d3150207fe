#ifndef PMELAB_POTENTIAL_HPP
#define PMELAB_POTENTIAL_HPP

#include <memory>
#include <utility>
#include <vector>

#include "pmelab/green.hpp"
#include "pmelab/radial_field.hpp"
#include "pmelab/report.hpp"

namespace pmelab {

/// Potential of a radial measure against the given Green profile, as an exact
/// evaluator valid at every radius:
///
///   P(r) = atom * g(r) + g(r) A(r) + (B_tot - B(r)),
///
/// where A and B are the cumulative integrals of f psi^{N-1} and g f psi^{N-1}
/// against omega_N. This is the shell-mean reduction: the spherical average of
/// G(x, .) over the sphere of radius s equals g(max(r, s)).
///
/// The returned function carries pole_green_coeff = atom so downstream
/// operators can split the singular part analytically.
RadialFunction potential_function(const RadialMeasure& measure, const GreenProfile& green);

/// Samples the potential at the cell centers of out_grid (defaults to the
/// density's own grid; a pure atom requires an explicit grid).
RadialField potential(const RadialMeasure& measure, const GreenProfile& green,
                      std::shared_ptr<const RadialGrid> out_grid = nullptr);

/// Both sides of the energy identity int |grad P|^2 = int f P for the
/// potential P of a nonnegative bounded density f, each by its own radial
/// quadrature route. Requires N >= 3 on whole-manifold domains.
std::pair<double, double> potential_energy_identity(const RadialField& f,
                                                    const GreenProfile& green);

/// Mean-value operator over the Green level set {g = 1/r}, evaluated at the
/// pole. For radial u this reduces to u(s) with g(s) = 1/r, by the unit-flux
/// normalization of the Green function.
double mean_value_m(const RadialFunction& u, const GreenProfile& green, double r);
double mean_value_m(const RadialField& u, const GreenProfile& green, double r);

/// Weighted radial average of the mean values,
///   M_r[u] = ((alpha+1)/r^{alpha+1}) int_0^r xi^alpha m_xi[u] dxi,
/// computed by substituting xi = 1/g(s) and splitting the c*g pole part of u
/// in closed form. Returns +inf when u is singular at the pole without a
/// declared Green coefficient.
double mean_value_M(const RadialFunction& u, const GreenProfile& green, double r,
                    double alpha = 1.0);
double mean_value_M(const RadialField& u, const GreenProfile& green, double r,
                    double alpha = 1.0);

/// Evaluates M_r[u] on the given samples and reports the largest positive
/// increment; superharmonic candidates must be nonincreasing.
VerificationReport audit_M_monotonicity(const RadialFunction& u, const GreenProfile& green,
                                        double alpha, std::vector<double> r_samples,
                                        double tolerance = 1e-8);

}  // namespace pmelab

#endif
