#ifndef PMELAB_QUADRATURE_HPP
#define PMELAB_QUADRATURE_HPP

#include <functional>

namespace pmelab {

/// Tolerances for the adaptive Gauss-Kronrod integrator. The defaults are the
/// project-wide ones: relative target 1e-10 with an absolute floor of 1e-14
/// so that integrals which are genuinely zero terminate.
struct QuadratureOptions {
  double rel_tol = 1e-10;
  double abs_floor = 1e-14;
  int max_depth = 15;
};

/// Integrates f over the finite interval [a, b] with adaptive Gauss-Kronrod
/// refinement. Swapped endpoints flip the sign.
double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureOptions& opt = {});

/// Integrates f over [a, b] splitting the interval at geometrically spaced
/// breakpoints toward a. Useful when the integrand varies over many scales
/// near the left endpoint (Green kernels close to the pole).
double integrate_graded(const std::function<double(double)>& f, double a, double b,
                        const QuadratureOptions& opt = {});

}  // namespace pmelab

#endif
