#ifndef PMELAB_UTIL_HPP
#define PMELAB_UTIL_HPP

#include <utility>
#include <vector>

namespace pmelab {

/// n log-spaced points from lo to hi inclusive.
std::vector<double> logspace(double lo, double hi, int n);

/// Least-squares line y = slope*x + intercept; returns {slope, intercept}.
std::pair<double, double> linear_fit(const std::vector<double>& x,
                                     const std::vector<double>& y);

}  // namespace pmelab

#endif
