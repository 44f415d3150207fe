#ifndef PMELAB_ERRORS_HPP
#define PMELAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pmelab {

// Bad arguments, bad configuration, violated preconditions. CLI exit code 1.
class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// A computation that was set up correctly failed to converge or overflowed.
// CLI exit code 2.
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Whole-manifold Green function requested on a parabolic manifold.
class ParabolicManifoldError : public ValidationError {
public:
  explicit ParabolicManifoldError(const std::string& what) : ValidationError(what) {}
};

}  // namespace pmelab

#endif
