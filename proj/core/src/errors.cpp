#include "pmelab/errors.hpp"

// Out-of-line anchor for the vtables.
namespace pmelab {
namespace {
[[maybe_unused]] void anchor() {}
}  // namespace
}  // namespace pmelab
