#ifndef PMELAB_REPORT_HPP
#define PMELAB_REPORT_HPP

#include <string>
#include <vector>

namespace pmelab {

/// One labeled error measurement inside a check.
struct MeasuredError {
  std::string label;
  double value = 0.0;
};

/// Structured pass/fail record for a single verification check. The pass flag
/// is always derived from the measurements: pass iff every measured error is
/// at most the tolerance.
struct VerificationReport {
  std::string name;
  std::string inputs;
  std::vector<MeasuredError> errors;
  double tolerance = 0.0;
  bool pass = false;
  double runtime_seconds = 0.0;
  std::string note;  // free-form context (tail fractions, fitted constants, ...)

  double max_error() const;
  /// Sets pass from errors vs tolerance and returns *this.
  VerificationReport& finalize();
  /// JSON object with all fields; numbers carry 17 significant digits.
  std::string to_json() const;
  /// One human-readable line: "[PASS] name: max err ... (tol ...)".
  std::string summary_line() const;
};

std::string reports_to_json(const std::vector<VerificationReport>& reports);

}  // namespace pmelab

#endif
