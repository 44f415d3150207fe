#include "pmelab/report.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "pmelab/io_util.hpp"

namespace pmelab {

double VerificationReport::max_error() const {
  double m = 0.0;
  for (const auto& e : errors) m = std::max(m, e.value);
  return m;
}

VerificationReport& VerificationReport::finalize() {
  pass = true;
  for (const auto& e : errors) {
    if (!(e.value <= tolerance) || std::isnan(e.value)) pass = false;
  }
  return *this;
}

std::string VerificationReport::to_json() const {
  nlohmann::ordered_json j;
  j["name"] = name;
  j["inputs"] = inputs;
  nlohmann::ordered_json errs = nlohmann::ordered_json::array();
  for (const auto& e : errors) {
    // Serialized as strings with 17 significant digits so reports round-trip
    // bit-exactly through text.
    errs.push_back({{"label", e.label}, {"value", format_double(e.value)}});
  }
  j["errors"] = errs;
  j["tolerance"] = format_double(tolerance);
  j["pass"] = pass;
  j["runtime_seconds"] = format_double(runtime_seconds);
  if (!note.empty()) j["note"] = note;
  return j.dump(2);
}

std::string VerificationReport::summary_line() const {
  std::ostringstream os;
  os << (pass ? "[PASS] " : "[FAIL] ") << name << ": max err " << max_error() << " (tol "
     << tolerance << ", " << runtime_seconds << " s)";
  return os.str();
}

std::string reports_to_json(const std::vector<VerificationReport>& reports) {
  std::string out = "[\n";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    out += reports[i].to_json();
    if (i + 1 < reports.size()) out += ",";
    out += "\n";
  }
  out += "]\n";
  return out;
}

}  // namespace pmelab
