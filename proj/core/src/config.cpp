#include "pmelab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "pmelab/errors.hpp"
#include "pmelab/quadrature.hpp"
#include "pmelab/util.hpp"

namespace pmelab {

namespace {

struct RawEntry {
  std::string value;
  int line = 0;
  bool consumed = false;
};

using Section = std::map<std::string, RawEntry>;
using RawConfig = std::map<std::string, Section>;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

class ErrorList {
public:
  void add(int line, const std::string& msg) {
    std::ostringstream os;
    if (line > 0) os << "line " << line << ": ";
    os << msg;
    errors_.push_back(os.str());
  }
  void raise_if_any(const std::string& path) const {
    if (errors_.empty()) return;
    std::string msg = "invalid configuration " + path + ":";
    for (const auto& e : errors_) msg += "\n  " + e;
    throw ValidationError(msg);
  }
  bool empty() const { return errors_.empty(); }

private:
  std::vector<std::string> errors_;
};

RawConfig read_raw(const std::string& path, ErrorList& errs) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file: " + path);
  RawConfig raw;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') {
        errs.add(lineno, "malformed section header: " + t);
        continue;
      }
      section = trim(t.substr(1, t.size() - 2));
      raw[section];
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      errs.add(lineno, "expected key = value: " + t);
      continue;
    }
    if (section.empty()) {
      errs.add(lineno, "key outside any [section]");
      continue;
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) {
      errs.add(lineno, "empty key");
      continue;
    }
    if (raw[section].count(key)) {
      errs.add(lineno, "duplicate key '" + key + "' in [" + section + "]");
      continue;
    }
    raw[section][key] = {value, lineno, false};
  }
  return raw;
}

class Reader {
public:
  Reader(RawConfig& raw, ErrorList& errs) : raw_(raw), errs_(errs) {}

  bool has(const std::string& sec, const std::string& key) {
    auto s = raw_.find(sec);
    return s != raw_.end() && s->second.count(key) > 0;
  }

  RawEntry* fetch(const std::string& sec, const std::string& key) {
    auto s = raw_.find(sec);
    if (s == raw_.end()) return nullptr;
    auto k = s->second.find(key);
    if (k == s->second.end()) return nullptr;
    k->second.consumed = true;
    return &k->second;
  }

  std::string get_string(const std::string& sec, const std::string& key,
                         const std::string& fallback) {
    RawEntry* e = fetch(sec, key);
    return e ? e->value : fallback;
  }

  double get_double(const std::string& sec, const std::string& key, double fallback) {
    RawEntry* e = fetch(sec, key);
    if (!e) return fallback;
    try {
      std::size_t pos = 0;
      const double v = std::stod(e->value, &pos);
      if (pos != e->value.size()) throw std::invalid_argument("trailing characters");
      return v;
    } catch (const std::exception&) {
      errs_.add(e->line, "[" + sec + "] " + key + ": expected a number, got '" + e->value + "'");
      return fallback;
    }
  }

  int get_int(const std::string& sec, const std::string& key, int fallback) {
    RawEntry* e = fetch(sec, key);
    if (!e) return fallback;
    try {
      std::size_t pos = 0;
      const int v = std::stoi(e->value, &pos);
      if (pos != e->value.size()) throw std::invalid_argument("trailing characters");
      return v;
    } catch (const std::exception&) {
      errs_.add(e->line, "[" + sec + "] " + key + ": expected an integer, got '" + e->value + "'");
      return fallback;
    }
  }

  bool get_bool(const std::string& sec, const std::string& key, bool fallback) {
    RawEntry* e = fetch(sec, key);
    if (!e) return fallback;
    if (e->value == "true" || e->value == "1") return true;
    if (e->value == "false" || e->value == "0") return false;
    errs_.add(e->line, "[" + sec + "] " + key + ": expected true/false, got '" + e->value + "'");
    return fallback;
  }

  // Comma-separated numbers, or "logspace:lo,hi,n".
  std::vector<double> get_list(const std::string& sec, const std::string& key,
                               std::vector<double> fallback) {
    RawEntry* e = fetch(sec, key);
    if (!e) return fallback;
    const std::string& v = e->value;
    try {
      if (v.rfind("logspace:", 0) == 0) {
        const auto nums = split_numbers(v.substr(9));
        if (nums.size() != 3) throw std::invalid_argument("logspace needs lo,hi,n");
        return logspace(nums[0], nums[1], int(nums[2]));
      }
      return split_numbers(v);
    } catch (const std::exception& ex) {
      errs_.add(e->line, "[" + sec + "] " + key + ": " + ex.what());
      return fallback;
    }
  }

  void check_unknown() {
    for (auto& [sec, entries] : raw_) {
      if (!known_sections_.count(sec)) {
        errs_.add(0, "unknown section [" + sec + "]");
        continue;
      }
      for (auto& [key, e] : entries) {
        if (!e.consumed) {
          errs_.add(e.line, "unknown key '" + key + "' in [" + sec + "]");
        }
      }
    }
  }

private:
  static std::vector<double> split_numbers(const std::string& s) {
    std::vector<double> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, ',')) {
      const std::string t = trim(item);
      if (t.empty()) throw std::invalid_argument("empty list item");
      std::size_t pos = 0;
      out.push_back(std::stod(t, &pos));
      if (pos != t.size()) throw std::invalid_argument("bad number '" + t + "'");
    }
    if (out.empty()) throw std::invalid_argument("empty list");
    return out;
  }

  RawConfig& raw_;
  ErrorList& errs_;
  const std::set<std::string> known_sections_ = {"manifold", "problem", "solver",
                                                 "green",    "meanvalue", "verify",
                                                 "output"};
};

std::vector<MeasureTerm> parse_measure(const std::string& spec, int line, ErrorList& errs) {
  std::vector<MeasureTerm> terms;
  std::string item;
  std::istringstream is(spec);
  while (std::getline(is, item, '+')) {
    const std::string t = trim(item);
    const auto colon = t.find(':');
    if (colon == std::string::npos) {
      errs.add(line, "measure term needs kind:args, got '" + t + "'");
      continue;
    }
    const std::string kind = trim(t.substr(0, colon));
    std::vector<double> args;
    {
      std::string a;
      std::istringstream as(t.substr(colon + 1));
      bool ok = true;
      while (std::getline(as, a, ',')) {
        try {
          args.push_back(std::stod(trim(a)));
        } catch (const std::exception&) {
          errs.add(line, "measure term '" + t + "': bad number '" + trim(a) + "'");
          ok = false;
        }
      }
      if (!ok) continue;
    }
    MeasureTerm term;
    if (kind == "atom" && args.size() == 1) {
      term.kind = MeasureTerm::Kind::Atom;
      term.mass = args[0];
    } else if (kind == "shell" && args.size() == 3) {
      term.kind = MeasureTerm::Kind::Shell;
      term.mass = args[0];
      term.a = args[1];
      term.b = args[2];
      if (!(term.a >= 0.0 && term.b > term.a)) {
        errs.add(line, "shell needs 0 <= inner < outer");
        continue;
      }
    } else if (kind == "bump" && args.size() == 3) {
      term.kind = MeasureTerm::Kind::Bump;
      term.mass = args[0];
      term.a = args[1];
      term.b = args[2];
      if (!(term.b > 0.0) || !(term.a >= 0.0)) {
        errs.add(line, "bump needs center >= 0 and width > 0");
        continue;
      }
    } else {
      errs.add(line, "unknown measure term '" + kind + "' or wrong argument count");
      continue;
    }
    terms.push_back(term);
  }
  if (terms.empty()) errs.add(line, "measure specification is empty");
  return terms;
}

}  // namespace

std::shared_ptr<const ManifoldProfile> load_profile_table(const std::string& path,
                                                          int dimension) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open profile table: " + path);
  std::vector<double> r, psi, dpsi;
  std::string line;
  int cols = 0;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::istringstream is(t);
    std::vector<double> row;
    double v;
    while (is >> v) row.push_back(v);
    if (cols == 0) cols = int(row.size());
    if (int(row.size()) != cols || cols < 2 || cols > 4) {
      throw ValidationError("profile table: rows must have 2-4 numeric columns");
    }
    r.push_back(row[0]);
    psi.push_back(row[1]);
    if (cols >= 3) dpsi.push_back(row[2]);
    // A fourth (psi'') column is accepted but derivatives come from the
    // interpolant.
  }
  std::optional<std::vector<double>> slopes;
  if (!dpsi.empty()) slopes = std::move(dpsi);
  return ManifoldProfile::tabulated(dimension, std::move(r), std::move(psi),
                                    std::move(slopes));
}

std::shared_ptr<const ManifoldProfile> RunConfig::build_profile() const {
  if (manifold_kind == "euclidean") return ManifoldProfile::euclidean(dimension);
  if (manifold_kind == "hyperbolic") return ManifoldProfile::hyperbolic(dimension);
  if (manifold_kind == "exponential_power") {
    return ManifoldProfile::exponential_power(dimension, exponent);
  }
  if (manifold_kind == "tabulated") return load_profile_table(table_path, dimension);
  throw ValidationError("unknown manifold kind: " + manifold_kind);
}

RadialMeasure RunConfig::build_measure(std::shared_ptr<const RadialGrid> grid) const {
  const ManifoldProfile& p = *grid->profile;
  const double pw = double(p.dimension() - 1);
  const double omega = p.unit_sphere_area();
  double atom = 0.0;
  std::vector<double> values(grid->cell_count(), 0.0);
  bool any_density = false;

  for (const MeasureTerm& term : measure) {
    if (term.kind == MeasureTerm::Kind::Atom) {
      atom += term.mass;
      continue;
    }
    any_density = true;
    auto shape = [&](double s) -> double {
      if (term.kind == MeasureTerm::Kind::Shell) {
        return (s >= term.a && s <= term.b) ? 1.0 : 0.0;
      }
      const double x = (s - term.a) / term.b;
      if (std::abs(x) >= 1.0) return 0.0;
      const double q = 1.0 - x * x;
      return q * q * q;
    };
    // Cell averages of the shape, rescaled so the discrete mass is exact.
    std::vector<double> raw(grid->cell_count(), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < grid->cell_count(); ++i) {
      auto f = [&](double s) { return s == 0.0 ? 0.0 : shape(s) * p.psi_power(s, pw); };
      raw[i] = omega * integrate(f, grid->interfaces[i], grid->interfaces[i + 1]);
      total += raw[i];
    }
    if (!(total > 0.0)) {
      throw ValidationError("measure term has no mass inside the domain");
    }
    for (std::size_t i = 0; i < grid->cell_count(); ++i) {
      values[i] += term.mass * raw[i] / total / grid->volumes[i];
    }
  }

  if (!any_density) return RadialMeasure::atom(atom);
  RadialField density(grid, std::move(values));
  return atom == 0.0 ? RadialMeasure::density(std::move(density))
                     : RadialMeasure::atom_and_density(atom, std::move(density));
}

RunConfig parse_config(const std::string& path) {
  ErrorList errs;
  RawConfig raw = read_raw(path, errs);
  Reader reader(raw, errs);
  RunConfig cfg;

  // [manifold] -- required section
  if (!raw.count("manifold")) {
    errs.add(0, "missing required section [manifold]");
  }
  cfg.manifold_kind = reader.get_string("manifold", "kind", "");
  cfg.dimension = reader.get_int("manifold", "dimension", 3);
  cfg.exponent = reader.get_double("manifold", "exponent", 1.0);
  cfg.table_path = reader.get_string("manifold", "table", "");

  if (cfg.manifold_kind.empty()) {
    errs.add(0, "[manifold] kind is required "
                "(euclidean | hyperbolic | exponential_power | tabulated)");
  } else if (cfg.manifold_kind != "euclidean" && cfg.manifold_kind != "hyperbolic" &&
             cfg.manifold_kind != "exponential_power" && cfg.manifold_kind != "tabulated") {
    errs.add(0, "[manifold] unknown kind '" + cfg.manifold_kind + "'");
  }
  if (cfg.dimension < 2) errs.add(0, "[manifold] dimension must be >= 2");
  if (cfg.manifold_kind == "exponential_power" &&
      !(cfg.exponent > 0.0 && cfg.exponent <= 2.0)) {
    errs.add(0, "[manifold] exponent must lie in (0, 2]");
  }
  if (cfg.manifold_kind == "tabulated" && cfg.table_path.empty()) {
    errs.add(0, "[manifold] tabulated profiles need table = <path>");
  }

  // [problem]
  cfg.m = reader.get_double("problem", "m", 2.0);
  if (!(cfg.m > 1.0)) errs.add(0, "[problem] m must exceed 1");
  if (reader.has("problem", "measure")) {
    RawEntry* e = reader.fetch("problem", "measure");
    cfg.measure = parse_measure(e->value, e->line, errs);
  } else {
    cfg.measure = {MeasureTerm{MeasureTerm::Kind::Atom, 1.0, 0, 0}};
  }
  cfg.radius = reader.get_double("problem", "radius", 8.0);
  if (!(cfg.radius > 0.0)) errs.add(0, "[problem] radius must be positive");
  cfg.eps = reader.get_double("problem", "eps", 1e-3);
  if (!(cfg.eps > 0.0)) errs.add(0, "[problem] eps must be positive");
  cfg.radius_schedule = reader.get_list("problem", "radius_schedule", {});
  cfg.eps_schedule = reader.get_list("problem", "eps_schedule", {});
  if (cfg.radius_schedule.size() != cfg.eps_schedule.size()) {
    errs.add(0, "[problem] radius_schedule and eps_schedule must have equal length");
  }

  // [solver]
  cfg.solver.m = cfg.m;
  cfg.solver.cells = reader.get_int("solver", "cells", 1024);
  cfg.solver.grading = reader.get_double("solver", "grading", 1.0);
  cfg.solver.dt_init = reader.get_double("solver", "dt_init", 1e-8);
  cfg.solver.dt_growth = reader.get_double("solver", "dt_growth", 1.05);
  cfg.solver.dt_max_ratio = reader.get_double("solver", "dt_max_ratio", 0.02);
  cfg.solver.t_end = reader.get_double("solver", "t_end", 1.0);
  cfg.solver.newton_tol = reader.get_double("solver", "newton_tol", 1e-12);
  cfg.solver.newton_max_iter = reader.get_int("solver", "newton_max_iter", 40);
  cfg.solver.jacobian_regularization =
      reader.get_double("solver", "jacobian_regularization", 1e-12);
  cfg.solver.signed_mode = reader.get_bool("solver", "signed_mode", false);
  cfg.solver.snapshot_start = reader.get_double("solver", "snapshot_start", 1e-6);
  cfg.solver.snapshots_per_decade = reader.get_int("solver", "snapshots_per_decade", 24);
  cfg.solver.set_dimension(cfg.dimension);
  try {
    cfg.solver.validate();
  } catch (const ValidationError& e) {
    errs.add(0, e.what());
  }

  // [green]
  cfg.green_radii = reader.get_list("green", "radii", logspace(0.1, 10.0, 50));

  // [meanvalue]
  cfg.alpha = reader.get_double("meanvalue", "alpha", 1.0);
  if (!(cfg.alpha > 0.0)) errs.add(0, "[meanvalue] alpha must be positive");
  cfg.meanvalue_radii = reader.get_list("meanvalue", "radii", logspace(0.05, 5.0, 30));
  cfg.field_csv = reader.get_string("meanvalue", "field_csv", "");

  // [verify]
  cfg.suite = reader.get_string("verify", "suite", "all");

  // [output]
  cfg.output_directory = reader.get_string("output", "directory", "out");

  reader.check_unknown();
  errs.raise_if_any(path);

  if (cfg.manifold_kind == "tabulated") {
    std::ifstream probe(cfg.table_path);
    if (!probe) {
      throw ValidationError("invalid configuration " + path + ":\n  [manifold] table file '" +
                            cfg.table_path + "' does not exist");
    }
  }
  return cfg;
}

}  // namespace pmelab
