#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "pmelab/config.hpp"
#include "pmelab/errors.hpp"
#include "pmelab/green.hpp"
#include "pmelab/io_util.hpp"
#include "pmelab/potential.hpp"
#include "pmelab/report.hpp"
#include "pmelab/solver.hpp"
#include "pmelab/verify.hpp"

namespace fs = std::filesystem;
using namespace pmelab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitCheckFailed = 3;

int worker_cap() {
  if (const char* env = std::getenv("PMELAB_WORKERS")) {
    try {
      return std::max(1, std::stoi(env));
    } catch (const std::exception&) {
      throw ValidationError("PMELAB_WORKERS must be an integer");
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return std::max(1u, std::min(hw, 4u));
}

std::string csv_two_columns(const std::string& header, const std::vector<double>& a,
                            const std::vector<double>& b) {
  std::ostringstream os;
  os << header << "\n";
  for (std::size_t i = 0; i < a.size(); ++i) {
    os << format_double(a[i]) << "," << format_double(b[i]) << "\n";
  }
  return os.str();
}

void summary_line(const std::string& subcommand, const std::string& status,
                  const fs::path& out_dir, int files) {
  std::cout << "pmelab-result subcommand=" << subcommand << " status=" << status
            << " out=" << out_dir.string() << " files=" << files << "\n";
}

int cmd_green(const RunConfig& cfg, const fs::path& out_dir, bool quiet) {
  auto profile = cfg.build_profile();
  if (!profile->nonparabolic()) {
    throw ValidationError("manifold is parabolic: " + profile->describe());
  }
  const GreenProfile green = GreenProfile::whole_manifold(profile);

  std::vector<double> g_values;
  g_values.reserve(cfg.green_radii.size());
  for (double r : cfg.green_radii) g_values.push_back(green.value(r));
  write_file_atomic(out_dir / "green.csv", csv_two_columns("r,G", cfg.green_radii, g_values));

  int files = 1;
  if (profile->dimension() >= 3) {
    const VerificationReport rep = green_upper_bound_check(*profile, cfg.green_radii);
    write_file_atomic(out_dir / "green_bound_check.json", rep.to_json() + "\n");
    if (!quiet) std::cout << rep.summary_line() << "\n";
    ++files;
  }
  summary_line("green", "ok", out_dir, files);
  return kExitOk;
}

int cmd_meanvalue(const RunConfig& cfg, const fs::path& out_dir, bool quiet) {
  auto profile = cfg.build_profile();
  const GreenProfile green = GreenProfile::whole_manifold(profile);

  RadialFunction u;
  if (!cfg.field_csv.empty()) {
    // Field source: CSV of r,u rows taken as cell centers.
    std::ifstream in(cfg.field_csv);
    if (!in) throw ValidationError("cannot open field csv: " + cfg.field_csv);
    std::string line;
    std::vector<double> rs, us;
    bool header = true;
    while (std::getline(in, line)) {
      if (header) {
        header = false;
        continue;
      }
      if (line.empty()) continue;
      const auto comma = line.find(',');
      if (comma == std::string::npos) throw ValidationError("field csv: expected r,u rows");
      rs.push_back(std::stod(line.substr(0, comma)));
      us.push_back(std::stod(line.substr(comma + 1)));
    }
    if (rs.size() < 4) throw ValidationError("field csv: need at least 4 rows");
    auto grid = std::make_shared<RadialGrid>();
    grid->profile = profile;
    grid->interfaces.push_back(0.0);
    for (std::size_t i = 0; i + 1 < rs.size(); ++i) {
      grid->interfaces.push_back(0.5 * (rs[i] + rs[i + 1]));
    }
    grid->interfaces.push_back(rs.back() + 0.5 * (rs.back() - rs[rs.size() - 2]));
    grid->centers = rs;
    const double pw = double(profile->dimension() - 1);
    grid->areas.assign(grid->interfaces.size(), 0.0);
    grid->volumes.assign(rs.size(), 0.0);
    for (std::size_t i = 0; i < rs.size(); ++i) {
      grid->areas[i + 1] =
          profile->unit_sphere_area() * profile->psi_power(grid->interfaces[i + 1], pw);
      grid->volumes[i] = 1.0;  // placeholder; field queries only
    }
    RadialField field(grid, us);
    u = as_function(field);
  } else {
    auto grid = build_grid(profile, cfg.radius, cfg.solver.cells, cfg.solver.grading);
    const RadialMeasure mu = cfg.build_measure(grid);
    u = potential_function(mu, green);
  }

  std::ostringstream csv;
  csv << "r,m,M\n";
  for (double r : cfg.meanvalue_radii) {
    csv << format_double(r) << "," << format_double(mean_value_m(u, green, r)) << ","
        << format_double(mean_value_M(u, green, r, cfg.alpha)) << "\n";
  }
  write_file_atomic(out_dir / "meanvalue.csv", csv.str());

  const VerificationReport rep =
      audit_M_monotonicity(u, green, cfg.alpha, cfg.meanvalue_radii);
  write_file_atomic(out_dir / "meanvalue_monotonicity.json", rep.to_json() + "\n");
  if (!quiet) std::cout << rep.summary_line() << "\n";
  summary_line("meanvalue", rep.pass ? "ok" : "check_failed", out_dir, 2);
  return rep.pass ? kExitOk : kExitCheckFailed;
}

std::string diagnostics_csv(const Trajectory& traj) {
  std::ostringstream os;
  os << "t,mass,linf,lmp1,dissipation,boundary_flux\n";
  for (const auto& d : traj.diagnostics) {
    os << format_double(d.t) << "," << format_double(d.mass) << "," << format_double(d.linf)
       << "," << format_double(d.lmp1) << "," << format_double(d.dissipation_cum) << ","
       << format_double(d.boundary_outflux_cum) << "\n";
  }
  return os.str();
}

int write_trajectory(const Trajectory& traj, const fs::path& dir, nlohmann::ordered_json& meta) {
  int files = 0;
  nlohmann::ordered_json snaps = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    std::ostringstream name;
    name << "u_" << std::setw(5) << std::setfill('0') << i << ".csv";
    write_file_atomic(dir / name.str(),
                      csv_two_columns("r,u", traj.grid->centers, traj.snapshots[i].values));
    snaps.push_back({{"file", name.str()}, {"t", format_double(traj.snapshots[i].t)}});
    ++files;
  }
  write_file_atomic(dir / "diagnostics.csv", diagnostics_csv(traj));
  ++files;
  meta["snapshots"] = snaps;
  meta["initial_mass"] = format_double(traj.initial_mass);
  meta["max_conservation_defect"] = format_double(traj.max_conservation_defect);
  meta["completed"] = traj.completed;
  return files;
}

int cmd_solve(const RunConfig& cfg, const fs::path& out_dir, bool quiet) {
  auto profile = cfg.build_profile();
  nlohmann::ordered_json meta;
  meta["profile"] = profile->describe();
  meta["m"] = format_double(cfg.m);
  int files = 0;

  if (!cfg.radius_schedule.empty()) {
    auto grid = build_grid(profile, cfg.radius_schedule.back(), cfg.solver.cells,
                           cfg.solver.grading);
    const RadialMeasure mu = cfg.build_measure(grid);
    const CauchyResult res =
        solve_cauchy(profile, mu, cfg.solver, cfg.radius_schedule, cfg.eps_schedule);
    files += write_trajectory(res.finest(), out_dir, meta);
    meta["radius_schedule_used"] = res.radii_used;
    meta["monotone_in_R"] = res.monotone_in_R;
    meta["max_monotonicity_violation"] = format_double(res.max_monotonicity_violation);
    meta["final_max_difference"] = format_double(res.final_max_difference);
    meta["final_l1_difference"] = format_double(res.final_l1_difference);
  } else {
    const Trajectory traj =
        solve_ball(profile, cfg.radius, cfg.build_measure(build_grid(
                                            profile, cfg.radius, cfg.solver.cells,
                                            cfg.solver.grading)),
                   cfg.eps, cfg.solver);
    files += write_trajectory(traj, out_dir, meta);
  }
  write_file_atomic(out_dir / "run_summary.json", meta.dump(2) + "\n");
  ++files;
  if (!quiet) std::cout << "wrote " << files << " files to " << out_dir << "\n";
  summary_line("solve", "ok", out_dir, files);
  return kExitOk;
}

int cmd_verify(const RunConfig& cfg, const std::string& suite_flag, const fs::path& out_dir,
               bool quiet) {
  const std::string suite = suite_flag.empty() ? cfg.suite : suite_flag;
  if (!suite_name_valid(suite)) {
    throw ValidationError("unknown verify suite '" + suite +
                          "' (geometry | potential | solver | barenblatt | all)");
  }
  const auto reports = run_suite(suite, worker_cap());
  write_file_atomic(out_dir / "verify_report.json", reports_to_json(reports));
  bool all_pass = true;
  for (const auto& r : reports) {
    all_pass = all_pass && r.pass;
    if (!quiet) std::cout << r.summary_line() << "\n";
  }
  summary_line("verify", all_pass ? "ok" : "check_failed", out_dir, 1);
  return all_pass ? kExitOk : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pmelab: porous medium equation laboratory on model manifolds"};
  app.require_subcommand(1);

  std::string config_path, out_override, suite_flag;
  bool quiet = false;
  app.add_flag("--quiet", quiet, "suppress per-check output");

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "configuration file")->required();
    sub->add_option("--out", out_override, "output directory (overrides [output])");
  };
  CLI::App* green = app.add_subcommand("green", "radial Green function tables and bound check");
  add_common(green);
  CLI::App* meanvalue =
      app.add_subcommand("meanvalue", "mean-value operators over Green level sets");
  add_common(meanvalue);
  CLI::App* solve = app.add_subcommand("solve", "implicit finite-volume PME solver");
  add_common(solve);
  CLI::App* verify = app.add_subcommand("verify", "theorem verification suites");
  add_common(verify);
  verify->add_option("--suite", suite_flag, "geometry | potential | solver | barenblatt | all");

  CLI11_PARSE(app, argc, argv);

  try {
    const RunConfig cfg = parse_config(config_path);
    const fs::path out_dir = out_override.empty() ? fs::path(cfg.output_directory)
                                                  : fs::path(out_override);
    std::filesystem::create_directories(out_dir);
    if (green->parsed()) return cmd_green(cfg, out_dir, quiet);
    if (meanvalue->parsed()) return cmd_meanvalue(cfg, out_dir, quiet);
    if (solve->parsed()) return cmd_solve(cfg, out_dir, quiet);
    if (verify->parsed()) return cmd_verify(cfg, suite_flag, out_dir, quiet);
    std::cerr << "error: no subcommand\n";
    return kExitValidation;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}
