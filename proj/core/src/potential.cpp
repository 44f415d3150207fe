#include "pmelab/potential.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "pmelab/errors.hpp"
#include "pmelab/quadrature.hpp"

namespace pmelab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Cumulative kernel integrals of a cell-averaged density. Densities enter
// measure integrals cell-conservatively: cell i contributes exactly
// f_i * V_i, so the discrete mass seen here matches the solver's ledger and
// the potential outside the support is mass * g(r) to quadrature accuracy.
struct Cumulative {
  std::shared_ptr<const RadialGrid> grid;
  std::vector<double> values;  // per-cell density
  std::vector<double> mass;    // A at interfaces: omega int_0^{x_k} f psi^{N-1}
  std::vector<double> kernel;  // B at interfaces: omega int_0^{x_k} g f psi^{N-1}

  double mass_total() const { return mass.back(); }
  double kernel_total() const { return kernel.back(); }

  double mass_at(double r) const;
  double kernel_at(const GreenProfile& green, double r) const;
};

double Cumulative::mass_at(double r) const {
  if (r <= 0.0) return 0.0;
  const auto& xs = grid->interfaces;
  if (r >= xs.back()) return mass.back();
  const std::size_t i = grid->locate(r);
  const ManifoldProfile& p = *grid->profile;
  const double pw = double(p.dimension() - 1);
  auto f = [&](double s) { return s == 0.0 ? 0.0 : p.psi_power(s, pw); };
  return mass[i] + values[i] * p.unit_sphere_area() * integrate(f, xs[i], r);
}

double Cumulative::kernel_at(const GreenProfile& green, double r) const {
  if (r <= 0.0) return 0.0;
  const auto& xs = grid->interfaces;
  if (r >= xs.back()) return kernel.back();
  const std::size_t i = grid->locate(r);
  const ManifoldProfile& p = *grid->profile;
  const double pw = double(p.dimension() - 1);
  auto f = [&](double s) {
    return s == 0.0 ? 0.0 : green.value(s) * p.psi_power(s, pw);
  };
  return kernel[i] + values[i] * p.unit_sphere_area() * integrate(f, xs[i], r);
}

std::shared_ptr<Cumulative> build_cumulative(const RadialField& f, const GreenProfile& green) {
  auto c = std::make_shared<Cumulative>();
  c->grid = f.grid();
  c->values = f.values();
  const RadialGrid& grid = *c->grid;
  const ManifoldProfile& p = *grid.profile;
  const double pw = double(p.dimension() - 1);
  const double omega = p.unit_sphere_area();
  const std::size_t m = grid.cell_count();

  c->mass.assign(m + 1, 0.0);
  c->kernel.assign(m + 1, 0.0);
  auto gk = [&](double s) { return s == 0.0 ? 0.0 : green.value(s) * p.psi_power(s, pw); };
  for (std::size_t i = 0; i < m; ++i) {
    c->mass[i + 1] = c->mass[i] + c->values[i] * grid.volumes[i];
    const double cellg =
        omega * integrate(gk, grid.interfaces[i], grid.interfaces[i + 1]);
    c->kernel[i + 1] = c->kernel[i] + c->values[i] * cellg;
  }
  return c;
}

}  // namespace

RadialFunction potential_function(const RadialMeasure& measure, const GreenProfile& green) {
  const ManifoldProfile& p = *green.profile();
  const double atom = measure.atom_mass();

  if (!measure.has_density()) {
    RadialFunction out;
    GreenProfile g = green;
    out.eval = [g, atom](double r) { return atom * g.value(r); };
    out.pole_value = 0.0;
    out.pole_green_coeff = atom;
    return out;
  }

  const RadialField& f = measure.density_field();
  if (f.grid()->profile.get() != green.profile().get()) {
    throw ValidationError("potential: measure and Green profile live on different manifolds");
  }
  if (green.is_ball() && f.grid()->radius() > green.radius() * (1.0 + 1e-12)) {
    throw ValidationError("potential: measure support exceeds the ball domain");
  }
  measure.total_variation(p);  // finiteness gate

  auto cum = build_cumulative(f, green);
  GreenProfile g = green;
  RadialFunction out;
  out.eval = [cum, g, atom](double r) {
    if (r == 0.0) return atom != 0.0 ? kInf : cum->kernel_total();
    const double gr = g.value(r);
    const double a = cum->mass_at(r);
    const double b = cum->kernel_at(g, r);
    return atom * gr + gr * a + (cum->kernel_total() - b);
  };
  // Regular part at the pole: the full kernel integral of the density.
  out.pole_value = cum->kernel_total();
  out.pole_green_coeff = atom;
  return out;
}

RadialField potential(const RadialMeasure& measure, const GreenProfile& green,
                      std::shared_ptr<const RadialGrid> out_grid) {
  if (!out_grid) {
    if (!measure.has_density()) {
      throw ValidationError("potential of a pure atom needs an explicit output grid");
    }
    out_grid = measure.density_field().grid();
  }
  RadialFunction f = potential_function(measure, green);
  std::vector<double> values(out_grid->cell_count());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = f(out_grid->centers[i]);
  RadialField field(out_grid, std::move(values));
  if (measure.atom_mass() != 0.0) field.mark_pole_singularity(measure.atom_mass());
  return field;
}

std::pair<double, double> potential_energy_identity(const RadialField& f,
                                                    const GreenProfile& green) {
  const ManifoldProfile& p = *green.profile();
  if (!green.is_ball() && p.dimension() < 3) {
    throw ValidationError("energy identity requires N >= 3 on the whole manifold");
  }
  for (double v : f.values()) {
    if (v < 0.0) throw ValidationError("energy identity requires a nonnegative density");
  }
  RadialMeasure mu = RadialMeasure::density(f);
  mu.total_variation(p);  // integrability gate

  const double pw = double(p.dimension() - 1);
  const double omega = p.unit_sphere_area();
  auto cum = build_cumulative(f, green);
  const RadialGrid& grid = *f.grid();
  const double smax = grid.radius();

  // lhs: |grad P|(r) = A(r)/(omega psi^{N-1}); per-cell quadrature plus the
  // closed-form tail A_tot^2 g(s_max) beyond the support.
  auto lhs_integrand = [&](double s) {
    if (s == 0.0) return 0.0;
    const double a = cum->mass_at(s);
    return a * a * p.psi_power(s, -pw) / omega;
  };
  double lhs = 0.0;
  for (std::size_t i = 0; i < grid.cell_count(); ++i) {
    lhs += integrate_graded(lhs_integrand, grid.interfaces[i], grid.interfaces[i + 1]);
  }
  const double atot = cum->mass_total();
  lhs += atot * atot * green.value(smax);

  // rhs: int f P dV, cell-conservative in f.
  RadialFunction pot = potential_function(mu, green);
  auto pk = [&](double s) { return s == 0.0 ? 0.0 : pot(s) * p.psi_power(s, pw); };
  double rhs = 0.0;
  for (std::size_t i = 0; i < grid.cell_count(); ++i) {
    if (f.values()[i] == 0.0) continue;
    rhs += f.values()[i] * omega *
           integrate(pk, grid.interfaces[i], grid.interfaces[i + 1]);
  }
  return {lhs, rhs};
}

double mean_value_m(const RadialFunction& u, const GreenProfile& green, double r) {
  if (!(r > 0.0)) throw ValidationError("mean_value_m: r must be positive");
  const double s = green.level_radius(1.0 / r);
  return u(s);
}

double mean_value_m(const RadialField& u, const GreenProfile& green, double r) {
  return mean_value_m(as_function(u), green, r);
}

double mean_value_M(const RadialFunction& u, const GreenProfile& green, double r,
                    double alpha) {
  if (!(r > 0.0)) throw ValidationError("mean_value_M: r must be positive");
  if (!(alpha > 0.0)) throw ValidationError("mean_value_M: alpha must be positive");
  const double c = u.pole_green_coeff;
  if (c == 0.0 && std::isinf(u.pole_value)) return kInf;  // undeclared singularity

  const double s_r = green.level_radius(1.0 / r);
  const ManifoldProfile& p = *green.profile();
  const double omega = p.unit_sphere_area();

  // Substitution xi = 1/g(s):
  //   int_0^r xi^alpha m_xi[v] dxi = int_0^{s_r} v(s) g(s)^{-alpha-2} psi^{1-N}/omega ds,
  // with the singular part c*g of u split off in closed form:
  //   M_r[c g] = c ((alpha+1)/alpha) / r.
  auto v = [&](double s) { return u(s) - c * green.value(s); };
  auto integrand = [&](double s) {
    if (s <= 0.0) return 0.0;
    const double gs = green.value(s);
    if (!std::isfinite(gs)) return 0.0;
    return v(s) * std::pow(gs, -alpha - 2.0) *
           p.psi_power(s, 1.0 - double(p.dimension())) / omega;
  };
  const double regular =
      (alpha + 1.0) / std::pow(r, alpha + 1.0) * integrate_graded(integrand, 0.0, s_r);
  const double singular = c * ((alpha + 1.0) / alpha) / r;
  return singular + regular;
}

double mean_value_M(const RadialField& u, const GreenProfile& green, double r, double alpha) {
  return mean_value_M(as_function(u), green, r, alpha);
}

VerificationReport audit_M_monotonicity(const RadialFunction& u, const GreenProfile& green,
                                        double alpha, std::vector<double> r_samples,
                                        double tolerance) {
  const auto start = std::chrono::steady_clock::now();
  std::sort(r_samples.begin(), r_samples.end());

  VerificationReport rep;
  rep.name = "M_monotonicity";
  std::ostringstream in;
  in << green.profile()->describe() << " alpha=" << alpha << " samples=" << r_samples.size();
  rep.inputs = in.str();
  rep.tolerance = tolerance;

  double prev = kInf;
  double max_increase = 0.0;
  double scale = 0.0;
  for (double r : r_samples) {
    const double m = mean_value_M(u, green, r, alpha);
    scale = std::max(scale, std::abs(m));
    if (std::isfinite(prev)) max_increase = std::max(max_increase, m - prev);
    prev = m;
  }
  rep.errors.push_back({"max_increase", max_increase});
  std::ostringstream note;
  note << "value scale " << scale;
  rep.note = note.str();
  rep.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep.finalize();
}

}  // namespace pmelab
