#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "pmelab/errors.hpp"
#include "pmelab/green.hpp"
#include "pmelab/potential.hpp"
#include "pmelab/quadrature.hpp"
#include "pmelab/solver.hpp"
#include "pmelab/util.hpp"

using namespace pmelab;

namespace {

RadialField sample_field(std::shared_ptr<const RadialGrid> grid,
                         const std::function<double(double)>& f) {
  std::vector<double> v(grid->cell_count());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid->centers[i]);
  return RadialField(grid, std::move(v));
}

// Brute-force Newtonian potential of the uniform unit-density shell
// 1 <= |y| <= 2 in R^3: nested midpoint quadrature of 1/(4 pi |x - y|) in
// spherical coordinates. Independent of the shell-mean reduction under test.
double brute_shell_potential(double r) {
  const int ns = 900, nth = 900;
  double total = 0.0;
  const double ds = 1.0 / ns;
  const double dth = M_PI / nth;
  for (int i = 0; i < ns; ++i) {
    const double s = 1.0 + (i + 0.5) * ds;
    for (int j = 0; j < nth; ++j) {
      const double th = (j + 0.5) * dth;
      const double dist = std::sqrt(r * r + s * s - 2.0 * r * s * std::cos(th));
      total += (s * s * std::sin(th) / dist) * ds * dth;
    }
  }
  return total * 2.0 * M_PI / (4.0 * M_PI);
}

}  // namespace

TEST_CASE("potential of a unit atom is the Green function") {
  auto e3 = ManifoldProfile::euclidean(3);
  const GreenProfile green = GreenProfile::whole_manifold(e3);
  RadialFunction p = potential_function(RadialMeasure::atom(1.0), green);
  for (double r : logspace(0.01, 10.0, 10)) {
    CHECK(p(r) == doctest::Approx(1.0 / (4 * M_PI * r)).epsilon(1e-9));
  }
  CHECK(p.pole_green_coeff == 1.0);

  // Sampling onto a grid marks the pole singularity.
  auto grid = build_grid(e3, 4.0, 128, 1.0);
  RadialField field = potential(RadialMeasure::atom(1.0), green, grid);
  CHECK(field.pole_is_infinite());
  CHECK(field.pole_green_coeff() == 1.0);
}

TEST_CASE("shell potential: constant inside, Newtonian outside") {
  auto e3 = ManifoldProfile::euclidean(3);
  const GreenProfile green = GreenProfile::whole_manifold(e3);
  auto grid = build_grid(e3, 4.0, 4096, 1.0);
  // Unit density on [1, 2]: exact cell averages via the volume overlap.
  std::vector<double> vals(grid->cell_count());
  for (std::size_t i = 0; i < vals.size(); ++i) {
    const double a = grid->interfaces[i], b = grid->interfaces[i + 1];
    const double lo = std::max(a, 1.0), hi = std::min(b, 2.0);
    if (hi <= lo) {
      vals[i] = 0.0;
    } else {
      auto f = [&](double s) { return s * s; };
      vals[i] = 4.0 * M_PI * integrate(f, lo, hi) / grid->volumes[i];
    }
  }
  RadialMeasure mu = RadialMeasure::density(RadialField(grid, vals));
  RadialFunction p = potential_function(mu, green);

  // Inside: P = int_1^2 s ds = 3/2 (Newton's shell theorem).
  for (double r : {0.1, 0.5, 0.9}) {
    CHECK(p(r) == doctest::Approx(1.5).epsilon(1e-8));
  }
  // Outside: P = mass/(4 pi r), mass = 4 pi (8-1)/3.
  const double mass = 4.0 * M_PI * 7.0 / 3.0;
  for (double r : {2.2, 3.0, 3.9}) {
    CHECK(p(r) == doctest::Approx(mass / (4 * M_PI * r)).epsilon(1e-8));
  }
}

TEST_CASE("shell potential matches the brute-force 3-D oracle") {
  auto e3 = ManifoldProfile::euclidean(3);
  const GreenProfile green = GreenProfile::whole_manifold(e3);
  auto grid = build_grid(e3, 4.0, 2048, 1.0);
  RadialField f =
      sample_field(grid, [](double s) { return (s >= 1.0 && s <= 2.0) ? 1.0 : 0.0; });
  RadialFunction p = potential_function(RadialMeasure::density(f), green);
  for (double r : {0.3, 0.8, 1.2, 1.5, 1.9, 2.3, 3.0, 3.7}) {
    const double oracle = brute_shell_potential(r);
    CHECK(p(r) == doctest::Approx(oracle).epsilon(1e-3));
  }
}

TEST_CASE("zero measure gives the zero field") {
  auto e3 = ManifoldProfile::euclidean(3);
  const GreenProfile green = GreenProfile::whole_manifold(e3);
  auto grid = build_grid(e3, 2.0, 64, 1.0);
  RadialField zero = sample_field(grid, [](double) { return 0.0; });
  RadialField p = potential(RadialMeasure::density(zero), green);
  for (double v : p.values()) CHECK(v == 0.0);
}

TEST_CASE("mollified atom obeys the shell theorem outside its support") {
  auto e3 = ManifoldProfile::euclidean(3);
  const GreenProfile green = GreenProfile::whole_manifold(e3);
  auto grid = build_grid(e3, 8.0, 4096, 1.0);
  RadialField f = mollify_measure(RadialMeasure::atom(1.0), 0.1, grid);
  RadialFunction p = potential_function(RadialMeasure::density(f), green);
  for (double r : {0.1, 0.2, 0.5, 1.0, 4.0}) {
    CHECK(p(r) == doctest::Approx(1.0 / (4 * M_PI * r)).epsilon(1e-8));
  }
}

TEST_CASE("energy identity: both routes agree and match the ball closed form") {
  auto e3 = ManifoldProfile::euclidean(3);
  const GreenProfile green = GreenProfile::whole_manifold(e3);
  auto grid = build_grid(e3, 3.0, 4096, 1.0);
  // Exact cell averages of the unit-ball indicator.
  std::vector<double> vals(grid->cell_count());
  for (std::size_t i = 0; i < vals.size(); ++i) {
    const double a = grid->interfaces[i], b = std::min(grid->interfaces[i + 1], 1.0);
    if (b <= a) {
      vals[i] = 0.0;
    } else {
      vals[i] = 4.0 * M_PI * integrate([](double s) { return s * s; }, a, b) /
                grid->volumes[i];
    }
  }
  RadialField f(grid, vals);
  const auto [lhs, rhs] = potential_energy_identity(f, green);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-6));
  // int f Gf over the unit ball with P = (3 - r^2)/6 inside: 8 pi / 15.
  CHECK(rhs == doctest::Approx(8.0 * M_PI / 15.0).epsilon(1e-4));
}

TEST_CASE("energy identity on hyperbolic space and the zero density") {
  auto h3 = ManifoldProfile::hyperbolic(3);
  const GreenProfile green = GreenProfile::whole_manifold(h3);
  auto grid = build_grid(h3, 4.0, 1024, 1.0);
  RadialField f = sample_field(
      grid, [](double s) { return std::exp(-4.0 * (s - 1.0) * (s - 1.0)); });
  const auto [lhs, rhs] = potential_energy_identity(f, green);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-6));

  RadialField zero = sample_field(grid, [](double) { return 0.0; });
  const auto [zl, zr] = potential_energy_identity(zero, green);
  CHECK(zl == 0.0);
  CHECK(zr == 0.0);

  RadialField neg = sample_field(grid, [](double) { return -1.0; });
  CHECK_THROWS_AS(potential_energy_identity(neg, green), ValidationError);
}

TEST_CASE("mean value m_r: constants, the Green function, and the identity map") {
  auto e3 = ManifoldProfile::euclidean(3);
  const GreenProfile green = GreenProfile::whole_manifold(e3);

  RadialFunction c7;
  c7.eval = [](double) { return 7.0; };
  c7.pole_value = 7.0;
  RadialFunction gfun;
  {
    GreenProfile g = green;
    gfun.eval = [g](double r) { return g.value(r); };
    gfun.pole_green_coeff = 1.0;
  }
  RadialFunction ident;
  ident.eval = [](double s) { return s; };

  for (double r : logspace(0.1, 3.0, 6)) {
    CHECK(mean_value_m(c7, green, r) == doctest::Approx(7.0).epsilon(1e-12));
    CHECK(mean_value_m(gfun, green, r) == doctest::Approx(1.0 / r).epsilon(1e-10));
    // Level radius of 1/r on euclidean N=3: s with 1/(4 pi s) = 1/r.
    CHECK(mean_value_m(ident, green, r) == doctest::Approx(r / (4 * M_PI)).epsilon(1e-10));
  }
}

TEST_CASE("mean value M_r closed forms") {
  auto h3 = ManifoldProfile::hyperbolic(3);
  const GreenProfile green = GreenProfile::whole_manifold(h3);
  RadialFunction gfun;
  {
    GreenProfile g = green;
    gfun.eval = [g](double r) { return g.value(r); };
    gfun.pole_green_coeff = 1.0;
  }
  RadialFunction c2;
  c2.eval = [](double) { return 2.0; };
  c2.pole_value = 2.0;

  for (double r : logspace(0.05, 2.0, 6)) {
    CHECK(mean_value_M(gfun, green, r, 1.0) == doctest::Approx(2.0 / r).epsilon(1e-8));
    CHECK(mean_value_M(gfun, green, r, 2.0) == doctest::Approx(1.5 / r).epsilon(1e-8));
    CHECK(mean_value_M(c2, green, r, 1.0) == doctest::Approx(2.0).epsilon(1e-10));
  }
}

TEST_CASE("linearity of the mean-value operators") {
  auto e3 = ManifoldProfile::euclidean(3);
  const GreenProfile green = GreenProfile::whole_manifold(e3);
  std::mt19937 rng(777);
  std::uniform_real_distribution<double> uni(-2.0, 2.0);
  for (int k = 0; k < 8; ++k) {
    const double a = uni(rng), b = uni(rng);
    const double w0 = uni(rng), w1 = uni(rng), w2 = uni(rng);
    RadialFunction u, v, combo;
    u.eval = [=](double s) { return w0 + w1 * s; };
    u.pole_value = w0;
    v.eval = [=](double s) { return w2 * s * s; };
    v.pole_value = 0.0;
    combo.eval = [=](double s) { return a * (w0 + w1 * s) + b * (w2 * s * s); };
    combo.pole_value = a * w0;
    for (double r : {0.3, 1.1}) {
      const double lhs = mean_value_m(combo, green, r);
      const double rhs = a * mean_value_m(u, green, r) + b * mean_value_m(v, green, r);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
      const double lhsM = mean_value_M(combo, green, r, 1.0);
      const double rhsM =
          a * mean_value_M(u, green, r, 1.0) + b * mean_value_M(v, green, r, 1.0);
      CHECK(lhsM == doctest::Approx(rhsM).epsilon(1e-9));
    }
  }
}

TEST_CASE("M monotonicity audit: potentials pass, growth is flagged") {
  auto e3 = ManifoldProfile::euclidean(3);
  const GreenProfile green = GreenProfile::whole_manifold(e3);
  auto grid = build_grid(e3, 4.0, 512, 1.0);
  RadialMeasure shell = RadialMeasure::density(
      sample_field(grid, [](double s) { return (s >= 1.0 && s <= 2.0) ? 1.0 : 0.0; }));
  auto rep =
      audit_M_monotonicity(potential_function(shell, green), green, 1.0,
                           logspace(0.05, 5.0, 30));
  CHECK(rep.pass);

  RadialFunction growing;
  growing.eval = [](double s) { return s; };
  auto rep2 = audit_M_monotonicity(growing, green, 1.0, logspace(0.05, 5.0, 30));
  CHECK_FALSE(rep2.pass);
  CHECK(rep2.errors[0].value > 1e-3);
}

TEST_CASE("M continuity at the pole for a continuous potential") {
  auto e3 = ManifoldProfile::euclidean(3);
  const GreenProfile green = GreenProfile::whole_manifold(e3);
  auto grid = build_grid(e3, 4.0, 1024, 1.0);
  // Density positive at the pole, so the potential actually varies there.
  RadialMeasure mu = RadialMeasure::density(
      sample_field(grid, [](double s) { return std::exp(-4.0 * s * s); }));
  RadialFunction u = potential_function(mu, green);
  const double u0 = u.pole_value;
  const double g1 = std::abs(mean_value_M(u, green, 1e-1, 1.0) - u0);
  const double g2 = std::abs(mean_value_M(u, green, 1e-2, 1.0) - u0);
  const double g3 = std::abs(mean_value_M(u, green, 1e-3, 1.0) - u0);
  CHECK(g2 < g1);
  CHECK(g3 < g2);
  CHECK(g3 / u0 < 1e-5);
}

TEST_CASE("error paths") {
  auto e3 = ManifoldProfile::euclidean(3);
  auto h3 = ManifoldProfile::hyperbolic(3);
  const GreenProfile green_h = GreenProfile::whole_manifold(h3);
  auto grid_e = build_grid(e3, 2.0, 64, 1.0);
  RadialField f = sample_field(grid_e, [](double) { return 1.0; });
  CHECK_THROWS_AS(potential_function(RadialMeasure::density(f), green_h), ValidationError);
  CHECK_THROWS_AS(potential(RadialMeasure::atom(1.0), green_h, nullptr), ValidationError);
  RadialFunction any;
  any.eval = [](double) { return 0.0; };
  CHECK_THROWS_AS(mean_value_m(any, green_h, -1.0), ValidationError);
  CHECK_THROWS_AS(mean_value_M(any, green_h, 1.0, 0.0), ValidationError);

  // Ball-domain support check.
  const GreenProfile gb = GreenProfile::ball(e3, 1.0);
  CHECK_THROWS_AS(potential_function(RadialMeasure::density(f), gb), ValidationError);

  // Undeclared pole singularity: +inf marker.
  RadialFunction sing;
  sing.eval = [](double s) { return 1.0 / s; };
  sing.pole_value = std::numeric_limits<double>::infinity();
  const GreenProfile ge = GreenProfile::whole_manifold(e3);
  CHECK(std::isinf(mean_value_M(sing, ge, 1.0, 1.0)));
}

TEST_CASE("measure bookkeeping") {
  auto e3 = ManifoldProfile::euclidean(3);
  auto grid = build_grid(e3, 3.0, 256, 1.0);
  RadialField f = sample_field(grid, [](double s) { return s < 1.0 ? 2.0 : 0.0; });
  RadialMeasure mu = RadialMeasure::atom_and_density(-0.5, f);
  // |mu| = 0.5 + 2 * vol(B1); mass = -0.5 + 2 vol(B1). Cell-conservative
  // integrals see the sampled indicator, so the edge cell contributes a
  // half-cell discreteness error.
  const double vol = 4.0 * M_PI / 3.0;
  CHECK(mu.total_variation(*e3) == doctest::Approx(0.5 + 2 * vol).epsilon(3e-2));
  CHECK(mu.total_mass(*e3) == doctest::Approx(-0.5 + 2 * vol).epsilon(3e-2));
  CHECK_FALSE(mu.is_nonnegative());
  CHECK(RadialMeasure::atom(1.0).is_nonnegative());
}
