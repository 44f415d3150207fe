#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pmelab/errors.hpp"
#include "pmelab/green.hpp"
#include "pmelab/quadrature.hpp"
#include "pmelab/util.hpp"

using namespace pmelab;

namespace {
double coth(double x) { return 1.0 / std::tanh(x); }
}

TEST_CASE("adaptive quadrature sanity") {
  CHECK(integrate([](double x) { return x * x; }, 0.0, 1.0) == doctest::Approx(1.0 / 3));
  CHECK(integrate([](double x) { return std::sin(x); }, 0.0, M_PI) ==
        doctest::Approx(2.0).epsilon(1e-12));
  CHECK(integrate([](double) { return 0.0; }, 0.0, 5.0) == 0.0);
  // Multi-scale kernel resolved by the graded splitter: int_0^1 e^{-x/s}/s
  // with s = 1e-6 equals 1 - e^{-1/s} ~ 1.
  const double s = 1e-6;
  const double v =
      integrate_graded([s](double x) { return std::exp(-x / s) / s; }, 0.0, 1.0);
  CHECK(v == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("green_radial closed forms (the derived oracles)") {
  auto e3 = ManifoldProfile::euclidean(3);
  auto h3 = ManifoldProfile::hyperbolic(3);
  for (double r : logspace(0.01, 20.0, 25)) {
    CHECK(green_radial(*e3, r) ==
          doctest::Approx(1.0 / (4.0 * M_PI * r)).epsilon(1e-10));
    CHECK(green_radial(*h3, r) ==
          doctest::Approx((coth(r) - 1.0) / (4.0 * M_PI)).epsilon(1e-10));
  }
  CHECK_THROWS_AS(green_radial(*ManifoldProfile::euclidean(2), 1.0),
                  ParabolicManifoldError);
  CHECK_THROWS_AS(green_radial(*e3, 0.0), ValidationError);
}

TEST_CASE("cached GreenProfile agrees with the direct route") {
  for (auto p : {ManifoldProfile::euclidean(3), ManifoldProfile::hyperbolic(3),
                 ManifoldProfile::exponential_power(3, 1.0)}) {
    const GreenProfile g = GreenProfile::whole_manifold(p);
    for (double r : logspace(0.005, 30.0, 30)) {
      const double direct = green_radial(*p, r);
      if (direct == 0.0) {
        CHECK(g.value(r) <= 1e-300);
      } else {
        CHECK(g.value(r) == doctest::Approx(direct).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("green_ball closed forms and boundary condition") {
  auto e3 = ManifoldProfile::euclidean(3);
  // (1/4pi)(1/r - 1/R)
  CHECK(green_ball(*e3, 2.0, 1.0) == doctest::Approx(1.0 / (8.0 * M_PI)).epsilon(1e-10));
  CHECK(green_ball(*e3, 2.0, 2.0) == 0.0);
  CHECK_THROWS_AS(green_ball(*e3, 2.0, 3.0), ValidationError);

  // G_R vs G on hyperbolic N=3: difference is the tail beyond R.
  auto h3 = ManifoldProfile::hyperbolic(3);
  const double gr = green_ball(*h3, 10.0, 1.0);
  const double g = green_radial(*h3, 1.0);
  CHECK(g - gr == doctest::Approx((coth(10.0) - 1.0) / (4 * M_PI)).epsilon(1e-8));

  const GreenProfile gb = GreenProfile::ball(h3, 10.0);
  CHECK(gb.value(1.0) == doctest::Approx(gr).epsilon(1e-10));
  CHECK(gb.value(10.0) == 0.0);
}

TEST_CASE("G_R increases to G as R grows") {
  auto h3 = ManifoldProfile::hyperbolic(3);
  const double g = green_radial(*h3, 0.5);
  double prev = 0.0;
  for (double R : {1.0, 2.0, 4.0, 8.0, 16.0}) {
    const double gr = green_ball(*h3, R, 0.5);
    CHECK(gr > prev);
    CHECK(gr <= g * (1.0 + 1e-12));
    prev = gr;
  }
  CHECK(g - green_ball(*h3, 16.0, 0.5) < 1e-6);
}

TEST_CASE("level_radius inverts the Green function") {
  auto e3 = ManifoldProfile::euclidean(3);
  const GreenProfile g = GreenProfile::whole_manifold(e3);
  CHECK(g.level_radius(1.0 / (4.0 * M_PI)) == doctest::Approx(1.0).epsilon(1e-10));

  auto h3 = ManifoldProfile::hyperbolic(3);
  const GreenProfile gh = GreenProfile::whole_manifold(h3);
  const double lvl = (coth(2.0) - 1.0) / (4.0 * M_PI);
  CHECK(gh.level_radius(lvl) == doctest::Approx(2.0).epsilon(1e-10));

  // Monotone: larger level, smaller radius.
  double prev = 1e9;
  for (double lv : logspace(1e-4, 1e-1, 8)) {
    const double s = g.level_radius(lv);
    CHECK(s < prev);
    prev = s;
  }
  CHECK_THROWS_AS(gh.level_radius(-1.0), ValidationError);
}

TEST_CASE("flux normalization via 5-point finite differences") {
  for (auto p : {ManifoldProfile::euclidean(3), ManifoldProfile::hyperbolic(3),
                 ManifoldProfile::exponential_power(3, 1.0)}) {
    const GreenProfile g = GreenProfile::whole_manifold(p);
    for (double r : logspace(0.05, 5.0, 12)) {
      // Step scaled by the decay rate of psi^{1-N}, the local scale of g'.
      const double kappa = double(p->dimension() - 1) * p->slope_ratio(r);
      const double h = 1e-3 / std::max(kappa, 1.0 / r);
      const double d = (g.value(r - 2 * h) - 8 * g.value(r - h) + 8 * g.value(r + h) -
                        g.value(r + 2 * h)) /
                       (12 * h);
      const double flux = p->unit_sphere_area() *
                          p->psi_power(r, double(p->dimension() - 1)) * std::abs(d);
      CHECK(flux == doctest::Approx(1.0).epsilon(1e-8));
    }
  }
}

TEST_CASE("analytic derivative matches the flux law exactly") {
  auto h3 = ManifoldProfile::hyperbolic(3);
  const GreenProfile g = GreenProfile::whole_manifold(h3);
  for (double r : {0.3, 1.0, 2.5}) {
    const double expected = -1.0 / (4.0 * M_PI * std::sinh(r) * std::sinh(r));
    CHECK(g.derivative(r) == doctest::Approx(expected).epsilon(1e-13));
  }
}

TEST_CASE("discrete harmonicity off the pole") {
  // psi^{1-N} (psi^{N-1} g')' = 0 away from r = 0; finite-difference check.
  auto h3 = ManifoldProfile::hyperbolic(3);
  const GreenProfile g = GreenProfile::whole_manifold(h3);
  for (double r : {0.5, 1.0, 2.0, 4.0}) {
    const double h = 1e-4 * r;
    auto flux = [&](double s) {
      return h3->psi_power(s, 2.0) * (g.value(s + h) - g.value(s - h)) / (2 * h);
    };
    const double div = (flux(r + h) - flux(r - h)) / (2 * h);
    // Scale against the individual flux magnitude.
    CHECK(std::abs(div) / (std::abs(flux(r)) / r) < 1e-5);
  }
}

TEST_CASE("green upper bound report") {
  auto e3 = ManifoldProfile::euclidean(3);
  auto rep = green_upper_bound_check(*e3, logspace(0.1, 10.0, 10));
  CHECK(rep.pass);
  for (const auto& e : rep.errors) CHECK(e.value == doctest::Approx(1.0).epsilon(1e-9));

  auto h3 = ManifoldProfile::hyperbolic(3);
  rep = green_upper_bound_check(*h3, logspace(0.1, 10.0, 10));
  CHECK(rep.pass);
  for (const auto& e : rep.errors) CHECK(e.value < 1.0);

  auto xp = ManifoldProfile::exponential_power(3, 1.0);
  rep = green_upper_bound_check(*xp, logspace(0.1, 3.0, 10));
  CHECK(rep.pass);
  double prev = 1.0;
  for (const auto& e : rep.errors) {
    CHECK(e.value < 1.0);
    CHECK(e.value <= prev * (1.0 + 1e-9));
    prev = e.value;
  }
}

TEST_CASE("parabolic profiles reject whole-manifold construction") {
  CHECK_THROWS_AS(GreenProfile::whole_manifold(ManifoldProfile::euclidean(2)),
                  ParabolicManifoldError);
  // Ball Green functions exist on parabolic manifolds.
  const GreenProfile g = GreenProfile::ball(ManifoldProfile::euclidean(2), 4.0);
  // (1/2pi) log(R/r) in 2d.
  CHECK(g.value(1.0) == doctest::Approx(std::log(4.0) / (2 * M_PI)).epsilon(1e-10));
}
