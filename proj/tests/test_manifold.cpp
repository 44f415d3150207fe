#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "pmelab/errors.hpp"
#include "pmelab/manifold.hpp"
#include "pmelab/util.hpp"

using namespace pmelab;

TEST_CASE("unit sphere areas") {
  CHECK(ManifoldProfile::euclidean(2)->unit_sphere_area() == doctest::Approx(2 * M_PI));
  CHECK(ManifoldProfile::euclidean(3)->unit_sphere_area() == doctest::Approx(4 * M_PI));
  CHECK(ManifoldProfile::euclidean(4)->unit_sphere_area() ==
        doctest::Approx(2 * M_PI * M_PI));
}

TEST_CASE("sectional and ricci curvature closed forms") {
  auto e3 = ManifoldProfile::euclidean(3);
  auto h3 = ManifoldProfile::hyperbolic(3);
  CHECK(sectional_curvature(*e3, 1.0) == doctest::Approx(0.0));
  CHECK(sectional_curvature(*h3, 1.0) == doctest::Approx(-1.0));
  CHECK(ricci_radial(*h3, 1.0) == doctest::Approx(-2.0));
  CHECK(ricci_radial(*e3, 7.3) == doctest::Approx(0.0));
  CHECK_THROWS_AS(sectional_curvature(*e3, 0.0), ValidationError);
  CHECK_THROWS_AS(sectional_curvature(*e3, -1.0), ValidationError);
}

TEST_CASE("exponential-power profile matches r e^{r^a} beyond 1 and r near 0") {
  for (double a : {0.5, 1.0, 2.0}) {
    auto p = ManifoldProfile::exponential_power(3, a);
    for (double r : {1.0, 1.5, 3.0}) {
      CHECK(p->psi(r) == doctest::Approx(r * std::exp(std::pow(r, a))).epsilon(1e-12));
    }
    CHECK(p->psi(1e-12) == doctest::Approx(1e-12).epsilon(1e-12));
    CHECK(p->psi_prime(1e-12) == doctest::Approx(1.0).epsilon(1e-10));
  }
  CHECK_THROWS_AS(ManifoldProfile::exponential_power(3, 0.0), ValidationError);
  CHECK_THROWS_AS(ManifoldProfile::exponential_power(3, 2.5), ValidationError);
}

TEST_CASE("exponential-power derivatives agree with finite differences") {
  // The curvature oracle: centered finite differences of psi itself.
  for (double a : {0.5, 1.0, 2.0}) {
    auto p = ManifoldProfile::exponential_power(3, a);
    for (double r : logspace(0.05, 4.0, 15)) {
      const double h = 1e-3 / std::max(p->slope_ratio(r), 1.0 / r);
      const double fd1 = (p->psi(r + h) - p->psi(r - h)) / (2 * h);
      const double fd2 = (p->psi(r + h) - 2 * p->psi(r) + p->psi(r - h)) / (h * h);
      CHECK(p->psi_prime(r) == doctest::Approx(fd1).epsilon(1e-6));
      if (std::abs(fd2) > 1e-8 * p->psi(r)) {
        CHECK(p->psi_second(r) == doctest::Approx(fd2).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("exponential-power stays convex (Cartan-Hadamard) for a in [0.25, 2]") {
  for (double a : {0.25, 0.5, 1.0, 1.5, 2.0}) {
    auto p = ManifoldProfile::exponential_power(3, a);
    for (double r : logspace(1e-4, 10.0, 200)) {
      CHECK(p->convexity_ratio(r) >= -1e-10);
    }
  }
}

TEST_CASE("curvature ratio avoids overflow at large radii") {
  auto p = ManifoldProfile::exponential_power(3, 2.0);
  // psi itself overflows around r ~ 26; the ratio must not.
  const double ratio = p->convexity_ratio(20.0);
  // g = r^2: ratio = 2g'/r + g'^2 + g'' = 4 + 4r^2 + 2
  CHECK(ratio == doctest::Approx(4.0 * 400.0 + 6.0).epsilon(1e-12));
  CHECK(ricci_radial(*p, 20.0) == doctest::Approx(-2.0 * 1606.0).epsilon(1e-12));
}

TEST_CASE("ball volumes: closed forms and monotonicity") {
  auto e3 = ManifoldProfile::euclidean(3);
  CHECK(ball_volume(*e3, 1.0) == doctest::Approx(4.0 * M_PI / 3.0).epsilon(1e-10));
  CHECK(ball_volume(*e3, 0.0) == 0.0);
  CHECK_THROWS_AS(ball_volume(*e3, -1.0), ValidationError);

  auto h3 = ManifoldProfile::hyperbolic(3);
  const double exact = 4.0 * M_PI * 0.5 * (std::sinh(1.0) * std::cosh(1.0) - 1.0);
  CHECK(ball_volume(*h3, 1.0) == doctest::Approx(exact).epsilon(1e-10));

  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> uni(0.01, 5.0);
  for (int k = 0; k < 20; ++k) {
    double r1 = uni(rng), r2 = uni(rng);
    if (r1 > r2) std::swap(r1, r2);
    if (r1 == r2) continue;
    CHECK(ball_volume(*h3, r1) < ball_volume(*h3, r2));
  }
}

TEST_CASE("volume lower bound C_N R^N with equality on euclidean") {
  auto e3 = ManifoldProfile::euclidean(3);
  auto h3 = ManifoldProfile::hyperbolic(3);
  const double cn = 4.0 * M_PI / 3.0;
  for (double R : {0.5, 1.0, 2.0}) {
    CHECK(ball_volume(*e3, R) == doctest::Approx(cn * R * R * R).epsilon(1e-10));
    CHECK(ball_volume(*h3, R) >= cn * R * R * R);
  }
}

TEST_CASE("slope ratio bound m(rho) >= (N-1)/rho on Cartan-Hadamard profiles") {
  for (auto p : {ManifoldProfile::euclidean(3), ManifoldProfile::hyperbolic(3),
                 ManifoldProfile::exponential_power(3, 1.0)}) {
    for (double r : logspace(1e-3, 8.0, 40)) {
      const double m = 2.0 * p->slope_ratio(r);
      CHECK(m >= 2.0 / r * (1.0 - 1e-12));
    }
  }
}

TEST_CASE("nonparabolicity dichotomy") {
  CHECK_FALSE(ManifoldProfile::euclidean(2)->nonparabolic());
  CHECK(ManifoldProfile::euclidean(3)->nonparabolic());
  CHECK(ManifoldProfile::hyperbolic(2)->nonparabolic());
  CHECK(ManifoldProfile::hyperbolic(3)->nonparabolic());
  CHECK(ManifoldProfile::exponential_power(2, 1.0)->nonparabolic());
  // Euclidean N=3 tail: int_1^inf s^{-2} = 1.
  CHECK(ManifoldProfile::euclidean(3)->green_tail_integral() == doctest::Approx(1.0));
  // Hyperbolic N=3 tail: int_1^inf sinh^{-2} = coth 1 - 1.
  CHECK(ManifoldProfile::hyperbolic(3)->green_tail_integral() ==
        doctest::Approx(1.0 / std::tanh(1.0) - 1.0).epsilon(1e-12));
}

TEST_CASE("hypothesis report on the built-ins") {
  const auto he2 = check_hypothesis(*ManifoldProfile::euclidean(2), 10.0);
  CHECK_FALSE(he2.is_nonparabolic);
  CHECK(he2.is_cartan_hadamard);

  const auto he3 = check_hypothesis(*ManifoldProfile::euclidean(3), 10.0);
  CHECK(he3.is_nonparabolic);
  CHECK(he3.ricci_bound_constant == doctest::Approx(0.0));

  const auto hh3 = check_hypothesis(*ManifoldProfile::hyperbolic(3), 20.0);
  CHECK(hh3.is_nonparabolic);
  CHECK(hh3.is_cartan_hadamard);
  CHECK(hh3.ricci_bound_constant == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(hh3.ricci_bound_is_finite);

  const auto hx = check_hypothesis(*ManifoldProfile::exponential_power(3, 2.0), 20.0);
  CHECK(hx.is_cartan_hadamard);
  CHECK(hx.is_nonparabolic);
  CHECK(hx.ricci_bound_is_finite);
  // (N-1) psi''/psi / (1+r^2) -> 2*(4r^2+6)/(1+r^2) -> 8 from above as r grows.
  CHECK(hx.ricci_bound_constant > 8.0);
  CHECK(hx.ricci_bound_constant < 13.0);
}

TEST_CASE("tabulated profile: interpolation and class-A validation") {
  // Sample sinh on a fine grid and check the interpolant reproduces it.
  std::vector<double> r, psi;
  for (int i = 0; i <= 400; ++i) {
    r.push_back(i * 0.02);
    psi.push_back(std::sinh(r.back()));
  }
  auto p = ManifoldProfile::tabulated(3, r, psi);
  CHECK(p->max_radius() == doctest::Approx(8.0));
  for (double q : {0.013, 0.5, 1.0, 3.7, 7.9}) {
    CHECK(p->psi(q) == doctest::Approx(std::sinh(q)).epsilon(1e-6));
    CHECK(p->psi_prime(q) == doctest::Approx(std::cosh(q)).epsilon(1e-4));
  }
  CHECK(p->nonparabolic());
  CHECK_THROWS_AS(p->psi(9.0), ValidationError);

  // Negative psi is an invalid profile.
  std::vector<double> bad = psi;
  bad[5] = -0.1;
  CHECK_THROWS_AS(ManifoldProfile::tabulated(3, r, bad), ValidationError);

  // Wrong slope at the pole.
  std::vector<double> r2 = {0.0, 0.1, 0.2, 0.3, 0.4};
  std::vector<double> scaled = {0.0, 0.2, 0.4, 0.6, 0.8};
  CHECK_THROWS_AS(ManifoldProfile::tabulated(3, r2, scaled), ValidationError);
}

TEST_CASE("tabulated euclidean N=2 flagged parabolic by tail heuristic") {
  std::vector<double> r, psi;
  for (int i = 0; i <= 200; ++i) {
    r.push_back(i * 0.05);
    psi.push_back(r.back());
  }
  auto p = ManifoldProfile::tabulated(2, r, psi);
  CHECK_FALSE(p->nonparabolic());
  const auto rep = check_hypothesis(*p, 10.0);
  CHECK(rep.nonparabolicity_is_heuristic);
}
