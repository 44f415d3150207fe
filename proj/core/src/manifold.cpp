#include "pmelab/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pmelab/errors.hpp"
#include "pmelab/quadrature.hpp"

namespace pmelab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Second-order Taylor arithmetic: value plus two derivatives. Enough to
// evaluate psi, psi', psi'' of the exponential-power profile from one
// expression instead of hand-differentiating the switch.
struct Jet2 {
  double v = 0.0, d1 = 0.0, d2 = 0.0;
};

Jet2 jet_var(double r) { return {r, 1.0, 0.0}; }
Jet2 jet_const(double c) { return {c, 0.0, 0.0}; }

Jet2 operator+(const Jet2& a, const Jet2& b) { return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2}; }
Jet2 operator-(const Jet2& a, const Jet2& b) { return {a.v - b.v, a.d1 - b.d1, a.d2 - b.d2}; }
Jet2 operator*(const Jet2& a, const Jet2& b) {
  return {a.v * b.v, a.d1 * b.v + a.v * b.d1, a.d2 * b.v + 2.0 * a.d1 * b.d1 + a.v * b.d2};
}
Jet2 operator/(const Jet2& a, const Jet2& b) {
  const double v = a.v / b.v;
  const double d1 = (a.d1 - v * b.d1) / b.v;
  const double d2 = (a.d2 - 2.0 * d1 * b.d1 - v * b.d2) / b.v;
  return {v, d1, d2};
}
Jet2 jet_exp(const Jet2& a) {
  const double e = std::exp(a.v);
  return {e, e * a.d1, e * (a.d2 + a.d1 * a.d1)};
}
// r^p of the radial variable itself.
Jet2 jet_rpow(double r, double p) {
  const double v = std::pow(r, p);
  return {v, p * v / r, p * (p - 1.0) * v / (r * r)};
}

// C-infinity unit step h(x)/(h(x)+h(1-x)), h(x) = exp(-1/x). Flat to all
// orders at both ends of [0,1].
Jet2 jet_switch(const Jet2& x) {
  const Jet2 one = jet_const(1.0);
  const Jet2 hx = jet_exp(jet_const(0.0) - one / x);
  const Jet2 hc = jet_exp(jet_const(0.0) - one / (one - x));
  return hx / (hx + hc);
}

// Reparameterized switch argument: spreading the ramp as r^0.3 keeps
// psi'' >= 0 for every exponent a in [0.25, 2]; steeper ramps lose convexity
// below a ~ 1.2.
constexpr double kSwitchExponent = 0.3;
// Below this radius the switch numerator underflows to an exact 0 and
// psi(r) = r identically.
constexpr double kSwitchFloor = 2.5e-10;

// g(r) = r^a s(r); psi = r exp(g). Valid for 0 < r, any a in (0,2].
Jet2 expower_g(double r, double a) {
  if (r >= 1.0) return jet_rpow(r, a);
  if (r < kSwitchFloor) return jet_const(0.0);
  const Jet2 s = jet_switch(jet_rpow(r, kSwitchExponent));
  return jet_rpow(r, a) * s;
}

double binomial_coefficient(int n, int k) {
  double c = 1.0;
  for (int j = 1; j <= k; ++j) c *= double(n - k + j) / double(j);
  return c;
}

// J_m(r) = int_r^inf sinh^{-m}(s) ds, m >= 1.
double hyperbolic_tail(int m, double r) {
  if (m < 1) throw ValidationError("hyperbolic tail: order must be >= 1");
  if (r >= 1.0) {
    // sinh^{-m} = 2^m sum_j C(m-1+j, j) e^{-(m+2j)s}; e^{-2r} <= e^{-2} so a
    // few dozen terms reach full precision.
    double total = 0.0;
    const double q = std::exp(-2.0 * r);
    double factor = std::exp(-double(m) * r);  // e^{-(m+2j) r}
    for (int j = 0; j < 64; ++j) {
      const double k = double(m + 2 * j);
      const double term = binomial_coefficient(m - 1 + j, j) * factor / k;
      total += term;
      if (term < 1e-18 * total) break;
      factor *= q;
    }
    return std::ldexp(total, m);  // times 2^m
  }
  // Small r: upward recursion from the closed forms of J_1 and J_2.
  const double j1 = -std::log(std::tanh(0.5 * r));
  if (m == 1) return j1;
  const double j2 = 2.0 / std::expm1(2.0 * r);
  if (m == 2) return j2;
  double jkm1 = j1, jk = j2;  // J_{k-1}, J_k with k starting at 2
  const double ch = std::cosh(r);
  const double sh = std::sinh(r);
  for (int k = 2; k < m; ++k) {
    const double next = ch / (double(k) * std::pow(sh, k)) - (double(k - 1) / double(k)) * jkm1;
    jkm1 = jk;
    jk = next;
  }
  return jk;
}

// Monotone cubic (Fritsch-Carlson) slopes for strictly increasing data.
std::vector<double> pchip_slopes(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> d(n, 0.0);
  if (n == 2) {
    d[0] = d[1] = (y[1] - y[0]) / (x[1] - x[0]);
    return d;
  }
  std::vector<double> h(n - 1), delta(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x[i + 1] - x[i];
    delta[i] = (y[i + 1] - y[i]) / h[i];
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] * delta[i] <= 0.0) {
      d[i] = 0.0;
    } else {
      const double w1 = 2.0 * h[i] + h[i - 1];
      const double w2 = h[i] + 2.0 * h[i - 1];
      d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
    }
  }
  auto endpoint = [](double h0, double h1, double d0, double d1) {
    double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (s * d0 <= 0.0) return 0.0;
    if (std::abs(s) > 3.0 * std::abs(d0)) return 3.0 * d0;
    return s;
  };
  d[0] = endpoint(h[0], h[1], delta[0], delta[1]);
  d[n - 1] = endpoint(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
  return d;
}

}  // namespace

struct ManifoldProfile::Table {
  std::vector<double> r;
  std::vector<double> psi;
  std::vector<double> slope;

  std::size_t segment(double rq) const {
    auto it = std::upper_bound(r.begin(), r.end(), rq);
    std::size_t i = std::size_t(std::distance(r.begin(), it));
    if (i == 0) return 0;
    if (i >= r.size()) return r.size() - 2;
    return i - 1;
  }

  // Hermite value and derivatives on the segment containing rq.
  void eval(double rq, double* v, double* d1, double* d2) const {
    const std::size_t i = segment(rq);
    const double h = r[i + 1] - r[i];
    const double t = (rq - r[i]) / h;
    const double y0 = psi[i], y1 = psi[i + 1];
    const double m0 = slope[i] * h, m1 = slope[i + 1] * h;
    const double t2 = t * t, t3 = t2 * t;
    if (v) {
      *v = (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * m0 + (-2 * t3 + 3 * t2) * y1 +
           (t3 - t2) * m1;
    }
    if (d1) {
      *d1 = ((6 * t2 - 6 * t) * y0 + (3 * t2 - 4 * t + 1) * m0 + (-6 * t2 + 6 * t) * y1 +
             (3 * t2 - 2 * t) * m1) /
            h;
    }
    if (d2) {
      *d2 = ((12 * t - 6) * y0 + (6 * t - 4) * m0 + (-12 * t + 6) * y1 + (6 * t - 2) * m1) /
            (h * h);
    }
  }
};

ManifoldProfile::ManifoldProfile(Kind kind, int dimension)
    : kind_(kind), dimension_(dimension) {
  if (dimension < 2) throw ValidationError("manifold dimension must be >= 2");
  const double half = 0.5 * double(dimension);
  omega_ = 2.0 * std::pow(M_PI, half) / std::tgamma(half);
  r_max_ = kInf;
}

std::shared_ptr<const ManifoldProfile> ManifoldProfile::euclidean(int dimension) {
  return std::shared_ptr<const ManifoldProfile>(
      new ManifoldProfile(Kind::Euclidean, dimension));
}

std::shared_ptr<const ManifoldProfile> ManifoldProfile::hyperbolic(int dimension) {
  return std::shared_ptr<const ManifoldProfile>(
      new ManifoldProfile(Kind::Hyperbolic, dimension));
}

std::shared_ptr<const ManifoldProfile> ManifoldProfile::exponential_power(int dimension,
                                                                          double a) {
  if (!(a > 0.0 && a <= 2.0)) {
    throw ValidationError("exponential-power profile requires exponent in (0, 2]");
  }
  auto p = std::shared_ptr<ManifoldProfile>(
      new ManifoldProfile(Kind::ExponentialPower, dimension));
  p->exponent_ = a;
  return p;
}

std::shared_ptr<const ManifoldProfile> ManifoldProfile::tabulated(
    int dimension, std::vector<double> radii, std::vector<double> psi_values,
    std::optional<std::vector<double>> psi_slopes) {
  if (radii.size() < 4 || radii.size() != psi_values.size()) {
    throw ValidationError("tabulated profile needs >= 4 (r, psi) samples of equal length");
  }
  if (psi_slopes && psi_slopes->size() != radii.size()) {
    throw ValidationError("tabulated profile slope column has wrong length");
  }
  for (std::size_t i = 0; i + 1 < radii.size(); ++i) {
    if (!(radii[i] < radii[i + 1])) {
      throw ValidationError("tabulated profile radii must be strictly increasing");
    }
  }
  if (std::abs(radii.front()) > 0.0 || std::abs(psi_values.front()) > 0.0) {
    throw ValidationError("tabulated profile must start at (r, psi) = (0, 0)");
  }
  for (std::size_t i = 1; i < psi_values.size(); ++i) {
    if (!(psi_values[i] > 0.0)) {
      throw ValidationError("invalid profile: tabulated psi must be positive for r > 0");
    }
  }

  auto table = std::make_shared<Table>();
  table->r = std::move(radii);
  table->psi = std::move(psi_values);
  table->slope = psi_slopes ? std::move(*psi_slopes) : pchip_slopes(table->r, table->psi);
  // Class-A membership: unit slope at the pole, within interpolation noise.
  if (std::abs(table->slope.front() - 1.0) > 1e-3) {
    throw ValidationError("invalid profile: tabulated psi'(0) must equal 1");
  }

  auto p = std::shared_ptr<ManifoldProfile>(
      new ManifoldProfile(Kind::Tabulated, dimension));
  p->r_max_ = table->r.back();
  p->table_ = std::move(table);
  return p;
}

void ManifoldProfile::validate_radius(double r, bool strictly_positive) const {
  if (strictly_positive ? !(r > 0.0) : !(r >= 0.0)) {
    throw ValidationError("radius out of domain: r = " + std::to_string(r));
  }
  if (r > r_max_) {
    throw ValidationError("radius beyond tabulated range: r = " + std::to_string(r));
  }
}

double ManifoldProfile::psi(double r) const {
  validate_radius(r, false);
  switch (kind_) {
    case Kind::Euclidean: return r;
    case Kind::Hyperbolic: return std::sinh(r);
    case Kind::ExponentialPower: {
      if (r == 0.0) return 0.0;
      return r * std::exp(expower_g(r, exponent_).v);
    }
    case Kind::Tabulated: {
      double v;
      table_->eval(r, &v, nullptr, nullptr);
      return v;
    }
  }
  return 0.0;
}

double ManifoldProfile::psi_prime(double r) const {
  validate_radius(r, false);
  switch (kind_) {
    case Kind::Euclidean: return 1.0;
    case Kind::Hyperbolic: return std::cosh(r);
    case Kind::ExponentialPower: {
      if (r == 0.0) return 1.0;
      const Jet2 g = expower_g(r, exponent_);
      // psi' = e^g (1 + r g')
      return std::exp(g.v) * (1.0 + r * g.d1);
    }
    case Kind::Tabulated: {
      double d;
      table_->eval(r, nullptr, &d, nullptr);
      return d;
    }
  }
  return 0.0;
}

double ManifoldProfile::psi_second(double r) const {
  validate_radius(r, false);
  switch (kind_) {
    case Kind::Euclidean: return 0.0;
    case Kind::Hyperbolic: return std::sinh(r);
    case Kind::ExponentialPower: {
      if (r == 0.0) return 0.0;
      const Jet2 g = expower_g(r, exponent_);
      // psi'' = e^g (2 g' + r g'^2 + r g'')
      return std::exp(g.v) * (2.0 * g.d1 + r * (g.d1 * g.d1 + g.d2));
    }
    case Kind::Tabulated: {
      double d2;
      table_->eval(r, nullptr, nullptr, &d2);
      return d2;
    }
  }
  return 0.0;
}

double ManifoldProfile::log_psi(double r) const {
  validate_radius(r, true);
  switch (kind_) {
    case Kind::Euclidean: return std::log(r);
    case Kind::Hyperbolic:
      // Direct form below r = 1; the expansion r + log(1 - e^{-2r}) - log 2
      // avoids overflow for large r (and cancellation only threatens it for
      // small r, where the direct form is exact).
      if (r < 1.0) return std::log(std::sinh(r));
      return r + std::log1p(-std::exp(-2.0 * r)) - M_LN2;
    case Kind::ExponentialPower: return std::log(r) + expower_g(r, exponent_).v;
    case Kind::Tabulated: return std::log(psi(r));
  }
  return 0.0;
}

double ManifoldProfile::psi_power(double r, double p) const {
  if (p == 0.0) return 1.0;
  const double lp = p * log_psi(r);
  if (lp > 705.0) {
    throw NumericalError("psi^p overflows double at r = " + std::to_string(r));
  }
  return std::exp(lp);  // underflow to 0 is fine
}

double ManifoldProfile::convexity_ratio(double r) const {
  validate_radius(r, true);
  switch (kind_) {
    case Kind::Euclidean: return 0.0;
    case Kind::Hyperbolic: return 1.0;
    case Kind::ExponentialPower: {
      const Jet2 g = expower_g(r, exponent_);
      // (psi''/psi) = 2 g'/r + g'^2 + g'' -- no exponentials, so no overflow.
      return 2.0 * g.d1 / r + g.d1 * g.d1 + g.d2;
    }
    case Kind::Tabulated: return psi_second(r) / psi(r);
  }
  return 0.0;
}

double ManifoldProfile::slope_ratio(double r) const {
  validate_radius(r, true);
  switch (kind_) {
    case Kind::Euclidean: return 1.0 / r;
    case Kind::Hyperbolic: return 1.0 / std::tanh(r);
    case Kind::ExponentialPower: {
      const Jet2 g = expower_g(r, exponent_);
      return 1.0 / r + g.d1;
    }
    case Kind::Tabulated: return psi_prime(r) / psi(r);
  }
  return 0.0;
}

bool ManifoldProfile::nonparabolic() const {
  return std::isfinite(green_tail_integral());
}

double ManifoldProfile::green_tail_integral() const {
  return psi_tail_integral_from(1.0);
}

std::string ManifoldProfile::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::Euclidean: os << "euclidean"; break;
    case Kind::Hyperbolic: os << "hyperbolic"; break;
    case Kind::ExponentialPower: os << "exponential-power(a=" << exponent_ << ")"; break;
    case Kind::Tabulated: os << "tabulated(r_max=" << r_max_ << ")"; break;
  }
  os << " N=" << dimension_;
  return os.str();
}

double ManifoldProfile::psi_tail_integral_from(double r) const {
  validate_radius(r, true);
  const int n = dimension_;
  switch (kind_) {
    case Kind::Euclidean:
      if (n == 2) return kInf;
      return std::pow(r, 2.0 - n) / double(n - 2);
    case Kind::Hyperbolic: return hyperbolic_tail(n - 1, r);
    case Kind::ExponentialPower: {
      // Integrand e^{(1-N)(log s + s^a s(s))}; advance the cutoff until the
      // integrand has dropped 18 decades relative to its value at r.
      auto logf = [&](double s) { return (1.0 - n) * log_psi(s); };
      const double lf0 = logf(r);
      double hi = std::max(1.5 * r, r + 1.0);
      while (logf(hi) > lf0 - 42.0 && hi < r + 1e4) hi *= 1.5;
      auto f = [&](double s) { return psi_power(s, 1.0 - n); };
      return integrate_graded(f, r, hi);
    }
    case Kind::Tabulated: {
      auto f = [&](double s) { return psi_power(s, 1.0 - n); };
      const double body = integrate_graded(f, r, r_max_);
      // Tail heuristic: log-log slope over the last decade of the table; a
      // slope >= -1 integrates to infinity.
      const double r1 = r_max_;
      const double r0 = std::max(0.1 * r_max_, table_->r[1]);
      const double slope =
          (std::log(f(r1)) - std::log(f(r0))) / (std::log(r1) - std::log(r0));
      if (slope >= -1.0) return kInf;
      const double tail = f(r1) * r1 / (-slope - 1.0);
      return body + tail;
    }
  }
  return kInf;
}

double sectional_curvature(const ManifoldProfile& profile, double r) {
  if (!(r > 0.0)) throw ValidationError("sectional_curvature: r must be positive");
  return -profile.convexity_ratio(r);
}

double ricci_radial(const ManifoldProfile& profile, double r) {
  if (!(r > 0.0)) throw ValidationError("ricci_radial: r must be positive");
  return -double(profile.dimension() - 1) * profile.convexity_ratio(r);
}

double ball_volume(const ManifoldProfile& profile, double R) {
  if (R < 0.0) throw ValidationError("ball_volume: R must be nonnegative");
  if (R == 0.0) return 0.0;
  const double p = double(profile.dimension() - 1);
  auto f = [&](double s) { return s == 0.0 ? 0.0 : profile.psi_power(s, p); };
  return profile.unit_sphere_area() * integrate_graded(f, 0.0, R);
}

HypothesisReport check_hypothesis(const ManifoldProfile& profile, double r_max) {
  if (!(r_max > 0.0)) throw ValidationError("check_hypothesis: r_max must be positive");
  r_max = std::min(r_max, profile.max_radius());

  HypothesisReport rep;
  const int n_samples = 600;
  const double lo = r_max * 1e-6;
  const double ratio = std::pow(r_max / lo, 1.0 / (n_samples - 1));

  double min_convexity = kInf;
  double max_q = 0.0;      // sup of (N-1) psi''/psi / (1+r^2)
  double argmax_q = 0.0;
  std::vector<double> rs, qs;
  rs.reserve(n_samples);
  qs.reserve(n_samples);
  double r = lo;
  for (int i = 0; i < n_samples; ++i, r = std::min(r * ratio, r_max)) {
    const double c = profile.convexity_ratio(r);
    min_convexity = std::min(min_convexity, c);
    const double q = std::max(0.0, double(profile.dimension() - 1) * c) / (1.0 + r * r);
    if (q > max_q) {
      max_q = q;
      argmax_q = r;
    }
    rs.push_back(r);
    qs.push_back(q);
  }
  rep.is_cartan_hadamard = min_convexity >= -1e-8;
  rep.ricci_bound_constant = max_q;
  rep.ricci_bound_is_finite = true;
  // Heuristic unboundedness flag: the fitted constant is still climbing at
  // the edge of the sampled window.
  if (argmax_q > 0.9 * r_max && max_q > 0.0) {
    const std::size_t tail_begin = std::size_t(0.8 * n_samples);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (std::size_t i = tail_begin; i < rs.size(); ++i) {
      if (qs[i] <= 0.0) continue;
      const double x = std::log(rs[i]);
      const double y = std::log(qs[i]);
      sx += x; sy += y; sxx += x * x; sxy += x * y;
      ++cnt;
    }
    if (cnt >= 3) {
      const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
      if (slope > 0.05) rep.ricci_bound_is_finite = false;
    }
  }

  rep.green_tail_integral = profile.green_tail_integral();
  rep.is_nonparabolic = std::isfinite(rep.green_tail_integral);
  rep.nonparabolicity_is_heuristic = profile.kind() == ManifoldProfile::Kind::Tabulated;
  rep.model_only_validity = true;
  return rep;
}

}  // namespace pmelab
