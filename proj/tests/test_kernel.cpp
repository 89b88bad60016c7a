#include <catch2/catch_amalgamated.hpp>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "contact/kernel.hpp"
#include "contact/stats.hpp"

using namespace contact;
using Catch::Approx;

namespace {

constexpr double pi = std::numbers::pi;

// reference values frozen from the Boost oracles below
constexpr double kStableHalfAt3 = 0.0237991930003933;  // alpha = 0.5, d = 1, x = 3

double stable_density_oracle_1d(double alpha, double x) {
  boost::math::quadrature::ooura_fourier_cos<double> cosine(1e-14, 10);
  auto [v, err] = cosine.integrate([alpha](double p) { return std::exp(-std::pow(p, alpha)); }, x);
  return v / pi;
}

double stable_density_oracle_2d(double alpha, double r) {
  boost::math::quadrature::exp_sinh<double> half_line;
  auto f = [=](double p) { return std::cyl_bessel_j(0.0, p * r) * std::exp(-std::pow(p, alpha)) * p; };
  return half_line.integrate(f) / (2.0 * pi);
}

// direct cosine transform of the density on a finite support
double numeric_hat_1d(const DispersalKernel& k, double p, double radius) {
  using boost::math::quadrature::gauss_kronrod;
  double s = 0.0;
  const int pieces = 400;
  for (int i = 0; i < pieces; ++i) {
    const double a = radius * i / pieces, b = radius * (i + 1) / pieces;
    s += gauss_kronrod<double, 31>::integrate(
        [&](double x) { return std::cos(p * x) * k.density_radial(x); }, a, b, 0);
  }
  return 2.0 * s;
}

double numeric_hat_2d(const DispersalKernel& k, double p, double radius) {
  using boost::math::quadrature::gauss_kronrod;
  double s = 0.0;
  const int pieces = 400;
  for (int i = 0; i < pieces; ++i) {
    const double a = radius * i / pieces, b = radius * (i + 1) / pieces;
    s += gauss_kronrod<double, 31>::integrate(
        [&](double r) { return std::cyl_bessel_j(0.0, p * r) * k.density_radial(r) * r; }, a, b, 0);
  }
  return 2.0 * pi * s;
}

std::vector<DispersalKernel> all_families() {
  std::vector<DispersalKernel> out;
  for (int d : {1, 2}) {
    for (double a : {0.3, 0.5, 0.8, 1.5}) out.push_back(DispersalKernel::symmetric_stable(d, a));
    out.push_back(DispersalKernel::cauchy(d));
    out.push_back(DispersalKernel::gaussian(d));
    out.push_back(DispersalKernel::compact_uniform(d, 2.0));
  }
  return out;
}

}  // namespace

TEST_CASE("closed-form densities and transforms", "[kernel]") {
  CHECK(DispersalKernel::cauchy(1).density({0.0, 0.0}) == Approx(1.0 / pi).epsilon(1e-14));
  CHECK(DispersalKernel::gaussian(1).density({0.0, 0.0}) == Approx(1.0 / std::sqrt(2.0 * pi)).epsilon(1e-14));
  CHECK(DispersalKernel::cauchy(1).hat(2.0) == Approx(std::exp(-2.0)).epsilon(1e-14));
  CHECK(DispersalKernel::gaussian(2).hat(Point{0.6, 0.8}).real() == Approx(std::exp(-0.5)).epsilon(1e-14));
  for (const auto& k : all_families()) {
    CHECK(k.hat(0.0) == 1.0);
  }
}

TEST_CASE("stable density at x = 3 matches the Fourier-inversion oracle", "[kernel][oracle]") {
  const double oracle = stable_density_oracle_1d(0.5, 3.0);
  REQUIRE(oracle == Approx(kStableHalfAt3).epsilon(1e-10));
  const auto k = DispersalKernel::symmetric_stable(1, 0.5);
  CHECK(k.density({3.0, 0.0}) == Approx(kStableHalfAt3).epsilon(1e-9));
  // series and quadrature paths agree where both apply
  CHECK(stable::density_quadrature(0.5, 1, 3.0) == Approx(kStableHalfAt3).epsilon(1e-9));
  // tail asymptotic Gamma(1 + alpha) sin(pi alpha / 2) / pi * x^-(1 + alpha)
  const double c = std::tgamma(1.5) * std::sin(pi / 4.0) / pi;
  CHECK(k.density({1e4, 0.0}) == Approx(c * std::pow(1e4, -1.5)).epsilon(1e-2));
}

TEST_CASE("stable densities across alpha and dimension match quadrature oracles", "[kernel][oracle]") {
  for (double a : {0.3, 0.5, 0.8, 1.5}) {
    for (double x : {0.1, 1.0, 5.0, 40.0}) {
      const double ref = stable_density_oracle_1d(a, x);
      INFO("d=1 alpha=" << a << " x=" << x);
      CHECK(stable::density(a, 1, x) == Approx(ref).epsilon(1e-7).margin(1e-15));
    }
  }
  for (double a : {0.8, 1.5}) {
    for (double r : {0.5, 2.0, 6.0}) {
      const double ref = stable_density_oracle_2d(a, r);
      INFO("d=2 alpha=" << a << " r=" << r);
      CHECK(stable::density(a, 2, r) == Approx(ref).epsilon(1e-6));
    }
  }
}

TEST_CASE("densities are symmetric and reject non-finite points", "[kernel]") {
  for (const auto& k : all_families()) {
    const Point x{0.7, k.dimension() == 2 ? -0.4 : 0.0};
    const Point mx{-x[0], -x[1]};
    CHECK(k.density(x) == k.density(mx));
    CHECK(k.density(x) >= 0.0);
  }
  const auto k = DispersalKernel::gaussian(1);
  CHECK_THROWS_AS(k.density({std::nan(""), 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(k.density({INFINITY, 0.0}), std::invalid_argument);
}

TEST_CASE("analytic transform agrees with a direct transform of the density", "[kernel]") {
  struct Case {
    DispersalKernel k;
    double radius;
  };
  const std::vector<Case> cases{{DispersalKernel::gaussian(1), 12.0},
                                {DispersalKernel::compact_uniform(1, 2.0), 2.0},
                                {DispersalKernel::gaussian(2), 12.0},
                                {DispersalKernel::compact_uniform(2, 2.0), 2.0}};
  for (const auto& c : cases) {
    for (double p : {0.3, 1.0, 2.5, 6.0}) {
      const double direct = c.k.dimension() == 1 ? numeric_hat_1d(c.k, p, c.radius)
                                                 : numeric_hat_2d(c.k, p, c.radius);
      INFO(to_string(c.k.family()) << " d=" << c.k.dimension() << " p=" << p);
      CHECK(std::abs(direct - c.k.hat(p)) < 1e-4);
    }
  }
  // Cauchy in d = 1 over a long window plus the analytic tail 2 (1/pi) / R (cos-averaged ~ 0)
  const auto cauchy = DispersalKernel::cauchy(1);
  boost::math::quadrature::ooura_fourier_cos<double> cosine(1e-14, 10);
  for (double p : {0.5, 2.0}) {
    auto [v, err] = cosine.integrate([&](double x) { return cauchy.density_radial(x); }, p);
    CHECK(std::abs(2.0 * v - cauchy.hat(p)) < 1e-4);
  }
}

TEST_CASE("validation: normalization and |a_hat| < 1 for every family", "[kernel]") {
  for (const auto& k : all_families()) {
    const auto rep = validate(k);
    INFO(to_string(k.family()) << " d=" << k.dimension() << " alpha=" << k.alpha());
    CHECK(rep.norm_residual < normalization_tolerance(k.dimension()));
    CHECK(rep.normalized);
    CHECK(rep.max_abs_hat < 1.0);
    CHECK(rep.hat_bounded);
  }
}

TEST_CASE("validation: heavy-tail flags", "[kernel]") {
  CHECK(validate(DispersalKernel::symmetric_stable(1, 0.5)).heavy_tail);
  CHECK_FALSE(validate(DispersalKernel::symmetric_stable(1, 1.5)).heavy_tail);
  CHECK_FALSE(validate(DispersalKernel::cauchy(1)).heavy_tail);
  CHECK(validate(DispersalKernel::symmetric_stable(2, 1.5)).heavy_tail);
  CHECK_FALSE(validate(DispersalKernel::gaussian(2)).heavy_tail);
  CHECK_FALSE(validate(DispersalKernel::compact_uniform(1)).heavy_tail);
  // light tails underflow inside the fit window
  CHECK(std::isnan(validate(DispersalKernel::gaussian(1)).tail_slope));
  const double slope = validate(DispersalKernel::symmetric_stable(1, 0.8)).tail_slope;
  CHECK(slope == Approx(-1.8).epsilon(0.05));
}

TEST_CASE("heavy tails: x^(alpha+d) a(x) settles and the far slope is -(alpha+d)", "[kernel][property]") {
  // [10, 100] still carries the second series term at 5-8% for alpha <= 0.5;
  // a decade further out the slope is within 5%
  for (int d : {1, 2}) {
    for (double a : {0.3, 0.5, 0.8, 1.5}) {
      const auto k = DispersalKernel::symmetric_stable(d, a);
      if (!k.heavy_tail()) continue;
      std::vector<double> xs, ys;
      for (int i = 0; i < 16; ++i) {
        const double r = std::pow(10.0, 2.0 + i / 15.0);
        xs.push_back(r);
        ys.push_back(k.density_radial(r));
      }
      const double slope = log_log_slope(xs, ys);
      INFO("d=" << d << " alpha=" << a << " slope=" << slope);
      CHECK(std::abs(slope + a + d) < 0.05 * (a + d));
      const double c3 = std::pow(1e3, a + d) * k.density_radial(1e3);
      const double c5 = std::pow(1e5, a + d) * k.density_radial(1e5);
      CHECK(c5 > 0.0);
      CHECK(std::abs(c3 / c5 - 1.0) < 0.1);
    }
  }
}

TEST_CASE("invalid kernels are rejected with the field name", "[kernel]") {
  CHECK_THROWS_WITH(DispersalKernel::symmetric_stable(1, 2.5), Catch::Matchers::ContainsSubstring("kernel.alpha"));
  CHECK_THROWS_WITH(DispersalKernel::symmetric_stable(1, 0.0), Catch::Matchers::ContainsSubstring("kernel.alpha"));
  CHECK_THROWS_WITH(DispersalKernel::gaussian(3), Catch::Matchers::ContainsSubstring("kernel.dimension"));
  CHECK_THROWS_WITH(DispersalKernel::gaussian(1, 0.0), Catch::Matchers::ContainsSubstring("kernel.scale"));
  CHECK_THROWS_WITH(JumpKernel(DispersalKernel::gaussian(1), -1.0), Catch::Matchers::ContainsSubstring("jump.mass"));
}

TEST_CASE("jump kernel deficit is J_hat(0) - J_hat(p)", "[kernel]") {
  const JumpKernel j(DispersalKernel::symmetric_stable(1, 0.5), 2.0);
  for (double p : {1e-6, 0.1, 3.0}) {
    CHECK(j.deficit(p) == Approx(j.hat(0.0) - j.hat(p)).epsilon(1e-9));
  }
}

TEST_CASE("sampler characteristic functions match a_hat at five probes", "[kernel][property]") {
  const std::size_t n = 100000;
  const double tol = 4.0 / std::sqrt(static_cast<double>(n));
  for (const auto& k : all_families()) {
    std::mt19937_64 rng(12345);
    std::vector<Point> xs(n);
    for (auto& x : xs) x = k.sample(rng);
    for (double p : {0.25, 0.5, 1.0, 2.0, 4.0}) {
      // d = 2 probes point in a fixed oblique direction
      const double px = k.dimension() == 1 ? p : p * 0.6, py = k.dimension() == 1 ? 0.0 : p * 0.8;
      double re = 0.0;
      for (const auto& x : xs) re += std::cos(px * x[0] + py * x[1]);
      re /= n;
      INFO(to_string(k.family()) << " d=" << k.dimension() << " alpha=" << k.alpha() << " p=" << p);
      CHECK(std::abs(re - k.hat(p)) < tol);
    }
  }
}

TEST_CASE("sampler examples at 10^6 samples", "[kernel][property]") {
  const std::size_t n = 1000000;
  std::mt19937_64 rng(777);
  SECTION("gaussian mean is zero within 4 SE") {
    const auto k = DispersalKernel::gaussian(1);
    RunningStats s;
    for (std::size_t i = 0; i < n; ++i) s.add(k.sample(rng)[0]);
    CHECK(std::abs(s.mean) < 4.0 * s.se());
  }
  SECTION("cauchy median and tail fraction") {
    const auto k = DispersalKernel::cauchy(1);
    std::vector<double> xs(n);
    for (auto& x : xs) x = k.sample(rng)[0];
    std::size_t below = std::count_if(xs.begin(), xs.end(), [](double x) { return x < 0.0; });
    // binomial(n, 1/2): 4 SD
    CHECK(std::abs(below - 0.5 * n) < 4.0 * std::sqrt(0.25 * n));
    const double T = 3.0;
    const double p_tail = 2.0 / pi * std::atan(1.0 / T);
    std::size_t far = std::count_if(xs.begin(), xs.end(), [T](double x) { return std::abs(x) > T; });
    CHECK(std::abs(far - p_tail * n) < 4.0 * std::sqrt(p_tail * (1.0 - p_tail) * n));
  }
  SECTION("stable alpha = 0.5 characteristic function at p = 1") {
    const auto k = DispersalKernel::symmetric_stable(1, 0.5);
    RunningStats s;
    for (std::size_t i = 0; i < n; ++i) s.add(std::cos(k.sample(rng)[0]));
    CHECK(std::abs(s.mean - std::exp(-1.0)) < 4.0 * s.se());
  }
}

TEST_CASE("sampling is deterministic given the generator state", "[kernel]") {
  const auto k = DispersalKernel::symmetric_stable(2, 0.5);
  std::mt19937_64 a(99), b(99);
  for (int i = 0; i < 1000; ++i) {
    const auto x = k.sample(a), y = k.sample(b);
    REQUIRE(x == y);
  }
}
