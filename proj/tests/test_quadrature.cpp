#include <doctest.h>

#include <cmath>
#include <numbers>

#include "bergkern/moments.hpp"
#include "bergkern/quadrature.hpp"
#include "oracles.hpp"

using namespace bergkern;

TEST_CASE("Gauss-Legendre rule is exact for polynomials of degree 2n-1") {
  for (int order : {2, 5, 10, 20}) {
    const auto& rule = quad::GaussLegendreRule::get(order);
    double wsum = 0.0;
    for (double w : rule.weights()) wsum += w;
    CHECK(wsum == doctest::Approx(2.0).epsilon(1e-14));
    for (int p = 0; p <= 2 * order - 1; ++p) {
      double s = 0.0;
      for (int i = 0; i < order; ++i) s += rule.weights()[i] * std::pow(rule.nodes()[i], p);
      const double exact = p % 2 ? 0.0 : 2.0 / (p + 1);
      CHECK(std::abs(s - exact) < 1e-13);
    }
  }
}

TEST_CASE("adaptive integration of smooth and peaked integrands") {
  const auto r = quad::integrate([](double x) { return std::sin(x); }, 0.0, std::numbers::pi);
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-12));

  quad::Options opt;
  opt.rel_tol = 1e-10;
  const auto peak = quad::integrate([](double x) { return 1.0 / (1e-4 + x * x); }, -1.0, 1.0, opt);
  CHECK(peak.converged);
  CHECK(peak.value == doctest::Approx(2.0 / 1e-2 * std::atan(1.0 / 1e-2)).epsilon(1e-9));

  const auto sq = quad::integrate([](double x) { return std::sqrt(x); }, 0.0, 1.0, opt);
  CHECK(sq.value == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("semi-infinite integrals use the t/(1-t) map") {
  const auto g = quad::integrate_to_infinity([](double x) { return std::exp(-x * x); }, 0.0);
  CHECK(g.converged);
  CHECK(g.value == doctest::Approx(std::sqrt(std::numbers::pi) / 2.0).epsilon(1e-10));
  const auto h = quad::integrate_interval([](double x) { return std::exp(-x); }, 1.0, kInf);
  CHECK(h.value == doctest::Approx(std::exp(-1.0)).epsilon(1e-10));
}

TEST_CASE("complex-valued integrands") {
  const auto r = quad::integrate([](double t) { return std::exp(complex(0.0, t)); }, 0.0, 0.5 * std::numbers::pi);
  CHECK(r.value.real() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.value.imag() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("budget exhaustion is reported") {
  quad::Options opt;
  opt.rel_tol = 1e-15;
  opt.max_panels = 4;
  const auto r = quad::integrate([](double x) { return std::abs(x - 0.3141); }, 0.0, 1.0, opt);
  CHECK_FALSE(r.converged);
}

TEST_CASE("empty interval") {
  const auto r = quad::integrate([](double) { return 1.0; }, 1.0, 1.0);
  CHECK(r.value == 0.0);
}

TEST_CASE("shadow integration agrees with Simpson over the D_{1,1} shadow") {
  const auto s = ShadowRegion::hartogs(1, 1, 1.0, 2.0);
  auto f = [](std::span<const double> r) { return r[0] * r[1] * (1.0 + r[0]); };
  const auto got = integrate_over_shadow(s, std::function<double(std::span<const double>)>(f), 1e-10);
  // the hartogs section: rho < exp(-r^2 / 2)
  const double expect = oracle::simpson(
      [](double r) {
        const double top = std::exp(-0.5 * r * r);
        return r * (1.0 + r) * 0.5 * top * top;
      },
      0.0, 12.0, 20000);
  CHECK(got.converged);
  CHECK(got.value == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("custom shadows integrate through the indicator") {
  const auto quarter = ShadowRegion::custom("quarter_disc", {1.0, 1.0},
                                            [](std::span<const double> r) { return r[0] * r[0] + r[1] * r[1] < 1.0; });
  auto one = [](std::span<const double>) { return 1.0; };
  const auto got = integrate_over_shadow(quarter, std::function<double(std::span<const double>)>(one), 1e-6);
  CHECK(got.value == doctest::Approx(std::numbers::pi / 4.0).epsilon(1e-5));
}
