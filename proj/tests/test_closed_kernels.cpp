#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "bergkern/closed_kernels.hpp"
#include "bergkern/errors.hpp"
#include "bergkern/sampling.hpp"
#include "oracles.hpp"

using namespace bergkern;

namespace {

constexpr double pi = std::numbers::pi;

complex series_value(const FamilyParams& p, const ComplexPoint& x, const ComplexPoint& y, int max_degree = 160) {
  auto table = std::make_shared<MomentTable>(family_weight(p), family_shadow(p));
  const KernelSeries s(table, max_degree);
  return kernel_series_eval(s, x, y, 1e-15).value;
}

}  // namespace

TEST_CASE("C^n kernel: exponential form and constant term") {
  const auto v = kernel_cn(CnParams{1, 1.0, 2.0}, ComplexPoint{{0.5, 0.0}}, ComplexPoint{{0.5, 0.0}});
  CHECK(v.value.real() == doctest::Approx(std::exp(0.25) / pi).epsilon(1e-14));
  CHECK(kernel_cn(CnParams{1, 1.0, 2.0}, ComplexPoint{{0.7, 0.2}}, ComplexPoint::zero(1)).value.real() ==
        doctest::Approx(1.0 / pi).epsilon(1e-15));
  const ComplexPoint z{{0.3, 0.4}, {-0.2, 0.1}}, w{{0.1, -0.5}, {0.6, 0.0}};
  for (double mu1 : {0.5, 1.0, 2.0}) {
    const complex expect = oracle::fock_kernel({z[0], z[1]}, {w[0], w[1]}, mu1);
    CHECK(std::abs(kernel_cn(CnParams{2, mu1, 2.0}, z, w).value - expect) <= 1e-12 * std::abs(expect));
  }
  // w = 0: mu1^{2n/mu2} mu2 Gamma(n) / (2 pi^n Gamma(2n/mu2))
  const CnParams p{2, 1.5, 3.0};
  const double c0 = std::pow(1.5, 4.0 / 3.0) * 3.0 * 1.0 / (2.0 * pi * pi * std::tgamma(4.0 / 3.0));
  CHECK(kernel_cn(p, z, ComplexPoint::zero(2)).value.real() == doctest::Approx(c0).epsilon(1e-13));
}

TEST_CASE("C^1 kernel with mu2 = 1 against the brute-force series") {
  const CnParams p{1, 1.0, 1.0};
  const complex brute = oracle::brute_series_1d(0.5, 0.5, [](int k) { return oracle::fock_moment_1d(k, 1.0, 1.0); }, 80);
  CHECK(std::abs(kernel_cn(p, ComplexPoint{{0.5, 0.0}}, ComplexPoint{{0.5, 0.0}}).value - brute) < 1e-12);
  // and against the series built on quadrature moments
  auto table = std::make_shared<MomentTable>(family_weight(p), family_shadow(p), 1e-11,
                                             MomentTable::Preference::QuadratureOnly);
  const KernelSeries s(table, 80);
  const auto v = kernel_series_eval(s, ComplexPoint{{0.5, 0.0}}, ComplexPoint{{0.5, 0.0}});
  CHECK(std::abs(v.value - brute) <= 1e-8 * std::abs(brute));
}

TEST_CASE("D_{n,m} kernel: origin value and k2 = 0 factorization") {
  const DnmParams p{1, 1, 1.0, 2.0, 0.0};
  const auto origin = ComplexPoint::zero(2);
  CHECK(kernel_dnm(p, origin, origin).value.real() == doctest::Approx(1.0 / (pi * pi)).epsilon(1e-14));

  // with w = 0 only the k2 = 0 block survives: a single series in <z,s>
  const DnmParams q{1, 1, 1.3, 1.5, 0.5};
  const ComplexPoint x{{0.4, 0.2}, {0.0, 0.0}}, y{{-0.3, 0.5}, {0.2, 0.1}};
  complex direct = 0.0;
  const complex zs = x[0] * std::conj(y[0]);
  for (int k = 0; k < 200; ++k) {
    const double logI = log_moment_closed_dnm(MultiIndex{k}, MultiIndex{0}, 1.3, 1.5, 0.5);
    direct += std::exp(-logI) * std::pow(zs, k);
  }
  CHECK(std::abs(kernel_dnm(q, x, y).value - direct) <= 1e-13 * std::abs(direct));
}

TEST_CASE("V_eta kernel: origin value and reduction at a = 0") {
  const VEtaParams p{1, 1, {1.0}, 0.0};
  const auto origin = ComplexPoint::zero(3);
  CHECK(kernel_veta(p, origin, origin).value.real() == doctest::Approx(2.0 / (pi * pi * pi)).epsilon(1e-14));
  // |eta| Gamma(n+m+a+1) / (pi^{n+m+1} Gamma(a+1)) at the origin
  const VEtaParams q{2, 1, {0.5, 1.5}, 0.5};
  const double c = 2.0 * std::tgamma(4.5) / (std::pow(pi, 4.0) * std::tgamma(1.5));
  CHECK(kernel_veta(q, ComplexPoint::zero(4), ComplexPoint::zero(4)).value.real() == doctest::Approx(c).epsilon(1e-13));
  CHECK(std::abs(kernel_veta(p, origin, origin).value - 1.0 / std::exp(log_moment_closed_veta(MultiIndex{0}, MultiIndex{0}, 0, p.eta, 0.0))) < 1e-15);
}

TEST_CASE("V_eta triple series of degree <= 40 matches the closed form") {
  for (double a : {0.0, 1.0, 0.5}) {
    const VEtaParams p{1, 1, {1.0}, a};
    const ComplexPoint x{{0.3, 0.1}, {0.2, -0.1}, {0.4, 0.2}}, y{{0.25, 0.0}, {-0.1, 0.2}, {0.1, -0.3}};
    const complex t = std::exp(1.0 * x[2] * std::conj(y[2])) * x[0] * std::conj(y[0]);
    REQUIRE(std::abs(t) + std::abs(x[1] * std::conj(y[1])) <= 0.5);
    complex brute = 0.0;
    for (int d = 0; d <= 40; ++d) {
      for (int i = 0; i <= d; ++i) {
        for (int j = 0; i + j <= d; ++j) {
          const int k = d - i - j;
          const double logI = log_moment_closed_veta(MultiIndex{i}, MultiIndex{j}, k, p.eta, a);
          brute += std::exp(-logI) * std::pow(x[0] * std::conj(y[0]), i) * std::pow(x[1] * std::conj(y[1]), j) *
                   std::pow(x[2] * std::conj(y[2]), k);
        }
      }
    }
    CHECK(std::abs(kernel_veta(p, x, y).value - brute) <= 1e-6 * std::abs(brute));
  }
}

TEST_CASE("property: every family matches its moment series at random interior pairs") {
  const std::vector<FamilyParams> families{
      CnParams{1, 1.0, 1.0},           CnParams{2, 0.5, 3.0},          DnmParams{1, 1, 1.0, 2.0, 0.0},
      DnmParams{1, 1, 0.7, 1.0, 0.5},  DnmParams{2, 1, 1.0, 2.0, 0.5}, VEtaParams{1, 1, {1.0}, 0.0},
      VEtaParams{1, 1, {0.5}, 1.0},
  };
  for (const auto& p : families) {
    const auto pts = sample_interior_points(p, 40, 2024);
    for (std::size_t i = 0; i < pts.size(); i += 2) {
      const KernelValue closed = FamilyKernel(p)(pts[i], pts[i + 1]);
      const complex series = series_value(p, pts[i], pts[i + 1]);
      CHECK(std::abs(closed.value - series) <= 1e-8 * std::abs(closed.value));
    }
  }
}

TEST_CASE("property: hermitian symmetry and positive diagonal for every family") {
  const std::vector<FamilyParams> families{CnParams{2, 1.0, 1.5}, DnmParams{1, 2, 1.0, 1.0, 0.3},
                                           VEtaParams{2, 1, {1.0, 0.5}, 0.7}};
  for (const auto& p : families) {
    const FamilyKernel k(p);
    const auto pts = sample_interior_points(p, 12, 77);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const complex d = k(pts[i], pts[i]).value;
      CHECK(d.real() > 0.0);
      CHECK(std::abs(d.imag()) <= 1e-13 * d.real());
      for (std::size_t j = 0; j < pts.size(); ++j) {
        const complex a = k(pts[i], pts[j]).value, b = k(pts[j], pts[i]).value;
        CHECK(std::abs(a - std::conj(b)) <= 1e-11 * std::abs(a));
      }
    }
  }
}

TEST_CASE("parameter and domain errors") {
  CHECK_THROWS_AS(validate(CnParams{0, 1.0, 2.0}), ArgumentError);
  CHECK_THROWS_AS(validate(DnmParams{1, 1, 1.0, 2.0, -1.0}), ArgumentError);
  CHECK_THROWS_AS(validate(VEtaParams{1, 1, {1.0, 2.0}, 0.0}), ArgumentError);
  CHECK_THROWS_AS(kernel_cn(CnParams{2, 1.0, 2.0}, ComplexPoint{{0.1, 0.0}}, ComplexPoint::zero(2)), ArgumentError);

  const DnmParams d{1, 1, 1.0, 2.0, 0.0};
  const ComplexPoint outside{{0.0, 0.0}, {1.5, 0.0}};
  CHECK(interior_slack(d, outside) < 0.0);
  CHECK_THROWS_AS(kernel_dnm(d, outside, ComplexPoint::zero(2)), DomainError);

  const VEtaParams v{1, 1, {1.0}, 0.5};
  const ComplexPoint vout{{0.9, 0.0}, {0.6, 0.0}, {0.0, 0.0}};
  CHECK_THROWS_AS(kernel_veta(v, vout, ComplexPoint::zero(3)), DomainError);
  CHECK(interior_slack(v, ComplexPoint::zero(3)) == doctest::Approx(1.0));
}

TEST_CASE("V_eta refuses a vanishing phi") {
  // interior points whose pairing drives phi to ~0 stay inside the domain only
  // in the limit; phi itself is what the evaluator inspects
  const VEtaKernel k(VEtaParams{1, 1, {1.0}, 0.5});
  const ComplexPoint x{{0.0, 0.0}, {0.7, 0.0}, {0.0, 0.0}}, y{{0.0, 0.0}, {0.7, 0.0}, {0.0, 0.0}};
  CHECK(k.phi(x, y).real() == doctest::Approx(1.0 - 0.49));
}

TEST_CASE("ball kernel") {
  CHECK(kernel_ball(1, 1.0, ComplexPoint{{0.3, 0.0}}, ComplexPoint{{0.2, 0.0}}).real() ==
        doctest::Approx(oracle::disc_kernel(0.3, 0.2).real()).epsilon(1e-14));
  // n = 2 at the origin: 2 / pi^2
  CHECK(kernel_ball(2, 1.0, ComplexPoint::zero(2), ComplexPoint::zero(2)).real() == doctest::Approx(2.0 / (pi * pi)));
  CHECK_THROWS_AS(kernel_ball(1, 1.0, ComplexPoint{{1.0, 0.0}}, ComplexPoint::zero(1)), DomainError);
}
