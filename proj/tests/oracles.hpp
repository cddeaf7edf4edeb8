#pragma once

// Test-side reference computations. None of these call into the library:
// plain composite rules, std::tgamma arithmetic and closed-form kernels.

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;
inline constexpr double pi = std::numbers::pi;

/// Composite Simpson rule with an even number of panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels = 2000) {
  if (panels % 2) ++panels;
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

/// Nested Simpson over 0 <= x <= X, 0 <= y <= Y(x).
inline double simpson2(const std::function<double(double, double)>& f, double xmax,
                       const std::function<double(double)>& ymax, int panels = 400) {
  return simpson([&](double x) { return simpson([&](double y) { return f(x, y); }, 0.0, ymax(x), panels); }, 0.0, xmax,
                 panels);
}

/// 2 pi \int_0^R r^{2k+1} phi(r) dr in one variable.
inline double radial_moment_1d(int k, const std::function<double(double)>& phi, double upper, int panels = 4000) {
  return 2.0 * pi * simpson([&](double r) { return std::pow(r, 2 * k + 1) * phi(r); }, 0.0, upper, panels);
}

/// Fock moments for exp(-mu1 |z|^mu2) in C^1 by substitution t = mu1 r^mu2:
/// 2 pi / mu2 * Gamma((2k+2)/mu2) / mu1^((2k+2)/mu2).
inline double fock_moment_1d(int k, double mu1, double mu2) {
  const double e = (2.0 * k + 2.0) / mu2;
  return 2.0 * pi / mu2 * std::tgamma(e) / std::pow(mu1, e);
}

inline cplx fock_kernel(const std::vector<cplx>& z, const std::vector<cplx>& w, double mu1) {
  cplx ip = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) ip += z[j] * std::conj(w[j]);
  return std::pow(mu1 / pi, static_cast<double>(z.size())) * std::exp(mu1 * ip);
}

inline cplx disc_kernel(cplx z, cplx w) {
  const cplx b = 1.0 - z * std::conj(w);
  return 1.0 / (pi * b * b);
}

/// sum_{k<=K} (z conj w)^k / I_k for a one-variable moment sequence.
inline cplx brute_series_1d(cplx z, cplx w, const std::function<double(int)>& moment, int terms) {
  cplx s = 0.0, p = 1.0;
  for (int k = 0; k < terms; ++k) {
    s += p / moment(k);
    p *= z * std::conj(w);
  }
  return s;
}

/// Area of S^{n-1} in R^n times the mean of prod |x_j|^{2 a_j + 1}; plain
/// rejection-free Gaussian normalization with its own generator.
struct McResult {
  double mean;
  double stderr_;
};
inline McResult sphere_mc(const std::vector<int>& alpha, std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  const double n = static_cast<double>(alpha.size());
  const double area = 2.0 * std::pow(pi, n / 2.0) / std::tgamma(n / 2.0);
  double sum = 0.0, sum2 = 0.0;
  std::vector<double> x(alpha.size());
  for (std::size_t i = 0; i < samples; ++i) {
    double r2 = 0.0;
    for (auto& v : x) {
      v = nd(rng);
      r2 += v * v;
    }
    const double r = std::sqrt(r2);
    double g = area;
    for (std::size_t j = 0; j < x.size(); ++j) g *= std::pow(std::abs(x[j]) / r, 2 * alpha[j] + 1);
    sum += g;
    sum2 += g * g;
  }
  const double m = sum / samples;
  return {m, std::sqrt((sum2 / samples - m * m) / samples)};
}

/// Sphere formula 2 alpha! / Gamma(|alpha| + n) with tgamma.
inline double sphere_formula(const std::vector<int>& alpha) {
  double num = 2.0;
  int deg = 0;
  for (int a : alpha) {
    num *= std::tgamma(a + 1.0);
    deg += a;
  }
  return num / std::tgamma(deg + static_cast<double>(alpha.size()));
}

/// V_eta moment for n = m = 1 in tgamma form:
/// pi^3 Gamma(a+1) i! j! k! / (Gamma(i+j+a+3) ((i+1) eta)^{k+1}).
inline double veta_moment_11(int i, int j, int k, double eta, double a) {
  return pi * pi * pi * std::tgamma(a + 1.0) * std::tgamma(i + 1.0) * std::tgamma(j + 1.0) * std::tgamma(k + 1.0) /
         (std::tgamma(i + j + a + 3.0) * std::pow((i + 1.0) * eta, k + 1.0));
}

/// Unweighted V_eta kernel (a = 0) for n = m = 1 written out directly:
/// e^{eta w t*} (6 eta e^{eta w t*} z s* / phi^4 + 2 eta / phi^3) / pi^3.
inline cplx veta_kernel_a0_11(cplx z, cplx zp, cplx w, cplx s, cplx sp, cplx t, double eta) {
  const cplx e = std::exp(eta * w * std::conj(t));
  const cplx zeta = e * z * std::conj(s);
  const cplx phi = 1.0 - zeta - zp * std::conj(sp);
  return e * (6.0 * eta * zeta / std::pow(phi, 4) + 2.0 * eta / std::pow(phi, 3)) / (pi * pi * pi);
}

}  // namespace oracle
