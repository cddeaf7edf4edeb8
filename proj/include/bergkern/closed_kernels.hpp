#pragma once

#include <string>
#include <variant>
#include <vector>

#include "bergkern/core_types.hpp"
#include "bergkern/series_kernel.hpp"

namespace bergkern {

/// C^n with weight exp(-mu1 ||z||^mu2).
struct CnParams {
  int n = 1;
  double mu1 = 1.0;
  double mu2 = 2.0;
};

/// Hartogs domain D_{n,m}: ||w||^2 < exp(-mu1 ||z||^mu2), weight (exp(-mu1||z||^mu2) - ||w||^2)^eta.
/// Points are (z, w) concatenated: n + m coordinates.
struct DnmParams {
  int n = 1;
  int m = 1;
  double mu1 = 1.0;
  double mu2 = 2.0;
  double eta = 0.0;
};

/// V_eta: sum_j exp(eta_j |w|^2)|z_j|^2 + ||z'||^2 < 1, weight (1 - lhs)^a.
/// Points are (z, z', w) concatenated: n + m + 1 coordinates.
struct VEtaParams {
  int n = 1;
  int m = 1;
  std::vector<double> eta{1.0};
  double a = 0.0;
};

using FamilyParams = std::variant<CnParams, DnmParams, VEtaParams>;

void validate(const FamilyParams& p);
int family_arity(const FamilyParams& p);
std::string family_name(const FamilyParams& p);
nlohmann::json family_descriptor(const FamilyParams& p);
RadialWeight family_weight(const FamilyParams& p);
ShadowRegion family_shadow(const FamilyParams& p);

/// Defining-inequality slack of a point (1 at the origin, <= 0 outside).
double interior_slack(const FamilyParams& p, const ComplexPoint& x);

// Evaluators hold coefficient tables built once per parameter set; calls are
// const and safe to share across threads.

class CnKernel {
 public:
  explicit CnKernel(CnParams p, int max_terms = 4000);
  /// Sum over k of c_k <z,w>^k until three consecutive terms fall below
  /// rel_tol * |sum|. mu2 == 2 uses (mu1/pi)^n exp(mu1 <z,w>) directly.
  KernelValue operator()(const ComplexPoint& z, const ComplexPoint& w, double rel_tol = 1e-16) const;
  /// log c_k
  double log_coefficient(int k) const;
  const CnParams& params() const noexcept { return p_; }

 private:
  CnParams p_;
  std::vector<double> log_coeff_;
};

class DnmKernel {
 public:
  explicit DnmKernel(DnmParams p, int max_terms = 4000);
  /// Double series in <z,s> (inner, k1) and <w,t> (outer, k2); the outer loop
  /// stops after three consecutive negligible k2 blocks.
  KernelValue operator()(const ComplexPoint& x, const ComplexPoint& y, double rel_tol = 1e-16) const;
  const DnmParams& params() const noexcept { return p_; }

 private:
  DnmParams p_;
  double log_const_;
  std::vector<double> inner_log_;        // B(k1) = lgamma(k1+n) - lgamma(k1+1) - lgamma((2k1+2n)/mu2)
  std::vector<double> inner_ratio_;      // exp(B(k1+1) - B(k1))
  std::vector<double> outer_log_;        // lgamma(k2+m+eta+1) - lgamma(k2+1)
};

class VEtaKernel {
 public:
  explicit VEtaKernel(VEtaParams p);
  KernelValue operator()(const ComplexPoint& x, const ComplexPoint& y) const;
  /// phi(x; y) = 1 - sum_j exp(eta_j w conj(t)) z_j conj(s_j) - <z', s'>
  complex phi(const ComplexPoint& x, const ComplexPoint& y) const;
  const VEtaParams& params() const noexcept { return p_; }

 private:
  VEtaParams p_;
};

KernelValue kernel_cn(const CnParams& p, const ComplexPoint& z, const ComplexPoint& w, double rel_tol = 1e-16);
KernelValue kernel_dnm(const DnmParams& p, const ComplexPoint& x, const ComplexPoint& y, double rel_tol = 1e-16);
KernelValue kernel_veta(const VEtaParams& p, const ComplexPoint& x, const ComplexPoint& y);

/// Unweighted Bergman kernel of the ball of radius R in C^n:
/// n! / (pi^n R^{2n}) (1 - <z,w>/R^2)^{-(n+1)}.
complex kernel_ball(int n, double radius, const ComplexPoint& z, const ComplexPoint& w);

/// Any of the three families behind one call operator.
class FamilyKernel {
 public:
  explicit FamilyKernel(const FamilyParams& p);
  KernelValue operator()(const ComplexPoint& x, const ComplexPoint& y) const;
  const FamilyParams& params() const noexcept { return params_; }

 private:
  FamilyParams params_;
  std::variant<CnKernel, DnmKernel, VEtaKernel> impl_;
};

}  // namespace bergkern
