#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "bergkern/core_types.hpp"

namespace bergkern {

// Moments I(alpha) = (2 pi)^n \int_shadow r^{2 alpha + 1} phi(r) dr.
// Every function here returns log I(alpha); Gamma arithmetic never leaves log space.

/// log of \int_{S^{n-1}} prod_j |x_j|^{2 alpha_j + 1} dx = 2 alpha! / Gamma(|alpha| + n).
double log_sphere_monomial_integral(const MultiIndex& alpha);

/// Weight exp(-mu1 ||z||^mu2) on C^n.
double log_moment_closed_cn(const MultiIndex& alpha, double mu1, double mu2);

/// Hartogs domain ||w||^2 < exp(-mu1 ||z||^mu2) with weight (exp(-mu1||z||^mu2) - ||w||^2)^eta.
double log_moment_closed_dnm(const MultiIndex& alpha, const MultiIndex& beta, double mu1, double mu2, double eta);

/// V_eta domain with weight (1 - sum_j exp(eta_j |w|^2)|z_j|^2 - ||z'||^2)^a.
double log_moment_closed_veta(const MultiIndex& alpha, const MultiIndex& beta, int gamma, std::span<const double> eta,
                              double a);

/// Constant weight 1 on the ball of the given radius: pi^n alpha! R^{2|alpha|+2n} / Gamma(|alpha| + n + 1).
double log_moment_closed_ball(const MultiIndex& alpha, double radius = 1.0);

/// Constant weight 1 on a polydisc: prod_j pi R_j^{2 alpha_j + 2} / (alpha_j + 1).
double log_moment_closed_polydisc(const MultiIndex& alpha, std::span<const double> radii);

/// Closed-form log I(alpha) when the (weight, shadow) pair is one of the known
/// families (weight scale included); nullopt otherwise.
std::optional<double> closed_form_log_moment(const RadialWeight& weight, const ShadowRegion& shadow,
                                             const MultiIndex& alpha);

struct QuadratureMoment {
  double log_value;
  double abs_error_estimate;
  std::size_t evaluations;
};

inline constexpr double kDefaultClosedCheckTol = 1e-9;
inline constexpr double kDefaultCustomTol = 1e-6;

/// Nested adaptive Gauss-Legendre evaluation of I(alpha) over the shadow.
/// Known shadows restrict each axis analytically; custom shadows integrate
/// over their bounding box with the indicator. Unbounded axes use r = t/(1-t).
/// Throws ConvergenceError (with the partial estimate) when the budget runs out.
QuadratureMoment moment_quadrature(const ShadowRegion& shadow, const RadialWeight& weight, const MultiIndex& alpha,
                                   double rel_tol = kDefaultClosedCheckTol);

/// Shared nested integrator: \int_shadow g(r) dr with g given on moduli.
/// Used by moment_quadrature and by the deterministic verification checks.
/// Inner levels run at a quarter of both tolerances.
template <class V>
struct BasicShadowIntegral {
  V value;
  double abs_error;
  bool converged;
  std::size_t evaluations;
};
using ShadowIntegral = BasicShadowIntegral<double>;
using ComplexShadowIntegral = BasicShadowIntegral<complex>;

ShadowIntegral integrate_over_shadow(const ShadowRegion& shadow,
                                     const std::function<double(std::span<const double>)>& integrand,
                                     double rel_tol, double abs_tol = 0.0);
ComplexShadowIntegral integrate_over_shadow(const ShadowRegion& shadow,
                                            const std::function<complex(std::span<const double>)>& integrand,
                                            double rel_tol, double abs_tol = 0.0);

enum class MomentMethod { ClosedForm, Quadrature };

std::string to_string(MomentMethod m);
MomentMethod moment_method_from_string(const std::string& s);

struct MomentEntry {
  double log_value;
  MomentMethod method;
  double abs_error_estimate;
};

/// Memoized moments of one (weight, shadow) pair.
///
/// get() returns the closed form when one exists (unless quadrature is
/// forced) and otherwise runs moment_quadrature at the table's tolerance.
/// Both methods may be stored for the same index. Thread-safe.
class MomentTable {
 public:
  enum class Preference { ClosedFormFirst, QuadratureOnly };

  MomentTable(RadialWeight weight, ShadowRegion shadow, double quadrature_rel_tol = -1.0,
              Preference preference = Preference::ClosedFormFirst);

  const RadialWeight& weight() const noexcept { return weight_; }
  const ShadowRegion& shadow() const noexcept { return shadow_; }
  int arity() const noexcept { return weight_.arity(); }
  double quadrature_rel_tol() const noexcept { return rel_tol_; }
  bool has_closed_form() const noexcept { return has_closed_form_; }
  Preference preference() const noexcept { return preference_; }

  /// Preferred entry for alpha, computing it on first use.
  MomentEntry get(const MultiIndex& alpha);
  double log_moment(const MultiIndex& alpha) { return get(alpha).log_value; }
  /// Like get(), but a closed-form value is returned without being stored.
  /// Series kernels touch up to millions of indices; they keep their own cache.
  double evaluate_log(const MultiIndex& alpha);

  /// Compute (or recompute) with a specific method. A quadrature entry is
  /// replaced only when the new tolerance is tighter.
  MomentEntry compute(const MultiIndex& alpha, MomentMethod method, std::optional<double> rel_tol = {});

  std::optional<MomentEntry> find(const MultiIndex& alpha, MomentMethod method) const;

  void insert(const MultiIndex& alpha, const MomentEntry& entry);
  std::size_t size() const;

  /// {weight, shadow, entries: [{alpha, log_value, method, abs_error_estimate}]}
  nlohmann::json to_json() const;
  /// Restores entries from a serialized table; descriptors must match this table's.
  void load_entries(const nlohmann::json& j);

 private:
  struct Record {
    std::optional<MomentEntry> closed;
    std::optional<MomentEntry> quadrature;
    double quadrature_tol = 0.0;
  };

  RadialWeight weight_;
  ShadowRegion shadow_;
  double rel_tol_;
  Preference preference_;
  bool has_closed_form_;
  mutable std::mutex mutex_;
  std::map<MultiIndex, Record> records_;
};

}  // namespace bergkern
