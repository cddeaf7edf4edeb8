#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "bergkern/closed_kernels.hpp"
#include "bergkern/core_types.hpp"
#include "bergkern/series_kernel.hpp"

namespace bergkern {

/// Coefficient map alpha -> C_alpha of sum C_alpha z^alpha.
using Polynomial = std::map<MultiIndex, complex>;

complex evaluate(const Polynomial& f, const ComplexPoint& z);
int polynomial_degree(const Polynomial& f);
/// [{"alpha": [...], "re": x, "im": y}, ...]
nlohmann::json polynomial_to_json(const Polynomial& f);
/// `terms` distinct monomials of degree <= max_degree with standard complex
/// Gaussian coefficients.
Polynomial random_sparse_polynomial(int arity, int max_degree, int terms, std::mt19937_64& rng);

using KernelEvaluator = std::function<complex(const ComplexPoint&, const ComplexPoint&)>;

inline constexpr double kDeterministicTol = 1e-6;

/// Radial nested Gauss-Legendre with angles on a uniform trapezoid grid.
struct QuadratureScheme {
  double rel_tol = 1e-10;
  double tol = kDeterministicTol;
  /// Points per angle; 0 picks a default from arity and polynomial degree.
  int angular_points = 0;
};

/// Importance-sampled Monte Carlo on a private stream (seed, stream).
struct MonteCarloScheme {
  std::size_t samples = 200000;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  /// User tolerance; the effective one is max(tol, 4 sigma).
  double tol = 0.0;
};

using Scheme = std::variant<QuadratureScheme, MonteCarloScheme>;

enum class CheckStatus { Pass, Fail, Inconclusive };
std::string to_string(CheckStatus s);

/// Outcome of one check. passed <=> |measured - expected| <= tolerance.
/// Complex comparisons report measured = |estimate - expected value| against
/// expected = 0 and keep both complex numbers in `details`.
struct VerificationReport {
  std::string check_name;
  nlohmann::json target;
  double measured = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  std::string tolerance_origin;
  bool passed = false;
  CheckStatus status = CheckStatus::Fail;
  std::int64_t samples_or_nodes = 0;
  std::optional<std::uint64_t> rng_seed;
  std::optional<double> standard_error;
  nlohmann::json details = nlohmann::json::object();

  /// Sets passed from the invariant; status follows unless already inconclusive.
  void finalize();
  nlohmann::json to_json() const;
};

/// One JSON object per line, in input order.
std::string to_json_lines(const std::vector<VerificationReport>& reports);
/// '#schema=' comment line, header, then one row per report (17 significant digits).
std::string to_csv(const std::vector<VerificationReport>& reports);
inline constexpr const char* kReportCsvSchema = "bergkern.verification.v1";

/// 0 all pass, 1 any failure, 3 inconclusive without failures.
int exit_code(const std::vector<VerificationReport>& reports);

/// \int K(z0, w) f(w) phi(|w|) dV(w) against f(z0).
VerificationReport check_reproducing(const KernelEvaluator& kernel, const RadialWeight& weight,
                                     const ShadowRegion& shadow, const Polynomial& f, const ComplexPoint& z0,
                                     const Scheme& scheme);

/// <z^alpha, z^beta>_phi: 0 for alpha != beta (angular factor in closed form),
/// I(alpha) for alpha == beta.
VerificationReport check_orthogonality(const RadialWeight& weight, const ShadowRegion& shadow, const MultiIndex& alpha,
                                       const MultiIndex& beta, const Scheme& scheme);

/// \int |f|^2 phi dV against sum |C_alpha|^2 I(alpha).
VerificationReport check_parseval(const Polynomial& f, const RadialWeight& weight, const ShadowRegion& shadow,
                                  const Scheme& scheme);

/// Closed kernel vs moment series at num_points random interior pairs with
/// slack >= 0.3. Series non-convergence makes a report inconclusive.
std::vector<VerificationReport> cross_validate_family(const FamilyParams& p, int num_points, std::uint64_t seed,
                                                      double rel_tol, int max_degree = kDefaultMaxDegree);

/// max |K(x_i, x_j) - conj K(x_j, x_i)| / max |K| against 0.
VerificationReport check_hermitian(const KernelEvaluator& kernel, const std::vector<ComplexPoint>& points,
                                   double tol = 1e-11);

/// Gram matrix [K(x_i, x_j)]: measured = max(0, -lambda_min / lambda_max) against 0 with tolerance 1e-8.
VerificationReport check_gram_psd(const KernelEvaluator& kernel, const std::vector<ComplexPoint>& points,
                                  double tol = 1e-8);

/// Monte Carlo estimate of \int_{S^{n-1}} prod |x_j|^{2 alpha_j + 1} dx against 2 alpha! / Gamma(|alpha| + n).
VerificationReport check_sphere_integral(const MultiIndex& alpha, std::size_t samples, std::uint64_t seed,
                                         std::uint64_t stream = 0);

}  // namespace bergkern
