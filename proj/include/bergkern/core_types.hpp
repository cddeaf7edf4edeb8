#pragma once

#include <compare>
#include <complex>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace bergkern {

using complex = std::complex<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// MultiIndex
// ---------------------------------------------------------------------------

/// Ordered tuple of nonnegative exponents. Arity is fixed at construction.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> entries);
  MultiIndex(std::initializer_list<int> entries);

  static MultiIndex zero(std::size_t arity);
  /// e_j: 1 in position j, zero elsewhere.
  static MultiIndex unit(std::size_t arity, std::size_t j);

  std::size_t size() const noexcept { return entries_.size(); }
  int operator[](std::size_t j) const { return entries_[j]; }
  const std::vector<int>& entries() const noexcept { return entries_; }

  /// |alpha|
  int degree() const noexcept;
  /// log(alpha!) = sum_j lgamma(alpha_j + 1)
  double factorial_log() const;

  MultiIndex operator+(const MultiIndex& other) const;
  /// Concatenate blocks, e.g. (alpha, beta) -> one index over n+m variables.
  MultiIndex concat(const MultiIndex& tail) const;
  /// Sub-block [first, first+count).
  MultiIndex slice(std::size_t first, std::size_t count) const;

  auto operator<=>(const MultiIndex&) const = default;
  bool operator==(const MultiIndex&) const = default;

  std::string to_string() const;

 private:
  std::vector<int> entries_;
};

struct MultiIndexHash {
  std::size_t operator()(const MultiIndex& a) const noexcept;
};

// ---------------------------------------------------------------------------
// ComplexPoint
// ---------------------------------------------------------------------------

class ComplexPoint {
 public:
  ComplexPoint() = default;
  explicit ComplexPoint(std::vector<complex> coords) : coords_(std::move(coords)) {}
  ComplexPoint(std::initializer_list<complex> coords) : coords_(coords) {}

  static ComplexPoint zero(std::size_t arity) { return ComplexPoint(std::vector<complex>(arity)); }

  std::size_t size() const noexcept { return coords_.size(); }
  const complex& operator[](std::size_t j) const { return coords_[j]; }
  std::span<const complex> coords() const noexcept { return coords_; }

  ComplexPoint slice(std::size_t first, std::size_t count) const;
  ComplexPoint concat(const ComplexPoint& tail) const;

  /// (|z_1|, ..., |z_n|): the point's image in the Reinhardt shadow.
  std::vector<double> moduli() const;
  double norm() const;

  bool operator==(const ComplexPoint&) const = default;

 private:
  std::vector<complex> coords_;
};

/// prod_j z_j^{alpha_j}; zero exponents contribute an exact factor 1.
complex monomial_eval(const ComplexPoint& z, const MultiIndex& alpha);

/// <z, w> = sum_j z_j conj(w_j)
complex hermitian_product(const ComplexPoint& z, const ComplexPoint& w);

void require_same_arity(std::size_t a, std::size_t b, const char* what);

/// [[re, im], ...]
nlohmann::json point_to_json(const ComplexPoint& z);
ComplexPoint point_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// RadialWeight
// ---------------------------------------------------------------------------

/// exp(-mu1 ||r||^mu2) on C^n.
struct ExpPower {
  double mu1;
  double mu2;
};

/// (exp(-mu1 ||r||^mu2) - ||rho||^2)^eta on the Hartogs shadow; variables split n | m.
struct HartogsPower {
  int n;
  int m;
  double mu1;
  double mu2;
  double eta;
};

/// (1 - sum_j exp(eta_j rho^2) r_j^2 - ||r'||^2)^a; variables split n | m | 1.
struct VEtaPower {
  int n;
  int m;
  std::vector<double> eta;
  double a;
};

/// phi = value everywhere (e.g. plain Bergman space on a ball).
struct ConstantWeight {
  double value;
};

/// User-supplied positive radial function, given on moduli.
struct CustomWeight {
  std::string name;
  std::function<double(std::span<const double>)> fn;
  nlohmann::json descriptor;
};

class RadialWeight {
 public:
  using Kind = std::variant<ExpPower, HartogsPower, VEtaPower, ConstantWeight, CustomWeight>;

  static RadialWeight exp_power(int n, double mu1, double mu2);
  static RadialWeight hartogs_power(int n, int m, double mu1, double mu2, double eta);
  static RadialWeight veta_power(int n, int m, std::vector<double> eta, double a);
  static RadialWeight constant(int n, double value = 1.0);
  static RadialWeight custom(int n, std::string name, std::function<double(std::span<const double>)> fn,
                             nlohmann::json descriptor = {});

  int arity() const noexcept { return arity_; }
  const Kind& kind() const noexcept { return kind_; }
  /// Multiplicative factor applied on top of the kind (c * phi).
  double scale() const noexcept { return scale_; }
  RadialWeight scaled(double c) const;

  /// log phi(r); -inf where phi vanishes (outside the family's shadow).
  double log_value(std::span<const double> r) const;
  double value(std::span<const double> r) const;
  double value(const ComplexPoint& z) const;

  nlohmann::json descriptor() const;

 private:
  RadialWeight(int arity, Kind kind) : arity_(arity), kind_(std::move(kind)) {}

  int arity_ = 0;
  Kind kind_;
  double scale_ = 1.0;
};

// ---------------------------------------------------------------------------
// ShadowRegion
// ---------------------------------------------------------------------------

struct OrthantShadow {};

/// ||rho||^2 < exp(-mu1 ||r||^mu2), r in R_+^n, rho in R_+^m.
struct HartogsShadow {
  int n;
  int m;
  double mu1;
  double mu2;
};

/// sum_j exp(eta_j rho^2) r_j^2 + ||r'||^2 < 1, (r, r', rho) in R_+^n x R_+^m x R_+.
struct VEtaShadow {
  int n;
  int m;
  std::vector<double> eta;
};

/// ||r|| < radius
struct BallShadow {
  double radius;
};

/// r_j < radii_j
struct PolydiscShadow {
  std::vector<double> radii;
};

/// Arbitrary membership predicate inside a bounding box (entries may be +inf).
struct CustomShadow {
  std::string name;
  std::vector<double> bounds;
  std::function<bool(std::span<const double>)> predicate;
};

class ShadowRegion {
 public:
  using Kind = std::variant<OrthantShadow, HartogsShadow, VEtaShadow, BallShadow, PolydiscShadow, CustomShadow>;

  static ShadowRegion orthant(int n);
  static ShadowRegion hartogs(int n, int m, double mu1, double mu2);
  static ShadowRegion veta(int n, int m, std::vector<double> eta);
  static ShadowRegion ball(int n, double radius = 1.0);
  static ShadowRegion polydisc(std::vector<double> radii);
  static ShadowRegion custom(std::string name, std::vector<double> bounds,
                             std::function<bool(std::span<const double>)> predicate);

  int arity() const noexcept { return arity_; }
  const Kind& kind() const noexcept { return kind_; }
  bool is_custom() const noexcept { return std::holds_alternative<CustomShadow>(kind_); }

  /// Strict-inequality membership. Throws ArgumentError on negative entries.
  bool contains(std::span<const double> r) const;
  bool contains(const ComplexPoint& z) const;

  /// Per-axis finite upper bound, or +inf for unbounded axes.
  std::vector<double> bounding_box() const;

  /// Order in which axes are integrated (outermost first). Section limits
  /// of later axes depend only on earlier ones.
  std::vector<int> integration_order() const;

  /// Upper limit of axis order[depth] given r filled for order[0..depth-1].
  /// Custom shadows return their bounding box entry.
  double section_upper(int depth, std::span<const double> r) const;

  /// Defining-inequality slack at r: 1 - lhs/rhs (1 at the origin, 0 on the
  /// boundary, negative outside). Orthant returns 1.
  double slack(std::span<const double> r) const;

  nlohmann::json descriptor() const;

 private:
  ShadowRegion(int arity, Kind kind) : arity_(arity), kind_(std::move(kind)) {}

  int arity_ = 0;
  Kind kind_;
};

}  // namespace bergkern
