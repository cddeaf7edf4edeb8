#include "bergkern/core_types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "bergkern/errors.hpp"

namespace bergkern {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double squared_sum(std::span<const double> r, std::size_t first, std::size_t count) {
  double s = 0.0;
  for (std::size_t j = first; j < first + count; ++j) s += r[j] * r[j];
  return s;
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ArgumentError(std::string(what) + " must be positive and finite");
}

}  // namespace

nlohmann::json point_to_json(const ComplexPoint& z) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& c : z.coords()) j.push_back({c.real(), c.imag()});
  return j;
}

ComplexPoint point_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw ArgumentError("point must be an array of [re, im] pairs");
  std::vector<complex> coords;
  for (const auto& c : j) {
    if (c.is_number()) {
      coords.emplace_back(c.get<double>(), 0.0);
    } else if (c.is_array() && c.size() == 2 && c[0].is_number() && c[1].is_number()) {
      coords.emplace_back(c[0].get<double>(), c[1].get<double>());
    } else {
      throw ArgumentError("point coordinate must be a number or an [re, im] pair");
    }
  }
  return ComplexPoint(std::move(coords));
}

void require_same_arity(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    std::ostringstream os;
    os << what << ": arity mismatch (" << a << " vs " << b << ")";
    throw ArgumentError(os.str());
  }
}

// ---------------------------------------------------------------------------
// MultiIndex

MultiIndex::MultiIndex(std::vector<int> entries) : entries_(std::move(entries)) {
  for (int e : entries_) {
    if (e < 0) throw ArgumentError("multi-index entries must be nonnegative");
  }
}

MultiIndex::MultiIndex(std::initializer_list<int> entries) : MultiIndex(std::vector<int>(entries)) {}

MultiIndex MultiIndex::zero(std::size_t arity) { return MultiIndex(std::vector<int>(arity, 0)); }

MultiIndex MultiIndex::unit(std::size_t arity, std::size_t j) {
  if (j >= arity) throw ArgumentError("unit multi-index position out of range");
  std::vector<int> e(arity, 0);
  e[j] = 1;
  return MultiIndex(std::move(e));
}

int MultiIndex::degree() const noexcept { return std::accumulate(entries_.begin(), entries_.end(), 0); }

double MultiIndex::factorial_log() const {
  double s = 0.0;
  for (int e : entries_) s += std::lgamma(e + 1.0);
  return s;
}

MultiIndex MultiIndex::operator+(const MultiIndex& other) const {
  require_same_arity(size(), other.size(), "MultiIndex::operator+");
  std::vector<int> e(entries_);
  for (std::size_t j = 0; j < e.size(); ++j) e[j] += other.entries_[j];
  return MultiIndex(std::move(e));
}

MultiIndex MultiIndex::concat(const MultiIndex& tail) const {
  std::vector<int> e(entries_);
  e.insert(e.end(), tail.entries_.begin(), tail.entries_.end());
  return MultiIndex(std::move(e));
}

MultiIndex MultiIndex::slice(std::size_t first, std::size_t count) const {
  if (first + count > size()) throw ArgumentError("MultiIndex::slice out of range");
  return MultiIndex(std::vector<int>(entries_.begin() + first, entries_.begin() + first + count));
}

std::string MultiIndex::to_string() const {
  std::ostringstream os;
  os << '(';
  for (std::size_t j = 0; j < entries_.size(); ++j) os << (j ? "," : "") << entries_[j];
  os << ')';
  return os.str();
}

std::size_t MultiIndexHash::operator()(const MultiIndex& a) const noexcept {
  std::size_t h = 0xcbf29ce484222325ULL;
  for (int e : a.entries()) {
    h ^= static_cast<std::size_t>(e) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

// ---------------------------------------------------------------------------
// ComplexPoint

ComplexPoint ComplexPoint::slice(std::size_t first, std::size_t count) const {
  if (first + count > size()) throw ArgumentError("ComplexPoint::slice out of range");
  return ComplexPoint(std::vector<complex>(coords_.begin() + first, coords_.begin() + first + count));
}

ComplexPoint ComplexPoint::concat(const ComplexPoint& tail) const {
  std::vector<complex> c(coords_);
  c.insert(c.end(), tail.coords_.begin(), tail.coords_.end());
  return ComplexPoint(std::move(c));
}

std::vector<double> ComplexPoint::moduli() const {
  std::vector<double> r(coords_.size());
  std::transform(coords_.begin(), coords_.end(), r.begin(), [](const complex& c) { return std::abs(c); });
  return r;
}

double ComplexPoint::norm() const { return std::sqrt(hermitian_product(*this, *this).real()); }

complex monomial_eval(const ComplexPoint& z, const MultiIndex& alpha) {
  require_same_arity(z.size(), alpha.size(), "monomial_eval");
  complex result(1.0, 0.0);
  for (std::size_t j = 0; j < z.size(); ++j) {
    const int e = alpha[j];
    if (e == 0) continue;
    // binary powering keeps integer powers exact for exactly representable inputs
    complex base = z[j];
    complex acc(1.0, 0.0);
    for (int k = e; k > 0; k >>= 1) {
      if (k & 1) acc *= base;
      if (k > 1) base *= base;
    }
    result *= acc;
  }
  return result;
}

complex hermitian_product(const ComplexPoint& z, const ComplexPoint& w) {
  require_same_arity(z.size(), w.size(), "hermitian_product");
  complex s(0.0, 0.0);
  for (std::size_t j = 0; j < z.size(); ++j) s += z[j] * std::conj(w[j]);
  return s;
}

// ---------------------------------------------------------------------------
// RadialWeight

RadialWeight RadialWeight::exp_power(int n, double mu1, double mu2) {
  if (n < 1) throw ArgumentError("ExpPower arity must be >= 1");
  require_positive(mu1, "mu1");
  require_positive(mu2, "mu2");
  return RadialWeight(n, ExpPower{mu1, mu2});
}

RadialWeight RadialWeight::hartogs_power(int n, int m, double mu1, double mu2, double eta) {
  if (n < 1 || m < 1) throw ArgumentError("HartogsPower needs n, m >= 1");
  require_positive(mu1, "mu1");
  require_positive(mu2, "mu2");
  if (!(eta > -1.0) || !std::isfinite(eta)) throw ArgumentError("HartogsPower requires eta > -1");
  return RadialWeight(n + m, HartogsPower{n, m, mu1, mu2, eta});
}

RadialWeight RadialWeight::veta_power(int n, int m, std::vector<double> eta, double a) {
  if (n < 1 || m < 1) throw ArgumentError("VEtaPower needs n, m >= 1");
  if (eta.size() != static_cast<std::size_t>(n)) throw ArgumentError("VEtaPower: eta must have length n");
  for (double e : eta) require_positive(e, "eta_j");
  if (!(a > -1.0) || !std::isfinite(a)) throw ArgumentError("VEtaPower requires a > -1");
  return RadialWeight(n + m + 1, VEtaPower{n, m, std::move(eta), a});
}

RadialWeight RadialWeight::constant(int n, double value) {
  if (n < 1) throw ArgumentError("constant weight arity must be >= 1");
  require_positive(value, "constant weight value");
  return RadialWeight(n, ConstantWeight{value});
}

RadialWeight RadialWeight::custom(int n, std::string name, std::function<double(std::span<const double>)> fn,
                                  nlohmann::json descriptor) {
  if (n < 1) throw ArgumentError("custom weight arity must be >= 1");
  if (!fn) throw ArgumentError("custom weight needs a callable");
  return RadialWeight(n, CustomWeight{std::move(name), std::move(fn), std::move(descriptor)});
}

RadialWeight RadialWeight::scaled(double c) const {
  require_positive(c, "weight scale");
  RadialWeight copy(*this);
  copy.scale_ *= c;
  return copy;
}

double RadialWeight::log_value(std::span<const double> r) const {
  require_same_arity(r.size(), static_cast<std::size_t>(arity_), "RadialWeight::log_value");
  const double base = std::visit(
      overloaded{
          [&](const ExpPower& w) {
            const double norm = std::sqrt(squared_sum(r, 0, r.size()));
            return -w.mu1 * std::pow(norm, w.mu2);
          },
          [&](const HartogsPower& w) {
            const double norm = std::sqrt(squared_sum(r, 0, w.n));
            const double gap = std::exp(-w.mu1 * std::pow(norm, w.mu2)) - squared_sum(r, w.n, w.m);
            if (!(gap > 0.0)) return -kInf;
            return w.eta == 0.0 ? 0.0 : w.eta * std::log(gap);
          },
          [&](const VEtaPower& w) {
            const double rho2 = r[w.n + w.m] * r[w.n + w.m];
            double s = squared_sum(r, w.n, w.m);
            for (int j = 0; j < w.n; ++j) s += std::exp(w.eta[j] * rho2) * r[j] * r[j];
            const double gap = 1.0 - s;
            if (!(gap > 0.0)) return -kInf;
            return w.a == 0.0 ? 0.0 : w.a * std::log(gap);
          },
          [&](const ConstantWeight& w) { return std::log(w.value); },
          [&](const CustomWeight& w) {
            const double v = w.fn(r);
            return v > 0.0 ? std::log(v) : -kInf;
          },
      },
      kind_);
  return base + std::log(scale_);
}

double RadialWeight::value(std::span<const double> r) const { return std::exp(log_value(r)); }

double RadialWeight::value(const ComplexPoint& z) const {
  const auto r = z.moduli();
  return value(r);
}

nlohmann::json RadialWeight::descriptor() const {
  nlohmann::json d = std::visit(
      overloaded{
          [](const ExpPower& w) { return nlohmann::json{{"kind", "exp_power"}, {"mu1", w.mu1}, {"mu2", w.mu2}}; },
          [](const HartogsPower& w) {
            return nlohmann::json{{"kind", "hartogs_power"}, {"n", w.n}, {"m", w.m},
                                  {"mu1", w.mu1},          {"mu2", w.mu2}, {"eta", w.eta}};
          },
          [](const VEtaPower& w) {
            return nlohmann::json{{"kind", "veta_power"}, {"n", w.n}, {"m", w.m}, {"eta", w.eta}, {"a", w.a}};
          },
          [](const ConstantWeight& w) { return nlohmann::json{{"kind", "constant"}, {"value", w.value}}; },
          [](const CustomWeight& w) {
            nlohmann::json j{{"kind", "custom"}, {"name", w.name}};
            if (!w.descriptor.is_null()) j["definition"] = w.descriptor;
            return j;
          },
      },
      kind_);
  d["arity"] = arity_;
  d["scale"] = scale_;
  return d;
}

// ---------------------------------------------------------------------------
// ShadowRegion

ShadowRegion ShadowRegion::orthant(int n) {
  if (n < 1) throw ArgumentError("orthant arity must be >= 1");
  return ShadowRegion(n, OrthantShadow{});
}

ShadowRegion ShadowRegion::hartogs(int n, int m, double mu1, double mu2) {
  if (n < 1 || m < 1) throw ArgumentError("Hartogs shadow needs n, m >= 1");
  require_positive(mu1, "mu1");
  require_positive(mu2, "mu2");
  return ShadowRegion(n + m, HartogsShadow{n, m, mu1, mu2});
}

ShadowRegion ShadowRegion::veta(int n, int m, std::vector<double> eta) {
  if (n < 1 || m < 1) throw ArgumentError("V_eta shadow needs n, m >= 1");
  if (eta.size() != static_cast<std::size_t>(n)) throw ArgumentError("V_eta shadow: eta must have length n");
  for (double e : eta) require_positive(e, "eta_j");
  return ShadowRegion(n + m + 1, VEtaShadow{n, m, std::move(eta)});
}

ShadowRegion ShadowRegion::ball(int n, double radius) {
  if (n < 1) throw ArgumentError("ball arity must be >= 1");
  require_positive(radius, "ball radius");
  return ShadowRegion(n, BallShadow{radius});
}

ShadowRegion ShadowRegion::polydisc(std::vector<double> radii) {
  if (radii.empty()) throw ArgumentError("polydisc needs at least one radius");
  for (double r : radii) require_positive(r, "polydisc radius");
  const int n = static_cast<int>(radii.size());
  return ShadowRegion(n, PolydiscShadow{std::move(radii)});
}

ShadowRegion ShadowRegion::custom(std::string name, std::vector<double> bounds,
                                  std::function<bool(std::span<const double>)> predicate) {
  if (bounds.empty()) throw ArgumentError("custom shadow needs a bounding box");
  if (!predicate) throw ArgumentError("custom shadow needs a membership predicate");
  for (double b : bounds) {
    if (!(b > 0.0)) throw ArgumentError("custom shadow bounds must be positive (or +inf)");
  }
  const int n = static_cast<int>(bounds.size());
  return ShadowRegion(n, CustomShadow{std::move(name), std::move(bounds), std::move(predicate)});
}

double ShadowRegion::slack(std::span<const double> r) const {
  require_same_arity(r.size(), static_cast<std::size_t>(arity_), "ShadowRegion");
  return std::visit(overloaded{
                        [](const OrthantShadow&) { return 1.0; },
                        [&](const HartogsShadow& s) {
                          const double norm = std::sqrt(squared_sum(r, 0, s.n));
                          const double bound = std::exp(-s.mu1 * std::pow(norm, s.mu2));
                          return 1.0 - squared_sum(r, s.n, s.m) / bound;
                        },
                        [&](const VEtaShadow& s) {
                          const double rho2 = r[s.n + s.m] * r[s.n + s.m];
                          double lhs = squared_sum(r, s.n, s.m);
                          for (int j = 0; j < s.n; ++j) lhs += std::exp(s.eta[j] * rho2) * r[j] * r[j];
                          return 1.0 - lhs;
                        },
                        [&](const BallShadow& s) { return 1.0 - squared_sum(r, 0, r.size()) / (s.radius * s.radius); },
                        [&](const PolydiscShadow& s) {
                          double worst = 1.0;
                          for (std::size_t j = 0; j < r.size(); ++j) {
                            worst = std::min(worst, 1.0 - r[j] * r[j] / (s.radii[j] * s.radii[j]));
                          }
                          return worst;
                        },
                        [&](const CustomShadow& s) {
                          for (std::size_t j = 0; j < r.size(); ++j) {
                            if (!(r[j] < s.bounds[j])) return -1.0;
                          }
                          return s.predicate(r) ? 1.0 : -1.0;
                        },
                    },
                    kind_);
}

bool ShadowRegion::contains(std::span<const double> r) const {
  require_same_arity(r.size(), static_cast<std::size_t>(arity_), "shadow_contains");
  for (double x : r) {
    if (x < 0.0 || std::isnan(x)) throw ArgumentError("shadow_contains: moduli must be nonnegative");
  }
  return slack(r) > 0.0;
}

bool ShadowRegion::contains(const ComplexPoint& z) const {
  const auto r = z.moduli();
  return contains(r);
}

std::vector<double> ShadowRegion::bounding_box() const {
  const auto n = static_cast<std::size_t>(arity_);
  return std::visit(overloaded{
                        [&](const OrthantShadow&) { return std::vector<double>(n, kInf); },
                        [&](const HartogsShadow& s) {
                          std::vector<double> b(n, kInf);
                          for (int j = 0; j < s.m; ++j) b[s.n + j] = 1.0;
                          return b;
                        },
                        [&](const VEtaShadow& s) {
                          std::vector<double> b(n, 1.0);
                          b[s.n + s.m] = kInf;
                          return b;
                        },
                        [&](const BallShadow& s) { return std::vector<double>(n, s.radius); },
                        [](const PolydiscShadow& s) { return s.radii; },
                        [](const CustomShadow& s) { return s.bounds; },
                    },
                    kind_);
}

std::vector<int> ShadowRegion::integration_order() const {
  std::vector<int> order(static_cast<std::size_t>(arity_));
  std::iota(order.begin(), order.end(), 0);
  if (const auto* s = std::get_if<VEtaShadow>(&kind_)) {
    // the fiber variable rho goes first; every other section depends on it
    std::rotate(order.begin(), order.begin() + (s->n + s->m), order.end());
  }
  return order;
}

double ShadowRegion::section_upper(int depth, std::span<const double> r) const {
  return std::visit(overloaded{
                        [](const OrthantShadow&) { return kInf; },
                        [&](const HartogsShadow& s) {
                          if (depth < s.n) return kInf;
                          const double norm = std::sqrt(squared_sum(r, 0, s.n));
                          const double room = std::exp(-s.mu1 * std::pow(norm, s.mu2)) -
                                              squared_sum(r, s.n, static_cast<std::size_t>(depth - s.n));
                          return std::sqrt(std::max(room, 0.0));
                        },
                        [&](const VEtaShadow& s) {
                          if (depth == 0) return kInf;
                          const double rho2 = r[s.n + s.m] * r[s.n + s.m];
                          const int axis = depth - 1;
                          double used = 0.0;
                          for (int j = 0; j < std::min(axis, s.n); ++j) used += std::exp(s.eta[j] * rho2) * r[j] * r[j];
                          if (axis < s.n) {
                            return std::sqrt(std::max(1.0 - used, 0.0) / std::exp(s.eta[axis] * rho2));
                          }
                          used += squared_sum(r, s.n, static_cast<std::size_t>(axis - s.n));
                          return std::sqrt(std::max(1.0 - used, 0.0));
                        },
                        [&](const BallShadow& s) {
                          const double room = s.radius * s.radius - squared_sum(r, 0, static_cast<std::size_t>(depth));
                          return std::sqrt(std::max(room, 0.0));
                        },
                        [&](const PolydiscShadow& s) { return s.radii[depth]; },
                        [&](const CustomShadow& s) { return s.bounds[depth]; },
                    },
                    kind_);
}

nlohmann::json ShadowRegion::descriptor() const {
  nlohmann::json d = std::visit(
      overloaded{
          [](const OrthantShadow&) { return nlohmann::json{{"kind", "orthant"}}; },
          [](const HartogsShadow& s) {
            return nlohmann::json{{"kind", "hartogs"}, {"n", s.n}, {"m", s.m}, {"mu1", s.mu1}, {"mu2", s.mu2}};
          },
          [](const VEtaShadow& s) { return nlohmann::json{{"kind", "veta"}, {"n", s.n}, {"m", s.m}, {"eta", s.eta}}; },
          [](const BallShadow& s) { return nlohmann::json{{"kind", "ball"}, {"radius", s.radius}}; },
          [](const PolydiscShadow& s) { return nlohmann::json{{"kind", "polydisc"}, {"radii", s.radii}}; },
          [](const CustomShadow& s) {
            nlohmann::json bounds = nlohmann::json::array();
            for (double b : s.bounds) {
              if (std::isinf(b)) {
                bounds.push_back(nullptr);
              } else {
                bounds.push_back(b);
              }
            }
            return nlohmann::json{{"kind", "custom"}, {"name", s.name}, {"bounds", bounds}};
          },
      },
      kind_);
  d["arity"] = arity_;
  return d;
}

}  // namespace bergkern
