#include "bergkern/moments.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "bergkern/errors.hpp"
#include "bergkern/quadrature.hpp"

namespace bergkern {

namespace {

const double kLogPi = std::log(std::numbers::pi);
const double kLog2 = std::log(2.0);

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ArgumentError(std::string(what) + " must be positive");
}

}  // namespace

double log_sphere_monomial_integral(const MultiIndex& alpha) {
  if (alpha.size() == 0) throw ArgumentError("sphere_monomial_integral: empty multi-index");
  const auto n = static_cast<double>(alpha.size());
  return kLog2 + alpha.factorial_log() - std::lgamma(alpha.degree() + n);
}

double log_moment_closed_cn(const MultiIndex& alpha, double mu1, double mu2) {
  require_positive(mu1, "mu1");
  require_positive(mu2, "mu2");
  if (alpha.size() == 0) throw ArgumentError("moment_closed_cn: empty multi-index");
  const auto n = static_cast<double>(alpha.size());
  const double p = (2.0 * alpha.degree() + 2.0 * n) / mu2;
  return kLog2 + n * kLogPi + alpha.factorial_log() + std::lgamma(p) - std::lgamma(alpha.degree() + n) -
         p * std::log(mu1) - std::log(mu2);
}

double log_moment_closed_dnm(const MultiIndex& alpha, const MultiIndex& beta, double mu1, double mu2, double eta) {
  require_positive(mu1, "mu1");
  require_positive(mu2, "mu2");
  if (!(eta > -1.0)) throw ArgumentError("moment_closed_dnm requires eta > -1");
  if (alpha.size() == 0 || beta.size() == 0) throw ArgumentError("moment_closed_dnm: empty multi-index");
  const auto n = static_cast<double>(alpha.size());
  const auto m = static_cast<double>(beta.size());
  const double p = (2.0 * alpha.degree() + 2.0 * n) / mu2;
  const double fiber = beta.degree() + m + eta;
  return kLog2 + alpha.factorial_log() + beta.factorial_log() + std::lgamma(eta + 1.0) + std::lgamma(p) +
         (n + m) * kLogPi - std::log(mu2) - std::lgamma(fiber + 1.0) - std::lgamma(alpha.degree() + n) -
         p * std::log(mu1 * fiber);
}

double log_moment_closed_veta(const MultiIndex& alpha, const MultiIndex& beta, int gamma, std::span<const double> eta,
                              double a) {
  if (gamma < 0) throw ArgumentError("moment_closed_veta: gamma must be nonnegative");
  if (!(a > -1.0)) throw ArgumentError("moment_closed_veta requires a > -1");
  require_same_arity(alpha.size(), eta.size(), "moment_closed_veta");
  if (alpha.size() == 0 || beta.size() == 0) throw ArgumentError("moment_closed_veta: empty multi-index");
  double pairing = 0.0;  // <alpha, eta> + |eta|
  for (std::size_t j = 0; j < eta.size(); ++j) {
    if (!(eta[j] > 0.0)) throw ArgumentError("moment_closed_veta: eta entries must be positive");
    pairing += (alpha[j] + 1.0) * eta[j];
  }
  const auto n = static_cast<double>(alpha.size());
  const auto m = static_cast<double>(beta.size());
  return (n + m + 1.0) * kLogPi + std::lgamma(a + 1.0) + alpha.factorial_log() + beta.factorial_log() +
         std::lgamma(gamma + 1.0) - std::lgamma(alpha.degree() + beta.degree() + n + m + a + 1.0) -
         (gamma + 1.0) * std::log(pairing);
}

double log_moment_closed_ball(const MultiIndex& alpha, double radius) {
  require_positive(radius, "ball radius");
  const auto n = static_cast<double>(alpha.size());
  return n * kLogPi + alpha.factorial_log() + (2.0 * alpha.degree() + 2.0 * n) * std::log(radius) -
         std::lgamma(alpha.degree() + n + 1.0);
}

double log_moment_closed_polydisc(const MultiIndex& alpha, std::span<const double> radii) {
  require_same_arity(alpha.size(), radii.size(), "moment_closed_polydisc");
  double s = 0.0;
  for (std::size_t j = 0; j < radii.size(); ++j) {
    s += kLogPi + (2.0 * alpha[j] + 2.0) * std::log(radii[j]) - std::log(alpha[j] + 1.0);
  }
  return s;
}

std::optional<double> closed_form_log_moment(const RadialWeight& weight, const ShadowRegion& shadow,
                                             const MultiIndex& alpha) {
  require_same_arity(weight.arity(), shadow.arity(), "closed_form_log_moment");
  require_same_arity(alpha.size(), static_cast<std::size_t>(weight.arity()), "closed_form_log_moment");
  const double log_scale = std::log(weight.scale());
  const auto& wk = weight.kind();
  const auto& sk = shadow.kind();

  if (const auto* w = std::get_if<ExpPower>(&wk)) {
    if (std::holds_alternative<OrthantShadow>(sk)) return log_moment_closed_cn(alpha, w->mu1, w->mu2) + log_scale;
  }
  if (const auto* w = std::get_if<HartogsPower>(&wk)) {
    const auto* s = std::get_if<HartogsShadow>(&sk);
    if (s && s->n == w->n && s->m == w->m && s->mu1 == w->mu1 && s->mu2 == w->mu2) {
      return log_moment_closed_dnm(alpha.slice(0, w->n), alpha.slice(w->n, w->m), w->mu1, w->mu2, w->eta) +
             log_scale;
    }
  }
  if (const auto* w = std::get_if<VEtaPower>(&wk)) {
    const auto* s = std::get_if<VEtaShadow>(&sk);
    if (s && s->n == w->n && s->m == w->m && s->eta == w->eta) {
      return log_moment_closed_veta(alpha.slice(0, w->n), alpha.slice(w->n, w->m), alpha[w->n + w->m], w->eta,
                                    w->a) +
             log_scale;
    }
  }
  if (const auto* w = std::get_if<ConstantWeight>(&wk)) {
    if (const auto* s = std::get_if<BallShadow>(&sk)) {
      return log_moment_closed_ball(alpha, s->radius) + std::log(w->value) + log_scale;
    }
    if (const auto* s = std::get_if<PolydiscShadow>(&sk)) {
      return log_moment_closed_polydisc(alpha, s->radii) + std::log(w->value) + log_scale;
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Quadrature

namespace {

// Custom shadows are monotone, so the last section is an interval [0, b).
// Locating b keeps the jump of the indicator out of the quadrature panels.
double innermost_section(const ShadowRegion& shadow, std::vector<double>& r, int axis, double upper) {
  if (!std::isfinite(upper)) return upper;
  auto& x = r[static_cast<std::size_t>(axis)];
  double lo = 0.0, hi = upper;
  x = lo;
  if (!shadow.contains(r)) return 0.0;
  x = hi;
  if (shadow.contains(r)) return hi;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * upper; ++it) {
    x = 0.5 * (lo + hi);
    (shadow.contains(r) ? lo : hi) = x;
  }
  return 0.5 * (lo + hi);
}

template <class V>
BasicShadowIntegral<V> integrate_over_shadow_impl(const ShadowRegion& shadow,
                                                  const std::function<V(std::span<const double>)>& integrand,
                                                  double rel_tol, double abs_tol) {
  const int n = shadow.arity();
  const std::vector<int> order = shadow.integration_order();
  const bool indicator = shadow.is_custom();
  std::vector<double> r(static_cast<std::size_t>(n), 0.0);
  bool converged = true;
  std::size_t evaluations = 0;

  quad::Options outer_opt;
  outer_opt.rel_tol = rel_tol;
  outer_opt.abs_tol = abs_tol;
  outer_opt.max_panels = 4000;
  quad::Options inner_opt;
  inner_opt.rel_tol = 0.25 * rel_tol;
  inner_opt.abs_tol = 0.25 * abs_tol;
  inner_opt.max_panels = 600;

  std::function<quad::BasicEstimate<V>(int)> level = [&](int depth) -> quad::BasicEstimate<V> {
    const int axis = order[static_cast<std::size_t>(depth)];
    double upper = shadow.section_upper(depth, r);
    if (indicator && depth + 1 == n) upper = innermost_section(shadow, r, axis, upper);
    auto f = [&, axis, depth](double x) -> quad::BasicEstimate<V> {
      r[static_cast<std::size_t>(axis)] = x;
      if (depth + 1 == n) {
        ++evaluations;
        if (indicator && !shadow.contains(r)) return {};
        return {integrand(r), 0.0};
      }
      return level(depth + 1);
    };
    const quad::Options& opt = depth == 0 ? outer_opt : inner_opt;
    if (std::isinf(upper)) {
      const auto res = quad::integrate_to_infinity(f, 0.0, opt);
      if (!res.converged) converged = false;
      return {res.value, res.error};
    }
    if (!(upper > 0.0)) return {};
    // r = U sin(pi t / 2): weights that vanish like (U^2 - r^2)^a at the top
    // of a section become powers of cos, smooth for half-integer a.
    auto g = [&f, upper](double t) -> quad::BasicEstimate<V> {
      const double th = 0.5 * std::numbers::pi * t;
      const double jac = 0.5 * std::numbers::pi * upper * std::cos(th);
      const auto e = f(upper * std::sin(th));
      return {e.value * jac, e.error * jac};
    };
    const auto res = quad::integrate(g, 0.0, 1.0, opt);
    if (!res.converged) converged = false;
    return {res.value, res.error};
  };

  const quad::BasicEstimate<V> total = level(0);
  return {total.value, total.error, converged, evaluations};
}

}  // namespace

ShadowIntegral integrate_over_shadow(const ShadowRegion& shadow,
                                     const std::function<double(std::span<const double>)>& integrand,
                                     double rel_tol, double abs_tol) {
  return integrate_over_shadow_impl<double>(shadow, integrand, rel_tol, abs_tol);
}

ComplexShadowIntegral integrate_over_shadow(const ShadowRegion& shadow,
                                            const std::function<complex(std::span<const double>)>& integrand,
                                            double rel_tol, double abs_tol) {
  return integrate_over_shadow_impl<complex>(shadow, integrand, rel_tol, abs_tol);
}

QuadratureMoment moment_quadrature(const ShadowRegion& shadow, const RadialWeight& weight, const MultiIndex& alpha,
                                   double rel_tol) {
  if (!(rel_tol > 1e-12 && rel_tol < 1e-2)) throw ArgumentError("moment_quadrature: rel_tol must lie in (1e-12, 1e-2)");
  require_same_arity(shadow.arity(), weight.arity(), "moment_quadrature");
  require_same_arity(alpha.size(), static_cast<std::size_t>(weight.arity()), "moment_quadrature");

  auto integrand = [&](std::span<const double> r) {
    double log_term = weight.log_value(r);
    if (std::isinf(log_term)) return 0.0;
    for (std::size_t j = 0; j < r.size(); ++j) log_term += (2.0 * alpha[j] + 1.0) * std::log(r[j]);
    return std::exp(log_term);
  };
  const ShadowIntegral s = integrate_over_shadow(shadow, std::function<double(std::span<const double>)>(integrand), rel_tol);
  const double log_factor = static_cast<double>(alpha.size()) * std::log(2.0 * std::numbers::pi);
  const double factor = std::exp(log_factor);
  if (!s.converged) {
    std::ostringstream os;
    os << "moment_quadrature did not converge for alpha=" << alpha.to_string();
    throw ConvergenceError(os.str(), s.value * factor, s.abs_error * factor);
  }
  if (!(s.value > 0.0)) throw ConvergenceError("moment_quadrature produced a nonpositive moment", 0.0, s.abs_error);
  return {std::log(s.value) + log_factor, s.abs_error * factor, s.evaluations};
}

// ---------------------------------------------------------------------------
// MomentTable

std::string to_string(MomentMethod m) { return m == MomentMethod::ClosedForm ? "closed_form" : "quadrature"; }

MomentMethod moment_method_from_string(const std::string& s) {
  if (s == "closed_form") return MomentMethod::ClosedForm;
  if (s == "quadrature") return MomentMethod::Quadrature;
  throw ArgumentError("unknown moment method '" + s + "'");
}

MomentTable::MomentTable(RadialWeight weight, ShadowRegion shadow, double quadrature_rel_tol, Preference preference)
    : weight_(std::move(weight)), shadow_(std::move(shadow)), preference_(preference) {
  require_same_arity(weight_.arity(), shadow_.arity(), "MomentTable");
  has_closed_form_ = closed_form_log_moment(weight_, shadow_, MultiIndex::zero(weight_.arity())).has_value();
  if (quadrature_rel_tol <= 0.0) {
    rel_tol_ = has_closed_form_ ? kDefaultClosedCheckTol : kDefaultCustomTol;
  } else {
    rel_tol_ = quadrature_rel_tol;
  }
}

MomentEntry MomentTable::get(const MultiIndex& alpha) {
  const bool closed = has_closed_form_ && preference_ == Preference::ClosedFormFirst;
  const MomentMethod method = closed ? MomentMethod::ClosedForm : MomentMethod::Quadrature;
  if (auto hit = find(alpha, method)) return *hit;
  return compute(alpha, method);
}

double MomentTable::evaluate_log(const MultiIndex& alpha) {
  if (has_closed_form_ && preference_ == Preference::ClosedFormFirst) {
    require_same_arity(alpha.size(), static_cast<std::size_t>(arity()), "MomentTable");
    if (auto hit = find(alpha, MomentMethod::ClosedForm)) return hit->log_value;
    return *closed_form_log_moment(weight_, shadow_, alpha);
  }
  return get(alpha).log_value;
}

MomentEntry MomentTable::compute(const MultiIndex& alpha, MomentMethod method, std::optional<double> rel_tol) {
  require_same_arity(alpha.size(), static_cast<std::size_t>(arity()), "MomentTable");
  if (method == MomentMethod::ClosedForm) {
    const auto v = closed_form_log_moment(weight_, shadow_, alpha);
    if (!v) throw ArgumentError("MomentTable: no closed form for this weight/shadow pair");
    MomentEntry e{*v, MomentMethod::ClosedForm, 0.0};
    std::lock_guard lock(mutex_);
    records_[alpha].closed = e;
    return e;
  }
  const double tol = rel_tol.value_or(rel_tol_);
  {
    std::lock_guard lock(mutex_);
    auto it = records_.find(alpha);
    if (it != records_.end() && it->second.quadrature && it->second.quadrature_tol <= tol) {
      return *it->second.quadrature;
    }
  }
  const QuadratureMoment q = moment_quadrature(shadow_, weight_, alpha, tol);
  MomentEntry e{q.log_value, MomentMethod::Quadrature, q.abs_error_estimate};
  std::lock_guard lock(mutex_);
  auto& rec = records_[alpha];
  if (!rec.quadrature || tol < rec.quadrature_tol) {
    rec.quadrature = e;
    rec.quadrature_tol = tol;
  }
  return *rec.quadrature;
}

std::optional<MomentEntry> MomentTable::find(const MultiIndex& alpha, MomentMethod method) const {
  std::lock_guard lock(mutex_);
  auto it = records_.find(alpha);
  if (it == records_.end()) return std::nullopt;
  return method == MomentMethod::ClosedForm ? it->second.closed : it->second.quadrature;
}

void MomentTable::insert(const MultiIndex& alpha, const MomentEntry& entry) {
  require_same_arity(alpha.size(), static_cast<std::size_t>(arity()), "MomentTable::insert");
  if (!std::isfinite(entry.log_value)) throw ArgumentError("MomentTable::insert: log_value must be finite");
  std::lock_guard lock(mutex_);
  auto& rec = records_[alpha];
  if (entry.method == MomentMethod::ClosedForm) {
    rec.closed = entry;
  } else {
    rec.quadrature = entry;
    rec.quadrature_tol = rel_tol_;
  }
}

std::size_t MomentTable::size() const {
  std::lock_guard lock(mutex_);
  return records_.size();
}

nlohmann::json MomentTable::to_json() const {
  nlohmann::json entries = nlohmann::json::array();
  std::lock_guard lock(mutex_);
  for (const auto& [alpha, rec] : records_) {
    for (const auto* e : {rec.closed ? &*rec.closed : nullptr, rec.quadrature ? &*rec.quadrature : nullptr}) {
      if (!e) continue;
      entries.push_back({{"alpha", alpha.entries()},
                         {"log_value", e->log_value},
                         {"method", to_string(e->method)},
                         {"abs_error_estimate", e->abs_error_estimate}});
    }
  }
  return {{"weight", weight_.descriptor()}, {"shadow", shadow_.descriptor()}, {"entries", entries}};
}

void MomentTable::load_entries(const nlohmann::json& j) {
  if (j.contains("weight") && j.at("weight") != weight_.descriptor()) {
    throw ArgumentError("MomentTable::load_entries: weight descriptor mismatch");
  }
  if (j.contains("shadow") && j.at("shadow") != shadow_.descriptor()) {
    throw ArgumentError("MomentTable::load_entries: shadow descriptor mismatch");
  }
  for (const auto& e : j.at("entries")) {
    insert(MultiIndex(e.at("alpha").get<std::vector<int>>()),
           MomentEntry{e.at("log_value").get<double>(), moment_method_from_string(e.at("method").get<std::string>()),
                       e.at("abs_error_estimate").get<double>()});
  }
}

}  // namespace bergkern
