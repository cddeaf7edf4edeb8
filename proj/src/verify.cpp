#include "bergkern/verify.hpp"

#include <Eigen/Eigenvalues>

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>
#include <sstream>

#include "bergkern/errors.hpp"
#include "bergkern/moments.hpp"
#include "bergkern/sampling.hpp"

namespace bergkern {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

nlohmann::json complex_to_json(complex c) { return {c.real(), c.imag()}; }

// Running mean and variance (Welford); complex samples use E|g - mean|^2.
template <class V>
struct RunningStats {
  std::size_t count = 0;
  V mean{};
  double m2 = 0.0;

  void add(V x) {
    ++count;
    const V delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += std::real(std::conj(delta) * (x - mean));
  }
  double standard_error() const {
    if (count < 2) return 0.0;
    return std::sqrt(m2 / static_cast<double>(count - 1) / static_cast<double>(count));
  }
};

double log_moment(const RadialWeight& weight, const ShadowRegion& shadow, const MultiIndex& alpha, double rel_tol) {
  if (auto c = closed_form_log_moment(weight, shadow, alpha)) return *c;
  return moment_quadrature(shadow, weight, alpha, rel_tol).log_value;
}

int default_angular_points(int arity, int degree) {
  const int base = arity == 1 ? 64 : arity == 2 ? 24 : 12;
  return std::max(base, 2 * degree + 8);
}

// (2 pi)^n times the mean of g over an M^n grid of angles at moduli r.
template <class G>
complex angular_average(std::span<const double> r, int points, G&& g) {
  const std::size_t n = r.size();
  std::vector<complex> phases(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) {
    const double t = kTwoPi * k / points;
    phases[static_cast<std::size_t>(k)] = {std::cos(t), std::sin(t)};
  }
  std::vector<int> idx(n, 0);
  std::vector<complex> w(n);
  complex acc = 0.0;
  std::size_t total = 0;
  while (true) {
    for (std::size_t j = 0; j < n; ++j) w[j] = r[j] * phases[static_cast<std::size_t>(idx[j])];
    acc += g(ComplexPoint(w));
    ++total;
    std::size_t j = 0;
    while (j < n && ++idx[j] == points) idx[j++] = 0;
    if (j == n) break;
  }
  return acc * (std::pow(kTwoPi, static_cast<double>(n)) / static_cast<double>(total));
}

// Integrand factor phi(r) * prod r_j, or 0 where phi vanishes.
double radial_measure(const RadialWeight& weight, std::span<const double> r) {
  double log_term = weight.log_value(r);
  if (std::isinf(log_term)) return 0.0;
  for (double x : r) log_term += std::log(x);
  return std::exp(log_term);
}

nlohmann::json scheme_json(const Scheme& scheme) {
  if (const auto* q = std::get_if<QuadratureScheme>(&scheme)) {
    return {{"kind", "quadrature"}, {"rel_tol", q->rel_tol}, {"tol", q->tol}, {"angular_points", q->angular_points}};
  }
  const auto& m = std::get<MonteCarloScheme>(scheme);
  return {{"kind", "monte_carlo"}, {"samples", m.samples}, {"seed", m.seed}, {"stream", m.stream}, {"tol", m.tol}};
}

void check_scheme(const Scheme& scheme) {
  if (const auto* q = std::get_if<QuadratureScheme>(&scheme)) {
    if (!(q->tol > 0.0)) throw ArgumentError("quadrature scheme tolerance must be positive");
    if (q->angular_points < 0) throw ArgumentError("angular_points must be nonnegative");
  } else {
    const auto& m = std::get<MonteCarloScheme>(scheme);
    if (m.samples < 2) throw ArgumentError("Monte Carlo scheme needs at least two samples");
    if (!(m.tol >= 0.0)) throw ArgumentError("Monte Carlo tolerance must be nonnegative");
  }
}

// Fills tolerance fields for a Monte Carlo report.
void apply_mc_tolerance(VerificationReport& r, const MonteCarloScheme& m, double sigma) {
  r.standard_error = sigma;
  r.rng_seed = m.seed;
  r.samples_or_nodes = static_cast<std::int64_t>(m.samples);
  if (m.tol >= 4.0 * sigma && m.tol > 0.0) {
    r.tolerance = m.tol;
    r.tolerance_origin = "user";
  } else {
    r.tolerance = 4.0 * sigma;
    r.tolerance_origin = "4_sigma";
  }
}

void apply_quadrature_tolerance(VerificationReport& r, const QuadratureScheme& q) {
  r.tolerance = q.tol;
  r.tolerance_origin = q.tol == kDeterministicTol ? "deterministic_default" : "user";
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

// ---------------------------------------------------------------------------
// Polynomials

complex evaluate(const Polynomial& f, const ComplexPoint& z) {
  complex s = 0.0;
  for (const auto& [alpha, c] : f) s += c * monomial_eval(z, alpha);
  return s;
}

int polynomial_degree(const Polynomial& f) {
  int d = 0;
  for (const auto& [alpha, c] : f) d = std::max(d, alpha.degree());
  return d;
}

nlohmann::json polynomial_to_json(const Polynomial& f) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& [alpha, c] : f) j.push_back({{"alpha", alpha.entries()}, {"re", c.real()}, {"im", c.imag()}});
  return j;
}

Polynomial random_sparse_polynomial(int arity, int max_degree, int terms, std::mt19937_64& rng) {
  if (arity < 1 || max_degree < 0 || terms < 1) throw ArgumentError("random_sparse_polynomial: invalid sizes");
  std::vector<MultiIndex> pool;
  for (int d = 0; d <= max_degree; ++d) {
    for (auto& a : enumerate_degree_shell(arity, d)) pool.push_back(std::move(a));
  }
  terms = std::min<int>(terms, static_cast<int>(pool.size()));
  std::normal_distribution<double> normal(0.0, 1.0);
  Polynomial f;
  while (static_cast<int>(f.size()) < terms) {
    const auto k = std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng);
    if (f.count(pool[k])) continue;
    const double re = normal(rng);
    const double im = normal(rng);
    f.emplace(pool[k], complex(re, im));
  }
  return f;
}

// ---------------------------------------------------------------------------
// Reports

std::string to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::Inconclusive: return "inconclusive";
  }
  return "fail";
}

void VerificationReport::finalize() {
  passed = std::abs(measured - expected) <= tolerance;
  if (status != CheckStatus::Inconclusive) status = passed ? CheckStatus::Pass : CheckStatus::Fail;
}

nlohmann::json VerificationReport::to_json() const {
  nlohmann::json j{{"check_name", check_name},
                   {"target", target},
                   {"measured", measured},
                   {"expected", expected},
                   {"tolerance", tolerance},
                   {"tolerance_origin", tolerance_origin},
                   {"passed", passed},
                   {"status", to_string(status)},
                   {"samples_or_nodes", samples_or_nodes}};
  j["rng_seed"] = rng_seed ? nlohmann::json(*rng_seed) : nlohmann::json(nullptr);
  j["standard_error"] = standard_error ? nlohmann::json(*standard_error) : nlohmann::json(nullptr);
  j["details"] = details;
  return j;
}

std::string to_json_lines(const std::vector<VerificationReport>& reports) {
  std::string out;
  for (const auto& r : reports) {
    out += r.to_json().dump();
    out += '\n';
  }
  return out;
}

std::string to_csv(const std::vector<VerificationReport>& reports) {
  std::ostringstream os;
  os << "#schema=" << kReportCsvSchema << '\n';
  os << "check_name,status,passed,measured,expected,tolerance,tolerance_origin,samples_or_nodes,rng_seed,"
        "standard_error,target\n";
  for (const auto& r : reports) {
    os << r.check_name << ',' << to_string(r.status) << ',' << (r.passed ? "true" : "false") << ','
       << format_double(r.measured) << ',' << format_double(r.expected) << ',' << format_double(r.tolerance) << ','
       << r.tolerance_origin << ',' << r.samples_or_nodes << ',' << (r.rng_seed ? std::to_string(*r.rng_seed) : "")
       << ',' << (r.standard_error ? format_double(*r.standard_error) : "") << ',' << csv_quote(r.target.dump())
       << '\n';
  }
  return os.str();
}

int exit_code(const std::vector<VerificationReport>& reports) {
  bool inconclusive = false;
  for (const auto& r : reports) {
    if (r.status == CheckStatus::Fail) return 1;
    if (r.status == CheckStatus::Inconclusive) inconclusive = true;
  }
  return inconclusive ? 3 : 0;
}

// ---------------------------------------------------------------------------
// Checks

VerificationReport check_reproducing(const KernelEvaluator& kernel, const RadialWeight& weight,
                                     const ShadowRegion& shadow, const Polynomial& f, const ComplexPoint& z0,
                                     const Scheme& scheme) {
  check_scheme(scheme);
  require_same_arity(weight.arity(), shadow.arity(), "check_reproducing");
  require_same_arity(z0.size(), static_cast<std::size_t>(weight.arity()), "check_reproducing");
  if (polynomial_degree(f) > 10) throw ArgumentError("check_reproducing: polynomial degree must be <= 10");
  if (!shadow.contains(z0)) throw DomainError("check_reproducing: z0 must be an interior point");

  const complex target_value = evaluate(f, z0);
  VerificationReport r;
  r.check_name = "reproducing";
  r.target = {{"weight", weight.descriptor()},
              {"shadow", shadow.descriptor()},
              {"polynomial", polynomial_to_json(f)},
              {"z0", point_to_json(z0)},
              {"scheme", scheme_json(scheme)}};
  complex estimate = 0.0;

  if (const auto* q = std::get_if<QuadratureScheme>(&scheme)) {
    const int points = q->angular_points > 0 ? q->angular_points
                                             : default_angular_points(weight.arity(), polynomial_degree(f));
    auto integrand = [&](std::span<const double> rr) -> complex {
      const double measure = radial_measure(weight, rr);
      if (measure == 0.0) return 0.0;
      return measure * angular_average(rr, points, [&](const ComplexPoint& w) { return kernel(z0, w) * evaluate(f, w); });
    };
    const auto s = integrate_over_shadow(shadow, std::function<complex(std::span<const double>)>(integrand),
                                         q->rel_tol, 0.01 * q->tol);
    estimate = s.value;
    apply_quadrature_tolerance(r, *q);
    r.samples_or_nodes = static_cast<std::int64_t>(s.evaluations) *
                         static_cast<std::int64_t>(std::pow(points, weight.arity()));
    r.details["quadrature_error_estimate"] = s.abs_error;
    r.details["angular_points"] = points;
    if (!s.converged) r.status = CheckStatus::Inconclusive;
  } else {
    const auto& m = std::get<MonteCarloScheme>(scheme);
    const DomainSampler sampler(weight, shadow);
    auto rng = make_stream(m.seed, m.stream);
    RunningStats<complex> stats;
    for (std::size_t i = 0; i < m.samples; ++i) {
      const auto d = sampler.sample(rng);
      stats.add(d.factor == 0.0 ? complex(0.0) : d.factor * kernel(z0, d.point) * evaluate(f, d.point));
    }
    estimate = stats.mean;
    const double sigma = stats.standard_error();
    apply_mc_tolerance(r, m, sigma);
    r.details["proposal"] = sampler.proposal();
    if (std::abs(target_value) > 0.0 && sigma > 0.1 * std::abs(target_value)) r.status = CheckStatus::Inconclusive;
  }
  r.measured = std::abs(estimate - target_value);
  r.expected = 0.0;
  r.details["estimate"] = complex_to_json(estimate);
  r.details["expected_value"] = complex_to_json(target_value);
  r.finalize();
  return r;
}

VerificationReport check_orthogonality(const RadialWeight& weight, const ShadowRegion& shadow, const MultiIndex& alpha,
                                       const MultiIndex& beta, const Scheme& scheme) {
  check_scheme(scheme);
  require_same_arity(weight.arity(), shadow.arity(), "check_orthogonality");
  require_same_arity(alpha.size(), static_cast<std::size_t>(weight.arity()), "check_orthogonality");
  require_same_arity(beta.size(), alpha.size(), "check_orthogonality");

  VerificationReport r;
  r.check_name = "orthogonality";
  r.target = {{"weight", weight.descriptor()},
              {"shadow", shadow.descriptor()},
              {"alpha", alpha.entries()},
              {"beta", beta.entries()},
              {"scheme", scheme_json(scheme)}};

  if (alpha != beta) {
    // prod_j \int_0^{2pi} e^{i (alpha_j - beta_j) theta} dtheta, which vanishes
    // as soon as one exponent differs; the radial factor is never needed.
    double angular = 1.0;
    for (std::size_t j = 0; j < alpha.size(); ++j) angular *= alpha[j] == beta[j] ? kTwoPi : 0.0;
    r.measured = std::abs(angular);
    r.expected = 0.0;
    r.tolerance = 1e-13;
    r.tolerance_origin = "angular_closed_form";
    r.samples_or_nodes = 0;
    if (const auto* m = std::get_if<MonteCarloScheme>(&scheme)) r.rng_seed = m->seed;
    r.finalize();
    return r;
  }

  if (const auto* q = std::get_if<QuadratureScheme>(&scheme)) {
    const auto closed = closed_form_log_moment(weight, shadow, alpha);
    try {
      const auto quad = moment_quadrature(shadow, weight, alpha, q->rel_tol);
      r.measured = std::exp(quad.log_value);
      r.samples_or_nodes = static_cast<std::int64_t>(quad.evaluations);
      r.details["quadrature_error_estimate"] = quad.abs_error_estimate;
      if (closed) {
        r.expected = std::exp(*closed);
        r.details["expected_source"] = "closed_form";
      } else {
        const double tight = std::max(1e-2 * q->rel_tol, 2e-12);
        r.expected = std::exp(moment_quadrature(shadow, weight, alpha, tight).log_value);
        r.details["expected_source"] = "quadrature_tight";
      }
    } catch (const ConvergenceError& e) {
      r.measured = e.partial_value();
      r.expected = closed ? std::exp(*closed) : 0.0;
      r.status = CheckStatus::Inconclusive;
      r.details["error"] = e.what();
    }
    apply_quadrature_tolerance(r, *q);
  } else {
    const auto& m = std::get<MonteCarloScheme>(scheme);
    const DomainSampler sampler(weight, shadow);
    auto rng = make_stream(m.seed, m.stream);
    RunningStats<double> stats;
    for (std::size_t i = 0; i < m.samples; ++i) {
      const auto d = sampler.sample(rng);
      stats.add(d.factor == 0.0 ? 0.0 : d.factor * std::norm(monomial_eval(d.point, alpha)));
    }
    r.measured = stats.mean;
    r.expected = std::exp(log_moment(weight, shadow, alpha, 1e-11));
    const double sigma = stats.standard_error();
    apply_mc_tolerance(r, m, sigma);
    r.details["proposal"] = sampler.proposal();
    if (sigma > 0.1 * r.expected) r.status = CheckStatus::Inconclusive;
  }
  r.finalize();
  return r;
}

VerificationReport check_parseval(const Polynomial& f, const RadialWeight& weight, const ShadowRegion& shadow,
                                  const Scheme& scheme) {
  check_scheme(scheme);
  require_same_arity(weight.arity(), shadow.arity(), "check_parseval");
  if (polynomial_degree(f) > 10) throw ArgumentError("check_parseval: polynomial degree must be <= 10");
  for (const auto& [alpha, c] : f) require_same_arity(alpha.size(), static_cast<std::size_t>(weight.arity()), "check_parseval");

  VerificationReport r;
  r.check_name = "parseval";
  r.target = {{"weight", weight.descriptor()},
              {"shadow", shadow.descriptor()},
              {"polynomial", polynomial_to_json(f)},
              {"scheme", scheme_json(scheme)}};

  double rhs = 0.0;
  for (const auto& [alpha, c] : f) rhs += std::norm(c) * std::exp(log_moment(weight, shadow, alpha, 1e-11));
  r.expected = rhs;

  if (const auto* q = std::get_if<QuadratureScheme>(&scheme)) {
    // |f|^2 has angular frequencies below deg + 1, so deg + 1 points are exact.
    const int points = q->angular_points > 0 ? q->angular_points : polynomial_degree(f) + 1;
    auto integrand = [&](std::span<const double> rr) -> double {
      const double measure = radial_measure(weight, rr);
      if (measure == 0.0) return 0.0;
      return measure * angular_average(rr, points, [&](const ComplexPoint& w) { return complex(std::norm(evaluate(f, w))); }).real();
    };
    const auto s = integrate_over_shadow(shadow, std::function<double(std::span<const double>)>(integrand), q->rel_tol,
                                         0.01 * q->tol);
    r.measured = s.value;
    apply_quadrature_tolerance(r, *q);
    r.samples_or_nodes = static_cast<std::int64_t>(s.evaluations) *
                         static_cast<std::int64_t>(std::pow(points, weight.arity()));
    r.details["quadrature_error_estimate"] = s.abs_error;
    r.details["angular_points"] = points;
    if (!s.converged) r.status = CheckStatus::Inconclusive;
  } else {
    const auto& m = std::get<MonteCarloScheme>(scheme);
    const DomainSampler sampler(weight, shadow);
    auto rng = make_stream(m.seed, m.stream);
    RunningStats<double> stats;
    for (std::size_t i = 0; i < m.samples; ++i) {
      const auto d = sampler.sample(rng);
      stats.add(d.factor == 0.0 ? 0.0 : d.factor * std::norm(evaluate(f, d.point)));
    }
    r.measured = stats.mean;
    const double sigma = stats.standard_error();
    apply_mc_tolerance(r, m, sigma);
    r.details["proposal"] = sampler.proposal();
    if (sigma > 0.1 * rhs) r.status = CheckStatus::Inconclusive;
  }
  r.finalize();
  return r;
}

std::vector<VerificationReport> cross_validate_family(const FamilyParams& p, int num_points, std::uint64_t seed,
                                                      double rel_tol, int max_degree) {
  validate(p);
  if (num_points < 1) throw ArgumentError("cross_validate_family: num_points must be positive");
  if (!(rel_tol > 0.0)) throw ArgumentError("cross_validate_family: rel_tol must be positive");
  if (family_arity(p) > 4) throw ArgumentError("cross_validate_family: arity must be at most 4");

  const FamilyKernel closed(p);
  auto table = std::make_shared<MomentTable>(family_weight(p), family_shadow(p));
  const KernelSeries series(table, max_degree);
  const auto points = sample_interior_points(p, 2 * static_cast<std::size_t>(num_points), seed);
  // the series only has to be resolved well below the tolerance it is judged at
  const double series_tol = std::max(kDefaultSeriesTol, 1e-2 * rel_tol);

  std::vector<VerificationReport> out;
  for (int i = 0; i < num_points; ++i) {
    const auto& x = points[2 * static_cast<std::size_t>(i)];
    const auto& y = points[2 * static_cast<std::size_t>(i) + 1];
    const KernelValue kc = closed(x, y);
    const KernelValue ks = kernel_series_eval(series, x, y, series_tol);
    VerificationReport r;
    r.check_name = "cross_validate";
    r.target = {{"family", family_descriptor(p)}, {"x", point_to_json(x)}, {"y", point_to_json(y)}, {"index", i}};
    r.measured = std::abs(kc.value - ks.value) / std::abs(kc.value);
    r.expected = 0.0;
    r.tolerance = rel_tol;
    r.tolerance_origin = "user";
    r.samples_or_nodes = ks.degree_used;
    r.rng_seed = seed;
    r.details = {{"closed", complex_to_json(kc.value)},
                 {"series", complex_to_json(ks.value)},
                 {"series_degree_used", ks.degree_used},
                 {"series_truncation_estimate", ks.truncation_estimate},
                 {"series_rel_tol", series_tol}};
    if (!kc.converged || !ks.converged) r.status = CheckStatus::Inconclusive;
    r.finalize();
    out.push_back(std::move(r));
  }
  return out;
}

VerificationReport check_hermitian(const KernelEvaluator& kernel, const std::vector<ComplexPoint>& points, double tol) {
  if (points.empty()) throw ArgumentError("check_hermitian: no points");
  double worst = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i; j < points.size(); ++j) {
      const complex a = kernel(points[i], points[j]);
      const complex b = kernel(points[j], points[i]);
      worst = std::max(worst, std::abs(a - std::conj(b)));
      scale = std::max({scale, std::abs(a), std::abs(b)});
    }
  }
  VerificationReport r;
  r.check_name = "hermitian";
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : points) pts.push_back(point_to_json(p));
  r.target = {{"points", pts}};
  r.measured = scale > 0.0 ? worst / scale : worst;
  r.tolerance = tol;
  r.tolerance_origin = "relative_symmetry";
  r.samples_or_nodes = static_cast<std::int64_t>(points.size());
  r.finalize();
  return r;
}

VerificationReport check_gram_psd(const KernelEvaluator& kernel, const std::vector<ComplexPoint>& points, double tol) {
  if (points.empty()) throw ArgumentError("check_gram_psd: no points");
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXcd gram(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      gram(i, j) = kernel(points[static_cast<std::size_t>(i)], points[static_cast<std::size_t>(j)]);
    }
  }
  // the eigensolver reads one triangle; symmetrize so both contribute
  const Eigen::MatrixXcd herm = 0.5 * (gram + gram.adjoint());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(herm, Eigen::EigenvaluesOnly);
  const auto& ev = solver.eigenvalues();
  const double lo = ev.minCoeff();
  const double hi = ev.maxCoeff();

  VerificationReport r;
  r.check_name = "gram_psd";
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : points) pts.push_back(point_to_json(p));
  r.target = {{"points", pts}};
  r.measured = hi > 0.0 ? std::max(0.0, -lo / hi) : (lo < 0.0 ? 1.0 : 0.0);
  r.tolerance = tol;
  r.tolerance_origin = "relative_eigenvalue";
  r.samples_or_nodes = static_cast<std::int64_t>(points.size());
  r.details = {{"lambda_min", lo}, {"lambda_max", hi}};
  r.finalize();
  return r;
}

VerificationReport check_sphere_integral(const MultiIndex& alpha, std::size_t samples, std::uint64_t seed,
                                         std::uint64_t stream) {
  if (alpha.size() < 1) throw ArgumentError("check_sphere_integral: empty multi-index");
  if (samples < 2) throw ArgumentError("check_sphere_integral: need at least two samples");
  const auto n = alpha.size();
  const double nd = static_cast<double>(n);
  const double area = 2.0 * std::pow(std::numbers::pi, 0.5 * nd) / std::tgamma(0.5 * nd);
  auto rng = make_stream(seed, stream);
  RunningStats<double> stats;
  for (std::size_t i = 0; i < samples; ++i) {
    const auto x = uniform_on_sphere(rng, n);
    double log_term = 0.0;
    for (std::size_t j = 0; j < n; ++j) log_term += (2.0 * alpha[j] + 1.0) * std::log(std::abs(x[j]));
    stats.add(area * std::exp(log_term));
  }
  VerificationReport r;
  r.check_name = "sphere_integral";
  r.target = {{"alpha", alpha.entries()}, {"samples", samples}, {"stream", stream}};
  r.measured = stats.mean;
  r.expected = std::exp(log_sphere_monomial_integral(alpha));
  r.standard_error = stats.standard_error();
  r.tolerance = 4.0 * *r.standard_error;
  r.tolerance_origin = "4_sigma";
  r.rng_seed = seed;
  r.samples_or_nodes = static_cast<std::int64_t>(samples);
  r.finalize();
  return r;
}

}  // namespace bergkern
