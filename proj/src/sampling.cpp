#include "bergkern/sampling.hpp"

#include <cmath>
#include <numbers>

#include "bergkern/errors.hpp"
#include "bergkern/moments.hpp"

namespace bergkern {

namespace {

constexpr double kLogPi = 1.1447298858494002;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double normal(std::mt19937_64& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

double uniform01(std::mt19937_64& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

complex unit_phase(std::mt19937_64& rng) {
  const double t = 2.0 * std::numbers::pi * uniform01(rng);
  return {std::cos(t), std::sin(t)};
}

// Uniform direction in C^k with ||z||^mu2 ~ Gamma(2k/mu2) / c.
std::vector<complex> generalized_gaussian(std::mt19937_64& rng, std::size_t k, double c, double mu2) {
  const double g = std::gamma_distribution<double>(2.0 * static_cast<double>(k) / mu2, 1.0)(rng);
  const double rho = std::pow(g / c, 1.0 / mu2);
  const auto dir = uniform_on_sphere(rng, 2 * k);
  std::vector<complex> z(k);
  for (std::size_t j = 0; j < k; ++j) z[j] = rho * complex(dir[2 * j], dir[2 * j + 1]);
  return z;
}

double log_ball_volume(std::size_t k, double radius) {
  const double kd = static_cast<double>(k);
  return kd * kLogPi + 2.0 * kd * std::log(radius) - std::lgamma(kd + 1.0);
}

}  // namespace

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(~stream)));
}

std::vector<double> uniform_on_sphere(std::mt19937_64& rng, std::size_t k) {
  std::vector<double> x(k);
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (auto& v : x) {
      v = normal(rng);
      norm2 += v * v;
    }
  } while (norm2 == 0.0);
  const double inv = 1.0 / std::sqrt(norm2);
  for (auto& v : x) v *= inv;
  return x;
}

std::vector<complex> uniform_in_complex_ball(std::mt19937_64& rng, std::size_t k, double radius) {
  const auto dir = uniform_on_sphere(rng, 2 * k);
  const double rho = radius * std::pow(uniform01(rng), 1.0 / (2.0 * static_cast<double>(k)));
  std::vector<complex> z(k);
  for (std::size_t j = 0; j < k; ++j) z[j] = rho * complex(dir[2 * j], dir[2 * j + 1]);
  return z;
}

// ---------------------------------------------------------------------------
// DomainSampler

DomainSampler::DomainSampler(RadialWeight weight, ShadowRegion shadow)
    : weight_(std::move(weight)), shadow_(std::move(shadow)) {
  require_same_arity(weight_.arity(), shadow_.arity(), "DomainSampler");
  const auto& sk = shadow_.kind();
  if (std::holds_alternative<OrthantShadow>(sk)) {
    if (const auto* w = std::get_if<ExpPower>(&weight_.kind())) {
      mode_ = Mode::ExpPower;
      log_volume_ = log_moment_closed_cn(MultiIndex::zero(static_cast<std::size_t>(arity())), w->mu1, w->mu2) +
                    std::log(weight_.scale());
    } else {
      mode_ = Mode::Gaussian;
    }
  } else if (const auto* s = std::get_if<HartogsShadow>(&sk)) {
    mode_ = Mode::Hartogs;
    log_volume_ = s->m * kLogPi - std::lgamma(s->m + 1.0) +
                  log_moment_closed_cn(MultiIndex::zero(static_cast<std::size_t>(s->n)), s->mu1 * s->m, s->mu2);
  } else if (const auto* s = std::get_if<VEtaShadow>(&sk)) {
    mode_ = Mode::VEta;
    double total = 0.0;
    for (double e : s->eta) total += e;
    log_volume_ = (s->n + s->m + 1) * kLogPi - std::lgamma(s->n + s->m + 1.0) - std::log(total);
  } else if (const auto* s = std::get_if<BallShadow>(&sk)) {
    mode_ = Mode::Ball;
    log_volume_ = log_ball_volume(static_cast<std::size_t>(arity()), s->radius);
  } else if (const auto* s = std::get_if<PolydiscShadow>(&sk)) {
    mode_ = Mode::Polydisc;
    for (double r : s->radii) log_volume_ += kLogPi + 2.0 * std::log(r);
  } else {
    box_ = shadow_.bounding_box();
    mode_ = Mode::Box;
    for (double b : box_) {
      if (std::isinf(b)) {
        mode_ = Mode::Gaussian;
        break;
      }
      log_volume_ += kLogPi + 2.0 * std::log(b);
    }
  }
}

const char* DomainSampler::proposal() const noexcept {
  switch (mode_) {
    case Mode::ExpPower: return "exp_power";
    case Mode::Hartogs: return "hartogs_uniform";
    case Mode::VEta: return "veta_uniform";
    case Mode::Ball: return "ball_uniform";
    case Mode::Polydisc: return "polydisc_uniform";
    case Mode::Box: return "box_rejection";
    case Mode::Gaussian: return "gaussian";
  }
  return "gaussian";
}

DomainSampler::Draw DomainSampler::sample(std::mt19937_64& rng) const {
  const auto n = static_cast<std::size_t>(arity());
  std::vector<complex> z;
  switch (mode_) {
    case Mode::ExpPower: {
      const auto& w = std::get<ExpPower>(weight_.kind());
      return {ComplexPoint(generalized_gaussian(rng, n, w.mu1, w.mu2)), std::exp(log_volume_)};
    }
    case Mode::Hartogs: {
      const auto& s = std::get<HartogsShadow>(shadow_.kind());
      z = generalized_gaussian(rng, static_cast<std::size_t>(s.n), s.mu1 * s.m, s.mu2);
      double norm2 = 0.0;
      for (const auto& c : z) norm2 += std::norm(c);
      const double bound = std::exp(-s.mu1 * std::pow(std::sqrt(norm2), s.mu2));
      const auto w = uniform_in_complex_ball(rng, static_cast<std::size_t>(s.m), std::sqrt(bound));
      z.insert(z.end(), w.begin(), w.end());
      break;
    }
    case Mode::VEta: {
      const auto& s = std::get<VEtaShadow>(shadow_.kind());
      double total = 0.0;
      for (double e : s.eta) total += e;
      const double w2 = std::exponential_distribution<double>(total)(rng);
      const complex w = std::sqrt(w2) * unit_phase(rng);
      z = uniform_in_complex_ball(rng, static_cast<std::size_t>(s.n + s.m), 1.0);
      for (int j = 0; j < s.n; ++j) z[static_cast<std::size_t>(j)] *= std::exp(-0.5 * s.eta[static_cast<std::size_t>(j)] * w2);
      z.push_back(w);
      break;
    }
    case Mode::Ball:
      z = uniform_in_complex_ball(rng, n, std::get<BallShadow>(shadow_.kind()).radius);
      break;
    case Mode::Polydisc:
    case Mode::Box: {
      const auto& radii = mode_ == Mode::Box ? box_ : std::get<PolydiscShadow>(shadow_.kind()).radii;
      z.resize(n);
      for (std::size_t j = 0; j < n; ++j) z[j] = uniform_in_complex_ball(rng, 1, radii[j])[0];
      break;
    }
    case Mode::Gaussian: {
      z.resize(n);
      double norm2 = 0.0;
      for (auto& c : z) {
        c = complex(normal(rng), normal(rng)) * std::numbers::sqrt2 * 0.5;
        norm2 += std::norm(c);
      }
      ComplexPoint p(std::move(z));
      const bool inside = shadow_.contains(p);
      const double factor = inside ? weight_.value(p) * std::exp(static_cast<double>(n) * kLogPi + norm2) : 0.0;
      return {std::move(p), factor};
    }
  }
  ComplexPoint p(std::move(z));
  const bool inside = mode_ != Mode::Box || shadow_.contains(p);
  const double factor = inside ? std::exp(log_volume_) * weight_.value(p) : 0.0;
  return {std::move(p), factor};
}

// ---------------------------------------------------------------------------
// Interior points

std::vector<ComplexPoint> sample_interior_points(const FamilyParams& p, std::size_t count, std::uint64_t seed,
                                                 double min_slack, double radius) {
  validate(p);
  if (!(min_slack >= 0.0 && min_slack < 1.0)) throw ArgumentError("sample_interior_points: min_slack must lie in [0, 1)");
  if (!(radius > 0.0)) throw ArgumentError("sample_interior_points: radius must be positive");
  auto rng = make_stream(seed, 0);
  const double shrink = std::sqrt(1.0 - min_slack);
  std::vector<ComplexPoint> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<complex> z;
    if (const auto* c = std::get_if<CnParams>(&p)) {
      z = uniform_in_complex_ball(rng, static_cast<std::size_t>(c->n), radius);
    } else if (const auto* d = std::get_if<DnmParams>(&p)) {
      z = uniform_in_complex_ball(rng, static_cast<std::size_t>(d->n), radius);
      double norm2 = 0.0;
      for (const auto& v : z) norm2 += std::norm(v);
      const double bound = std::exp(-d->mu1 * std::pow(std::sqrt(norm2), d->mu2));
      const auto w = uniform_in_complex_ball(rng, static_cast<std::size_t>(d->m), shrink * std::sqrt(bound));
      z.insert(z.end(), w.begin(), w.end());
    } else {
      const auto& v = std::get<VEtaParams>(p);
      const complex w = uniform_in_complex_ball(rng, 1, radius)[0];
      z = uniform_in_complex_ball(rng, static_cast<std::size_t>(v.n + v.m), shrink);
      for (int j = 0; j < v.n; ++j) z[static_cast<std::size_t>(j)] *= std::exp(-0.5 * v.eta[static_cast<std::size_t>(j)] * std::norm(w));
      z.push_back(w);
    }
    out.emplace_back(std::move(z));
  }
  return out;
}

std::vector<ComplexPoint> sample_interior_points(const ShadowRegion& shadow, std::size_t count, std::uint64_t seed,
                                                 double min_slack) {
  if (!(min_slack >= 0.0 && min_slack < 1.0)) throw ArgumentError("sample_interior_points: min_slack must lie in [0, 1)");
  auto rng = make_stream(seed, 0);
  const double shrink = std::sqrt(1.0 - min_slack);
  const auto n = static_cast<std::size_t>(shadow.arity());
  std::vector<ComplexPoint> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (const auto* b = std::get_if<BallShadow>(&shadow.kind())) {
      out.emplace_back(uniform_in_complex_ball(rng, n, shrink * b->radius));
    } else if (const auto* pd = std::get_if<PolydiscShadow>(&shadow.kind())) {
      std::vector<complex> z(n);
      for (std::size_t j = 0; j < n; ++j) z[j] = uniform_in_complex_ball(rng, 1, shrink * pd->radii[j])[0];
      out.emplace_back(std::move(z));
    } else {
      throw ArgumentError("sample_interior_points: only ball and polydisc shadows are supported here");
    }
  }
  return out;
}

}  // namespace bergkern
