#pragma once

#include <cstdint>
#include <random>
#include <variant>
#include <vector>

#include "bergkern/closed_kernels.hpp"
#include "bergkern/core_types.hpp"

namespace bergkern {

/// Private generator for check `stream` of a run seeded with `seed`. Streams
/// are decorrelated through SplitMix64, so check order does not matter.
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream);

/// Standard complex Gaussian vector direction scaled to a uniform point of the
/// complex ball of radius `radius` in C^k.
std::vector<complex> uniform_in_complex_ball(std::mt19937_64& rng, std::size_t k, double radius);

/// Uniform point of the unit sphere S^{k-1} in R^k.
std::vector<double> uniform_on_sphere(std::mt19937_64& rng, std::size_t k);

/// Importance sampler for \int h(z) phi(|z|) dV(z) over a Reinhardt domain.
///
/// Each draw carries a factor with E[factor * h(X)] = \int h phi dV, so the
/// sample mean of factor * h is an unbiased estimate of the weighted integral.
/// Known families are sampled exactly:
///  - ExpPower on C^n: ||z||^mu2 ~ Gamma(2n/mu2)/mu1, so the factor is the constant Z = I(0);
///  - Hartogs D_{n,m}, V_eta, balls and polydiscs: uniform in volume, factor = vol * phi;
///  - bounded custom shadows: uniform in the bounding polydisc with the indicator;
///  - anything else: standard Gaussian proposal on C^n.
class DomainSampler {
 public:
  struct Draw {
    ComplexPoint point;
    double factor;
  };

  DomainSampler(RadialWeight weight, ShadowRegion shadow);

  Draw sample(std::mt19937_64& rng) const;
  int arity() const noexcept { return weight_.arity(); }
  /// "exp_power", "hartogs_uniform", "veta_uniform", "ball_uniform",
  /// "polydisc_uniform", "box_rejection" or "gaussian".
  const char* proposal() const noexcept;

 private:
  enum class Mode { ExpPower, Hartogs, VEta, Ball, Polydisc, Box, Gaussian };

  RadialWeight weight_;
  ShadowRegion shadow_;
  Mode mode_ = Mode::Gaussian;
  double log_volume_ = 0.0;  // or log Z for ExpPower
  std::vector<double> box_;
};

/// Random interior points of a family domain whose defining-inequality slack
/// is at least min_slack; unbounded directions are confined to norm <= radius.
std::vector<ComplexPoint> sample_interior_points(const FamilyParams& p, std::size_t count, std::uint64_t seed,
                                                 double min_slack = 0.3, double radius = 1.0);

/// Same for a ball or polydisc shadow (radii shrunk by sqrt(1 - min_slack)).
std::vector<ComplexPoint> sample_interior_points(const ShadowRegion& shadow, std::size_t count, std::uint64_t seed,
                                                 double min_slack = 0.3);

}  // namespace bergkern
