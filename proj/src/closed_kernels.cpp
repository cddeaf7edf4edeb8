#include "bergkern/closed_kernels.hpp"

#include <cmath>
#include <numbers>
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

const double kLogPi = std::log(std::numbers::pi);

void require_interior(const FamilyParams& p, const ComplexPoint& x, const char* who) {
  if (!(interior_slack(p, x) > 0.0)) {
    std::ostringstream os;
    os << who << ": point lies outside the " << family_name(p) << " domain";
    throw DomainError(os.str());
  }
}

}  // namespace

void validate(const FamilyParams& p) { (void)family_weight(p); }

int family_arity(const FamilyParams& p) {
  return std::visit(overloaded{
                        [](const CnParams& c) { return c.n; },
                        [](const DnmParams& d) { return d.n + d.m; },
                        [](const VEtaParams& v) { return v.n + v.m + 1; },
                    },
                    p);
}

std::string family_name(const FamilyParams& p) {
  return std::visit(overloaded{
                        [](const CnParams&) { return std::string("cn"); },
                        [](const DnmParams&) { return std::string("dnm"); },
                        [](const VEtaParams&) { return std::string("veta"); },
                    },
                    p);
}

nlohmann::json family_descriptor(const FamilyParams& p) {
  return std::visit(
      overloaded{
          [](const CnParams& c) { return nlohmann::json{{"family", "cn"}, {"n", c.n}, {"mu1", c.mu1}, {"mu2", c.mu2}}; },
          [](const DnmParams& d) {
            return nlohmann::json{{"family", "dnm"}, {"n", d.n},     {"m", d.m},
                                  {"mu1", d.mu1},    {"mu2", d.mu2}, {"eta", d.eta}};
          },
          [](const VEtaParams& v) {
            return nlohmann::json{{"family", "veta"}, {"n", v.n}, {"m", v.m}, {"eta", v.eta}, {"a", v.a}};
          },
      },
      p);
}

RadialWeight family_weight(const FamilyParams& p) {
  return std::visit(overloaded{
                        [](const CnParams& c) { return RadialWeight::exp_power(c.n, c.mu1, c.mu2); },
                        [](const DnmParams& d) { return RadialWeight::hartogs_power(d.n, d.m, d.mu1, d.mu2, d.eta); },
                        [](const VEtaParams& v) { return RadialWeight::veta_power(v.n, v.m, v.eta, v.a); },
                    },
                    p);
}

ShadowRegion family_shadow(const FamilyParams& p) {
  return std::visit(overloaded{
                        [](const CnParams& c) { return ShadowRegion::orthant(c.n); },
                        [](const DnmParams& d) { return ShadowRegion::hartogs(d.n, d.m, d.mu1, d.mu2); },
                        [](const VEtaParams& v) { return ShadowRegion::veta(v.n, v.m, v.eta); },
                    },
                    p);
}

double interior_slack(const FamilyParams& p, const ComplexPoint& x) {
  require_same_arity(x.size(), static_cast<std::size_t>(family_arity(p)), "interior_slack");
  const auto r = x.moduli();
  return family_shadow(p).slack(r);
}

// ---------------------------------------------------------------------------
// C^n

CnKernel::CnKernel(CnParams p, int max_terms) : p_(p) {
  validate(p_);
  if (max_terms < 4) throw ArgumentError("CnKernel: max_terms too small");
  const double n = p_.n;
  log_coeff_.resize(static_cast<std::size_t>(max_terms));
  for (int k = 0; k < max_terms; ++k) {
    const double e = (2.0 * k + 2.0 * n) / p_.mu2;
    log_coeff_[static_cast<std::size_t>(k)] = e * std::log(p_.mu1) + std::log(p_.mu2) + std::lgamma(k + n) -
                                              std::log(2.0) - n * kLogPi - std::lgamma(k + 1.0) - std::lgamma(e);
  }
}

double CnKernel::log_coefficient(int k) const { return log_coeff_.at(static_cast<std::size_t>(k)); }

KernelValue CnKernel::operator()(const ComplexPoint& z, const ComplexPoint& w, double rel_tol) const {
  require_same_arity(z.size(), static_cast<std::size_t>(p_.n), "kernel_cn");
  require_same_arity(w.size(), static_cast<std::size_t>(p_.n), "kernel_cn");
  const complex x = hermitian_product(z, w);
  KernelValue out;
  if (p_.mu2 == 2.0) {
    out.value = std::pow(p_.mu1 / std::numbers::pi, p_.n) * std::exp(p_.mu1 * x);
    return out;
  }
  const double mag = std::abs(x);
  if (mag == 0.0) {
    out.value = std::exp(log_coeff_[0]);
    return out;
  }
  const double log_mag = std::log(mag);
  const complex unit = x / mag;
  complex sum(0.0, 0.0);
  complex phase(1.0, 0.0);
  int small_run = 0;
  for (std::size_t k = 0; k < log_coeff_.size(); ++k) {
    const double term_mag = std::exp(log_coeff_[k] + static_cast<double>(k) * log_mag);
    sum += term_mag * phase;
    out.truncation_estimate = term_mag;
    if (term_mag < rel_tol * std::abs(sum)) {
      if (++small_run == 3) {
        out.value = sum;
        return out;
      }
    } else {
      small_run = 0;
      out.degree_used = static_cast<int>(k);
    }
    phase *= unit;
  }
  out.value = sum;
  out.converged = false;
  return out;
}

// ---------------------------------------------------------------------------
// D_{n,m}

DnmKernel::DnmKernel(DnmParams p, int max_terms) : p_(p) {
  validate(p_);
  if (max_terms < 4) throw ArgumentError("DnmKernel: max_terms too small");
  const double n = p_.n;
  const double m = p_.m;
  log_const_ = std::log(p_.mu2) - std::log(2.0) - (n + m) * kLogPi - std::lgamma(p_.eta + 1.0);
  const auto count = static_cast<std::size_t>(max_terms);
  inner_log_.resize(count + 1);
  for (std::size_t k = 0; k <= count; ++k) {
    const double k1 = static_cast<double>(k);
    inner_log_[k] = std::lgamma(k1 + n) - std::lgamma(k1 + 1.0) - std::lgamma((2.0 * k1 + 2.0 * n) / p_.mu2);
  }
  inner_ratio_.resize(count);
  for (std::size_t k = 0; k < count; ++k) inner_ratio_[k] = std::exp(inner_log_[k + 1] - inner_log_[k]);
  outer_log_.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double k2 = static_cast<double>(k);
    outer_log_[k] = std::lgamma(k2 + m + p_.eta + 1.0) - std::lgamma(k2 + 1.0);
  }
}

KernelValue DnmKernel::operator()(const ComplexPoint& x, const ComplexPoint& y, double rel_tol) const {
  const FamilyParams fp = p_;
  require_same_arity(x.size(), static_cast<std::size_t>(p_.n + p_.m), "kernel_dnm");
  require_same_arity(y.size(), static_cast<std::size_t>(p_.n + p_.m), "kernel_dnm");
  require_interior(fp, x, "kernel_dnm");
  require_interior(fp, y, "kernel_dnm");

  const auto n = static_cast<std::size_t>(p_.n);
  const auto m = static_cast<std::size_t>(p_.m);
  const complex base = hermitian_product(x.slice(0, n), y.slice(0, n));   // <z, s>
  const complex fiber = hermitian_product(x.slice(n, m), y.slice(n, m));  // <w, t>
  const double fiber_mag = std::abs(fiber);
  const double log_fiber = std::log(fiber_mag);
  const complex fiber_unit = fiber_mag > 0.0 ? fiber / fiber_mag : complex(1.0, 0.0);

  KernelValue out;
  complex total(0.0, 0.0);
  complex fiber_phase(1.0, 0.0);
  int small_run = 0;
  for (std::size_t k2 = 0; k2 < outer_log_.size(); ++k2) {
    if (k2 > 0 && fiber_mag == 0.0) {
      // every later block carries <w,t>^k2 = 0
      out.value = total;
      return out;
    }
    const double c = p_.mu1 * (static_cast<double>(k2) + p_.m + p_.eta);
    const double log_c = std::log(c);
    const double step = std::exp(2.0 * log_c / p_.mu2);  // c^{2/mu2}
    const double log_prefix = log_const_ + outer_log_[k2] + (k2 ? static_cast<double>(k2) * log_fiber : 0.0);
    complex term = std::exp(log_prefix + inner_log_[0] + (2.0 * p_.n / p_.mu2) * log_c) * fiber_phase;
    complex block = term;
    int inner_small = 0;
    bool inner_done = base == complex(0.0, 0.0);
    for (std::size_t k1 = 0; !inner_done && k1 + 1 < inner_log_.size(); ++k1) {
      term *= inner_ratio_[k1] * step * base;
      block += term;
      if (std::abs(term) < rel_tol * std::abs(block)) {
        inner_done = ++inner_small == 3;
      } else {
        inner_small = 0;
      }
    }
    if (!inner_done) out.converged = false;
    total += block;
    const double block_mag = std::abs(block);
    out.truncation_estimate = block_mag;
    if (block_mag < rel_tol * std::abs(total)) {
      if (++small_run == 3) {
        out.value = total;
        return out;
      }
    } else {
      small_run = 0;
      out.degree_used = static_cast<int>(k2);
    }
    fiber_phase *= fiber_unit;
  }
  out.value = total;
  out.converged = false;
  return out;
}

// ---------------------------------------------------------------------------
// V_eta

VEtaKernel::VEtaKernel(VEtaParams p) : p_(std::move(p)) { validate(p_); }

complex VEtaKernel::phi(const ComplexPoint& x, const ComplexPoint& y) const {
  const auto n = static_cast<std::size_t>(p_.n);
  const auto m = static_cast<std::size_t>(p_.m);
  const complex wt = x[n + m] * std::conj(y[n + m]);
  complex s(0.0, 0.0);
  for (std::size_t j = 0; j < n; ++j) s += std::exp(p_.eta[j] * wt) * x[j] * std::conj(y[j]);
  return 1.0 - s - hermitian_product(x.slice(n, m), y.slice(n, m));
}

KernelValue VEtaKernel::operator()(const ComplexPoint& x, const ComplexPoint& y) const {
  const FamilyParams fp = p_;
  const auto n = static_cast<std::size_t>(p_.n);
  const auto m = static_cast<std::size_t>(p_.m);
  require_same_arity(x.size(), n + m + 1, "kernel_veta");
  require_same_arity(y.size(), n + m + 1, "kernel_veta");
  require_interior(fp, x, "kernel_veta");
  require_interior(fp, y, "kernel_veta");

  const complex wt = x[n + m] * std::conj(y[n + m]);
  complex weighted(0.0, 0.0);  // sum_j eta_j exp(eta_j w conj t) z_j conj(s_j)
  double eta_sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    weighted += p_.eta[j] * std::exp(p_.eta[j] * wt) * x[j] * std::conj(y[j]);
    eta_sum += p_.eta[j];
  }
  const complex ph = phi(x, y);
  if (std::abs(ph) < 1e-12) throw SingularityError("kernel_veta: phi vanishes at this point pair");
  if (!(ph.real() > 0.0)) {
    std::ostringstream os;
    os << "kernel_veta: Re(phi) = " << ph.real() << " <= 0, principal branch not applicable";
    throw DomainError(os.str());
  }
  const double kappa = p_.n + p_.m + p_.a + 1.0;
  const complex log_phi = std::log(ph);
  const complex first = weighted * std::exp(std::lgamma(kappa + 1.0) - (kappa + 1.0) * log_phi);
  const complex second = eta_sum * std::exp(std::lgamma(kappa) - kappa * log_phi);
  const complex prefactor =
      std::exp(eta_sum * wt - (p_.n + p_.m + 1.0) * kLogPi - std::lgamma(p_.a + 1.0));
  KernelValue out;
  out.value = prefactor * (first + second);
  return out;
}

// ---------------------------------------------------------------------------

KernelValue kernel_cn(const CnParams& p, const ComplexPoint& z, const ComplexPoint& w, double rel_tol) {
  return CnKernel(p)(z, w, rel_tol);
}

KernelValue kernel_dnm(const DnmParams& p, const ComplexPoint& x, const ComplexPoint& y, double rel_tol) {
  return DnmKernel(p)(x, y, rel_tol);
}

KernelValue kernel_veta(const VEtaParams& p, const ComplexPoint& x, const ComplexPoint& y) {
  return VEtaKernel(p)(x, y);
}

complex kernel_ball(int n, double radius, const ComplexPoint& z, const ComplexPoint& w) {
  if (n < 1) throw ArgumentError("kernel_ball: n must be positive");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw ArgumentError("kernel_ball: radius must be positive");
  require_same_arity(z.size(), static_cast<std::size_t>(n), "kernel_ball");
  require_same_arity(w.size(), static_cast<std::size_t>(n), "kernel_ball");
  const double r2 = radius * radius;
  if (!(z.norm() < radius) || !(w.norm() < radius)) throw DomainError("kernel_ball: point lies outside the ball");
  const complex base = 1.0 - hermitian_product(z, w) / r2;
  const double log_c = std::lgamma(n + 1.0) - n * kLogPi - n * std::log(r2);
  return std::exp(log_c) * std::pow(base, -(n + 1.0));
}

FamilyKernel::FamilyKernel(const FamilyParams& p)
    : params_(p),
      impl_(std::visit(
          [](const auto& q) -> std::variant<CnKernel, DnmKernel, VEtaKernel> {
            using T = std::decay_t<decltype(q)>;
            if constexpr (std::is_same_v<T, CnParams>) {
              return CnKernel(q);
            } else if constexpr (std::is_same_v<T, DnmParams>) {
              return DnmKernel(q);
            } else {
              return VEtaKernel(q);
            }
          },
          p)) {}

KernelValue FamilyKernel::operator()(const ComplexPoint& x, const ComplexPoint& y) const {
  return std::visit([&](const auto& k) { return k(x, y); }, impl_);
}

}  // namespace bergkern
