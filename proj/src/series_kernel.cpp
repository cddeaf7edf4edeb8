#include "bergkern/series_kernel.hpp"

#include <cmath>

#include "bergkern/errors.hpp"

namespace bergkern {

namespace {

// Appends all compositions of `remaining` into the slots [pos, n) of `current`,
// lexicographically ascending.
void compose(int n, int pos, int remaining, std::vector<int>& current, std::vector<int>& out) {
  if (pos == n - 1) {
    current[static_cast<std::size_t>(pos)] = remaining;
    out.insert(out.end(), current.begin(), current.end());
    return;
  }
  for (int e = 0; e <= remaining; ++e) {
    current[static_cast<std::size_t>(pos)] = e;
    compose(n, pos + 1, remaining - e, current, out);
  }
}

std::vector<int> flat_shell(int n, int d) {
  std::vector<int> out;
  out.reserve(degree_shell_size(n, d) * static_cast<std::size_t>(n));
  std::vector<int> current(static_cast<std::size_t>(n), 0);
  compose(n, 0, d, current, out);
  return out;
}

}  // namespace

std::size_t degree_shell_size(int n, int d) {
  if (n < 1 || d < 0) throw ArgumentError("degree shell needs n >= 1 and d >= 0");
  // C(d + n - 1, n - 1), built incrementally to stay exact
  std::size_t c = 1;
  for (int k = 1; k < n; ++k) c = c * static_cast<std::size_t>(d + k) / static_cast<std::size_t>(k);
  return c;
}

std::vector<MultiIndex> enumerate_degree_shell(int n, int d) {
  const std::vector<int> flat = flat_shell(n, d);
  std::vector<MultiIndex> shell;
  shell.reserve(flat.size() / static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < flat.size(); i += static_cast<std::size_t>(n)) {
    shell.emplace_back(std::vector<int>(flat.begin() + static_cast<std::ptrdiff_t>(i),
                                        flat.begin() + static_cast<std::ptrdiff_t>(i + static_cast<std::size_t>(n))));
  }
  return shell;
}

complex multinomial_collapse(const ComplexPoint& z, const ComplexPoint& w, int d) {
  require_same_arity(z.size(), w.size(), "multinomial_collapse");
  if (d < 0) throw ArgumentError("multinomial_collapse: degree must be nonnegative");
  const int n = static_cast<int>(z.size());
  std::vector<complex> products(z.size());
  for (std::size_t j = 0; j < z.size(); ++j) products[j] = z[j] * std::conj(w[j]);
  const ComplexPoint p(products);
  const double log_d_factorial = std::lgamma(d + 1.0);
  complex sum(0.0, 0.0);
  for (const MultiIndex& alpha : enumerate_degree_shell(n, d)) {
    sum += std::exp(log_d_factorial - alpha.factorial_log()) * monomial_eval(p, alpha);
  }
  return sum;
}

// ---------------------------------------------------------------------------

KernelSeries::KernelSeries(std::shared_ptr<MomentTable> moments, int max_degree)
    : moments_(std::move(moments)), max_degree_(max_degree) {
  if (!moments_) throw ArgumentError("KernelSeries needs a moment table");
  if (max_degree_ < 0) throw ArgumentError("KernelSeries: max_degree must be nonnegative");
  indices_.resize(static_cast<std::size_t>(max_degree_) + 1);
  coefficients_.resize(static_cast<std::size_t>(max_degree_) + 1);
}

void KernelSeries::ensure_shell(int d) const {
  if (d < 0 || d > max_degree_) throw ArgumentError("KernelSeries: shell degree out of range");
  const auto slot = static_cast<std::size_t>(d);
  {
    std::lock_guard lock(mutex_);
    if (coefficients_[slot]) return;
  }
  // Computed outside the lock: moments may need quadrature. Two threads racing
  // on the same shell produce identical data; the first writer wins.
  const int n = arity();
  auto idx = std::make_unique<std::vector<int>>(flat_shell(n, d));
  auto coeff = std::make_unique<std::vector<double>>();
  coeff->reserve(idx->size() / static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < idx->size(); i += static_cast<std::size_t>(n)) {
    const MultiIndex alpha(std::vector<int>(idx->begin() + static_cast<std::ptrdiff_t>(i),
                                            idx->begin() + static_cast<std::ptrdiff_t>(i + static_cast<std::size_t>(n))));
    coeff->push_back(-moments_->evaluate_log(alpha));
  }
  std::lock_guard lock(mutex_);
  if (!coefficients_[slot]) {
    indices_[slot] = std::move(idx);
    coefficients_[slot] = std::move(coeff);
  }
}

const std::vector<int>& KernelSeries::shell_indices(int d) const {
  ensure_shell(d);
  std::lock_guard lock(mutex_);
  return *indices_[static_cast<std::size_t>(d)];
}

const std::vector<double>& KernelSeries::shell_log_coefficients(int d) const {
  ensure_shell(d);
  std::lock_guard lock(mutex_);
  return *coefficients_[static_cast<std::size_t>(d)];
}

KernelValue kernel_series_eval(const KernelSeries& series, const ComplexPoint& z, const ComplexPoint& w,
                               double rel_tol) {
  const int n = series.arity();
  require_same_arity(z.size(), static_cast<std::size_t>(n), "kernel_series_eval");
  require_same_arity(w.size(), static_cast<std::size_t>(n), "kernel_series_eval");
  if (!(rel_tol > 0.0)) throw ArgumentError("kernel_series_eval: rel_tol must be positive");

  const int max_degree = series.max_degree();
  const auto stride = static_cast<std::size_t>(max_degree) + 1;
  // per variable: k * log|z_j conj(w_j)| and the unit phase to the k-th power
  std::vector<double> log_pow(static_cast<std::size_t>(n) * stride);
  std::vector<complex> phase_pow(static_cast<std::size_t>(n) * stride);
  for (int j = 0; j < n; ++j) {
    const complex p = z[static_cast<std::size_t>(j)] * std::conj(w[static_cast<std::size_t>(j)]);
    const double mag = std::abs(p);
    const double log_mag = std::log(mag);
    const complex unit = mag > 0.0 ? p / mag : complex(1.0, 0.0);
    double* lp = &log_pow[static_cast<std::size_t>(j) * stride];
    complex* pp = &phase_pow[static_cast<std::size_t>(j) * stride];
    lp[0] = 0.0;
    pp[0] = complex(1.0, 0.0);
    for (std::size_t k = 1; k < stride; ++k) {
      lp[k] = mag > 0.0 ? static_cast<double>(k) * log_mag : -kInf;
      pp[k] = pp[k - 1] * unit;
    }
  }

  KernelValue out;
  complex sum(0.0, 0.0);
  int small_run = 0;
  int last_significant = 0;
  for (int d = 0; d <= max_degree; ++d) {
    const std::vector<int>& idx = series.shell_indices(d);
    const std::vector<double>& coeff = series.shell_log_coefficients(d);
    complex shell(0.0, 0.0);
    double shell_mag = 0.0;
    for (std::size_t i = 0; i < coeff.size(); ++i) {
      const int* alpha = &idx[i * static_cast<std::size_t>(n)];
      double log_term = coeff[i];
      complex phase(1.0, 0.0);
      for (int j = 0; j < n; ++j) {
        const auto k = static_cast<std::size_t>(alpha[j]);
        log_term += log_pow[static_cast<std::size_t>(j) * stride + k];
        if (k) phase *= phase_pow[static_cast<std::size_t>(j) * stride + k];
      }
      if (log_term == -kInf) continue;
      const double mag = std::exp(log_term);
      shell += mag * phase;
      shell_mag += mag;
    }
    sum += shell;
    out.truncation_estimate = shell_mag;
    if (shell_mag < rel_tol * std::abs(sum)) {
      if (++small_run == 3) {
        out.value = sum;
        out.degree_used = last_significant;
        out.converged = true;
        return out;
      }
    } else {
      small_run = 0;
      last_significant = d;
    }
  }
  out.value = sum;
  out.degree_used = max_degree;
  out.converged = false;
  return out;
}

}  // namespace bergkern
