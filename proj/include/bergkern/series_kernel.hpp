#pragma once

#include <memory>
#include <mutex>
#include <vector>

#include "bergkern/core_types.hpp"
#include "bergkern/moments.hpp"

namespace bergkern {

/// All multi-indices of length n and degree d in graded-lex order
/// (lexicographically ascending within the shell); C(d+n-1, n-1) of them.
std::vector<MultiIndex> enumerate_degree_shell(int n, int d);

/// Number of multi-indices of length n and degree d.
std::size_t degree_shell_size(int n, int d);

/// sum_{|alpha| = d} (d!/alpha!) z^alpha conj(w)^alpha, which equals <z, w>^d.
complex multinomial_collapse(const ComplexPoint& z, const ComplexPoint& w, int d);

struct KernelValue {
  complex value;
  /// magnitude of the last shell (or term/block) that was summed
  double truncation_estimate = 0.0;
  int degree_used = 0;
  bool converged = true;
};

inline constexpr int kDefaultMaxDegree = 120;
inline constexpr double kDefaultSeriesTol = 1e-14;

/// K(z, w) = sum_alpha I(alpha)^{-1} z^alpha conj(w)^alpha, truncated by degree.
///
/// Shells of coefficients -log I(alpha) are built lazily and cached; the
/// moments come from the table (computed on demand when missing).
class KernelSeries {
 public:
  KernelSeries(std::shared_ptr<MomentTable> moments, int max_degree = kDefaultMaxDegree);

  int arity() const noexcept { return moments_->arity(); }
  int max_degree() const noexcept { return max_degree_; }
  MomentTable& moments() const noexcept { return *moments_; }

  /// Flattened shell: degree_shell_size(n, d) rows of n exponents.
  const std::vector<int>& shell_indices(int d) const;
  /// -log I(alpha) for each row of shell_indices(d).
  const std::vector<double>& shell_log_coefficients(int d) const;

 private:
  void ensure_shell(int d) const;

  std::shared_ptr<MomentTable> moments_;
  int max_degree_;
  mutable std::mutex mutex_;
  mutable std::vector<std::unique_ptr<std::vector<int>>> indices_;
  mutable std::vector<std::unique_ptr<std::vector<double>>> coefficients_;
};

/// Shell-by-shell summation. Stops once three consecutive shells each have
/// sum_alpha |term| < rel_tol * |partial sum|; degree_used is then the last
/// shell before that run. Reaching max_degree first sets converged = false.
KernelValue kernel_series_eval(const KernelSeries& series, const ComplexPoint& z, const ComplexPoint& w,
                               double rel_tol = kDefaultSeriesTol);

}  // namespace bergkern
