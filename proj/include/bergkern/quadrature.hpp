#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <algorithm>
#include <type_traits>
#include <vector>

namespace bergkern::quad {

/// Gauss-Legendre nodes and weights on [-1, 1].
class GaussLegendreRule {
 public:
  explicit GaussLegendreRule(int order);

  int order() const noexcept { return static_cast<int>(nodes_.size()); }
  const std::vector<double>& nodes() const noexcept { return nodes_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

  /// Shared rule instance for the given order (computed once per order).
  static const GaussLegendreRule& get(int order);

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

/// A value together with the error it already carries (e.g. from an inner
/// integral). Inner errors are integrated alongside the values.
template <class V>
struct BasicEstimate {
  V value{};
  double error = 0.0;
};
using Estimate = BasicEstimate<double>;

struct Options {
  double rel_tol = 1e-9;
  double abs_tol = 0.0;
  int order = 10;
  int max_panels = 4000;
};

template <class V>
struct BasicResult {
  V value{};
  /// quadrature error plus integrated inner error
  double error = 0.0;
  bool converged = true;
  std::size_t evaluations = 0;
};
using Result = BasicResult<double>;

namespace detail {

template <class T>
struct estimate_traits {
  using value_type = T;
  static const T& value(const T& v) { return v; }
  static double error(const T&) { return 0.0; }
};

template <class V>
struct estimate_traits<BasicEstimate<V>> {
  using value_type = V;
  static const V& value(const BasicEstimate<V>& e) { return e.value; }
  static double error(const BasicEstimate<V>& e) { return e.error; }
};

template <class F>
using value_type_t = typename estimate_traits<std::decay_t<std::invoke_result_t<F&, double>>>::value_type;

template <class V>
struct Panel {
  double a;
  double b;
  BasicEstimate<V> left;   // Gauss rule on [a, mid]
  BasicEstimate<V> right;  // Gauss rule on [mid, b]
  double error;            // |coarse - (left + right)|

  bool operator<(const Panel& other) const { return error < other.error; }
};

template <class F>
auto apply_rule(F& f, const GaussLegendreRule& rule, double a, double b, std::size_t& evals) {
  using Traits = estimate_traits<std::decay_t<std::invoke_result_t<F&, double>>>;
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  BasicEstimate<typename Traits::value_type> e;
  for (int i = 0; i < rule.order(); ++i) {
    const auto v = f(mid + half * rule.nodes()[i]);
    e.value += rule.weights()[i] * Traits::value(v);
    e.error += rule.weights()[i] * Traits::error(v);
  }
  e.value *= half;
  e.error *= half;
  evals += static_cast<std::size_t>(rule.order());
  return e;
}

}  // namespace detail

/// Globally adaptive Gauss-Legendre integration of f over [a, b].
///
/// Each panel is estimated twice: once with the rule on the whole panel and
/// once with the rule on its two halves. The difference is the panel's error;
/// the panel with the largest error is bisected until the summed error meets
/// max(abs_tol, rel_tol * |value|) or the panel budget runs out.
/// f returns a double or an Estimate; the latter lets nested integrals report
/// their own error.
template <class F>
auto integrate(F&& f, double a, double b, const Options& opt = {}) {
  using V = detail::value_type_t<F>;
  BasicResult<V> res;
  if (!(b > a)) return res;
  const GaussLegendreRule& rule = GaussLegendreRule::get(opt.order);

  auto make_panel = [&](double pa, double pb, const BasicEstimate<V>& coarse) {
    const double mid = 0.5 * (pa + pb);
    detail::Panel<V> p{pa, pb, detail::apply_rule(f, rule, pa, mid, res.evaluations),
                    detail::apply_rule(f, rule, mid, pb, res.evaluations), 0.0};
    p.error = std::abs(coarse.value - (p.left.value + p.right.value));
    return p;
  };

  std::vector<detail::Panel<V>> heap;
  const auto whole = detail::apply_rule(f, rule, a, b, res.evaluations);
  heap.push_back(make_panel(a, b, whole));

  struct Totals {
    V value{};
    double qerr = 0.0;
    double inner = 0.0;
  };
  auto totals = [&heap]() {
    Totals t;
    for (const auto& p : heap) {
      t.value += p.left.value + p.right.value;
      t.qerr += p.error;
      t.inner += p.left.error + p.right.error;
    }
    return t;
  };

  V value = heap.front().left.value + heap.front().right.value;
  double qerr = heap.front().error;
  while (qerr > std::max(opt.abs_tol, opt.rel_tol * std::abs(value))) {
    if (static_cast<int>(heap.size()) >= opt.max_panels) {
      res.converged = false;
      break;
    }
    std::pop_heap(heap.begin(), heap.end());
    const detail::Panel<V> worst = heap.back();
    heap.pop_back();
    const double mid = 0.5 * (worst.a + worst.b);
    const detail::Panel<V> left = make_panel(worst.a, mid, worst.left);
    const detail::Panel<V> right = make_panel(mid, worst.b, worst.right);
    value += (left.left.value + left.right.value + right.left.value + right.right.value) -
             (worst.left.value + worst.right.value);
    qerr += left.error + right.error - worst.error;
    heap.push_back(left);
    std::push_heap(heap.begin(), heap.end());
    heap.push_back(right);
    std::push_heap(heap.begin(), heap.end());
    // running sums drift under repeated add/subtract; refresh periodically
    if (heap.size() % 64 == 0) {
      const Totals t = totals();
      value = t.value;
      qerr = t.qerr;
    }
  }
  const Totals t = totals();
  res.value = t.value;
  res.error = t.qerr + t.inner;
  return res;
}

/// Integral of f over [a, +inf) through r = a + t/(1-t), dr = dt/(1-t)^2.
template <class F>
auto integrate_to_infinity(F&& f, double a, const Options& opt = {}) {
  using Traits = detail::estimate_traits<std::decay_t<std::invoke_result_t<F&, double>>>;
  auto g = [&f, a](double t) {
    const double s = 1.0 - t;
    const double jac = 1.0 / (s * s);
    const auto raw = f(a + t / s);
    return BasicEstimate<typename Traits::value_type>{Traits::value(raw) * jac, Traits::error(raw) * jac};
  };
  return integrate(g, 0.0, 1.0, opt);
}

/// Dispatches on b = +inf.
template <class F>
auto integrate_interval(F&& f, double a, double b, const Options& opt = {}) {
  if (std::isinf(b)) return integrate_to_infinity(std::forward<F>(f), a, opt);
  return integrate(std::forward<F>(f), a, b, opt);
}

}  // namespace bergkern::quad
