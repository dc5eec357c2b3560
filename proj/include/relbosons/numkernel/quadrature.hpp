#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <cstddef>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace relbosons::numkernel {

/// Tolerances and panelling for semi-infinite damped integrals.
struct QuadratureSpec {
  double abs_tol = 1e-13;
  double rel_tol = 1e-11;
  std::size_t max_panels = 20000;
  /// When set, initial panels are at most half this wavelength wide.
  std::optional<double> oscillation_wavelength;

  void validate() const;
};

template <class T>
struct QuadratureResult {
  T value{};
  double error = 0.0;
  std::size_t panels = 0;
  double upper_limit = 0.0;
};

/// Thrown when the panel budget is exhausted before the error target is met.
/// Carries the best estimate seen so far.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, std::complex<double> estimate, double error_bound)
      : std::runtime_error(what), estimate_(estimate), error_bound_(error_bound) {}

  std::complex<double> estimate() const { return estimate_; }
  double error_bound() const { return error_bound_; }

 private:
  std::complex<double> estimate_;
  double error_bound_;
};

namespace detail {

template <class T>
struct Panel {
  double a;
  double b;
  T value;
  double error;
  double l1;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class T>
std::complex<double> as_complex(const T& v) {
  if constexpr (std::is_same_v<T, std::complex<double>>) {
    return v;
  } else {
    return {static_cast<double>(v), 0.0};
  }
}

template <class F>
auto kronrod_panel(F& kernel, double a, double b) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  double err = 0.0;
  double l1 = 0.0;
  auto v = GK::integrate(kernel, a, b, 0, 0.0, &err, &l1);
  using T = decltype(v);
  return Panel<T>{a, b, v, err, l1};
}

}  // namespace detail

/// Integrates `kernel` over [0, inf). The kernel already contains its damping
/// envelope; `damping_rate` is the exponential rate of that envelope and only
/// sets where the range is truncated:
///   p_max = ln(peak / abs_tol) / damping_rate + one panel,
/// extended panel by panel while the estimated tail exceeds abs_tol. The
/// truncated range is then refined adaptively (largest error first) until the
/// summed error is below max(abs_tol, rel_tol * |value|), or until the worst
/// panel's error is at the rounding level of its own |kernel| integral; the
/// reported error is then the rounding floor, possibly above the target.
template <class F>
auto integrate_damped(F&& kernel, double damping_rate, const QuadratureSpec& spec)
    -> QuadratureResult<std::decay_t<decltype(kernel(0.0))>> {
  using T = std::decay_t<decltype(kernel(0.0))>;
  spec.validate();
  if (!(damping_rate > 0.0) || !std::isfinite(damping_rate)) {
    throw std::invalid_argument("integrate_damped: damping_rate must be positive");
  }

  // Envelope peak from a coarse probe of the first few decay lengths.
  const double probe_extent = 12.0 / damping_rate;
  double peak = 0.0;
  constexpr int probes = 96;
  for (int i = 0; i <= probes; ++i) {
    const double p = probe_extent * i / probes;
    peak = std::max(peak, std::abs(kernel(p)));
  }
  peak = std::max(peak, spec.abs_tol);

  double width = 1.0 / damping_rate;
  if (spec.oscillation_wavelength) {
    width = std::min(width, 0.5 * *spec.oscillation_wavelength);
  }
  const double p_cut = std::log(peak / spec.abs_tol) / damping_rate + width;

  std::vector<detail::Panel<T>> panels;
  double a = 0.0;
  while (a < p_cut) {
    panels.push_back(detail::kronrod_panel(kernel, a, a + width));
    a += width;
    if (panels.size() > spec.max_panels) break;
  }
  // Extend while the last panel suggests a tail above tolerance.
  auto tail_of = [&](const detail::Panel<T>& p) {
    return (p.l1 / (p.b - p.a)) / damping_rate;
  };
  while (panels.size() <= spec.max_panels && tail_of(panels.back()) > 0.1 * spec.abs_tol) {
    panels.push_back(detail::kronrod_panel(kernel, a, a + width));
    a += width;
  }
  const double upper = a;
  const double tail = tail_of(panels.back());

  std::priority_queue<detail::Panel<T>> heap(panels.begin(), panels.end());
  T total{};
  double err = tail;
  for (const auto& p : panels) {
    total += p.value;
    err += p.error;
  }

  auto target = [&] { return std::max(spec.abs_tol, spec.rel_tol * std::abs(total)); };
  while (err > target()) {
    if (heap.size() >= spec.max_panels) {
      throw QuadratureError("integrate_damped: panel budget exhausted",
                            detail::as_complex(total), err);
    }
    auto worst = heap.top();
    // The worst panel is already at its rounding floor: nothing left to refine.
    // Same when it is only a few thousand ulps wide: node rounding then
    // dominates the Kronrod-Gauss difference.
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (worst.error <= 50.0 * eps * worst.l1) break;
    if (worst.b - worst.a <= 4096.0 * eps * std::max(1.0, std::abs(worst.a))) break;
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    auto left = detail::kronrod_panel(kernel, worst.a, mid);
    auto right = detail::kronrod_panel(kernel, mid, worst.b);
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    // Guard only; the width check above stops first.
    if (mid <= worst.a || mid >= worst.b) {
      throw QuadratureError("integrate_damped: interval collapsed", detail::as_complex(total), err);
    }
    heap.push(left);
    heap.push(right);
  }

  // Re-sum to limit drift from the incremental updates.
  T resummed{};
  double err_sum = tail;
  const std::size_t count = heap.size();
  while (!heap.empty()) {
    resummed += heap.top().value;
    err_sum += heap.top().error;
    heap.pop();
  }
  return {resummed, err_sum, count, upper};
}

}  // namespace relbosons::numkernel
