#include "relbosons/numkernel/minimize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <limits>
#include <random>

namespace relbosons::numkernel {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

void normalize(std::vector<double>& x) {
  const double n = std::sqrt(dot(x, x));
  if (!(n > 0.0)) throw std::invalid_argument("minimize_functional: zero state");
  for (double& v : x) v /= n;
}

// Removes the radial component so the step stays tangent to the unit sphere.
void project_tangent(std::span<const double> x, std::vector<double>& g) {
  const double c = dot(g, x);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] -= c * x[i];
}

}  // namespace

double gradient_probe_mismatch(const EnergyFn& energy, const GradientFn& gradient,
                               std::span<const double> at, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<double> dir(at.size());
  for (double& v : dir) v = normal(rng);
  const double dn = std::sqrt(dot(dir, dir));
  for (double& v : dir) v /= dn;

  // Probe off the initial state: at a stationary point the gradient is
  // smaller than the best finite-difference error of a stiff functional.
  std::vector<double> x(at.begin(), at.end());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += 1e-2 * dir[i];
  normalize(x);
  const std::span<const double> pt = x;

  std::vector<double> g(pt.size());
  gradient(pt, g);
  const double analytic = dot(g, dir);

  // Stiff functionals put a large third derivative into the central
  // difference at big steps and rounding at small ones; keep the best step.
  const double e0 = energy(pt);
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> plus(pt.size()), minus(pt.size());
  for (double eps : {1e-4, 1e-5, 1e-6, 1e-7, 1e-8}) {
    for (std::size_t i = 0; i < pt.size(); ++i) {
      plus[i] = pt[i] + eps * dir[i];
      minus[i] = pt[i] - eps * dir[i];
    }
    const double numeric = (energy(plus) - energy(minus)) / (2.0 * eps);
    const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-8 * std::abs(e0), 1e-300});
    best = std::min(best, std::abs(analytic - numeric) / scale);
  }
  return best;
}

MinimizeResult minimize_functional(const EnergyFn& energy, const GradientFn& gradient,
                                   std::vector<double> init, const StepControl& control) {
  if (init.empty()) throw std::invalid_argument("minimize_functional: empty state");
  if (std::abs(std::sqrt(dot(init, init)) - 1.0) > 1e-8) {
    throw std::invalid_argument("minimize_functional: init must be normalized");
  }
  if (control.probe_gradient) {
    const double mismatch = gradient_probe_mismatch(energy, gradient, init, control.probe_seed);
    if (mismatch > 1e-4) {
      throw std::invalid_argument("minimize_functional: gradient inconsistent with energy (mismatch " +
                                  std::to_string(mismatch) + ")");
    }
  }

  MinimizeResult out;
  std::vector<double> x = std::move(init);
  std::vector<double> g(x.size()), trial(x.size()), trial_g(x.size());
  std::vector<double> prev_x, prev_g;
  double value = energy(x);
  ++out.evaluations;
  double step = control.initial_step;

  for (std::size_t iter = 0;; ++iter) {
    gradient(x, g);
    project_tangent(x, g);
    const double gnorm = std::sqrt(dot(g, g));
    out.gradient_norm = gnorm;
    out.iterations = iter;
    if (gnorm <= control.gradient_tolerance) break;
    if (iter >= control.max_iterations) {
      throw StagnationError("minimize_functional: iteration limit reached", std::move(x), gnorm);
    }

    if (control.rule == StepRule::barzilai_borwein && !prev_x.empty()) {
      double ss = 0.0, sy = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double s = x[i] - prev_x[i];
        const double y = g[i] - prev_g[i];
        ss += s * s;
        sy += s * y;
      }
      if (sy != 0.0) step = ss / std::abs(sy);
    } else if (iter > 0) {
      step *= 2.0;
    }
    step = std::min(step, control.max_step);

    // Gains below a few ulps of the functional are indistinguishable from
    // rounding; inside that band a step must shrink the gradient instead.
    const double slack = control.energy_slack * std::max(1.0, std::abs(value));
    bool accepted = false;
    double trial_value = value;
    while (step >= control.min_step) {
      for (std::size_t i = 0; i < x.size(); ++i) trial[i] = x[i] - step * g[i];
      normalize(trial);
      trial_value = energy(trial);
      ++out.evaluations;
      if (trial_value < value) {
        accepted = true;
        break;
      }
      if (trial_value <= value + slack) {
        gradient(trial, trial_g);
        project_tangent(trial, trial_g);
        if (dot(trial_g, trial_g) < gnorm * gnorm) {
          accepted = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!accepted) {
      throw StagnationError("minimize_functional: line search stalled", std::move(x), gnorm);
    }
    if (control.rule == StepRule::barzilai_borwein) {
      prev_x = x;
      prev_g = g;
    }
    std::swap(x, trial);
    value = trial_value;
    if (control.record_trace) out.trace.push_back(value);
  }

  out.state = std::move(x);
  out.value = value;
  return out;
}

}  // namespace relbosons::numkernel
