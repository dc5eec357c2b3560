#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace relbosons::numkernel {

using EnergyFn = std::function<double(std::span<const double>)>;
using GradientFn = std::function<void(std::span<const double>, std::span<double>)>;

/// How the trial step of each iteration is chosen before backtracking.
enum class StepRule {
  doubling,          // twice the last accepted step
  barzilai_borwein,  // |s.s / s.y| from the last two iterates
};

struct StepControl {
  double initial_step = 1e-2;
  double min_step = 1e-16;
  double max_step = 1e6;
  double gradient_tolerance = 1e-8;
  /// A trial step that lowers the functional is accepted. One that raises it
  /// by at most energy_slack * max(1, |E|) is accepted only if it lowers the
  /// tangential gradient norm.
  double energy_slack = 1e-14;
  std::size_t max_iterations = 200000;
  StepRule rule = StepRule::doubling;
  /// Compare the analytic gradient with a central difference before starting.
  bool probe_gradient = true;
  std::uint64_t probe_seed = 12345;
  bool record_trace = false;
};

struct MinimizeResult {
  std::vector<double> state;
  double value = 0.0;
  double gradient_norm = 0.0;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  /// Functional value after every accepted step (only with record_trace).
  std::vector<double> trace;
};

class StagnationError : public std::runtime_error {
 public:
  StagnationError(const std::string& what, std::vector<double> state, double gradient_norm)
      : std::runtime_error(what), state_(std::move(state)), gradient_norm_(gradient_norm) {}
  const std::vector<double>& state() const { return state_; }
  double gradient_norm() const { return gradient_norm_; }

 private:
  std::vector<double> state_;
  double gradient_norm_;
};

/// Normalized gradient descent on the unit sphere |x| = 1 with a halving
/// backtracking line search. No accepted step raises the functional by more
/// than the rounding slack; iteration stops when the tangential gradient norm drops below
/// `gradient_tolerance`.
MinimizeResult minimize_functional(const EnergyFn& energy, const GradientFn& gradient,
                                   std::vector<double> init, const StepControl& control);

/// Relative mismatch between the directional derivative from `gradient` and a
/// central difference of `energy` along a pseudo-random direction.
double gradient_probe_mismatch(const EnergyFn& energy, const GradientFn& gradient,
                               std::span<const double> at, std::uint64_t seed);

}  // namespace relbosons::numkernel
