#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "relbosons/potentials.hpp"

namespace relbosons::eigen {

using potentials::DParam;
using potentials::PotentialSpec;

/// q_min is where the outward shooting integration starts from the origin
/// series. The finite-difference matrix puts its Dirichlet node at q = 0 and
/// uses n interior nodes on (0, q_max).
struct RadialGrid {
  double q_min = 1e-4;
  double q_max = 12.0;
  std::size_t n = 8000;

  void validate() const;
  double fd_step() const { return q_max / static_cast<double>(n + 1); }
};

enum class Method { shooting, fd_matrix };
std::string to_string(Method m);

struct EigenResult {
  double gamma = 0.0;
  double lambda = 0.0;  // 2 gamma
  std::vector<double> q;
  std::vector<double> u_samples;  // sum(u^2) h = 1, u > 0 in the interior
  /// Relative discrete residual max|(-D2 + W - lambda) u| / max|lambda u|
  /// over interior nodes (see residual_window_start).
  double residual = 0.0;
  Method method = Method::fd_matrix;
  PotentialSpec spec;
  /// fd_matrix: Richardson value from steps h and h/2.
  std::optional<double> richardson_gamma;
  /// shooting: match point and final mismatch.
  double match_point = 0.0;
  double mismatch = 0.0;
};

class BracketError : public std::runtime_error {
 public:
  BracketError(const std::string& what, double lo, double hi)
      : std::runtime_error(what), lo_(lo), hi_(hi) {}
  double lo() const { return lo_; }
  double hi() const { return hi_; }

 private:
  double lo_, hi_;
};

/// Residuals near the origin are excluded below this q when the regular
/// exponent is not an integer: the closed-form solution there has unbounded
/// fourth derivative and the 3-point stencil is not consistent.
double residual_window_start(const PotentialSpec& spec);

/// Relative residual of samples u on a uniform grid starting at q.front().
double discrete_residual(std::span<const double> q, std::span<const double> u,
                         const PotentialSpec& spec, double lambda, double q_from);

EigenResult solve_ground_fd(const PotentialSpec& spec, const RadialGrid& grid);

/// Bisection on the normalized Wronskian mismatch between an outward solution
/// (origin series start at q_min) and an inward solution (Gaussian asymptotics
/// at q_max), matched at the outer classical turning point.
EigenResult solve_ground_shooting(const PotentialSpec& spec, const RadialGrid& grid,
                                  double tol = 1e-11);

/// Mismatch used by the shooting bisection; exposed for diagnostics.
double shooting_mismatch(const PotentialSpec& spec, const RadialGrid& grid, double lambda,
                         double match_point);

/// <q^2> = sum q^2 u^2 / sum u^2 of a radial eigenfunction.
double mean_q2(const EigenResult& r);

struct GammaPoint {
  DParam d = DParam::finite(0.0);
  double gamma = 0.0;     // shooting
  double gamma_fd = 0.0;  // FD Richardson cross-check
  double residual = 0.0;
  double mean_q2 = 0.0;
  Method method = Method::shooting;
  bool ok = false;
  std::string failure;
};

struct GammaCurveOptions {
  RadialGrid grid;
  double shooting_tol = 1e-11;
  double cross_check_tol = 1e-6;
};

/// gamma(d) over `d_values` with `family`'s spin/channel/angular index.
/// Failing points are recorded and the sweep continues; output order follows
/// d_values regardless of worker scheduling.
std::vector<GammaPoint> gamma_curve(const PotentialSpec& family, std::span<const DParam> d_values,
                                    const GammaCurveOptions& options = {});

struct AnalyticCheck {
  std::string name;
  PotentialSpec spec;
  double lambda = 0.0;
  double residual = 0.0;           // at the requested n
  double residual_coarse = 0.0;    // at about n/2
  double observed_order = 0.0;     // log2 of the ratio
};

/// Applies the discrete operator to the four closed-form ground states
/// (spin 0 and spin-1 longitudinal at d = 0 and d = inf).
std::vector<AnalyticCheck> verify_analytic_limits(std::size_t n = 8000, double q_max = 12.0);

}  // namespace relbosons::eigen
