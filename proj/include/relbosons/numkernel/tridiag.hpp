#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace relbosons::numkernel {

/// Symmetric tridiagonal matrix from a uniform-grid discretization.
struct TridiagProblem {
  std::vector<double> diagonal;
  std::vector<double> off_diagonal;  // diagonal.size() - 1 entries
  double grid_step = 1.0;

  std::size_t size() const { return diagonal.size(); }
  void validate() const;
};

/// 3-point discretization of -u'' + W(q) u on (0, q_max) with u(0) = u(q_max) = 0.
/// Interior nodes are q_k = k h, k = 1..n, with h = q_max / (n + 1).
struct RadialDiscretization {
  TridiagProblem problem;
  std::vector<double> nodes;
};

RadialDiscretization discretize_radial(const std::function<double(double)>& potential,
                                       double q_max, std::size_t n);

/// Number of eigenvalues strictly below x (Sturm sequence via LDL^T pivots).
std::size_t sturm_count(const TridiagProblem& problem, double x);

/// Lowest `count` eigenvalues in ascending order, each bisected to a bracket of
/// width <= 1e-12 * max(1, |lambda|) or to machine resolution.
std::vector<double> tridiag_ground(const TridiagProblem& problem, std::size_t count);

/// Eigenvector for an accurately known eigenvalue, by inverse iteration with a
/// pivoted tridiagonal solve. Normalized so that sum(v^2) * h = 1 and the
/// largest component is positive.
std::vector<double> tridiag_eigenvector(const TridiagProblem& problem, double eigenvalue);

}  // namespace relbosons::numkernel
