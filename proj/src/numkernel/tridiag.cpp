#include "relbosons/numkernel/tridiag.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace relbosons::numkernel {

void TridiagProblem::validate() const {
  if (diagonal.empty()) throw std::invalid_argument("TridiagProblem: empty diagonal");
  if (off_diagonal.size() + 1 != diagonal.size()) {
    throw std::invalid_argument("TridiagProblem: off_diagonal must have n-1 entries");
  }
  if (!(grid_step > 0.0)) throw std::invalid_argument("TridiagProblem: grid_step must be positive");
}

RadialDiscretization discretize_radial(const std::function<double(double)>& potential,
                                       double q_max, std::size_t n) {
  if (n < 2 || !(q_max > 0.0)) throw std::invalid_argument("discretize_radial: bad grid");
  const double h = q_max / static_cast<double>(n + 1);
  const double inv_h2 = 1.0 / (h * h);
  RadialDiscretization out;
  out.problem.grid_step = h;
  out.problem.diagonal.resize(n);
  out.problem.off_diagonal.assign(n - 1, -inv_h2);
  out.nodes.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double q = h * static_cast<double>(k + 1);
    out.nodes[k] = q;
    out.problem.diagonal[k] = 2.0 * inv_h2 + potential(q);
  }
  return out;
}

std::size_t sturm_count(const TridiagProblem& problem, double x) {
  const auto& a = problem.diagonal;
  const auto& b = problem.off_diagonal;
  constexpr double tiny = std::numeric_limits<double>::min() * 1e10;
  std::size_t count = 0;
  double d = a[0] - x;
  for (std::size_t i = 0;; ++i) {
    if (d == 0.0) d = -tiny;
    if (d < 0.0) ++count;
    if (i + 1 == a.size()) break;
    d = (a[i + 1] - x) - b[i] * b[i] / d;
  }
  return count;
}

namespace {

std::pair<double, double> gershgorin(const TridiagProblem& p) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  const std::size_t n = p.size();
  for (std::size_t i = 0; i < n; ++i) {
    double r = 0.0;
    if (i > 0) r += std::abs(p.off_diagonal[i - 1]);
    if (i + 1 < n) r += std::abs(p.off_diagonal[i]);
    lo = std::min(lo, p.diagonal[i] - r);
    hi = std::max(hi, p.diagonal[i] + r);
  }
  return {lo, hi};
}

}  // namespace

std::vector<double> tridiag_ground(const TridiagProblem& problem, std::size_t count) {
  problem.validate();
  if (count < 1 || count > problem.size()) {
    throw std::invalid_argument("tridiag_ground: count must be in [1, n]");
  }
  auto [glo, ghi] = gershgorin(problem);
  const double pad = 1e-12 * std::max({1.0, std::abs(glo), std::abs(ghi)});
  glo -= pad;
  ghi += pad;

  std::vector<double> out;
  out.reserve(count);
  double floor = glo;
  for (std::size_t k = 0; k < count; ++k) {
    // k-th eigenvalue (0-based): smallest x with sturm_count(x) > k.
    double lo = floor;
    double hi = ghi;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (hi - lo <= 1e-12 * std::max({1.0, std::abs(lo), std::abs(hi)})) break;
      if (sturm_count(problem, mid) > k) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    const double lambda = 0.5 * (lo + hi);
    out.push_back(lambda);
    floor = lo;
  }
  return out;
}

std::vector<double> tridiag_eigenvector(const TridiagProblem& problem, double eigenvalue) {
  problem.validate();
  const std::size_t n = problem.size();
  const auto& a = problem.diagonal;
  const auto& b = problem.off_diagonal;

  // Shift slightly off the eigenvalue so the factorization is not exactly singular.
  const double shift = eigenvalue + 1e-10 * std::max(1.0, std::abs(eigenvalue));

  // Row-pivoted elimination of (T - shift) in banded form: each row carries
  // up to three upper entries after pivoting.
  std::vector<double> u0(n), u1(n), u2(n), mult(n, 0.0);
  std::vector<char> swapped(n, 0);
  {
    double d = a[0] - shift;
    double e = n > 1 ? b[0] : 0.0;
    double f = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double sub = b[i];
      const double next_d = a[i + 1] - shift;
      const double next_e = i + 2 < n ? b[i + 1] : 0.0;
      if (std::abs(d) >= std::abs(sub)) {
        const double m = d == 0.0 ? 0.0 : sub / d;
        mult[i] = m;
        u0[i] = d;
        u1[i] = e;
        u2[i] = f;
        d = next_d - m * e;
        e = next_e - m * f;
        f = 0.0;
      } else {
        const double m = d / sub;
        mult[i] = m;
        swapped[i] = 1;
        u0[i] = sub;
        u1[i] = next_d;
        u2[i] = next_e;
        const double nd = e - m * next_d;
        const double ne = f - m * next_e;
        d = nd;
        e = ne;
        f = 0.0;
      }
    }
    u0[n - 1] = d;
    u1[n - 1] = 0.0;
    u2[n - 1] = 0.0;
  }
  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (std::size_t i = 0; i < n; ++i) {
    if (u0[i] == 0.0) u0[i] = eps * std::max(1.0, std::abs(eigenvalue));
  }

  std::vector<double> v(n, 1.0);
  for (int iter = 0; iter < 3; ++iter) {
    // Forward: apply the row operations to the right-hand side.
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (swapped[i]) std::swap(v[i], v[i + 1]);
      v[i + 1] -= mult[i] * v[i];
    }
    // Back substitution.
    for (std::size_t ii = n; ii-- > 0;) {
      double s = v[ii];
      if (ii + 1 < n) s -= u1[ii] * v[ii + 1];
      if (ii + 2 < n) s -= u2[ii] * v[ii + 2];
      v[ii] = s / u0[ii];
    }
    double norm = 0.0;
    for (double x : v) norm = std::max(norm, std::abs(x));
    for (double& x : v) x /= norm;
  }

  double sum = 0.0;
  std::size_t argmax = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sum += v[i] * v[i];
    if (std::abs(v[i]) > std::abs(v[argmax])) argmax = i;
  }
  const double scale = (v[argmax] < 0.0 ? -1.0 : 1.0) / std::sqrt(sum * problem.grid_step);
  for (double& x : v) x *= scale;
  return v;
}

}  // namespace relbosons::numkernel
