#include "relbosons/eigensolver.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>

#include "relbosons/numkernel/tridiag.hpp"
#include "relbosons/parallel.hpp"

namespace relbosons::eigen {

namespace odeint = boost::numeric::odeint;
using potentials::effective_potential;
using potentials::origin_behavior;

void RadialGrid::validate() const {
  if (!(q_min > 0.0) || !(q_max > q_min)) throw std::invalid_argument("RadialGrid: need 0 < q_min < q_max");
  if (n < 100) throw std::invalid_argument("RadialGrid: n must be at least 100");
}

std::string to_string(Method m) { return m == Method::shooting ? "shooting" : "fd_matrix"; }

double residual_window_start(const PotentialSpec& spec) {
  const double alpha = origin_behavior(spec).exponent_alpha;
  return std::abs(alpha - std::round(alpha)) > 1e-12 ? 0.2 : 0.0;
}

double discrete_residual(std::span<const double> q, std::span<const double> u,
                         const PotentialSpec& spec, double lambda, double q_from) {
  if (q.size() != u.size() || q.size() < 3) throw std::invalid_argument("discrete_residual: bad samples");
  const double h = q[1] - q[0];
  double umax = 0.0;
  for (double v : u) umax = std::max(umax, std::abs(v));
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < q.size(); ++i) {
    if (q[i] < q_from) continue;
    const double lap = (-u[i + 1] + 2.0 * u[i] - u[i - 1]) / (h * h);
    const double r = lap + (effective_potential(q[i], spec) - lambda) * u[i];
    worst = std::max(worst, std::abs(r));
  }
  return worst / (std::abs(lambda) * umax);
}

namespace {

// The outer Dirichlet wall must sit deep in the Gaussian tail.
void require_decay_region(const PotentialSpec& spec, const RadialGrid& grid, double lambda) {
  const double w = effective_potential(grid.q_max, spec);
  if (w < lambda + 20.0) {
    throw std::invalid_argument("RadialGrid: W(q_max) = " + std::to_string(w) + " is less than lambda + 20 = " +
                                std::to_string(lambda + 20.0) + " for " + spec.describe());
  }
}

double fd_lambda(const PotentialSpec& spec, double q_max, std::size_t n) {
  auto disc = numkernel::discretize_radial(
      [&](double q) { return effective_potential(q, spec); }, q_max, n);
  return numkernel::tridiag_ground(disc.problem, 1).front();
}

using State = std::array<double, 2>;

struct Radial {
  const PotentialSpec* spec;
  double lambda;
  void operator()(const State& x, State& dxdt, double q) const {
    dxdt[0] = x[1];
    dxdt[1] = (effective_potential(q, *spec) - lambda) * x[0];
  }
};

auto make_stepper() {
  return odeint::make_controlled<odeint::runge_kutta_dopri5<State>>(1e-30, 1e-12);
}

State outward_start(const PotentialSpec& spec, double q0, double lambda) {
  const auto ob = origin_behavior(spec);
  const double a = ob.exponent_alpha;
  // u = q^a (1 + b q^2) solves the equation through O(q^a).
  const double b = (ob.regular_offset - lambda) / (4.0 * a + 2.0);
  const double u = std::pow(q0, a) * (1.0 + b * q0 * q0);
  const double du = a * std::pow(q0, a - 1.0) + b * (a + 2.0) * std::pow(q0, a + 1.0);
  return {u, du};
}

State inward_start(double q_end, double lambda) {
  // u ~ q^((lambda-1)/2) exp(-q^2/2)
  const double beta = 0.5 * (lambda - 1.0);
  return {1.0, beta / q_end - q_end};
}

State integrate(const PotentialSpec& spec, double lambda, State x, double from, double to) {
  Radial sys{&spec, lambda};
  const double dt = (to > from ? 1.0 : -1.0) * 1e-3 * std::min(std::abs(to - from), std::abs(from));
  odeint::integrate_adaptive(make_stepper(), sys, x, from, to, dt);
  return x;
}

double normalized_wronskian(const State& o, const State& i) {
  const double w = o[1] * i[0] - o[0] * i[1];
  return w / std::sqrt((o[0] * o[0] + o[1] * o[1]) * (i[0] * i[0] + i[1] * i[1]));
}

std::vector<double> shooting_nodes(const RadialGrid& grid) {
  std::vector<double> q(grid.n);
  const double step = (grid.q_max - grid.q_min) / static_cast<double>(grid.n - 1);
  for (std::size_t i = 0; i < grid.n; ++i) q[i] = grid.q_min + step * static_cast<double>(i);
  q.back() = grid.q_max;
  return q;
}

std::size_t turning_index(const PotentialSpec& spec, const std::vector<double>& q, double lambda) {
  std::size_t i = q.size() - 1;
  while (i > 1 && effective_potential(q[i], spec) > lambda) --i;
  return std::max<std::size_t>(i, 1);
}

}  // namespace

double shooting_mismatch(const PotentialSpec& spec, const RadialGrid& grid, double lambda,
                         double match_point) {
  const State out = integrate(spec, lambda, outward_start(spec, grid.q_min, lambda), grid.q_min, match_point);
  const State in = integrate(spec, lambda, inward_start(grid.q_max, lambda), grid.q_max, match_point);
  return normalized_wronskian(out, in);
}

EigenResult solve_ground_fd(const PotentialSpec& spec, const RadialGrid& grid) {
  spec.validate();
  grid.validate();
  auto disc = numkernel::discretize_radial(
      [&](double q) { return effective_potential(q, spec); }, grid.q_max, grid.n);
  const double lambda = numkernel::tridiag_ground(disc.problem, 1).front();
  require_decay_region(spec, grid, lambda);
  const double lambda_half = fd_lambda(spec, grid.q_max, 2 * grid.n + 1);

  EigenResult r;
  r.method = Method::fd_matrix;
  r.spec = spec;
  r.lambda = lambda;
  r.gamma = 0.5 * lambda;
  r.richardson_gamma = 0.5 * (4.0 * lambda_half - lambda) / 3.0;
  r.u_samples = numkernel::tridiag_eigenvector(disc.problem, lambda);
  r.q = std::move(disc.nodes);
  r.residual = discrete_residual(r.q, r.u_samples, spec, lambda, residual_window_start(spec));
  return r;
}

EigenResult solve_ground_shooting(const PotentialSpec& spec, const RadialGrid& grid, double tol) {
  spec.validate();
  grid.validate();
  if (!(tol > 0.0)) throw std::invalid_argument("solve_ground_shooting: tol must be positive");

  const double estimate = fd_lambda(spec, grid.q_max, std::min<std::size_t>(grid.n, 2000));
  require_decay_region(spec, grid, estimate);
  const auto q = shooting_nodes(grid);
  const std::size_t im = turning_index(spec, q, estimate);
  const double qm = q[im];

  double lo = estimate - 0.5;
  double hi = estimate + 0.5;
  double f_lo = shooting_mismatch(spec, grid, lo, qm);
  const double f_hi = shooting_mismatch(spec, grid, hi, qm);
  if (!(f_lo * f_hi < 0.0)) {
    throw BracketError("solve_ground_shooting: no sign change of the mismatch in [" +
                           std::to_string(lo) + ", " + std::to_string(hi) + "] for " + spec.describe(),
                       lo, hi);
  }
  double f_mid = 0.0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    f_mid = shooting_mismatch(spec, grid, mid, qm);
    if ((f_mid < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  const double lambda = 0.5 * (lo + hi);

  // Samples: outward up to the match node, inward down to it, joined continuously.
  std::vector<double> u(q.size());
  State x = outward_start(spec, q.front(), lambda);
  u[0] = x[0];
  for (std::size_t i = 1; i <= im; ++i) {
    x = integrate(spec, lambda, x, q[i - 1], q[i]);
    u[i] = x[0];
  }
  const double join = u[im];
  x = inward_start(q.back(), lambda);
  std::vector<double> tail(q.size(), 0.0);
  tail.back() = x[0];
  for (std::size_t i = q.size() - 1; i > im; --i) {
    x = integrate(spec, lambda, x, q[i], q[i - 1]);
    tail[i - 1] = x[0];
  }
  const double scale = join / tail[im];
  for (std::size_t i = im + 1; i < q.size(); ++i) u[i] = tail[i] * scale;

  const double step = q[1] - q[0];
  double norm = 0.0;
  for (double v : u) norm += v * v;
  norm = std::sqrt(norm * step);
  const double sign = join < 0.0 ? -1.0 : 1.0;
  for (double& v : u) v *= sign / norm;

  EigenResult r;
  r.method = Method::shooting;
  r.spec = spec;
  r.lambda = lambda;
  r.gamma = 0.5 * lambda;
  r.match_point = qm;
  r.mismatch = shooting_mismatch(spec, grid, lambda, qm);
  r.q = q;
  r.u_samples = std::move(u);
  r.residual = discrete_residual(r.q, r.u_samples, spec, lambda, residual_window_start(spec));
  return r;
}

double mean_q2(const EigenResult& r) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < r.q.size(); ++i) {
    const double w = r.u_samples[i] * r.u_samples[i];
    num += r.q[i] * r.q[i] * w;
    den += w;
  }
  return num / den;
}

std::vector<GammaPoint> gamma_curve(const PotentialSpec& family, std::span<const DParam> d_values,
                                    const GammaCurveOptions& options) {
  std::vector<GammaPoint> out(d_values.size());
  parallel_for(d_values.size(), [&](std::size_t k) {
    GammaPoint& p = out[k];
    p.d = d_values[k];
    p.method = Method::shooting;
    PotentialSpec spec = family;
    spec.d = d_values[k];
    try {
      const auto shoot = solve_ground_shooting(spec, options.grid, options.shooting_tol);
      const auto fd = solve_ground_fd(spec, options.grid);
      p.gamma = shoot.gamma;
      p.gamma_fd = *fd.richardson_gamma;
      p.residual = shoot.residual;
      p.mean_q2 = mean_q2(shoot);
      const double gap = std::abs(p.gamma - p.gamma_fd);
      p.ok = gap <= options.cross_check_tol;
      if (!p.ok) p.failure = "shooting and FD disagree by " + std::to_string(gap);
    } catch (const std::exception& e) {
      p.ok = false;
      p.failure = e.what();
    }
  });
  return out;
}

std::vector<AnalyticCheck> verify_analytic_limits(std::size_t n, double q_max) {
  const double golden_alpha = 0.5 * (1.0 + std::sqrt(5.0));
  struct Case {
    std::string name;
    PotentialSpec spec;
    double alpha;
  };
  const std::vector<Case> cases = {
      {"spin0 d=0: f = exp(-q^2/2)", PotentialSpec::scalar(DParam::finite(0.0)), 1.0},
      {"spin0 d=inf: f = q^(sqrt5/2-1/2) exp(-q^2/2)", PotentialSpec::scalar(DParam::infinity()), golden_alpha},
      {"spin1 d=0: g = q exp(-q^2/2)", PotentialSpec::longitudinal(DParam::finite(0.0)), 2.0},
      {"spin1 d=inf: g = q^(sqrt5/2-1/2) exp(-q^2/2)", PotentialSpec::longitudinal(DParam::infinity()),
       golden_alpha},
  };

  auto residual_at = [&](const Case& c, std::size_t nodes, double lambda) {
    const double h = q_max / static_cast<double>(nodes + 1);
    std::vector<double> q(nodes), u(nodes);
    for (std::size_t k = 0; k < nodes; ++k) {
      q[k] = h * static_cast<double>(k + 1);
      u[k] = std::pow(q[k], c.alpha) * std::exp(-0.5 * q[k] * q[k]);
    }
    return discrete_residual(q, u, c.spec, lambda, residual_window_start(c.spec));
  };

  std::vector<AnalyticCheck> out;
  for (const auto& c : cases) {
    AnalyticCheck chk;
    chk.name = c.name;
    chk.spec = c.spec;
    chk.lambda = 2.0 * c.alpha + 1.0;
    chk.residual = residual_at(c, n, chk.lambda);
    const std::size_t coarse = n / 2;
    chk.residual_coarse = residual_at(c, coarse, chk.lambda);
    const double ratio_h = static_cast<double>(n + 1) / static_cast<double>(coarse + 1);
    chk.observed_order = std::log(chk.residual_coarse / chk.residual) / std::log(ratio_h);
    out.push_back(chk);
  }
  return out;
}

}  // namespace relbosons::eigen
