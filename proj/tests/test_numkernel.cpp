#include <doctest.h>

#include <cmath>
#include <random>

#include "relbosons/numkernel/minimize.hpp"
#include "relbosons/numkernel/quadrature.hpp"
#include "relbosons/numkernel/tridiag.hpp"

using namespace relbosons::numkernel;

namespace {

// Composite Simpson on [0, b] with n (even) intervals.
template <class F>
double simpson(F f, double b, std::size_t n) {
  const double h = b / static_cast<double>(n);
  double s = f(0.0) + f(b);
  for (std::size_t i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(h * static_cast<double>(i));
  return s * h / 3.0;
}

// Doubles the panel count until two successive sums agree to 1e-14.
template <class F>
double simpson_converged(F f, double b) {
  double prev = simpson(f, b, 64);
  for (std::size_t n = 128;; n *= 2) {
    const double cur = simpson(f, b, n);
    if (std::abs(cur - prev) < 1e-14 || n > (1u << 24)) return cur;
    prev = cur;
  }
}

double oscillator_ground(double (*w)(double), double q_max, std::size_t n) {
  return tridiag_ground(discretize_radial(w, q_max, n).problem, 1).front();
}

double harmonic(double q) { return q * q; }
double centrifugal2(double q) { return 2.0 / (q * q) + q * q; }
double centrifugal1(double q) { return 1.0 / (q * q) + q * q; }

}  // namespace

TEST_CASE("integrate_damped: closed forms") {
  QuadratureSpec spec;
  spec.oscillation_wavelength = M_PI;
  auto r = integrate_damped([](double p) { return std::sin(2.0 * p) * std::exp(-0.5 * p); }, 0.5, spec);
  CHECK(r.value == doctest::Approx(2.0 / (0.25 + 4.0)).epsilon(1e-12));
  CHECK(r.error <= std::max(spec.abs_tol, spec.rel_tol * std::abs(r.value)));

  auto e = integrate_damped([](double p) { return std::exp(-p); }, 1.0, QuadratureSpec{});
  CHECK(e.value == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("integrate_damped: e^{-sqrt(1+p^2)} against Simpson refinement") {
  auto kernel = [](double p) { return std::exp(-std::sqrt(1.0 + p * p)); };
  const double oracle = simpson_converged(kernel, 45.0);  // tail below 1e-19
  const auto r = integrate_damped(kernel, 1.0, QuadratureSpec{});
  CHECK(std::abs(r.value - oracle) < 1e-10);
}

TEST_CASE("integrate_damped: complex kernel") {
  // int e^{-(1 + 2i) p} dp = 1 / (1 + 2i)
  auto r = integrate_damped([](double p) { return std::exp(std::complex<double>(-1.0, -2.0) * p); }, 1.0, {});
  CHECK(std::abs(r.value - 1.0 / std::complex<double>(1.0, 2.0)) < 1e-12);
}

TEST_CASE("integrate_damped: linear on random kernel pairs") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.2, 3.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double a1 = u(rng), a2 = u(rng), k1 = u(rng), k2 = u(rng);
    auto f = [&](double p) { return std::cos(k1 * p) * std::exp(-a1 * p); };
    auto g = [&](double p) { return p * std::sin(k2 * p) * std::exp(-a2 * p); };
    const double rate = std::min(a1, a2);
    const auto rf = integrate_damped(f, a1, {});
    const auto rg = integrate_damped(g, a2, {});
    const auto rs = integrate_damped([&](double p) { return f(p) + g(p); }, rate, {});
    CHECK(std::abs(rs.value - rf.value - rg.value) <= rs.error + rf.error + rg.error + 1e-12);
    // and against the closed forms
    CHECK(rf.value == doctest::Approx(a1 / (a1 * a1 + k1 * k1)).epsilon(1e-10));
    CHECK(rg.value == doctest::Approx(2 * a2 * k2 / std::pow(a2 * a2 + k2 * k2, 2)).epsilon(1e-10));
  }
}

TEST_CASE("integrate_damped: failures") {
  QuadratureSpec tight;
  tight.max_panels = 2;
  tight.rel_tol = 1e-15;
  tight.abs_tol = 1e-300;
  CHECK_THROWS_AS(integrate_damped([](double p) { return std::sin(40.0 * p) * std::exp(-0.01 * p); }, 0.01, tight),
                  QuadratureError);
  CHECK_THROWS_AS(integrate_damped([](double p) { return std::exp(-p); }, 0.0, {}), std::invalid_argument);
  QuadratureSpec bad;
  bad.abs_tol = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = {};
  bad.oscillation_wavelength = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("tridiag_ground: oscillator ground levels") {
  CHECK(oscillator_ground(harmonic, 20.0, 4000) == doctest::Approx(3.0).epsilon(1e-5 / 3));
  CHECK(std::abs(oscillator_ground(centrifugal2, 20.0, 4000) - 5.0) < 1e-4);
  CHECK(std::abs(oscillator_ground(centrifugal1, 12.0, 8000) - (2.0 + std::sqrt(5.0))) < 1e-4);
}

TEST_CASE("tridiag_ground: several eigenvalues ascend and match the odd oscillator levels") {
  const auto ev = tridiag_ground(discretize_radial(harmonic, 20.0, 4000).problem, 3);
  REQUIRE(ev.size() == 3);
  CHECK(ev[0] < ev[1]);
  CHECK(ev[1] < ev[2]);
  CHECK(std::abs(ev[1] - 7.0) < 1e-4);
  CHECK(std::abs(ev[2] - 11.0) < 1e-4);
}

TEST_CASE("tridiag_ground: invariant under grid reversal") {
  auto disc = discretize_radial(centrifugal1, 12.0, 3000);
  auto reversed = disc.problem;
  std::reverse(reversed.diagonal.begin(), reversed.diagonal.end());
  std::reverse(reversed.off_diagonal.begin(), reversed.off_diagonal.end());
  const auto a = tridiag_ground(disc.problem, 2);
  const auto b = tridiag_ground(reversed, 2);
  for (std::size_t i = 0; i < 2; ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-12 * std::max(1.0, std::abs(a[i])));
}

TEST_CASE("tridiag_ground: h^2 convergence") {
  struct Case {
    double (*w)(double);
    double exact;
  };
  for (const auto& c : {Case{harmonic, 3.0}, Case{centrifugal2, 5.0}, Case{centrifugal1, 2.0 + std::sqrt(5.0)}}) {
    // n + 1 doubles so that h halves exactly
    const double e1 = oscillator_ground(c.w, 12.0, 499) - c.exact;
    const double e2 = oscillator_ground(c.w, 12.0, 999) - c.exact;
    const double e3 = oscillator_ground(c.w, 12.0, 1999) - c.exact;
    CAPTURE(e1);
    CAPTURE(e2);
    CAPTURE(e3);
    CHECK(std::log2(e1 / e2) == doctest::Approx(2.0).epsilon(0.05));
    CHECK(std::log2(e2 / e3) == doctest::Approx(2.0).epsilon(0.05));
    // Richardson removes the leading term
    CHECK(std::abs((4 * e3 - e2) / 3) < 0.05 * std::abs(e3));
  }
}

TEST_CASE("sturm_count and eigenvector") {
  auto disc = discretize_radial(harmonic, 20.0, 2000);
  CHECK(sturm_count(disc.problem, 2.9) == 0);
  CHECK(sturm_count(disc.problem, 3.1) == 1);
  CHECK(sturm_count(disc.problem, 7.1) == 2);
  const double lambda = tridiag_ground(disc.problem, 1).front();
  const auto v = tridiag_eigenvector(disc.problem, lambda);
  double norm = 0.0;
  for (double x : v) norm += x * x * disc.problem.grid_step;
  CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
  // u = q e^{-q^2/2} normalized: int q^2 e^{-q^2} = sqrt(pi)/4
  const double c = std::sqrt(4.0 / std::sqrt(M_PI));
  for (std::size_t k = 0; k < v.size(); k += 97) {
    const double q = disc.nodes[k];
    CHECK(std::abs(v[k] - c * q * std::exp(-q * q / 2)) < 1e-4);
  }
}

TEST_CASE("tridiag: precondition violations") {
  TridiagProblem p{{1.0, 2.0}, {0.5, 0.5}, 1.0};
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  TridiagProblem ok{{1.0, 2.0}, {0.5}, 1.0};
  CHECK_THROWS_AS(tridiag_ground(ok, 0), std::invalid_argument);
  CHECK_THROWS_AS(tridiag_ground(ok, 3), std::invalid_argument);
}

namespace {

struct Quadratic {
  std::vector<double> diag;
  EnergyFn energy() const {
    return [d = diag](std::span<const double> x) {
      double e = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) e += d[i] * x[i] * x[i];
      return e;
    };
  }
  GradientFn gradient() const {
    return [d = diag](std::span<const double> x, std::span<double> g) {
      for (std::size_t i = 0; i < x.size(); ++i) g[i] = 2.0 * d[i] * x[i];
    };
  }
};

std::vector<double> unit(std::vector<double> v) {
  double n = 0.0;
  for (double x : v) n += x * x;
  for (double& x : v) x /= std::sqrt(n);
  return v;
}

}  // namespace

TEST_CASE("minimize_functional: <u, diag(1,2,3) u> on the sphere") {
  const Quadratic q{{1.0, 2.0, 3.0}};
  StepControl control;
  control.gradient_tolerance = 1e-10;
  control.record_trace = true;
  const auto r = minimize_functional(q.energy(), q.gradient(), unit({0.3, 0.8, 0.5}), control);
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(std::abs(r.state[0]) - 1.0) < 1e-9);
  CHECK(std::abs(r.state[1]) < 1e-9);
  CHECK(std::abs(r.state[2]) < 1e-9);
  for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i] <= r.trace[i - 1] + 1e-14);
}

TEST_CASE("minimize_functional: discrete 1D oscillator Rayleigh quotient") {
  // <u, (-D2/2 + x^2/2) u> on [-10, 10]; ground 1/2.
  const std::size_t n = 3999;
  const double h = 20.0 / static_cast<double>(n + 1);
  auto x_of = [&](std::size_t i) { return -10.0 + h * static_cast<double>(i + 1); };
  auto apply = [=](std::span<const double> u, std::span<double> out) {
    for (std::size_t i = 0; i < n; ++i) {
      const double left = i > 0 ? u[i - 1] : 0.0, right = i + 1 < n ? u[i + 1] : 0.0;
      const double x = x_of(i);
      out[i] = -0.5 * (left - 2 * u[i] + right) / (h * h) + 0.5 * x * x * u[i];
    }
  };
  EnergyFn energy = [=](std::span<const double> u) {
    std::vector<double> au(n);
    apply(u, au);
    double e = 0.0;
    for (std::size_t i = 0; i < n; ++i) e += u[i] * au[i];
    return e;
  };
  GradientFn gradient = [=](std::span<const double> u, std::span<double> g) {
    apply(u, g);
    for (double& v : g) v *= 2.0;
  };
  std::vector<double> init(n);
  for (std::size_t i = 0; i < n; ++i) init[i] = std::exp(-std::abs(x_of(i)));  // wrong shape
  StepControl control;
  control.rule = StepRule::barzilai_borwein;
  control.gradient_tolerance = 1e-9;
  control.record_trace = true;
  const auto r = minimize_functional(energy, gradient, unit(init), control);
  CHECK(std::abs(r.value - 0.5) < 1e-6);
  // same matrix, tridiagonal oracle (diagonal 1/h^2 + x^2/2, off -1/(2h^2))
  TridiagProblem t;
  t.grid_step = h;
  for (std::size_t i = 0; i < n; ++i) t.diagonal.push_back(1.0 / (h * h) + 0.5 * x_of(i) * x_of(i));
  t.off_diagonal.assign(n - 1, -0.5 / (h * h));
  CHECK(std::abs(r.value - tridiag_ground(t, 1).front()) < 1e-9);
  double norm = 0.0;
  for (double v : r.state) norm += v * v;
  CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t i = 1; i < r.trace.size(); ++i) {
    CHECK(r.trace[i] <= r.trace[i - 1] + control.energy_slack * std::max(1.0, r.trace[i - 1]));
  }
}

TEST_CASE("minimize_functional: gradient probe rejects a wrong gradient") {
  const Quadratic q{{1.0, 2.0, 3.0}};
  GradientFn wrong = [](std::span<const double> x, std::span<double> g) {
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = 2.0 * x[i];
  };
  CHECK(gradient_probe_mismatch(q.energy(), q.gradient(), unit({0.3, 0.8, 0.5}), 1) < 1e-6);
  CHECK(gradient_probe_mismatch(q.energy(), wrong, unit({0.3, 0.8, 0.5}), 1) > 1e-2);
  CHECK_THROWS_AS(minimize_functional(q.energy(), wrong, unit({0.3, 0.8, 0.5}), {}), std::invalid_argument);
}

TEST_CASE("minimize_functional: stagnation carries the last state") {
  const Quadratic q{{1.0, 2.0, 3.0}};
  StepControl control;
  control.max_iterations = 2;
  control.gradient_tolerance = 1e-14;
  try {
    minimize_functional(q.energy(), q.gradient(), unit({0.3, 0.8, 0.5}), control);
    FAIL("expected stagnation");
  } catch (const StagnationError& e) {
    CHECK(e.state().size() == 3);
    CHECK(e.gradient_norm() > 1e-14);
  }
  CHECK_THROWS_AS(minimize_functional(q.energy(), q.gradient(), {1.0, 1.0, 0.0}, control), std::invalid_argument);
}
