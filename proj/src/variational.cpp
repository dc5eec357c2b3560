#include "relbosons/variational.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace relbosons::variational {

using numkernel::QuadratureSpec;
using std::numbers::pi;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

// ----------------------------------------------------------------- functional

DispersionFunctional DispersionFunctional::spin0(DParam d) { return {Kind::spin0, d}; }
DispersionFunctional DispersionFunctional::spin1_longitudinal(DParam d) { return {Kind::spin1_longitudinal, d}; }
DispersionFunctional DispersionFunctional::transverse_nonrel() { return {Kind::transverse_nonrel, DParam::finite(0.0)}; }
DispersionFunctional DispersionFunctional::transverse_massless() {
  return {Kind::transverse_massless, DParam::infinity()};
}

double DispersionFunctional::weight_q2(double q) const {
  const double q2 = q * q;
  switch (kind_) {
    case Kind::spin0: {
      if (d_.is_infinite()) return 1.0;
      const double d2 = d_.value() * d_.value();
      const double s = 1.0 + d2 * q2;
      return q2 * (d2 / s + d2 / (2.0 * s * s));
    }
    case Kind::spin1_longitudinal: {
      if (d_.is_infinite()) return 1.0;
      const double d2 = d_.value() * d_.value();
      const double s = 1.0 + d2 * q2;
      return 1.0 + 1.0 / s + q2 * d2 / (2.0 * s * s);
    }
    case Kind::transverse_nonrel:
      return 0.0;
    case Kind::transverse_massless:
      return 1.0;
  }
  return 0.0;
}

double DispersionFunctional::weight(double q) const {
  if (kind_ == Kind::transverse_nonrel) return 0.0;
  if (kind_ == Kind::spin0 && !d_.is_infinite()) {
    const double d2 = d_.value() * d_.value();
    const double s = 1.0 + d2 * q * q;
    return d2 / s + d2 / (2.0 * s * s);
  }
  if (!(q > 0.0)) return std::numeric_limits<double>::infinity();
  return weight_q2(q) / (q * q);
}

bool DispersionFunctional::homogeneous() const {
  switch (kind_) {
    case Kind::spin0:
    case Kind::spin1_longitudinal:
      return d_.is_infinite() || d_.is_zero();
    default:
      return true;
  }
}

std::optional<potentials::PotentialSpec> DispersionFunctional::eigen_spec() const {
  switch (kind_) {
    case Kind::spin0:
      return potentials::PotentialSpec::scalar(d_, 0);
    case Kind::spin1_longitudinal:
      return potentials::PotentialSpec::longitudinal(d_, 0);
    case Kind::transverse_nonrel:
      return potentials::PotentialSpec::scalar(DParam::finite(0.0), 0);
    case Kind::transverse_massless:
      return std::nullopt;
  }
  return std::nullopt;
}

std::string DispersionFunctional::describe() const {
  switch (kind_) {
    case Kind::spin0:
      return "spin0 d=" + d_.str();
    case Kind::spin1_longitudinal:
      return "spin1-longitudinal d=" + d_.str();
    case Kind::transverse_nonrel:
      return "spin1-transverse m=inf";
    case Kind::transverse_massless:
      return "spin1-transverse m=0";
  }
  return "?";
}

// ------------------------------------------------------------------- geometry

void RadialGeometry::validate() const {
  if (!(q_max > 0.0) || n < 8) throw std::invalid_argument("RadialGeometry: need q_max > 0 and n >= 8");
}

namespace {

std::size_t cells(double length, double step) {
  const double c = length / step;
  const auto k = static_cast<std::size_t>(std::llround(c));
  if (std::abs(c - static_cast<double>(k)) > 1e-6 * c) {
    throw std::invalid_argument("CylindricalGeometry: step must divide the box");
  }
  return k;
}

}  // namespace

void CylindricalGeometry::validate() const {
  if (!(perp_max > 0.0) || !(z_half > 0.0) || !(perp_step > 0.0) || !(z_step > 0.0)) {
    throw std::invalid_argument("CylindricalGeometry: lengths must be positive");
  }
  if (perp_count() < 2 || z_count() < 2) throw std::invalid_argument("CylindricalGeometry: grid too coarse");
}

std::size_t CylindricalGeometry::perp_count() const {
  const std::size_t c = cells(perp_max, perp_step);
  return include_axis ? c : c - 1;
}

std::size_t CylindricalGeometry::z_count() const { return cells(2.0 * z_half, z_step) - 1; }

CylindricalGeometry CylindricalGeometry::refined(double factor) const {
  CylindricalGeometry g = *this;
  g.perp_step *= factor;
  g.z_step *= factor;
  return g;
}

CylindricalGeometry CylindricalGeometry::scaled(double kappa) const {
  CylindricalGeometry g = *this;
  g.perp_max *= kappa;
  g.z_half *= kappa;
  g.perp_step *= kappa;
  g.z_step *= kappa;
  return g;
}

std::vector<double> sample_radial(const RadialGeometry& g, const std::function<double(double)>& f) {
  g.validate();
  std::vector<double> out(g.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = f(g.node(k));
  return out;
}

std::vector<double> sample_cylindrical(const CylindricalGeometry& g,
                                       const std::function<double(double, double)>& f) {
  g.validate();
  std::vector<double> out(g.size());
  for (std::size_t c = 0; c < g.perp_count(); ++c) {
    for (std::size_t r = 0; r < g.z_count(); ++r) out[g.index(c, r)] = f(g.perp(c), g.z(r));
  }
  return out;
}

// ------------------------------------------------------------ discrete forms
//
// Every geometry is reduced to four quadratic forms in the samples f:
//   N2 = sum mu f^2, Q = sum mu q^2 f^2, W = sum mu w f^2,
//   K = sum over faces c (s_a f_a - s_b f_b)^2
// with cell measures mu (the common 4 pi or 2 pi factor dropped). Radial
// faces act on u = q f (s = q): int q^2 |f'|^2 dq = int |u'|^2 dq. The
// minimizer works in v = sqrt(mu) f so that N2 = |v|^2.

namespace {

struct Forms {
  double n2 = 0.0, q = 0.0, k = 0.0, w = 0.0;
  double a() const { return q / n2; }
  double b() const { return (k + w) / n2; }
};

class Discretization {
 public:
  Discretization(const Geometry& geometry, const DispersionFunctional& functional) {
    std::visit(overloaded{[&](const RadialGeometry& g) { setup(g, functional); },
                          [&](const CylindricalGeometry& g) { setup(g, functional); }},
               geometry);
  }

  std::size_t size() const { return mu_.size(); }
  std::span<const double> measure() const { return mu_; }

  /// Values of the forms at f. With nonempty q_f / h_f also half the
  /// derivatives d/df of Q and of K + W.
  Forms evaluate(std::span<const double> f, std::span<double> q_f = {}, std::span<double> h_f = {}) const {
    if (f.size() != size()) throw std::invalid_argument("dispersion: sample count does not match geometry");
    Forms out;
    const bool grads = !q_f.empty();
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double mf = mu_[i] * f[i];
      out.n2 += mf * f[i];
      out.q += q2_[i] * mf * f[i];
      out.w += w_[i] * mf * f[i];
      if (grads) {
        q_f[i] = q2_[i] * mf;
        h_f[i] = w_[i] * mf;
      }
    }
    for (const auto& face : faces_) {
      const double fb = face.b == kBoundary ? 0.0 : face.sb * f[face.b];
      const double diff = face.sa * f[face.a] - fb;
      out.k += face.c * diff * diff;
      if (grads) {
        h_f[face.a] += face.c * face.sa * diff;
        if (face.b != kBoundary) h_f[face.b] -= face.c * face.sb * diff;
      }
    }
    return out;
  }

 private:
  static constexpr std::size_t kBoundary = std::numeric_limits<std::size_t>::max();
  struct Face {
    std::size_t a, b;
    double c, sa, sb;
  };

  void setup(const RadialGeometry& g, const DispersionFunctional& functional) {
    g.validate();
    if (functional.kind() == DispersionFunctional::Kind::transverse_massless) {
      throw std::invalid_argument("transverse massless functional needs a cylindrical geometry");
    }
    const double h = g.step();
    const std::size_t n = g.size();
    mu_.resize(n);
    q2_.resize(n);
    w_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double q = g.node(k);
      mu_[k] = q * q * h;
      q2_[k] = q * q;
      w_[k] = functional.weight_q2(q) / (q * q);
    }
    const double c = 1.0 / h;
    faces_.push_back({0, kBoundary, c, g.node(0), 0.0});
    for (std::size_t k = 0; k + 1 < n; ++k) faces_.push_back({k + 1, k, c, g.node(k + 1), g.node(k)});
    faces_.push_back({n - 1, kBoundary, c, g.node(n - 1), 0.0});
  }

  void setup(const CylindricalGeometry& g, const DispersionFunctional& functional) {
    g.validate();
    const bool massless = functional.kind() == DispersionFunctional::Kind::transverse_massless;
    if (!massless && functional.kind() != DispersionFunctional::Kind::transverse_nonrel) {
      throw std::invalid_argument("cylindrical geometry is only defined for the transverse functionals");
    }
    if (massless && g.include_axis) {
      throw std::domain_error("transverse massless: the 1/q_perp^2 weight diverges for f nonzero on the axis");
    }
    const double hp = g.perp_step, hz = g.z_step;
    const std::size_t nc = g.perp_count(), nr = g.z_count();
    mu_.resize(g.size());
    q2_.resize(g.size());
    w_.resize(g.size());
    for (std::size_t c = 0; c < nc; ++c) {
      const double rho = g.perp(c);
      // The axis cell is the disc of radius h/2.
      const double area = rho > 0.0 ? rho * hp : hp * hp / 8.0;
      const double zc = area / hz;
      const double outer = (rho + 0.5 * hp) * hz / hp;
      for (std::size_t r = 0; r < nr; ++r) {
        const std::size_t i = g.index(c, r);
        const double z = g.z(r);
        mu_[i] = area * hz;
        q2_[i] = rho * rho + z * z;
        w_[i] = massless ? 1.0 / (rho * rho) : 0.0;
        if (r == 0) faces_.push_back({i, kBoundary, zc, 1.0, 0.0});
        if (r + 1 < nr) {
          faces_.push_back({g.index(c, r + 1), i, zc, 1.0, 1.0});
        } else {
          faces_.push_back({i, kBoundary, zc, 1.0, 0.0});
        }
        if (c == 0 && !g.include_axis) faces_.push_back({i, kBoundary, 0.5 * hz, 1.0, 0.0});
        if (c + 1 < nc) {
          faces_.push_back({g.index(c + 1, r), i, outer, 1.0, 1.0});
        } else {
          faces_.push_back({i, kBoundary, outer, 1.0, 0.0});
        }
      }
    }
  }

  std::vector<double> mu_, q2_, w_;
  std::vector<Face> faces_;
};

Forms checked_forms(const Discretization& disc, std::span<const double> f) {
  const Forms forms = disc.evaluate(f);
  if (!(forms.n2 > 0.0)) throw std::invalid_argument("dispersion: trial state has zero norm");
  if (!std::isfinite(forms.w)) throw std::domain_error("dispersion: weighted integral diverges");
  return forms;
}

}  // namespace

DispersionPair dispersion_pair(const Geometry& geometry, std::span<const double> f,
                               const DispersionFunctional& functional) {
  const Discretization disc(geometry, functional);
  const Forms forms = checked_forms(disc, f);
  return {forms.a(), forms.b(), forms.n2};
}

DispersionPair dispersion_pair(const RayleighState& state, const DispersionFunctional& functional) {
  return dispersion_pair(state.geometry, state.f_samples, functional);
}

double rayleigh_gamma(RayleighState& state, const DispersionFunctional& functional) {
  const auto pair = dispersion_pair(state, functional);
  state.norm_N2 = pair.norm_N2;
  state.delta_q2 = pair.delta_q2;
  state.delta_rq2 = pair.delta_rq2;
  state.gamma = std::sqrt(pair.delta_q2 * pair.delta_rq2);
  return state.gamma;
}

RayleighState make_state(Geometry geometry, std::vector<double> f, const DispersionFunctional& functional) {
  RayleighState s{std::move(geometry), std::move(f)};
  rayleigh_gamma(s, functional);
  return s;
}

bool axis_vanishes(const std::function<double(double, double)>& f, double perp_step) {
  // Compare on a few z rows; f ~ q_perp^k halves (k = 1) or better.
  for (double z : {0.0, 0.37, -0.81}) {
    const double near = std::abs(f(perp_step, z));
    const double far = std::abs(f(2.0 * perp_step, z));
    if (far == 0.0 && near == 0.0) continue;
    if (near >= 0.9 * far) return false;
  }
  return true;
}

// ---------------------------------------------------------------- minimizers

namespace {

struct ObjectiveFns {
  numkernel::EnergyFn energy;
  numkernel::GradientFn gradient;
};

/// Objective on v = sqrt(mu) f. Both objectives are homogeneous of degree 0.
ObjectiveFns make_objective(const Discretization& disc, Objective objective) {
  const auto mu = disc.measure();
  std::vector<double> root(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) root[i] = std::sqrt(mu[i]);
  auto to_f = [root](std::span<const double> v) {
    std::vector<double> f(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) f[i] = v[i] / root[i];
    return f;
  };
  ObjectiveFns fns;
  fns.energy = [&disc, to_f, objective](std::span<const double> v) {
    const Forms forms = disc.evaluate(to_f(v));
    const double a = forms.a(), b = forms.b();
    return objective == Objective::product ? a * b : 0.5 * (a + b);
  };
  fns.gradient = [&disc, to_f, root, objective](std::span<const double> v, std::span<double> g) {
    const auto f = to_f(v);
    std::vector<double> qf(v.size()), hf(v.size());
    const Forms forms = disc.evaluate(f, qf, hf);
    const double a = forms.a(), b = forms.b();
    // dA/dv = 2 (Q v - A v) / N2 with Q v = qf / root.
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double da = 2.0 * (qf[i] / root[i] - a * v[i]) / forms.n2;
      const double db = 2.0 * (hf[i] / root[i] - b * v[i]) / forms.n2;
      g[i] = objective == Objective::product ? b * da + a * db : 0.5 * (da + db);
    }
  };
  return fns;
}

std::vector<double> to_v(const Discretization& disc, std::span<const double> f) {
  const auto mu = disc.measure();
  std::vector<double> v(f.size());
  double norm = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    v[i] = std::sqrt(mu[i]) * std::abs(f[i]);
    norm += v[i] * v[i];
  }
  if (!(norm > 0.0)) throw std::invalid_argument("minimize: initial state has zero norm");
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

std::vector<double> to_f(const Discretization& disc, std::span<const double> v) {
  const auto mu = disc.measure();
  std::vector<double> f(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) f[i] = std::abs(v[i]) / std::sqrt(mu[i]);
  return f;
}

MinimizeReport finish(Geometry geometry, std::vector<double> f, const DispersionFunctional& functional,
                      const MinimizeOptions& options, std::size_t iterations) {
  MinimizeReport report;
  report.state = make_state(std::move(geometry), std::move(f), functional);
  report.stationarity = stationarity_residual(report.state, functional, options.objective);
  if (options.balance && functional.homogeneous()) {
    // A scales as kappa^2 and B as kappa^-2 under q -> kappa q.
    const double kappa = std::pow(report.state.delta_rq2 / report.state.delta_q2, 0.25);
    std::visit(overloaded{[&](RadialGeometry& g) { g.q_max *= kappa; },
                          [&](CylindricalGeometry& g) { g = g.scaled(kappa); }},
               report.state.geometry);
    rayleigh_gamma(report.state, functional);
  }
  report.rayleigh_quotient = 0.5 * (report.state.delta_q2 + report.state.delta_rq2);
  report.objective_value = options.objective == Objective::product ? report.state.gamma : report.rayleigh_quotient;
  report.iterations = iterations;
  return report;
}

}  // namespace

MinimizeReport minimize_radial(const DispersionFunctional& functional, const RadialGeometry& geometry,
                               std::vector<double> init, const MinimizeOptions& options) {
  if (functional.kind() == DispersionFunctional::Kind::transverse_massless) {
    throw std::invalid_argument("minimize_radial: transverse massless needs the cylindrical minimizer");
  }
  const Geometry g = geometry;
  const Discretization disc(g, functional);
  const auto fns = make_objective(disc, options.objective);
  auto result = numkernel::minimize_functional(fns.energy, fns.gradient, to_v(disc, init), options.control);
  return finish(g, to_f(disc, result.state), functional, options, result.iterations);
}

namespace {

/// Bilinear interpolation of f on `from` at every node of `to`, with the
/// zero boundary values (axis when excluded, outer edges) included.
std::vector<double> transfer(const CylindricalGeometry& from, std::span<const double> f,
                             const CylindricalGeometry& to) {
  const std::size_t first = from.first_column();
  const std::size_t nc = from.perp_count(), nr = from.z_count();
  // Node (j, k): q_perp = j h_perp (j = 0 .. nc + first), q_z = -z_half + k h_z (k = 0 .. nr + 1).
  auto node = [&](long j, long k) -> double {
    if (k <= 0 || k >= static_cast<long>(nr) + 1) return 0.0;
    const long col = j - static_cast<long>(first);
    if (col < 0 || col >= static_cast<long>(nc)) return 0.0;
    return f[from.index(static_cast<std::size_t>(col), static_cast<std::size_t>(k - 1))];
  };
  std::vector<double> out(to.size());
  for (std::size_t c = 0; c < to.perp_count(); ++c) {
    const double x = to.perp(c) / from.perp_step;
    const long j = static_cast<long>(std::floor(x));
    const double tx = x - static_cast<double>(j);
    for (std::size_t r = 0; r < to.z_count(); ++r) {
      const double y = (to.z(r) + from.z_half) / from.z_step;
      const long k = static_cast<long>(std::floor(y));
      const double ty = y - static_cast<double>(k);
      out[to.index(c, r)] = (1 - tx) * (1 - ty) * node(j, k) + tx * (1 - ty) * node(j + 1, k) +
                            (1 - tx) * ty * node(j, k + 1) + tx * ty * node(j + 1, k + 1);
    }
  }
  return out;
}

}  // namespace

MinimizeReport minimize_transverse_massless(const CylindricalGeometry& geometry, std::vector<double> init,
                                            const MinimizeOptions& options) {
  geometry.validate();
  if (geometry.include_axis) {
    throw std::invalid_argument("minimize_transverse_massless: f = 0 on the axis, include_axis must be off");
  }
  if (init.size() != geometry.size()) throw std::invalid_argument("minimize_transverse_massless: init size");
  const auto functional = DispersionFunctional::transverse_massless();

  std::vector<CylindricalGeometry> levels{geometry};
  if (options.cascade_start_step > 0.0) {
    while (true) {
      const auto coarse = levels.back().refined(2.0);
      if (coarse.perp_step > options.cascade_start_step * (1 + 1e-9)) break;
      try {
        coarse.validate();
      } catch (const std::invalid_argument&) {
        break;
      }
      levels.push_back(coarse);
    }
  }
  std::reverse(levels.begin(), levels.end());

  std::vector<double> f = levels.size() > 1 ? transfer(geometry, init, levels.front()) : std::move(init);
  std::vector<std::size_t> per_level;
  std::size_t total = 0;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    if (l > 0) f = transfer(levels[l - 1], f, levels[l]);
    const Geometry g = levels[l];
    const Discretization disc(g, functional);
    const auto fns = make_objective(disc, options.objective);
    auto control = options.control;
    control.probe_gradient = control.probe_gradient && l == 0;
    auto result = numkernel::minimize_functional(fns.energy, fns.gradient, to_v(disc, f), control);
    f = to_f(disc, result.state);
    per_level.push_back(result.iterations);
    total += result.iterations;
  }
  auto report = finish(geometry, std::move(f), functional, options, total);
  report.cascade_iterations = std::move(per_level);
  return report;
}

double stationarity_residual(const RayleighState& state, const DispersionFunctional& functional,
                             Objective objective) {
  const Discretization disc(state.geometry, functional);
  const auto v = to_v(disc, state.f_samples);
  const auto f = to_f(disc, v);
  std::vector<double> qf(v.size()), hf(v.size());
  const Forms forms = disc.evaluate(f, qf, hf);
  const double a = forms.a(), b = forms.b();
  const auto mu = disc.measure();
  double num = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double root = std::sqrt(mu[i]);
    const double qv = qf[i] / root / forms.n2, hv = hf[i] / root / forms.n2;
    const double r = objective == Objective::product ? a * hv + b * qv - 2.0 * a * b * v[i] : hv + qv - (a + b) * v[i];
    num += r * r;
  }
  const double scale = objective == Objective::product ? 2.0 * a * b : a + b;
  return std::sqrt(num) / scale;
}

double factorization_error(const RayleighState& state) {
  const auto* g = std::get_if<CylindricalGeometry>(&state.geometry);
  if (!g) throw std::invalid_argument("factorization_error: needs a cylindrical state");
  // q_perp e^{-q^2/(2 s^2)} has <q_perp^2> + <q_z^2> = (2 + 1/2) s^2.
  const double s2 = state.delta_q2 / 2.5;
  const auto model = sample_cylindrical(*g, [s2](double rho, double z) { return rho * std::exp(-(rho * rho + z * z) / (2.0 * s2)); });
  const double fmax = *std::max_element(state.f_samples.begin(), state.f_samples.end());
  const double gmax = *std::max_element(model.begin(), model.end());
  double err = 0.0;
  for (std::size_t i = 0; i < model.size(); ++i) {
    err = std::max(err, std::abs(state.f_samples[i] / fmax - model[i] / gmax));
  }
  return err;
}

double momentum_space_position_dispersion(const kg::SpectralProfile& f, double mass) {
  const double n2 = kg::momentum_norm(f, mass);
  const auto res = numkernel::integrate_damped(
      [&](double p) {
        const double e2 = mass * mass + p * p;
        const double fp = f(p, mass), dfp = f.derivative(p, mass);
        const double w = mass * mass / (2.0 * e2 * e2) + 1.0 / e2;
        return p * p * (dfp * dfp + w * fp * fp);
      },
      f.decay_rate(mass), QuadratureSpec{});
  return 4.0 * pi * res.value / n2;
}

// ----------------------------------------------------------------- connection

namespace {

using cvec = std::array<std::complex<double>, 3>;
using rvec = std::array<double, 3>;

cvec cross(const rvec& a, const cvec& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double norm2(const cvec& v) { return std::norm(v[0]) + std::norm(v[1]) + std::norm(v[2]); }

/// p x (p x phi) - m^2 phi
cvec connection_rhs(const rvec& p, const cvec& phi, double mass) {
  const cvec inner = cross(p, phi);
  cvec out = cross(p, inner);
  for (int k = 0; k < 3; ++k) out[k] -= mass * mass * phi[k];
  return out;
}

ConnectionSample connection_sample(Ansatz ansatz, const rvec& p, double mass, TransverseNormalization normalization) {
  using cd = std::complex<double>;
  const double p2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
  const double e = std::sqrt(mass * mass + p2);
  ConnectionSample s;
  s.p = p;
  const cvec rhs_phi = [&] {
    if (ansatz == Ansatz::longitudinal) {
      const double len = std::hypot(p[0], p[1], p[2]);
      // The unit vector keeps its direction as |p| -> 0; p = 0 itself picks z.
      const rvec hat = len > 0.0 ? rvec{p[0] / len, p[1] / len, p[2] / len} : rvec{0.0, 0.0, 1.0};
      s.phi = {cd(hat[0] / mass), cd(hat[1] / mass), cd(hat[2] / mass)};
      s.pi = {cd(0.0, -mass * hat[0] / e), cd(0.0, -mass * hat[1] / e), cd(0.0, -mass * hat[2] / e)};
    } else {
      const double perp2 = p[0] * p[0] + p[1] * p[1];
      const double den = std::sqrt((normalization == TransverseNormalization::doubled_mass ? 2.0 : 1.0) * mass * mass + perp2);
      s.phi = {cd(0.0), cd(0.0), cd(1.0 / den)};
      const cvec x = connection_rhs(p, s.phi, mass);
      for (int k = 0; k < 3; ++k) s.pi[k] = cd(0.0, 1.0) * x[k] / e;
    }
    return connection_rhs(p, s.phi, mass);
  }();
  cvec diff;
  for (int k = 0; k < 3; ++k) diff[k] = cd(0.0, -e) * s.pi[k] - rhs_phi[k];
  const double scale = std::max({e * std::sqrt(norm2(s.pi)), std::sqrt(norm2(rhs_phi)), 1e-300});
  s.residual = std::sqrt(norm2(diff)) / scale;
  // Momentum-space energy density with the 1/sqrt2 of the mode normalization.
  std::complex<double> div = 0.0;
  for (int k = 0; k < 3; ++k) div += p[k] * s.pi[k];
  s.energy_ratio = 0.5 * (norm2(s.pi) + std::norm(div) / (mass * mass) + norm2(cross(p, s.phi)) + mass * mass * norm2(s.phi));
  return s;
}

}  // namespace

ConnectionReport check_connection(Ansatz ansatz, std::span<const std::array<double, 3>> momenta, double mass,
                                  TransverseNormalization normalization) {
  if (!(mass > 0.0)) throw std::invalid_argument("check_connection: mass must be positive");
  ConnectionReport report;
  for (const auto& p : momenta) {
    auto s = connection_sample(ansatz, p, mass, normalization);
    report.max_residual = std::max(report.max_residual, s.residual);
    report.max_energy_ratio_error = std::max(report.max_energy_ratio_error, std::abs(s.energy_ratio - 1.0));
    report.samples.push_back(s);
  }
  return report;
}

NormReconstruction reconstruct_norm(Ansatz ansatz, double mass, TransverseNormalization normalization,
                                    const std::function<double(double, double)>& f) {
  if (!(mass > 0.0)) throw std::invalid_argument("reconstruct_norm: mass must be positive");
  using boost::math::quadrature::gauss_kronrod;
  constexpr double inf = std::numeric_limits<double>::infinity();
  auto cylinder = [&](auto&& density) {
    auto column = [&](double rho) {
      return rho * gauss_kronrod<double, 61>::integrate([&](double z) { return density(rho, z); }, -inf, inf, 15, 1e-13);
    };
    return 2.0 * pi * gauss_kronrod<double, 61>::integrate(column, 0.0, inf, 15, 1e-13);
  };
  NormReconstruction out;
  out.reference = cylinder([&](double rho, double z) {
    const double v = f(rho, z);
    return v * v;
  });
  out.from_energy = cylinder([&](double rho, double z) {
    const double v = f(rho, z);
    return connection_sample(ansatz, {rho, 0.0, z}, mass, normalization).energy_ratio * v * v;
  });
  return out;
}

}  // namespace relbosons::variational
