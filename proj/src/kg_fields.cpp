#include "relbosons/kg_fields.hpp"

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <stdexcept>

#include "relbosons/parallel.hpp"

namespace relbosons::kg {

using numkernel::integrate_damped;
using numkernel::QuadratureSpec;
using std::numbers::pi;

SpectralProfile SpectralProfile::reference() {
  SpectralProfile p;
  p.kind_ = Kind::reference;
  return p;
}

SpectralProfile SpectralProfile::gaussian(double sigma, double centre) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian profile: sigma must be positive");
  if (!(centre >= 0.0)) throw std::invalid_argument("gaussian profile: centre must be nonnegative");
  SpectralProfile p;
  p.kind_ = Kind::gaussian;
  p.sigma_ = sigma;
  p.centre_ = centre;
  return p;
}

SpectralProfile SpectralProfile::tabulated(double p0, double dp, std::vector<double> samples) {
  if (samples.size() < 4 || !(dp > 0.0) || !(p0 >= 0.0)) {
    throw std::invalid_argument("tabulated profile: need >= 4 samples, dp > 0, p0 >= 0");
  }
  SpectralProfile p;
  p.kind_ = Kind::tabulated;
  p.p0_ = p0;
  p.dp_ = dp;
  p.samples_ = std::move(samples);
  p.spline_ = std::make_shared<const boost::math::interpolators::cardinal_cubic_b_spline<double>>(
      p.samples_.begin(), p.samples_.end(), p0, dp);
  return p;
}

SpectralProfile SpectralProfile::zero() { return SpectralProfile{}; }

double SpectralProfile::operator()(double p, double mass) const {
  switch (kind_) {
    case Kind::reference:
      return std::cos(p / mass) / std::sqrt(mass * mass + p * p);
    case Kind::gaussian: {
      const double x = (p - centre_) / sigma_;
      return std::exp(-0.5 * x * x);
    }
    case Kind::tabulated: {
      const double end = p0_ + dp_ * static_cast<double>(samples_.size() - 1);
      if (p < p0_ || p > end) return 0.0;
      return (*spline_)(p);
    }
    case Kind::zero:
      return 0.0;
  }
  return 0.0;
}

double SpectralProfile::derivative(double p, double mass) const {
  switch (kind_) {
    case Kind::reference: {
      const double e2 = mass * mass + p * p;
      const double e = std::sqrt(e2);
      return -std::sin(p / mass) / (mass * e) - std::cos(p / mass) * p / (e2 * e);
    }
    case Kind::gaussian: {
      const double x = (p - centre_) / sigma_;
      return -x / sigma_ * std::exp(-0.5 * x * x);
    }
    case Kind::tabulated: {
      const double end = p0_ + dp_ * static_cast<double>(samples_.size() - 1);
      if (p < p0_ || p > end) return 0.0;
      return spline_->prime(p);
    }
    case Kind::zero:
      return 0.0;
  }
  return 0.0;
}

double SpectralProfile::decay_rate(double mass) const {
  switch (kind_) {
    case Kind::gaussian:
      // 12 / rate (the quadrature probe window) reaches past the peak.
      return 1.0 / (0.1 * centre_ + sigma_ / 3.0);
    case Kind::tabulated:
      return 12.0 / (p0_ + dp_ * static_cast<double>(samples_.size() - 1));
    case Kind::reference:
      return 1.0 / mass;
    case Kind::zero:
      return 1.0;
  }
  return 1.0;
}

std::string SpectralProfile::describe() const {
  char buf[96];
  switch (kind_) {
    case Kind::reference:
      return "cos(p/m)/sqrt(m^2+p^2)";
    case Kind::gaussian:
      std::snprintf(buf, sizeof buf, "gaussian(sigma=%.6g, centre=%.6g)", sigma_, centre_);
      return buf;
    case Kind::tabulated:
      std::snprintf(buf, sizeof buf, "tabulated(%zu samples)", samples_.size());
      return buf;
    case Kind::zero:
      return "zero";
  }
  return "?";
}

void WavepacketParams::validate() const {
  if (!(mass > 0.0)) throw std::invalid_argument("WavepacketParams: mass must be positive");
  if (!(damping_a > 0.0)) throw std::invalid_argument("WavepacketParams: damping a must be positive");
  if (!std::isfinite(time_t)) throw std::invalid_argument("WavepacketParams: time must be finite");
}

double sph_j0(double x) {
  const double ax = std::abs(x);
  if (ax < 1e-3) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}

double sph_j1(double x) {
  const double ax = std::abs(x);
  if (ax < 0.2) {
    const double x2 = x * x;
    return x * (1.0 / 3.0 - x2 * (1.0 / 30.0 - x2 * (1.0 / 840.0 - x2 * (1.0 / 45360.0 - x2 / 3991680.0))));
  }
  return std::sin(x) / (x * x) - std::cos(x) / x;
}

namespace {

QuadratureSpec with_wavelength(QuadratureSpec quad, double r) {
  if (r > 0.0) quad.oscillation_wavelength = 2.0 * pi / r;
  return quad;
}

}  // namespace

FieldSample field_sample(double r, const WavepacketParams& params, const QuadratureSpec& quad) {
  params.validate();
  if (!(r >= 0.0)) throw std::invalid_argument("field_sample: r must be nonnegative");
  const double m = params.mass;
  const double a = params.damping_a;
  const double t = params.time_t;
  const auto spec = with_wavelength(quad, r);
  using cd = std::complex<double>;

  auto envelope = [&](double p) {
    const double e = std::sqrt(m * m + p * p);
    const double amp = params.profile(p, m) * std::exp(-a * e);
    return std::pair{e, cd(amp * std::cos(t * e), -amp * std::sin(t * e))};
  };

  const auto phi = integrate_damped(
      [&](double p) {
        const auto [e, g] = envelope(p);
        return p * p * sph_j0(p * r) * g;
      },
      a, spec);
  const auto dt = integrate_damped(
      [&](double p) {
        const auto [e, g] = envelope(p);
        return p * p * sph_j0(p * r) * cd(0.0, -e) * g;
      },
      a, spec);
  const auto dr = integrate_damped(
      [&](double p) {
        const auto [e, g] = envelope(p);
        return -p * p * p * sph_j1(p * r) * g;
      },
      a, spec);
  return {phi.value, dt.value, dr.value};
}

double charge_density(const FieldSample& s) { return -std::imag(std::conj(s.phi) * s.dt_phi); }

double energy_density(const FieldSample& s, double mass) {
  return std::norm(s.dt_phi) + std::norm(s.dr_phi) + mass * mass * std::norm(s.phi);
}

std::vector<NegativeShell> find_negative_shells(std::span<const double> radii, std::span<const double> rho,
                                                double dead_band) {
  if (radii.size() != rho.size()) throw std::invalid_argument("find_negative_shells: size mismatch");
  std::vector<NegativeShell> shells;
  bool open = false;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    const bool negative = rho[i] < -dead_band;  // NaN compares false
    if (negative && !open) {
      shells.push_back({radii[i], radii[i], rho[i]});
      open = true;
    } else if (negative) {
      shells.back().r_max = radii[i];
      shells.back().rho_min = std::min(shells.back().rho_min, rho[i]);
    } else {
      open = false;
    }
  }
  return shells;
}

std::vector<double> radial_grid(double r_max, double dr) {
  if (!(dr > 0.0) || !(r_max >= dr)) throw std::invalid_argument("radial_grid: need 0 < dr <= r_max");
  const auto n = static_cast<std::size_t>(std::floor(r_max / dr + 1e-9));
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = dr * static_cast<double>(i + 1);
  return r;
}

DensityField scan_density(const WavepacketParams& params, std::span<const double> radii,
                          const QuadratureSpec& quad) {
  params.validate();
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] >= 0.0) || (i > 0 && !(radii[i] > radii[i - 1]))) {
      throw std::invalid_argument("scan_density: radii must be nonnegative and ascending");
    }
  }
  DensityField out;
  out.radii.assign(radii.begin(), radii.end());
  out.rho.assign(radii.size(), std::nan(""));
  out.eps.assign(radii.size(), std::nan(""));
  std::vector<std::string> errors(radii.size());
  parallel_for(radii.size(), [&](std::size_t i) {
    try {
      const auto s = field_sample(radii[i], params, quad);
      out.rho[i] = charge_density(s);
      out.eps[i] = energy_density(s, params.mass);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!errors[i].empty()) out.failures.push_back({i, radii[i], errors[i]});
  }
  out.negative_shells = find_negative_shells(out.radii, out.rho);
  return out;
}

std::vector<PlanarPoint> planar_charge_map(const WavepacketParams& params, double extent, double step,
                                           const QuadratureSpec& quad) {
  if (!(step > 0.0) || !(extent >= step)) throw std::invalid_argument("planar_charge_map: bad extent/step");
  const long n = static_cast<long>(std::floor(extent / step + 1e-9));
  const long limit = n * n;
  std::map<long, double> by_key;
  for (long i = 0; i <= n; ++i) {
    for (long k = 0; k <= i; ++k) {
      const long key = i * i + k * k;
      if (key <= limit) by_key.emplace(key, 0.0);
    }
  }
  std::vector<long> keys;
  keys.reserve(by_key.size());
  for (const auto& kv : by_key) keys.push_back(kv.first);
  std::vector<double> values(keys.size());
  parallel_for(keys.size(), [&](std::size_t j) {
    const double r = step * std::sqrt(static_cast<double>(keys[j]));
    values[j] = charge_density(field_sample(r, params, quad));
  });
  for (std::size_t j = 0; j < keys.size(); ++j) by_key[keys[j]] = values[j];

  std::vector<PlanarPoint> out;
  for (long i = -n; i <= n; ++i) {
    for (long k = -n; k <= n; ++k) {
      const long key = i * i + k * k;
      if (key > limit) continue;
      out.push_back({step * static_cast<double>(i), step * static_cast<double>(k), by_key.at(key)});
    }
  }
  return out;
}

namespace {

// Composite Simpson on uniform samples; a trailing odd interval uses the trapezoid rule.
double simpson(std::span<const double> y, double h) {
  const std::size_t n = y.size();
  if (n < 2) return 0.0;
  const std::size_t even_end = (n % 2 == 1) ? n - 1 : n - 2;
  double s = 0.0;
  for (std::size_t i = 0; i + 2 <= even_end; i += 2) s += y[i] + 4.0 * y[i + 1] + y[i + 2];
  s *= h / 3.0;
  if (even_end + 1 < n) s += 0.5 * h * (y[n - 2] + y[n - 1]);
  return s;
}

void require_uniform(std::span<const double> r) {
  if (r.size() < 3) throw std::invalid_argument("radial integral: need at least 3 radii");
  const double h = r[1] - r[0];
  for (std::size_t i = 1; i < r.size(); ++i) {
    if (std::abs((r[i] - r[i - 1]) - h) > 1e-9 * std::max(1.0, r[i])) {
      throw std::invalid_argument("radial integral: radii must be uniformly spaced");
    }
  }
  if (std::abs(r[0]) > 1e-12) throw std::invalid_argument("radial integral: grid must start at r = 0");
}

}  // namespace

RadialIntegral total_charge(const WavepacketParams& params, std::span<const double> radii,
                            const QuadratureSpec& quad, double rel_tol) {
  params.validate();
  require_uniform(radii);
  const double h = radii[1] - radii[0];
  std::vector<double> integrand(radii.size());
  parallel_for(radii.size(), [&](std::size_t i) {
    const double r = radii[i];
    integrand[i] = 4.0 * pi * r * r * charge_density(field_sample(r, params, quad));
  });
  RadialIntegral out;
  out.value = simpson(integrand, h);
  const std::size_t tail_start = radii.size() - std::max<std::size_t>(2, radii.size() / 10);
  const double tail = simpson(std::span(integrand).subspan(tail_start), h);
  out.tail_fraction = std::abs(tail) / std::max(std::abs(out.value), 1e-300);
  out.tail_converged = out.value == 0.0 || out.tail_fraction <= rel_tol;
  return out;
}

namespace {

// 4 pi / (sqrt2 (2 pi)^{3/2}): angular integral of e^{ip.r} times the state normalization.
const double kStateNorm = 4.0 * pi / (std::sqrt(2.0) * std::pow(2.0 * pi, 1.5));

void require_square_integrable(const SpectralProfile& f) {
  // cos(p/m)/E_p only makes sense with the exp(-a E) damping of field_sample.
  if (f.kind() == SpectralProfile::Kind::reference) {
    throw std::invalid_argument("momentum-space state: profile is not square integrable without damping");
  }
}

}  // namespace

MomentumStateSample momentum_state_sample(double r, const SpectralProfile& f, double mass,
                                          const QuadratureSpec& quad) {
  if (!(mass > 0.0)) throw std::invalid_argument("momentum_state_sample: mass must be positive");
  require_square_integrable(f);
  if (!(r >= 0.0)) throw std::invalid_argument("momentum_state_sample: r must be nonnegative");
  const double rate = f.decay_rate(mass);
  const auto spec = with_wavelength(quad, r);
  auto energy = [mass](double p) { return std::sqrt(mass * mass + p * p); };
  const auto phi = integrate_damped(
      [&](double p) { return p * p * sph_j0(p * r) * f(p, mass) / energy(p); }, rate, spec);
  const auto pim = integrate_damped([&](double p) { return p * p * sph_j0(p * r) * f(p, mass); }, rate, spec);
  const auto dr = integrate_damped(
      [&](double p) { return p * p * p * sph_j1(p * r) * f(p, mass) / energy(p); }, rate, spec);
  return {kStateNorm * phi.value, -kStateNorm * pim.value, -kStateNorm * dr.value};
}

double momentum_norm(const SpectralProfile& f, double mass) {
  if (!(mass > 0.0)) throw std::invalid_argument("momentum_norm: mass must be positive");
  require_square_integrable(f);
  const auto res = integrate_damped(
      [&](double p) {
        const double v = f(p, mass);
        return p * p * v * v;
      },
      f.decay_rate(mass), QuadratureSpec{});
  return 4.0 * pi * res.value;
}

double momentum_p2(const SpectralProfile& f, double mass) {
  if (!(mass > 0.0)) throw std::invalid_argument("momentum_p2: mass must be positive");
  require_square_integrable(f);
  const auto res = integrate_damped(
      [&](double p) {
        const double v = f(p, mass);
        return p * p * p * p * v * v;
      },
      f.decay_rate(mass), QuadratureSpec{});
  return 4.0 * pi * res.value;
}

PositionDispersion position_dispersion_direct(const SpectralProfile& f, double mass,
                                              const DirectDispersionOptions& options) {
  if (!(mass > 0.0)) throw std::invalid_argument("position_dispersion_direct: mass must be positive");
  if (!(options.dr > 0.0) || !(options.chunk >= 2.0 * options.dr) || !(options.r_limit >= options.chunk)) {
    throw std::invalid_argument("position_dispersion_direct: need 0 < 2 dr <= chunk <= r_limit");
  }
  // Even number of intervals per chunk so each chunk is a closed Simpson panel.
  auto per_chunk = static_cast<std::size_t>(std::llround(options.chunk / options.dr));
  if (per_chunk % 2 == 1) ++per_chunk;
  const double h = options.chunk / static_cast<double>(per_chunk);

  PositionDispersion out;
  out.momentum_norm = momentum_norm(f, mass);
  double e_total = 0.0;
  double r2_total = 0.0;
  double r0 = 0.0;
  out.tail_converged = false;
  while (r0 < options.r_limit - 1e-12) {
    std::vector<double> eps(per_chunk + 1);
    parallel_for(eps.size(), [&](std::size_t i) {
      const double r = r0 + h * static_cast<double>(i);
      const auto s = momentum_state_sample(r, f, mass, options.quad);
      eps[i] = s.pi_im * s.pi_im + s.dr_phi * s.dr_phi + mass * mass * s.phi * s.phi;
    });
    std::vector<double> w0(eps.size()), w2(eps.size());
    for (std::size_t i = 0; i < eps.size(); ++i) {
      const double r = r0 + h * static_cast<double>(i);
      w0[i] = 4.0 * pi * r * r * eps[i];
      w2[i] = w0[i] * r * r;
    }
    const double de = simpson(w0, h);
    const double d2 = simpson(w2, h);
    e_total += de;
    r2_total += d2;
    r0 += options.chunk;
    if (std::abs(de) <= options.rel_tol * std::abs(e_total) &&
        std::abs(d2) <= options.rel_tol * std::abs(r2_total)) {
      out.tail_converged = true;
      break;
    }
  }
  out.r_max = r0;
  out.energy_integral = e_total;
  out.delta_r2 = r2_total / out.momentum_norm;
  return out;
}

}  // namespace relbosons::kg
