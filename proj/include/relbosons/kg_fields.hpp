#pragma once

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "relbosons/numkernel/quadrature.hpp"

namespace relbosons::kg {

/// Real spectral profile f(p) on [0, inf).
class SpectralProfile {
 public:
  enum class Kind { reference, gaussian, tabulated, zero };

  /// cos(p/m) / sqrt(m^2 + p^2)
  static SpectralProfile reference();
  /// exp(-(p - centre)^2 / (2 sigma^2))
  static SpectralProfile gaussian(double sigma, double centre = 0.0);
  /// Cubic B-spline through uniformly spaced samples f(p_0 + k dp); zero beyond.
  static SpectralProfile tabulated(double p0, double dp, std::vector<double> samples);
  static SpectralProfile zero();

  double operator()(double p, double mass) const;
  double derivative(double p, double mass) const;
  Kind kind() const { return kind_; }
  /// Exponential rate that bounds |f| well enough to truncate p-integrals of
  /// a t = 0 state; probe windows of 12 / rate cover the peak.
  double decay_rate(double mass) const;
  std::string describe() const;

 private:
  Kind kind_ = Kind::zero;
  double sigma_ = 1.0;
  double centre_ = 0.0;
  double p0_ = 0.0;
  double dp_ = 1.0;
  std::vector<double> samples_;
  std::shared_ptr<const boost::math::interpolators::cardinal_cubic_b_spline<double>> spline_;
};

struct WavepacketParams {
  double mass = 1.0;
  double damping_a = 0.5;
  double time_t = 0.0;
  SpectralProfile profile = SpectralProfile::reference();

  void validate() const;
};

/// phi, its time derivative, and its radial derivative at one radius.
struct FieldSample {
  std::complex<double> phi;
  std::complex<double> dt_phi;
  std::complex<double> dr_phi;
};

/// Spherical Bessel j0, j1 with series near the origin.
double sph_j0(double x);
double sph_j1(double x);

/// phi(r,t) = (1/r) int_0^inf dp p sin(pr) f(p) exp(-(a + i t) E_p),
/// written as int p^2 j0(pr) ... so that r = 0 needs no special case.
FieldSample field_sample(double r, const WavepacketParams& params,
                         const numkernel::QuadratureSpec& quad = {});

/// (i/2)(phi* dt phi - phi dt phi*) evaluated as -Im(phi* dt phi).
double charge_density(const FieldSample& s);

/// |dt phi|^2 + |grad phi|^2 + m^2 |phi|^2 for a radial field.
double energy_density(const FieldSample& s, double mass);

struct NegativeShell {
  double r_min;
  double r_max;
  double rho_min;
};

struct ScanFailure {
  std::size_t index;
  double radius;
  std::string message;
};

struct DensityField {
  std::vector<double> radii;
  std::vector<double> rho;
  std::vector<double> eps;
  std::vector<NegativeShell> negative_shells;
  std::vector<ScanFailure> failures;
};

/// Samples below -dead_band count as negative.
inline constexpr double kShellDeadBand = 1e-12;

/// Maximal runs of grid points with rho < -dead_band.
std::vector<NegativeShell> find_negative_shells(std::span<const double> radii,
                                                std::span<const double> rho,
                                                double dead_band = kShellDeadBand);

/// Radii 0.01, 0.02, ..., r_max (the reference viewing window at the default step).
std::vector<double> radial_grid(double r_max = 6.0, double dr = 0.01);

DensityField scan_density(const WavepacketParams& params, std::span<const double> radii,
                          const numkernel::QuadratureSpec& quad = {});

struct PlanarPoint {
  double x;
  double z;
  double rho;
};

/// rho(x, 0, z) on the square grid [-extent, extent]^2, points with
/// sqrt(x^2 + z^2) <= extent only. Each distinct radius is evaluated once and
/// shared by all pixels at that radius.
std::vector<PlanarPoint> planar_charge_map(const WavepacketParams& params, double extent, double step,
                                           const numkernel::QuadratureSpec& quad = {});

struct RadialIntegral {
  double value = 0.0;
  /// Fraction of |value| contributed by the outermost 10% of the range.
  double tail_fraction = 0.0;
  bool tail_converged = true;
};

/// 4 pi int rho r^2 dr by composite Simpson on a uniform grid starting at r = 0.
RadialIntegral total_charge(const WavepacketParams& params, std::span<const double> radii,
                            const numkernel::QuadratureSpec& quad = {}, double rel_tol = 1e-6);

/// Field built at t = 0 from a momentum amplitude f(p):
///   phi(r) = int d^3p e^{ip.r} f / (sqrt2 (2pi)^{3/2} E_p),
///   pi(r)  = -i int d^3p e^{ip.r} f / (sqrt2 (2pi)^{3/2}).
struct MomentumStateSample {
  double phi;     // real
  double pi_im;   // pi = i * pi_im
  double dr_phi;
};

MomentumStateSample momentum_state_sample(double r, const SpectralProfile& f, double mass,
                                          const numkernel::QuadratureSpec& quad = {});

struct PositionDispersion {
  double delta_r2 = 0.0;
  double energy_integral = 0.0;  // int eps d^3r
  double momentum_norm = 0.0;    // int |f|^2 d^3p
  double r_max = 0.0;
  bool tail_converged = true;
};

struct DirectDispersionOptions {
  double dr = 0.01;
  double chunk = 1.0;
  double r_limit = 200.0;
  double rel_tol = 1e-12;
  numkernel::QuadratureSpec quad{};
};

/// Delta r^2 = (1/N^2) int r^2 eps(r) d^3r by position-space quadrature.
PositionDispersion position_dispersion_direct(const SpectralProfile& f, double mass,
                                              const DirectDispersionOptions& options = {});

/// int |f|^2 d^3p and int p^2 |f|^2 d^3p.
double momentum_norm(const SpectralProfile& f, double mass);
double momentum_p2(const SpectralProfile& f, double mass);

}  // namespace relbosons::kg
