#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "relbosons/kg_fields.hpp"
#include "relbosons/numkernel/minimize.hpp"
#include "relbosons/potentials.hpp"

namespace relbosons::variational {

using potentials::DParam;

/// Position-dispersion functional in rescaled momentum units:
///   Delta r_q^2 = (<|grad f|^2> + <weight |f|^2>) / N^2.
class DispersionFunctional {
 public:
  enum class Kind { spin0, spin1_longitudinal, transverse_nonrel, transverse_massless };

  static DispersionFunctional spin0(DParam d);
  static DispersionFunctional spin1_longitudinal(DParam d);
  static DispersionFunctional transverse_nonrel();
  static DispersionFunctional transverse_massless();

  Kind kind() const { return kind_; }
  DParam d() const { return d_; }
  /// Radial kinds: weight as a function of |q|. Transverse massless: of q_perp.
  double weight(double q) const;
  /// q^2 * weight(q), finite at q = 0 for every radial kind.
  double weight_q2(double q) const;
  /// Weight has no scale (d = 0, d = inf, both transverse limits), so the
  /// product Delta q^2 Delta r_q^2 is invariant under f(q) -> f(s q).
  bool homogeneous() const;
  /// Spin and channel of the matching radial eigenproblem (radial kinds only).
  std::optional<potentials::PotentialSpec> eigen_spec() const;
  std::string describe() const;

 private:
  DispersionFunctional(Kind k, DParam d) : kind_(k), d_(d) {}
  Kind kind_;
  DParam d_;
};

/// f(|q|) at q_k = k h, k = 1..n, h = q_max / (n + 1); f = 0 at q = 0 (in the
/// sense u = q f = 0) and at q_max. The same nodes as the eigensolver matrix.
struct RadialGeometry {
  double q_max = 12.0;
  std::size_t n = 2000;

  void validate() const;
  double step() const { return q_max / static_cast<double>(n + 1); }
  double node(std::size_t k) const { return step() * static_cast<double>(k + 1); }
  std::size_t size() const { return n; }
};

/// f(q_perp, q_z) on cell centres q_perp = i h_perp (i = i0..n_perp),
/// q_z = -z_half + k h_z (k = 1..n_z - 1). Zero on q_perp = perp_max and
/// |q_z| = z_half. The axis column (i = 0) is an unknown only when
/// include_axis is set; otherwise f = 0 there.
struct CylindricalGeometry {
  double perp_max = 8.0;
  double z_half = 8.0;
  double perp_step = 0.02;
  double z_step = 0.02;
  bool include_axis = false;

  void validate() const;
  std::size_t perp_count() const;  // unknown columns
  std::size_t z_count() const;     // unknown rows
  std::size_t size() const { return perp_count() * z_count(); }
  std::size_t first_column() const { return include_axis ? 0 : 1; }
  double perp(std::size_t column) const { return perp_step * static_cast<double>(column + first_column()); }
  double z(std::size_t row) const { return -z_half + z_step * static_cast<double>(row + 1); }
  std::size_t index(std::size_t column, std::size_t row) const { return column * z_count() + row; }
  /// Grid with both steps halved (or multiplied by `factor`) on the same box.
  CylindricalGeometry refined(double factor = 0.5) const;
  /// Same node pattern with every length multiplied by `kappa`.
  CylindricalGeometry scaled(double kappa) const;
};

using Geometry = std::variant<RadialGeometry, CylindricalGeometry>;

struct RayleighState {
  Geometry geometry;
  std::vector<double> f_samples;
  double norm_N2 = 0.0;
  double delta_q2 = 0.0;
  double delta_rq2 = 0.0;
  double gamma = 0.0;  // sqrt(delta_q2 * delta_rq2)
};

struct DispersionPair {
  double delta_q2 = 0.0;
  double delta_rq2 = 0.0;
  double norm_N2 = 0.0;
};

/// Samples a closed-form trial function onto a geometry. Radial: f(q).
/// Cylindrical: f(q_perp, q_z).
std::vector<double> sample_radial(const RadialGeometry& g, const std::function<double(double)>& f);
std::vector<double> sample_cylindrical(const CylindricalGeometry& g,
                                       const std::function<double(double, double)>& f);

/// Throws std::domain_error when the weighted integral diverges (transverse
/// massless with f not vanishing on the axis).
DispersionPair dispersion_pair(const Geometry& geometry, std::span<const double> f,
                               const DispersionFunctional& functional);
DispersionPair dispersion_pair(const RayleighState& state, const DispersionFunctional& functional);

/// Fills norm, dispersions and gamma of a state in place and returns gamma.
double rayleigh_gamma(RayleighState& state, const DispersionFunctional& functional);
RayleighState make_state(Geometry geometry, std::vector<double> f, const DispersionFunctional& functional);

/// Divergence test for the 1/q_perp^2 weight: ratio of f on the first
/// off-axis column at step h and at 2h, as a function sampled on the axis
/// side. f ~ q_perp gives 1/2; f(0, z) != 0 gives 1.
bool axis_vanishes(const std::function<double(double, double)>& f, double perp_step);

/// The product has no preferred scale, and on a lattice it keeps decreasing as
/// the state shrinks towards the grid step (to about 2.104 for the transverse
/// massless functional at any step). The quotient pins the scale; for a
/// homogeneous weight its minimum over scales is the product's minimum.
enum class Objective {
  product,   // sqrt(Delta q^2 Delta r_q^2)
  quotient,  // (Delta q^2 + Delta r_q^2) / 2, the eigenproblem's Rayleigh quotient
};

struct MinimizeOptions {
  numkernel::StepControl control{};
  Objective objective = Objective::quotient;
  /// Coarsest step of the coarse-to-fine cascade (cylindrical only); 0 disables.
  double cascade_start_step = 0.16;
  /// Stretch the converged grid so that Delta q^2 = Delta r_q^2 (homogeneous functionals).
  bool balance = true;
};

struct MinimizeReport {
  RayleighState state;
  double objective_value = 0.0;
  double rayleigh_quotient = 0.0;  // (Delta q^2 + Delta r_q^2) / 2
  std::size_t iterations = 0;
  std::vector<std::size_t> cascade_iterations;
  /// Residual of the minimized objective, taken before the balancing stretch.
  double stationarity = 0.0;
};

MinimizeReport minimize_radial(const DispersionFunctional& functional, const RadialGeometry& geometry,
                               std::vector<double> init, const MinimizeOptions& options = {});

/// Minimization of the transverse massless functional, coarse to fine. `init`
/// lives on `geometry`; f = 0 on the axis is enforced.
MinimizeReport minimize_transverse_massless(const CylindricalGeometry& geometry, std::vector<double> init,
                                            const MinimizeOptions& options = {});

/// Relative Euler-Lagrange residual |[A (K + w) + B q^2 - 2 A B] v| / (2 A B)
/// for the product, or |[(K + w) + q^2 - (A + B)] v| / (A + B) for the
/// quotient, with v the measure-weighted samples normalized to 1.
double stationarity_residual(const RayleighState& state, const DispersionFunctional& functional,
                             Objective objective);

/// max |f/max f - g/max g| against q_perp exp(-q^2 / (2 s^2)) where s makes
/// the Gaussian's <q^2> match the state's.
double factorization_error(const RayleighState& state);

/// Delta r^2 of f(|p|) packets in physical units from the momentum-space
/// form: (1/N^2) int d^3p [|f'|^2 + (m^2/(2E^4) + 1/E^2) |f|^2].
double momentum_space_position_dispersion(const kg::SpectralProfile& f, double mass);

// ---------------------------------------------------------------- connection

enum class Ansatz { longitudinal, transverse };

/// Denominator of the transverse field: sqrt(2 m^2 + p_perp^2), or
/// sqrt(m^2 + p_perp^2), which makes the momentum-space energy density |f|^2.
enum class TransverseNormalization { doubled_mass, energy_normalized };

struct ConnectionSample {
  std::array<double, 3> p{};
  std::array<std::complex<double>, 3> phi{};  // per unit f
  std::array<std::complex<double>, 3> pi{};
  /// |-i E pi - [p x (p x phi) - m^2 phi]| / (E |pi| + scale)
  double residual = 0.0;
  /// Momentum-space energy density divided by |f|^2.
  double energy_ratio = 0.0;
};

struct ConnectionReport {
  double max_residual = 0.0;
  double max_energy_ratio_error = 0.0;  // max |energy_ratio - 1|
  std::vector<ConnectionSample> samples;
};

ConnectionReport check_connection(Ansatz ansatz, std::span<const std::array<double, 3>> momenta, double mass,
                                  TransverseNormalization normalization = TransverseNormalization::energy_normalized);

struct NormReconstruction {
  double from_energy = 0.0;  // int eps~(p) d^3p
  double reference = 0.0;    // int |f|^2 d^3p
};

/// Both integrals by nested adaptive quadrature for an axially symmetric
/// f(p_perp, p_z).
NormReconstruction reconstruct_norm(Ansatz ansatz, double mass, TransverseNormalization normalization,
                                    const std::function<double(double, double)>& f);

}  // namespace relbosons::variational
