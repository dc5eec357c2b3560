#include "relbosons/numkernel/quadrature.hpp"

namespace relbosons::numkernel {

void QuadratureSpec::validate() const {
  if (!(abs_tol > 0.0)) throw std::invalid_argument("QuadratureSpec: abs_tol must be positive");
  if (!(rel_tol > 0.0)) throw std::invalid_argument("QuadratureSpec: rel_tol must be positive");
  if (max_panels < 1) throw std::invalid_argument("QuadratureSpec: max_panels must be at least 1");
  if (oscillation_wavelength && !(*oscillation_wavelength > 0.0)) {
    throw std::invalid_argument("QuadratureSpec: oscillation_wavelength must be positive");
  }
}

}  // namespace relbosons::numkernel
