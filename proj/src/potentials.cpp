#include "relbosons/potentials.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace relbosons::potentials {

DParam DParam::finite(double value) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw std::invalid_argument("d must be a finite nonnegative number or 'inf'");
  }
  return DParam(value, false);
}

DParam DParam::parse(const std::string& token) {
  if (token == "inf" || token == "INF" || token == "infinity") return infinity();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("cannot parse d value '" + token + "'");
  }
  if (used != token.size()) throw std::invalid_argument("cannot parse d value '" + token + "'");
  if (std::isinf(v)) return infinity();
  return finite(v);
}

double DParam::value() const {
  if (infinite_) throw std::logic_error("DParam::value() on the infinite limit");
  return value_;
}

std::string DParam::str() const {
  if (infinite_) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", value_);
  return buf;
}

void PotentialSpec::validate() const {
  if (channel == Channel::scalar && spin != Spin::zero) {
    throw std::invalid_argument("scalar channel requires spin 0");
  }
  if (channel == Channel::longitudinal && spin != Spin::one) {
    throw std::invalid_argument("longitudinal channel requires spin 1");
  }
  if (angular_index < 0) throw std::invalid_argument("angular index must be nonnegative");
}

std::string PotentialSpec::describe() const {
  std::string s = spin == Spin::zero ? "spin0" : "spin1-longitudinal";
  s += " d=" + d.str();
  if (angular_index != 0) s += (spin == Spin::zero ? " l=" : " j=") + std::to_string(angular_index);
  return s;
}

double effective_potential(double q, const PotentialSpec& spec) {
  if (!(q > 0.0)) throw std::invalid_argument("effective_potential: q must be positive");
  const double q2 = q * q;
  const double centrifugal =
      static_cast<double>(spec.angular_index) * (spec.angular_index + 1) / q2;

  if (spec.spin == Spin::zero) {
    if (spec.d.is_infinite()) return 1.0 / q2 + q2 + centrifugal;
    const double d2 = spec.d.value() * spec.d.value();
    if (d2 == 0.0) return q2 + centrifugal;
    const double s = 1.0 + d2 * q2;
    return d2 / s + d2 / (2.0 * s * s) + q2 + centrifugal;
  }

  if (spec.d.is_infinite()) return 1.0 / q2 + q2 + centrifugal;
  const double d2 = spec.d.value() * spec.d.value();
  if (d2 == 0.0) return 2.0 / q2 + q2 + centrifugal;
  const double s = 1.0 + d2 * q2;
  return q2 + 1.0 / q2 + 1.0 / (q2 * s) + d2 / (2.0 * s * s) + centrifugal;
}

OriginBehavior origin_behavior(const PotentialSpec& spec) {
  const double l = spec.angular_index;
  double c = l * (l + 1.0);
  double w0 = 0.0;
  if (spec.spin == Spin::zero) {
    if (spec.d.is_infinite()) {
      c += 1.0;
    } else {
      const double d2 = spec.d.value() * spec.d.value();
      w0 = 1.5 * d2;
    }
  } else {
    if (spec.d.is_infinite()) {
      c += 1.0;
    } else {
      // 1/(q^2 (1 + d^2 q^2)) = 1/q^2 - d^2/(1 + d^2 q^2): the barrier is 2/q^2 at any finite d.
      const double d2 = spec.d.value() * spec.d.value();
      c += 2.0;
      w0 = -0.5 * d2;
    }
  }
  return {c, 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * c)), w0};
}

double d_parameter(double delta_p2, double delta_r2, double mass) {
  if (!(delta_p2 > 0.0) || !(delta_r2 > 0.0) || !(mass > 0.0)) {
    throw std::invalid_argument("d_parameter: arguments must be positive");
  }
  return std::pow(delta_p2 / delta_r2, 0.25) / mass;
}

}  // namespace relbosons::potentials
