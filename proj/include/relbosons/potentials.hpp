#pragma once

#include <string>

namespace relbosons::potentials {

/// The relativity parameter d. Zero is the nonrelativistic limit; the massless
/// limit is a distinct symbolic value rather than a large float.
class DParam {
 public:
  static DParam finite(double value);
  static DParam infinity() { return DParam(0.0, true); }

  /// Parses a decimal number or the token "inf".
  static DParam parse(const std::string& token);

  bool is_infinite() const { return infinite_; }
  /// Finite value; throws for the infinite limit.
  double value() const;
  bool is_zero() const { return !infinite_ && value_ == 0.0; }
  std::string str() const;

  friend bool operator==(const DParam&, const DParam&) = default;

 private:
  DParam(double v, bool inf) : value_(v), infinite_(inf) {}
  double value_;
  bool infinite_;
};

enum class Spin { zero, one };
enum class Channel { scalar, longitudinal };

struct PotentialSpec {
  Spin spin = Spin::zero;
  Channel channel = Channel::scalar;
  DParam d = DParam::finite(0.0);
  int angular_index = 0;  // l for spin 0, j for spin 1

  static PotentialSpec scalar(DParam d, int l = 0) { return {Spin::zero, Channel::scalar, d, l}; }
  static PotentialSpec longitudinal(DParam d, int j = 0) {
    return {Spin::one, Channel::longitudinal, d, j};
  }
  void validate() const;
  std::string describe() const;
};

/// Near-origin form W(q) = c/q^2 + w0 + O(q^2) and the regular exponent
/// u ~ q^alpha with alpha(alpha - 1) = c.
struct OriginBehavior {
  double singular_strength = 0.0;  // c
  double exponent_alpha = 1.0;
  double regular_offset = 0.0;     // w0
};

/// W(q) of the canonical problem -u'' + W u = lambda u, lambda = 2 gamma, u = q f.
///   spin 0:  d^2/(1+d^2q^2) + d^2/(2(1+d^2q^2)^2) + q^2 + l(l+1)/q^2
///   spin 1:  q^2 + 1/q^2 + 1/(q^2(1+d^2q^2)) + d^2/(2(1+d^2q^2)^2) + j(j+1)/q^2
/// with the exact limiting forms at d = 0 and d = inf.
double effective_potential(double q, const PotentialSpec& spec);

OriginBehavior origin_behavior(const PotentialSpec& spec);

/// (1/mass) (delta_p2 / delta_r2)^(1/4) in units hbar = c = 1.
double d_parameter(double delta_p2, double delta_r2, double mass);

}  // namespace relbosons::potentials
