#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "relbosons/potentials.hpp"

using namespace relbosons::potentials;

namespace {
const DParam kZero = DParam::finite(0.0);
const DParam kInf = DParam::infinity();
}  // namespace

TEST_CASE("effective_potential: substitution values") {
  CHECK(effective_potential(1.0, PotentialSpec::scalar(kZero)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(effective_potential(1.0, PotentialSpec::scalar(DParam::finite(1.0))) == doctest::Approx(1.625).epsilon(1e-15));
  CHECK(effective_potential(1.0, PotentialSpec::longitudinal(kZero)) == doctest::Approx(3.0).epsilon(1e-15));
  // limiting forms
  for (double q : {0.3, 1.0, 2.7}) {
    CHECK(effective_potential(q, PotentialSpec::scalar(kInf)) == doctest::Approx(1 / (q * q) + q * q));
    CHECK(effective_potential(q, PotentialSpec::longitudinal(kInf)) == doctest::Approx(1 / (q * q) + q * q));
    CHECK(effective_potential(q, PotentialSpec::longitudinal(kZero)) == doctest::Approx(2 / (q * q) + q * q));
    CHECK(effective_potential(q, PotentialSpec::scalar(kZero, 2)) == doctest::Approx(6 / (q * q) + q * q));
  }
  // spin 1 at d = 2, q = 0.5 by hand: x = d^2 q^2 = 1
  const double q = 0.5;
  const double by_hand = q * q + 1 / (q * q) + 1 / (q * q * 2.0) + 4.0 / (2 * 4.0);
  CHECK(effective_potential(q, PotentialSpec::longitudinal(DParam::finite(2.0))) == doctest::Approx(by_hand).epsilon(1e-15));
}

TEST_CASE("effective_potential: rejects q <= 0 and invalid specs") {
  CHECK_THROWS_AS(effective_potential(0.0, PotentialSpec::scalar(kZero)), std::invalid_argument);
  CHECK_THROWS_AS(effective_potential(-1.0, PotentialSpec::scalar(kZero)), std::invalid_argument);
  PotentialSpec mixed = PotentialSpec::scalar(kZero);
  mixed.spin = Spin::one;
  CHECK_THROWS_AS(mixed.validate(), std::invalid_argument);
  PotentialSpec neg = PotentialSpec::scalar(kZero, -1);
  CHECK_THROWS_AS(neg.validate(), std::invalid_argument);
  CHECK_THROWS_AS(DParam::finite(-0.5), std::invalid_argument);
  CHECK_THROWS_AS(DParam::finite(std::nan("")), std::invalid_argument);
}

TEST_CASE("DParam parse and print") {
  CHECK(DParam::parse("inf").is_infinite());
  CHECK(DParam::parse("0").is_zero());
  CHECK(DParam::parse("0.25").value() == 0.25);
  CHECK(DParam::parse("2").str() == "2");
  CHECK(DParam::parse("inf").str() == "inf");
  CHECK_THROWS_AS(DParam::parse("abc"), std::invalid_argument);
  CHECK_THROWS_AS(DParam::parse("-1"), std::invalid_argument);
  CHECK_THROWS_AS(DParam::parse("1x"), std::invalid_argument);
  CHECK_THROWS(kInf.value());
}

TEST_CASE("spin 0 ordering: W(d=0) <= W(d) <= W(d=inf)") {
  for (double d = 0.05; d < 50.0; d *= 1.37) {
    for (double q = 0.01; q < 8.0; q *= 1.21) {
      const double lo = effective_potential(q, PotentialSpec::scalar(kZero));
      const double mid = effective_potential(q, PotentialSpec::scalar(DParam::finite(d)));
      const double hi = effective_potential(q, PotentialSpec::scalar(kInf));
      CHECK(lo <= mid);
      CHECK(mid <= hi * (1 + 1e-15));
    }
  }
}

TEST_CASE("centrifugal term raises W strictly") {
  for (const DParam& d : {kZero, DParam::finite(0.7), DParam::finite(3.0), kInf}) {
    for (int l = 0; l < 4; ++l) {
      for (double q = 0.05; q < 6.0; q *= 1.5) {
        CHECK(effective_potential(q, PotentialSpec::scalar(d, l + 1)) > effective_potential(q, PotentialSpec::scalar(d, l)));
        CHECK(effective_potential(q, PotentialSpec::longitudinal(d, l + 1)) >
              effective_potential(q, PotentialSpec::longitudinal(d, l)));
      }
    }
  }
}

TEST_CASE("continuity in d towards the massless form") {
  const DParam big = DParam::finite(1e6);
  for (double q : {0.1, 1.0, 10.0}) {
    for (auto family : {PotentialSpec::scalar, PotentialSpec::longitudinal}) {
      const double w = effective_potential(q, family(big, 0));
      const double limit = effective_potential(q, family(kInf, 0));
      CHECK(std::abs(w - limit) <= 1e-6 * std::abs(limit));
    }
  }
}

TEST_CASE("origin_behavior: exponents") {
  auto s0 = origin_behavior(PotentialSpec::scalar(kZero));
  CHECK(s0.singular_strength == 0.0);
  CHECK(s0.exponent_alpha == 1.0);
  auto s_inf = origin_behavior(PotentialSpec::scalar(kInf));
  CHECK(s_inf.singular_strength == 1.0);
  CHECK(s_inf.exponent_alpha == doctest::Approx((1 + std::sqrt(5.0)) / 2).epsilon(1e-15));
  auto v0 = origin_behavior(PotentialSpec::longitudinal(kZero));
  CHECK(v0.singular_strength == 2.0);
  CHECK(v0.exponent_alpha == 2.0);
  // finite d, spin 1: 1/q^2 + 1/(q^2 (1 + d^2 q^2)) -> 2/q^2
  CHECK(origin_behavior(PotentialSpec::longitudinal(DParam::finite(1.0))).singular_strength == 2.0);
  CHECK(origin_behavior(PotentialSpec::scalar(DParam::finite(1.0), 2)).singular_strength == 6.0);
}

TEST_CASE("origin_behavior consistent with q^2 W at q = 1e-4") {
  const double q = 1e-4;
  for (auto family : {PotentialSpec::scalar, PotentialSpec::longitudinal}) {
    for (int l = 0; l < 3; ++l) {
      for (const DParam& d : {kZero, DParam::finite(0.25), DParam::finite(0.5), DParam::finite(1.0),
                              DParam::finite(4.0), kInf}) {
        const auto spec = family(d, l);
        const auto ob = origin_behavior(spec);
        CAPTURE(spec.describe());
        CHECK(ob.exponent_alpha * (ob.exponent_alpha - 1) == doctest::Approx(ob.singular_strength).epsilon(1e-14));
        CHECK(ob.exponent_alpha >= 1.0);
        const double q2w = q * q * effective_potential(q, spec);
        // w0 q^2 is the next term of the expansion
        CHECK(std::abs(q2w - ob.singular_strength - ob.regular_offset * q * q) <= 1e-12);
        if (d.is_infinite() || d.value() <= 0.5) CHECK(std::abs(q2w - ob.singular_strength) <= 1e-8);
      }
    }
  }
}

TEST_CASE("d_parameter") {
  CHECK(d_parameter(1.0, 1.0, 1.0) == doctest::Approx(1.0));
  CHECK(d_parameter(16.0, 1.0, 2.0) == doctest::Approx(1.0));
  double prev = d_parameter(2.0, 0.5, 1.0);
  for (double m = 10.0; m <= 1e9; m *= 10.0) {
    const double d = d_parameter(2.0, 0.5, m);
    CHECK(d < prev);
    prev = d;
  }
  CHECK(prev < 1e-8);
  CHECK_THROWS_AS(d_parameter(0.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(d_parameter(1.0, -1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(d_parameter(1.0, 1.0, 0.0), std::invalid_argument);
}
