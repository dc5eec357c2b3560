#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace relbosons::verify {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerifyOptions {
  /// Seeds the randomized momenta of the connection check.
  std::uint64_t seed = 20240101;
  /// Cylindrical step for the transverse minimization checks.
  double transverse_step = 0.04;
};

/// Every reference check: the analytic limits of gamma, the
/// closed-form eigenfunctions, the negative charge density of the reference
/// wavepacket and the transverse massless minimum. Checks that throw are
/// reported as failures with the exception text.
std::vector<CheckResult> run_suite(const VerifyOptions& options = {});

}  // namespace relbosons::verify
