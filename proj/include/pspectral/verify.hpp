#pragma once

// The property suite behind the `verify` subcommand: one check per
// acceptance criterion, each reporting its measured quantities.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace pspectral {

struct VerifyOptions {
  bool quick = false;           // smaller meshes and sweeps
  std::uint64_t seed = 20240611;
  double tol_scale = 1.0;       // multiplies every pass/fail tolerance
};

struct CheckResult {
  int id;
  std::string name;
  bool pass;
  std::vector<std::pair<std::string, double>> metrics;  // in a fixed order
};

std::vector<CheckResult> run_verify(const VerifyOptions& opt = {});

}  // namespace pspectral
