#pragma once

#include <string>
#include <vector>

#include "extot/config.hpp"

namespace extot {

struct PropertyResult {
  std::string id;
  bool pass = false;
  std::string details;
};

struct VerifyReport {
  std::vector<PropertyResult> properties;
  bool all_pass() const {
    for (const auto& p : properties) {
      if (!p.pass) return false;
    }
    return true;
  }
};

// Runs the invariant suites. level: "quick" (small instances) or "full".
VerifyReport verify_suite(const std::string& level, std::uint64_t seed,
                          int threads);

struct RunResult {
  int exit_code = 0;       // 0 ok, 1 contract violation, 2 config error
  std::string summary_path;
  std::string message;
};

// Executes the configured task and writes summary.json plus data CSVs under
// out_dir. Timing goes to a separate timing.json so the data artifacts are
// byte-deterministic for a fixed config and seed.
RunResult run(const ExperimentConfig& config, const std::string& out_dir);

}  // namespace extot
