#pragma once

// Run configuration: one JSON file of record plus command-line overrides.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fheston/contracts.hpp"
#include "fheston/engine.hpp"
#include "fheston/model.hpp"

namespace fheston::cli {

struct ConvergeOptions {
  std::vector<std::size_t> ladder{32, 64, 128, 256, 512};
  std::size_t paths = 10000;

  friend bool operator==(const ConvergeOptions&, const ConvergeOptions&) = default;
};

struct ValidateOptions {
  double moment_order = 32.0;
  std::size_t covariance_steps = 64;
  std::size_t covariance_paths = 100000;
  std::size_t isometry_steps = 2000;
  std::size_t scheme_steps = 100000;
  std::size_t moment_paths = 200;
  std::size_t moment_steps = 256;

  friend bool operator==(const ValidateOptions&, const ValidateOptions&) = default;
};

struct RunConfig {
  ModelParams model;
  SigmaSpec sigma = SigmaSpec::reference();
  PayoffSpec payoff = PayoffSpec::reference_call();
  std::size_t n = 100;                            // grid size for `price`
  std::vector<std::size_t> grid_sizes{100, 500, 1000};  // grid sizes for `tables`
  std::size_t paths = 1000;                       // paths per estimate
  std::size_t estimates = 1000;
  std::uint64_t seed = 0;
  Estimator estimator = Estimator::Smoothed;
  double scale = 1.0;      // multiplies the estimate count in `tables`
  unsigned threads = 0;    // 0: FHESTON_THREADS or hardware concurrency
  std::string out_dir = "results";
  bool write_estimates = false;  // `price` writes estimates.csv when set
  ConvergeOptions converge;
  ValidateOptions validate;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

std::string to_json_string(const RunConfig& config);
/// Missing keys keep their defaults; unknown keys and malformed values throw UsageError.
RunConfig from_json_string(const std::string& text);

RunConfig load_config(const std::filesystem::path& path);
void save_config(const RunConfig& config, const std::filesystem::path& path);

/// Payoff by command-line name: call (with strike), indicator, staircase.
PayoffSpec payoff_from_name(const std::string& name, double strike = 1.0);

}  // namespace fheston::cli
