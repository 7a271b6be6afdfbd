#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "trialmed/data.hpp"
#include "trialmed/effects.hpp"
#include "trialmed/gcomp.hpp"

namespace trialmed {

enum class CiMethod { kNormal, kPercentile };

std::string ci_method_name(CiMethod method);
CiMethod parse_ci_method(std::string_view name);

struct BootstrapConfig {
  std::size_t n_boot = 1000;
  CiMethod method = CiMethod::kNormal;
  double level = 0.95;
  std::uint64_t seed = kDefaultSeed;
  std::size_t threads = 1;
  /// Fail when more than this fraction of replicates cannot be estimated.
  double max_failure_fraction = 0.05;

  void validate() const;
};

/// n rows drawn with replacement; row j of the result is a pure function of
/// (seed, replicate, j).
Dataset resample(const Dataset& data, std::uint64_t seed, std::uint64_t replicate);

struct Interval {
  double se = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

/// SE = sample SD of the replicates. Normal: point -/+ z * SE. Percentile:
/// empirical (1 -/+ level) / 2 quantiles of the replicates.
Interval summarize_replicates(double point, std::span<const double> replicates, CiMethod method, double level);

struct ReplicateFailure {
  std::size_t replicate = 0;
  std::string message;
};

struct BootstrapResult {
  EffectTable table;  // point estimates from the full data with se and ci filled in
  std::size_t successful = 0;
  std::vector<ReplicateFailure> failures;  // in replicate order
};

/// Resamples the data n_boot times, re-runs the whole estimation on each
/// resample and summarizes every effect. Replicates that fail to fit are
/// skipped and reported; more than max_failure_fraction failures is an error.
BootstrapResult bootstrap_effects(const Dataset& data, const EstimationConfig& estimation,
                                  const BootstrapConfig& config);

/// Replicate statistics for any estimator of a fixed-length vector.
/// Replicates whose statistic throws trialmed::Error are recorded as failures.
struct ReplicateDraws {
  std::vector<std::vector<double>> values;  // successful replicates, replicate order
  std::vector<ReplicateFailure> failures;
};

ReplicateDraws run_replicates(const Dataset& data, std::size_t n_boot, std::uint64_t seed, std::size_t threads,
                              const std::function<std::vector<double>(const Dataset&, std::size_t replicate)>& statistic);

}  // namespace trialmed
