#pragma once

// Monte Carlo g-computation: fit the working models once, then for every
// repetition and individual draw the mediators each arm prescribes and
// average the outcome model's predicted probability.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "trialmed/arms.hpp"
#include "trialmed/data.hpp"
#include "trialmed/effects.hpp"
#include "trialmed/glm.hpp"

namespace trialmed {

inline constexpr std::uint64_t kDefaultSeed = 20200101;

struct EstimationConfig {
  std::size_t n_sim = 200;
  InteractionSpec interactions;
  std::uint64_t seed = kDefaultSeed;
  FitOptions fit;
  /// Arm labels to simulate; empty means every standard arm.
  std::vector<std::string> arms;
  std::size_t threads = 1;

  void validate() const;
};

struct FittedPlan {
  ModelPlan plan;
  std::vector<FittedModel> models;  // parallel to plan.entries
};

/// Fits every plan entry. FitErrors are rethrown with the entry named.
FittedPlan fit_models(const Dataset& data, const ModelPlan& plan, const FitOptions& options, std::size_t threads = 1);

/// Human-readable "M2 ~ A + M1 + C1" for a plan entry.
std::string describe_model(const ModelRequirement& entry);

/// Simulated outcome expectation for each arm. Mediator k of individual i in
/// repetition r uses the same uniform deviate in every arm (common random
/// numbers), and that deviate depends only on (seed, r, k, i).
std::vector<double> simulate_arms(const FittedPlan& fitted, const Dataset& data, std::span<const ArmSpec> arms,
                                  std::size_t n_sim, std::uint64_t seed, std::size_t threads = 1);

double simulate_arm(const FittedPlan& fitted, const Dataset& data, const ArmSpec& arm, std::size_t n_sim,
                    std::uint64_t seed);

/// Everything estimate_effects computes, for audit output.
struct Estimation {
  std::vector<ArmSpec> arms;
  ArmGroups groups;
  FittedPlan fitted;
  EffectTable table;
};

Estimation run_estimation(const Dataset& data, const EstimationConfig& config);
EffectTable estimate_effects(const Dataset& data, const EstimationConfig& config);

}  // namespace trialmed
