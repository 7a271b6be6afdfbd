#pragma once

// Exact arm expectations for small binary DGPs by full enumeration.
//
// Two independent evaluations are provided. The identification route only
// looks at the observational joint law of (C, A, M, Y): it conditions on
// A = a and C = c and marginalizes. The trial route never touches the
// exposure model; it builds each arm's mediator law from the structural
// mediator models under do(A = a).

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "trialmed/arms.hpp"
#include "trialmed/dgp.hpp"
#include "trialmed/effects.hpp"

namespace trialmed {

inline constexpr std::size_t kEnumerationCap = 20;

/// Observational law of (C, A, M) with E(Y | A, M, C) per cell. Cells are
/// indexed by the Dgp configuration bitset.
struct JointTable {
  std::size_t confounders = 0;
  std::size_t mediators = 0;
  std::vector<double> probability;
  std::vector<double> outcome_mean;

  std::uint64_t index(std::uint64_t c, int a, std::uint64_t m) const noexcept {
    return c | (static_cast<std::uint64_t>(a) << confounders) | (m << (confounders + 1));
  }
  /// Total probability of cells whose bits under `mask` equal `value`.
  double marginal(std::uint64_t mask, std::uint64_t value) const noexcept;
  /// P(Y = 1).
  double outcome_marginal() const noexcept;
};

/// Throws DataError(kCapExceeded) when |C| + K exceeds `cap`.
void check_enumeration_cap(const Dgp& dgp, std::size_t cap = kEnumerationCap);

JointTable enumerate(const Dgp& dgp, std::size_t cap = kEnumerationCap);

/// Identification formula evaluated on observational conditionals. Throws
/// DataError(kPositivity) when a required conditioning event has probability 0.
double true_p_ident(const JointTable& table, const ArmSpec& arm);
double true_p_ident(const Dgp& dgp, const ArmSpec& arm, std::size_t cap = kEnumerationCap);

/// Arm expectation from the interventional description of the arm.
double true_p_trial(const Dgp& dgp, const ArmSpec& arm, std::size_t cap = kEnumerationCap);

enum class OracleRoute { kIdentification, kTrial };

EffectTable true_effects(const Dgp& dgp, OracleRoute route = OracleRoute::kTrial, std::size_t cap = kEnumerationCap);

struct OracleComparison {
  EffectTable ident;
  EffectTable trial;
  /// Largest |ident - trial| over the arms.
  double max_discrepancy = 0.0;
};

OracleComparison compare_routes(const Dgp& dgp, std::size_t cap = kEnumerationCap);

}  // namespace trialmed
