#pragma once

// Arm expectations and the effect contrasts built from them.
//
//   TCE               = p_trt - p_ctr
//   IDE               = p_all - p_ctr
//   IIE_k             = p_trt - p_k                  (p_k: arm shift_k)
//   IIE_int_onepolicy = (p_trt - p_all) - sum_k IIE_k
//   IIE_{k}           = p_{k-1} - p_{k}              (p_{0} = p_trt, p_{1} = p_1, p_{k} = seq_k)
//   IIE_seq           = p_trt - p_{K}
//   IIE_int_seq       = p_{K} - p_all
//   IDE_k             = p_k - p_ctr

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace trialmed {

struct EffectEstimate {
  std::string name;
  double estimate = 0.0;
  /// 100 * estimate / TCE from unrounded values; empty when TCE == 0.
  std::optional<double> proportion;
  std::optional<double> se;
  std::optional<std::pair<double, double>> ci;
};

struct EffectTable {
  std::size_t mediator_count = 0;
  /// Arm label -> outcome expectation, in standard arm order.
  std::vector<std::pair<std::string, double>> arms;
  std::vector<EffectEstimate> effects;

  std::optional<double> arm(std::string_view label) const;
  const EffectEstimate* find(std::string_view name) const;
  /// Throws UsageError when absent.
  double estimate(std::string_view name) const;
};

/// Builds every effect whose arms are present in `arm_p` (keyed by label).
EffectTable assemble_effects(std::size_t mediator_count, const std::map<std::string, double>& arm_p);

/// Display label, e.g. "IIE_int (one-policy)".
std::string effect_display_name(std::string_view name);

/// Rows of the human-readable table, in display order (no IDE_k rows).
std::vector<std::string> display_effect_order(std::size_t mediator_count);

/// Worst violation of the exact decomposition identities (0 if every
/// identity's effects are absent).
double decomposition_residual(const EffectTable& table);

}  // namespace trialmed
