#pragma once

// Arms of the emulated trial and the conditional models needed to simulate
// them.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trialmed/data.hpp"
#include "trialmed/glm.hpp"

namespace trialmed {

enum class DrawKind {
  kNaturalJoint,         // drawn jointly with the other kNaturalJoint(a) mediators under A = a
  kIndependentMarginal,  // drawn alone from its marginal under A = a
};

struct DrawSource {
  DrawKind kind = DrawKind::kNaturalJoint;
  int exposure = 0;

  static DrawSource natural_joint(int a) { return {DrawKind::kNaturalJoint, a}; }
  static DrawSource independent_marginal(int a) { return {DrawKind::kIndependentMarginal, a}; }
  bool operator==(const DrawSource&) const = default;
};

enum class ArmKind { kControl, kTreated, kShift, kAll, kSequential };

struct ArmSpec {
  ArmKind kind = ArmKind::kControl;
  std::size_t index = 0;  // k (1-based) for shift_k and seq_k
  int outcome_exposure = 0;
  std::vector<DrawSource> draws;  // one per mediator, declared order

  /// "ctr", "trt", "shift_k", "all" or "seq_k".
  std::string label() const;
  bool operator==(const ArmSpec&) const = default;
};

/// ctr, trt, shift_1..shift_K, all, seq_2..seq_K (2K + 2 arms).
std::vector<ArmSpec> standard_arms(std::size_t mediator_count);
/// Looks a label up among standard_arms(mediator_count).
ArmSpec arm_from_label(std::string_view label, std::size_t mediator_count);

/// A group of mediators drawn jointly under one exposure level. Members are
/// mediator indices in declared order; a singleton is a marginal draw.
struct DrawBlock {
  int exposure = 0;
  std::vector<std::size_t> members;
  bool operator==(const DrawBlock&) const = default;
};

/// The arm's mediator law as a product of independent blocks, ordered by
/// first member. Independent-marginal mediators and singleton joint groups
/// both become singleton blocks.
std::vector<DrawBlock> draw_blocks(const ArmSpec& arm);

/// Which products enter the working models. Without confounders, products
/// range over the exposure and the mediators in the conditioning set, up to
/// `order` factors; confounders are main effects only. `saturated()` takes
/// every product of every conditioning variable.
struct InteractionSpec {
  int order = 2;
  bool include_confounders = false;

  static InteractionSpec saturated() { return {1 << 20, true}; }
  bool is_saturated() const noexcept { return include_confounders; }
  /// "1", "2", "3" or "saturated".
  std::string describe() const;
  static InteractionSpec parse(std::string_view text);
};

TermSet make_terms(const std::string& exposure, const std::vector<std::string>& mediators,
                   const std::vector<std::string>& confounders, const InteractionSpec& interactions);

struct ModelRequirement {
  std::string target;
  bool is_outcome = false;
  /// Exposure, then mediators in declared order, then confounders.
  std::vector<std::string> conditioning;
  TermSet terms;
};

struct ModelPlan {
  std::vector<ModelRequirement> entries;

  std::optional<std::size_t> find(std::string_view target, std::span<const std::string> conditioning) const;
  std::size_t outcome_index() const;
};

/// Mediator models required by the arms' blocks (a block member conditions
/// on the exposure, the earlier members of its block and the confounders)
/// plus one outcome model on everything. Deduplicated by
/// (target, conditioning set), in order of first use.
ModelPlan model_plan(std::span<const ArmSpec> arms, const VariableRoles& roles, const InteractionSpec& interactions);

/// Conditioning set for mediator `k` drawn after `previous` within a block.
std::vector<std::string> mediator_conditioning(const VariableRoles& roles, std::span<const std::size_t> previous);

struct ArmGroups {
  std::vector<ArmSpec> unique;
  /// For each input arm, its position in `unique`.
  std::vector<std::size_t> index_of;
};

/// Merges arms that induce the same outcome exposure and the same mediator
/// law (same draw_blocks). The first arm of each group represents it.
ArmGroups dedup_arms(std::span<const ArmSpec> arms);

}  // namespace trialmed
