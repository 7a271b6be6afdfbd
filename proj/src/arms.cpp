#include "trialmed/arms.hpp"

#include <algorithm>
#include <charconv>
#include <map>

#include "trialmed/errors.hpp"

namespace trialmed {

std::string ArmSpec::label() const {
  switch (kind) {
    case ArmKind::kControl:
      return "ctr";
    case ArmKind::kTreated:
      return "trt";
    case ArmKind::kShift:
      return "shift_" + std::to_string(index);
    case ArmKind::kAll:
      return "all";
    case ArmKind::kSequential:
      return "seq_" + std::to_string(index);
  }
  return "?";
}

std::vector<ArmSpec> standard_arms(std::size_t mediator_count) {
  const std::size_t k_max = mediator_count;
  if (k_max == 0) throw UsageError("at least one mediator is required to build trial arms");
  using DS = DrawSource;
  std::vector<ArmSpec> arms;
  arms.push_back({ArmKind::kControl, 0, 0, std::vector<DS>(k_max, DS::natural_joint(0))});
  arms.push_back({ArmKind::kTreated, 0, 1, std::vector<DS>(k_max, DS::natural_joint(1))});
  for (std::size_t k = 1; k <= k_max; ++k) {
    std::vector<DS> draws(k_max, DS::natural_joint(1));
    draws[k - 1] = DS::independent_marginal(0);
    arms.push_back({ArmKind::kShift, k, 1, std::move(draws)});
  }
  arms.push_back({ArmKind::kAll, 0, 1, std::vector<DS>(k_max, DS::natural_joint(0))});
  for (std::size_t k = 2; k <= k_max; ++k) {
    std::vector<DS> draws(k_max, DS::natural_joint(1));
    for (std::size_t j = 0; j < k; ++j) draws[j] = DS::independent_marginal(0);
    arms.push_back({ArmKind::kSequential, k, 1, std::move(draws)});
  }
  return arms;
}

ArmSpec arm_from_label(std::string_view label, std::size_t mediator_count) {
  for (auto& arm : standard_arms(mediator_count)) {
    if (arm.label() == label) return arm;
  }
  throw UsageError("unknown arm '" + std::string(label) + "' for " + std::to_string(mediator_count) +
                   " mediators (expected ctr, trt, shift_k, all or seq_k with k >= 2)");
}

std::vector<DrawBlock> draw_blocks(const ArmSpec& arm) {
  std::vector<DrawBlock> blocks;
  std::map<int, std::size_t> joint_block;  // exposure -> block index
  for (std::size_t k = 0; k < arm.draws.size(); ++k) {
    const auto& d = arm.draws[k];
    if (d.kind == DrawKind::kNaturalJoint) {
      const auto it = joint_block.find(d.exposure);
      if (it != joint_block.end()) {
        blocks[it->second].members.push_back(k);
        continue;
      }
      joint_block.emplace(d.exposure, blocks.size());
    }
    blocks.push_back({d.exposure, {k}});
  }
  // Blocks are already ordered by first member because mediators are visited in order.
  return blocks;
}

std::string InteractionSpec::describe() const {
  if (is_saturated()) return "saturated";
  return std::to_string(order);
}

InteractionSpec InteractionSpec::parse(std::string_view text) {
  if (text == "saturated") return saturated();
  int order = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), order);
  if (ec != std::errc() || ptr != text.data() + text.size() || order < 1 || order > 3) {
    throw UsageError("interaction order must be 1, 2, 3 or saturated (got '" + std::string(text) + "')");
  }
  return {order, false};
}

namespace {

void append_products(const std::vector<std::string>& vars, std::size_t size, std::size_t start,
                     std::vector<std::string>& current, std::vector<std::vector<std::string>>& out) {
  if (current.size() == size) {
    out.push_back(current);
    return;
  }
  for (std::size_t i = start; i < vars.size(); ++i) {
    current.push_back(vars[i]);
    append_products(vars, size, i + 1, current, out);
    current.pop_back();
  }
}

}  // namespace

TermSet make_terms(const std::string& exposure, const std::vector<std::string>& mediators,
                   const std::vector<std::string>& confounders, const InteractionSpec& interactions) {
  std::vector<std::string> mains{exposure};
  mains.insert(mains.end(), mediators.begin(), mediators.end());
  std::vector<std::string> product_vars = mains;
  mains.insert(mains.end(), confounders.begin(), confounders.end());
  if (interactions.include_confounders) product_vars = mains;

  std::vector<std::vector<std::string>> products;
  const std::size_t max_order = std::min<std::size_t>(static_cast<std::size_t>(interactions.order), product_vars.size());
  std::vector<std::string> current;
  for (std::size_t size = 2; size <= max_order; ++size) append_products(product_vars, size, 0, current, products);
  return TermSet(std::move(mains), std::move(products));
}

std::vector<std::string> mediator_conditioning(const VariableRoles& roles, std::span<const std::size_t> previous) {
  std::vector<std::string> cond{roles.exposure};
  std::vector<std::size_t> sorted(previous.begin(), previous.end());
  std::sort(sorted.begin(), sorted.end());
  for (const std::size_t j : sorted) cond.push_back(roles.mediators.at(j));
  cond.insert(cond.end(), roles.confounders.begin(), roles.confounders.end());
  return cond;
}

std::optional<std::size_t> ModelPlan::find(std::string_view target, std::span<const std::string> conditioning) const {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    if (e.target == target && std::equal(e.conditioning.begin(), e.conditioning.end(), conditioning.begin(),
                                         conditioning.end())) {
      return i;
    }
  }
  return std::nullopt;
}

std::size_t ModelPlan::outcome_index() const {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].is_outcome) return i;
  }
  throw UsageError("model plan has no outcome model");
}

ModelPlan model_plan(std::span<const ArmSpec> arms, const VariableRoles& roles, const InteractionSpec& interactions) {
  roles.validate();
  ModelPlan plan;
  auto require = [&](const std::string& target, bool is_outcome, std::vector<std::string> cond,
                     std::vector<std::string> mediators_in_cond) {
    if (plan.find(target, cond)) return;
    TermSet terms = make_terms(roles.exposure, mediators_in_cond, roles.confounders, interactions);
    plan.entries.push_back({target, is_outcome, std::move(cond), std::move(terms)});
  };

  for (const auto& arm : arms) {
    if (arm.draws.size() != roles.mediators.size()) {
      throw UsageError("arm " + arm.label() + " does not match the number of declared mediators");
    }
    for (const auto& block : draw_blocks(arm)) {
      for (std::size_t t = 0; t < block.members.size(); ++t) {
        const std::span<const std::size_t> previous(block.members.data(), t);
        std::vector<std::string> prev_names;
        for (const std::size_t j : previous) prev_names.push_back(roles.mediators[j]);
        require(roles.mediators[block.members[t]], false, mediator_conditioning(roles, previous),
                std::move(prev_names));
      }
    }
  }
  std::vector<std::string> cond{roles.exposure};
  cond.insert(cond.end(), roles.mediators.begin(), roles.mediators.end());
  cond.insert(cond.end(), roles.confounders.begin(), roles.confounders.end());
  require(roles.outcome, true, std::move(cond), roles.mediators);
  return plan;
}

ArmGroups dedup_arms(std::span<const ArmSpec> arms) {
  ArmGroups groups;
  std::vector<std::pair<int, std::vector<DrawBlock>>> keys;
  for (const auto& arm : arms) {
    auto key = std::make_pair(arm.outcome_exposure, draw_blocks(arm));
    const auto it = std::find(keys.begin(), keys.end(), key);
    if (it != keys.end()) {
      groups.index_of.push_back(static_cast<std::size_t>(it - keys.begin()));
      continue;
    }
    groups.index_of.push_back(keys.size());
    keys.push_back(std::move(key));
    groups.unique.push_back(arm);
  }
  return groups;
}

}  // namespace trialmed
