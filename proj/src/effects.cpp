#include "trialmed/effects.hpp"

#include <algorithm>
#include <cmath>

#include "trialmed/arms.hpp"
#include "trialmed/errors.hpp"

namespace trialmed {

std::optional<double> EffectTable::arm(std::string_view label) const {
  for (const auto& [name, p] : arms) {
    if (name == label) return p;
  }
  return std::nullopt;
}

const EffectEstimate* EffectTable::find(std::string_view name) const {
  for (const auto& e : effects) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

double EffectTable::estimate(std::string_view name) const {
  const auto* e = find(name);
  if (!e) throw UsageError("effect '" + std::string(name) + "' is not in the table");
  return e->estimate;
}

EffectTable assemble_effects(std::size_t mediator_count, const std::map<std::string, double>& arm_p) {
  const std::size_t k_max = mediator_count;
  EffectTable table;
  table.mediator_count = k_max;
  for (const auto& arm : standard_arms(k_max)) {
    const auto it = arm_p.find(arm.label());
    if (it != arm_p.end()) table.arms.emplace_back(it->first, it->second);
  }

  auto p = [&](const std::string& label) -> std::optional<double> {
    const auto it = arm_p.find(label);
    if (it == arm_p.end()) return std::nullopt;
    return it->second;
  };
  auto shift = [&](std::size_t k) { return p("shift_" + std::to_string(k)); };
  // p_{k}: cumulative application of shifts 1..k.
  auto seq = [&](std::size_t k) -> std::optional<double> {
    if (k == 0) return p("trt");
    if (k == 1) return shift(1);
    return p("seq_" + std::to_string(k));
  };

  const auto ctr = p("ctr");
  const auto trt = p("trt");
  const auto all = p("all");

  auto add = [&](std::string name, double value) { table.effects.push_back({std::move(name), value, {}, {}, {}}); };

  if (trt && ctr) add("TCE", *trt - *ctr);
  if (all && ctr) add("IDE", *all - *ctr);

  bool have_all_iie = trt.has_value();
  double iie_sum = 0.0;
  for (std::size_t k = 1; k <= k_max; ++k) {
    const auto pk = shift(k);
    if (trt && pk) {
      add("IIE_" + std::to_string(k), *trt - *pk);
      iie_sum += *trt - *pk;
    } else {
      have_all_iie = false;
    }
  }
  if (have_all_iie && all) add("IIE_int_onepolicy", (*trt - *all) - iie_sum);

  const auto last = seq(k_max);
  if (trt && last) add("IIE_seq", *trt - *last);
  for (std::size_t k = 1; k <= k_max; ++k) {
    const auto before = seq(k - 1);
    const auto after = seq(k);
    if (before && after) add("IIE_{" + std::to_string(k) + "}", *before - *after);
  }
  if (last && all) add("IIE_int_seq", *last - *all);

  for (std::size_t k = 1; k <= k_max; ++k) {
    const auto pk = shift(k);
    if (pk && ctr) add("IDE_" + std::to_string(k), *pk - *ctr);
  }

  if (const auto* tce = table.find("TCE"); tce && tce->estimate != 0.0) {
    const double total = tce->estimate;
    for (auto& e : table.effects) e.proportion = 100.0 * e.estimate / total;
  }
  return table;
}

std::string effect_display_name(std::string_view name) {
  if (name == "IIE_int_onepolicy") return "IIE_int (one-policy)";
  if (name == "IIE_int_seq") return "IIE_int (sequential)";
  return std::string(name);
}

std::vector<std::string> display_effect_order(std::size_t mediator_count) {
  std::vector<std::string> rows{"TCE", "IDE"};
  for (std::size_t k = 1; k <= mediator_count; ++k) rows.push_back("IIE_" + std::to_string(k));
  rows.push_back("IIE_int_onepolicy");
  rows.push_back("IIE_seq");
  for (std::size_t k = 1; k <= mediator_count; ++k) rows.push_back("IIE_{" + std::to_string(k) + "}");
  rows.push_back("IIE_int_seq");
  return rows;
}

double decomposition_residual(const EffectTable& t) {
  auto get = [&](const std::string& name) -> std::optional<double> {
    if (const auto* e = t.find(name)) return e->estimate;
    return std::nullopt;
  };
  const std::size_t k_max = t.mediator_count;
  double worst = 0.0;
  auto check = [&](double lhs, double rhs) { worst = std::max(worst, std::abs(lhs - rhs)); };

  const auto tce = get("TCE");
  const auto ide = get("IDE");
  double iie_sum = 0.0, seq_sum = 0.0;
  bool have_iie = true, have_seq = true;
  for (std::size_t k = 1; k <= k_max; ++k) {
    const auto iie = get("IIE_" + std::to_string(k));
    const auto step = get("IIE_{" + std::to_string(k) + "}");
    if (iie) iie_sum += *iie; else have_iie = false;
    if (step) seq_sum += *step; else have_seq = false;
    const auto ide_k = get("IDE_" + std::to_string(k));
    if (tce && iie && ide_k) check(*ide_k, *tce - *iie);
  }
  if (const auto onepolicy = get("IIE_int_onepolicy"); tce && ide && have_iie && onepolicy) {
    check(*tce, *ide + iie_sum + *onepolicy);
  }
  const auto iie_seq = get("IIE_seq");
  if (const auto int_seq = get("IIE_int_seq"); tce && ide && iie_seq && int_seq) check(*tce, *ide + *iie_seq + *int_seq);
  if (iie_seq && have_seq) check(*iie_seq, seq_sum);
  if (const auto first = get("IIE_{1}"), iie1 = get("IIE_1"); first && iie1) check(*first, *iie1);
  return worst;
}

}  // namespace trialmed
