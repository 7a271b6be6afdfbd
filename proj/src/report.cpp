#include "trialmed/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace trialmed {
namespace {

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s + " " : s + std::string(width - s.size(), ' ');
}

std::string lpad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string percent_label(double level) {
  std::string s = fixed(100.0 * level, 1);
  if (s.size() > 2 && s.compare(s.size() - 2, 2, ".0") == 0) s.resize(s.size() - 2);
  return s + "%";
}

const char* draw_kind_name(DrawKind kind) {
  return kind == DrawKind::kNaturalJoint ? "joint" : "marginal";
}

Json odds_ratio_json(const OddsRatio& r) {
  return {{"term", r.term}, {"odds_ratio", r.estimate}, {"ci", {r.lower, r.upper}}};
}

}  // namespace

std::string fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  std::string s = buf;
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

Json document_header(const std::string& command) {
  Json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["software"] = {{"name", kSoftwareName}, {"version", kSoftwareVersion}};
  doc["command"] = command;
  return doc;
}

Json effect_table_json(const EffectTable& table) {
  Json arms = Json::array();
  for (const auto& [label, p] : table.arms) arms.push_back({{"arm", label}, {"p", p}});
  Json effects = Json::array();
  for (const auto& e : table.effects) {
    Json row;
    row["name"] = e.name;
    row["label"] = effect_display_name(e.name);
    row["estimate"] = e.estimate;
    row["proportion_of_tce"] = e.proportion ? Json(*e.proportion) : Json(nullptr);
    if (e.se) row["se"] = *e.se;
    if (e.ci) row["ci"] = {e.ci->first, e.ci->second};
    effects.push_back(std::move(row));
  }
  return {{"mediator_count", table.mediator_count}, {"arms", arms}, {"effects", effects}};
}

Json plan_json(const Estimation& est, const VariableRoles& roles) {
  Json arms = Json::array();
  for (std::size_t i = 0; i < est.arms.size(); ++i) {
    const auto& arm = est.arms[i];
    Json draws = Json::array();
    for (std::size_t k = 0; k < arm.draws.size(); ++k) {
      draws.push_back({{"mediator", roles.mediators.at(k)},
                       {"source", draw_kind_name(arm.draws[k].kind)},
                       {"exposure", arm.draws[k].exposure}});
    }
    Json blocks = Json::array();
    for (const auto& b : draw_blocks(arm)) {
      Json members = Json::array();
      for (std::size_t m : b.members) members.push_back(roles.mediators.at(m));
      blocks.push_back({{"exposure", b.exposure}, {"mediators", members}});
    }
    const auto& rep = est.groups.unique[est.groups.index_of[i]];
    arms.push_back({{"arm", arm.label()},
                    {"outcome_exposure", arm.outcome_exposure},
                    {"draws", draws},
                    {"blocks", blocks},
                    {"simulated_as", rep.label()}});
  }

  Json models = Json::array();
  for (std::size_t i = 0; i < est.fitted.plan.entries.size(); ++i) {
    const auto& entry = est.fitted.plan.entries[i];
    const auto& fit = est.fitted.models[i];
    Json coefs = Json::object();
    const auto labels = fit.terms.coefficient_labels();
    for (std::size_t j = 0; j < labels.size(); ++j) coefs[labels[j]] = fit.coefficients[static_cast<Eigen::Index>(j)];
    models.push_back({{"model", describe_model(entry)},
                      {"target", entry.target},
                      {"outcome", entry.is_outcome},
                      {"conditioning", entry.conditioning},
                      {"coefficients", coefs},
                      {"iterations", fit.iterations},
                      {"deviance", fit.deviance}});
  }
  return {{"arms", arms}, {"unique_arms", est.groups.unique.size()}, {"models", models}};
}

Json associations_json(const std::vector<Association>& rows, double level) {
  Json out = Json::array();
  for (const auto& r : rows) {
    out.push_back({{"section", r.section},
                   {"predictor", r.predictor},
                   {"response", r.response},
                   {"crude", odds_ratio_json(r.crude)},
                   {"adjusted", odds_ratio_json(r.adjusted)}});
  }
  return {{"level", level}, {"associations", out}};
}

Json summary_json(const DataSummary& s) {
  Json vars = Json::array();
  for (const auto& v : s.variables) {
    Json row{{"name", v.name}, {"role", v.role}, {"binary", v.binary}};
    if (v.binary) {
      row["count"] = {v.count[0], v.count[1]};
      row["percent"] = {v.value[0], v.value[1]};
    } else {
      row["mean"] = {v.value[0], v.value[1]};
    }
    vars.push_back(std::move(row));
  }
  return {{"group_size", {s.group_size[0], s.group_size[1]}}, {"variables", vars}};
}

std::string dump(const Json& doc) { return doc.dump(2) + "\n"; }

std::string format_effect_table(const EffectTable& table, double level) {
  std::ostringstream out;
  out << pad("Effect", 24) << lpad("Estimate", 9) << "  " << pad(percent_label(level) + " CI", 20)
      << lpad("Proportion of TCE (%)", 21) << "\n";
  for (const auto& name : display_effect_order(table.mediator_count)) {
    const EffectEstimate* e = table.find(name);
    if (!e) continue;
    const std::string ci = e->ci ? "(" + fixed(e->ci->first, 3) + ", " + fixed(e->ci->second, 3) + ")" : "-";
    const std::string prop = e->proportion ? fixed(std::round(*e->proportion), 0) : "-";
    out << pad(effect_display_name(name), 24) << lpad(fixed(e->estimate, 3), 9) << "  " << pad(ci, 20)
        << lpad(prop, 21) << "\n";
  }
  return out.str();
}

std::string format_associations(const std::vector<Association>& rows, double level) {
  std::ostringstream out;
  const std::string ci = percent_label(level) + " CI";
  std::string section;
  for (const auto& r : rows) {
    if (r.section != section) {
      section = r.section;
      if (out.tellp() > 0) out << "\n";
      out << section << "\n";
      out << pad("  Predictor -> Response", 30) << lpad("Crude OR", 9) << "  " << pad(ci, 18) << lpad("Adjusted OR", 12)
          << "  " << ci << "\n";
    }
    auto interval = [](const OddsRatio& o) { return "(" + fixed(o.lower, 2) + ", " + fixed(o.upper, 2) + ")"; };
    out << pad("  " + r.predictor + " -> " + r.response, 30) << lpad(fixed(r.crude.estimate, 2), 9) << "  "
        << pad(interval(r.crude), 18) << lpad(fixed(r.adjusted.estimate, 2), 12) << "  " << interval(r.adjusted)
        << "\n";
  }
  return out.str();
}

std::string format_summary(const DataSummary& s) {
  std::ostringstream out;
  out << pad("Variable", 16) << pad("Role", 12) << lpad("Unexposed", 18) << lpad("Exposed", 18) << "\n";
  out << pad("n", 28) << lpad(std::to_string(s.group_size[0]), 18) << lpad(std::to_string(s.group_size[1]), 18)
      << "\n";
  for (const auto& v : s.variables) {
    auto cell = [&](int g) {
      return v.binary ? std::to_string(v.count[g]) + " (" + fixed(v.value[g], 1) + "%)" : fixed(v.value[g], 3);
    };
    out << pad(v.name, 16) << pad(v.role, 12) << lpad(cell(0), 18) << lpad(cell(1), 18) << "\n";
  }
  return out.str();
}

}  // namespace trialmed
