#include "trialmed/dgp.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "trialmed/errors.hpp"
#include "trialmed/glm.hpp"
#include "trialmed/synth.hpp"

namespace trialmed {
namespace {

[[noreturn]] void invalid(const std::string& msg) { throw DataError(DataError::Kind::kInvalidDgp, msg); }

std::vector<std::string> split_term(const std::string& key) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = key.find(':', start);
    out.push_back(key.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string join_term(const std::vector<std::string>& factors) {
  std::string out;
  for (std::size_t i = 0; i < factors.size(); ++i) out += (i ? ":" : "") + factors[i];
  return out;
}

double finite_number(const nlohmann::ordered_json& v, const std::string& what) {
  if (!v.is_number()) invalid(what + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) invalid(what + " must be finite");
  return x;
}

LogisticLaw law_from_json(const nlohmann::ordered_json& node, std::string& name, const std::string& role) {
  if (!node.is_object()) invalid(role + " model must be an object");
  if (!node.contains("name") || !node["name"].is_string()) invalid(role + " model needs a \"name\" string");
  name = node["name"].get<std::string>();
  LogisticLaw law;
  law.intercept = node.contains("intercept") ? finite_number(node["intercept"], name + " intercept") : 0.0;
  if (node.contains("coefficients")) {
    const auto& coefs = node["coefficients"];
    if (!coefs.is_object()) invalid(name + " coefficients must be an object keyed by term");
    for (const auto& [key, value] : coefs.items()) {
      law.terms.push_back({split_term(key), finite_number(value, name + " coefficient " + key), 0});
    }
  }
  return law;
}

nlohmann::ordered_json law_to_json(const LogisticLaw& law, const std::string& name) {
  nlohmann::ordered_json coefs = nlohmann::ordered_json::object();
  for (const auto& t : law.terms) coefs[join_term(t.factors)] = t.coef;
  return {{"name", name}, {"intercept", law.intercept}, {"coefficients", coefs}};
}

}  // namespace

double LogisticLaw::probability(std::uint64_t config) const noexcept {
  double eta = intercept;
  for (const auto& t : terms) {
    if ((config & t.mask) == t.mask) eta += t.coef;
  }
  return inverse_logit(eta);
}

double Dgp::confounder_probability(std::uint64_t c) const noexcept {
  if (confounder_law == ConfounderLaw::kTable) return confounder_probs[c];
  double p = 1.0;
  for (std::size_t j = 0; j < confounders.size(); ++j) {
    p *= ((c >> j) & 1U) ? confounder_probs[j] : 1.0 - confounder_probs[j];
  }
  return p;
}

void Dgp::finalize() {
  if (mediators.empty()) invalid("a DGP needs at least one mediator");
  if (mediator_laws.size() != mediators.size()) invalid("every mediator needs a model");
  if (confounders.size() + mediators.size() + 1 > 63) invalid("too many variables for a DGP");

  std::set<std::string> seen;
  auto declare = [&](const std::string& name) {
    if (name.empty() || name.find(':') != std::string::npos || name.find(',') != std::string::npos) {
      invalid("invalid variable name '" + name + "'");
    }
    if (!seen.insert(name).second) invalid("variable '" + name + "' is declared twice");
  };

  if (confounder_law == ConfounderLaw::kIndependent) {
    if (confounder_probs.size() != confounders.size()) invalid("need one probability per confounder");
    for (std::size_t j = 0; j < confounders.size(); ++j) {
      const double p = confounder_probs[j];
      if (!(p >= 0.0 && p <= 1.0)) invalid("P(" + confounders[j] + " = 1) must lie in [0, 1]");
    }
  } else {
    if (confounder_probs.size() != (std::size_t{1} << confounders.size())) {
      invalid("confounder table needs 2^" + std::to_string(confounders.size()) + " cells");
    }
    double total = 0.0;
    for (double p : confounder_probs) {
      if (!(p >= 0.0 && p <= 1.0)) invalid("confounder table cells must lie in [0, 1]");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) invalid("confounder table must sum to 1");
  }

  // Parents of each node are everything declared before it.
  std::vector<std::pair<std::string, std::size_t>> parents;
  auto bind = [&](LogisticLaw& law, const std::string& node) {
    for (auto& t : law.terms) {
      t.mask = 0;
      std::set<std::string> distinct;
      for (const auto& f : t.factors) {
        if (!distinct.insert(f).second) invalid(node + " term " + join_term(t.factors) + " repeats " + f);
        const auto it = std::find_if(parents.begin(), parents.end(), [&](const auto& p) { return p.first == f; });
        if (it == parents.end()) invalid(node + " model uses '" + f + "', which is not a parent of " + node);
        t.mask |= std::uint64_t{1} << it->second;
      }
    }
  };

  for (std::size_t j = 0; j < confounders.size(); ++j) {
    declare(confounders[j]);
    parents.emplace_back(confounders[j], j);
  }
  declare(exposure);
  bind(exposure_law, exposure);
  parents.emplace_back(exposure, exposure_bit());
  for (std::size_t k = 0; k < mediators.size(); ++k) {
    declare(mediators[k]);
    bind(mediator_laws[k], mediators[k]);
    parents.emplace_back(mediators[k], mediator_bit(k));
  }
  declare(outcome);
  bind(outcome_law, outcome);
}

VariableRoles Dgp::roles() const { return {exposure, mediators, outcome, confounders}; }

Dgp dgp_from_json(const nlohmann::ordered_json& doc) {
  if (!doc.is_object()) invalid("DGP document must be a JSON object");
  Dgp dgp;
  if (doc.contains("confounders")) {
    if (!doc["confounders"].is_array()) invalid("\"confounders\" must be an array of names");
    for (const auto& c : doc["confounders"]) {
      if (!c.is_string()) invalid("confounder names must be strings");
      dgp.confounders.push_back(c.get<std::string>());
    }
  }
  if (!dgp.confounders.empty()) {
    if (!doc.contains("confounder_law") || !doc["confounder_law"].is_object()) {
      invalid("\"confounder_law\" must give \"independent\" or \"table\" probabilities");
    }
    const auto& law = doc["confounder_law"];
    const bool independent = law.contains("independent");
    if (independent == law.contains("table")) invalid("\"confounder_law\" needs exactly one of \"independent\", \"table\"");
    dgp.confounder_law = independent ? Dgp::ConfounderLaw::kIndependent : Dgp::ConfounderLaw::kTable;
    const auto& probs = law[independent ? "independent" : "table"];
    if (!probs.is_array()) invalid("confounder probabilities must be an array");
    for (const auto& p : probs) dgp.confounder_probs.push_back(finite_number(p, "confounder probability"));
  }
  if (!doc.contains("exposure")) invalid("DGP needs an \"exposure\" model");
  dgp.exposure_law = law_from_json(doc["exposure"], dgp.exposure, "exposure");
  if (!doc.contains("mediators") || !doc["mediators"].is_array()) invalid("DGP needs a \"mediators\" array");
  for (const auto& m : doc["mediators"]) {
    std::string name;
    dgp.mediator_laws.push_back(law_from_json(m, name, "mediator"));
    dgp.mediators.push_back(name);
  }
  if (!doc.contains("outcome")) invalid("DGP needs an \"outcome\" model");
  dgp.outcome_law = law_from_json(doc["outcome"], dgp.outcome, "outcome");
  dgp.finalize();
  return dgp;
}

nlohmann::ordered_json dgp_to_json(const Dgp& dgp) {
  nlohmann::ordered_json doc;
  doc["confounders"] = dgp.confounders;
  if (!dgp.confounders.empty()) {
    const char* key = dgp.confounder_law == Dgp::ConfounderLaw::kIndependent ? "independent" : "table";
    doc["confounder_law"] = {{key, dgp.confounder_probs}};
  }
  doc["exposure"] = law_to_json(dgp.exposure_law, dgp.exposure);
  doc["mediators"] = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < dgp.mediators.size(); ++k) {
    doc["mediators"].push_back(law_to_json(dgp.mediator_laws[k], dgp.mediators[k]));
  }
  doc["outcome"] = law_to_json(dgp.outcome_law, dgp.outcome);
  return doc;
}

Dgp load_dgp(const std::string& name_or_path) {
  if (name_or_path == "default") return default_dgp();
  if (name_or_path == "reference_k2") return reference_k2_dgp();
  std::ifstream in(name_or_path);
  if (!in) invalid("cannot open DGP file " + name_or_path);
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    invalid(name_or_path + ": " + e.what());
  }
  return dgp_from_json(doc);
}

}  // namespace trialmed
