#pragma once

#include <random>
#include <string>
#include <vector>

#include "trialmed/data.hpp"
#include "trialmed/dgp.hpp"

namespace testing {

inline trialmed::VariableRoles roles_k(std::size_t k, std::size_t confounders) {
  trialmed::VariableRoles r;
  r.exposure = "A";
  for (std::size_t i = 1; i <= k; ++i) r.mediators.push_back("M" + std::to_string(i));
  r.outcome = "Y";
  for (std::size_t j = 1; j <= confounders; ++j) r.confounders.push_back("C" + std::to_string(j));
  return r;
}

inline trialmed::LogisticLaw make_law(double intercept, std::vector<std::pair<std::vector<std::string>, double>> terms) {
  trialmed::LogisticLaw law;
  law.intercept = intercept;
  for (auto& [f, c] : terms) law.terms.push_back({f, c, 0});
  return law;
}

// Random enumerable DGP: coefficients U(-1.5, 1.5) on every parent, plus
// every exposure/mediator pairwise product, with a random confounder law.
inline trialmed::Dgp random_dgp(std::mt19937_64& gen, std::size_t k, std::size_t nc) {
  std::uniform_real_distribution<double> coef(-1.5, 1.5);
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  trialmed::Dgp d;
  for (std::size_t j = 1; j <= nc; ++j) d.confounders.push_back("C" + std::to_string(j));
  if (nc > 0 && gen() % 2 == 0) {
    d.confounder_law = trialmed::Dgp::ConfounderLaw::kTable;
    double total = 0.0;
    for (std::size_t c = 0; c < (std::size_t{1} << nc); ++c) {
      d.confounder_probs.push_back(unit(gen));
      total += d.confounder_probs.back();
    }
    for (double& p : d.confounder_probs) p /= total;
    // Last cell absorbs rounding.
    double sum = 0.0;
    for (std::size_t c = 0; c + 1 < d.confounder_probs.size(); ++c) sum += d.confounder_probs[c];
    d.confounder_probs.back() = 1.0 - sum;
  } else {
    for (std::size_t j = 0; j < nc; ++j) d.confounder_probs.push_back(unit(gen));
  }

  std::vector<std::string> parents = d.confounders;
  auto law_for = [&](const std::vector<std::string>& treat_mediators) {
    trialmed::LogisticLaw law;
    law.intercept = coef(gen);
    for (const auto& p : parents) law.terms.push_back({{p}, coef(gen), 0});
    for (std::size_t i = 0; i < treat_mediators.size(); ++i) {
      for (std::size_t j = i + 1; j < treat_mediators.size(); ++j) {
        law.terms.push_back({{treat_mediators[i], treat_mediators[j]}, coef(gen), 0});
      }
    }
    return law;
  };

  d.exposure = "A";
  d.exposure_law = law_for({});
  parents.push_back("A");
  std::vector<std::string> am{"A"};
  for (std::size_t i = 1; i <= k; ++i) {
    const std::string name = "M" + std::to_string(i);
    d.mediators.push_back(name);
    d.mediator_laws.push_back(law_for(am));
    parents.push_back(name);
    am.push_back(name);
  }
  d.outcome = "Y";
  d.outcome_law = law_for(am);
  d.finalize();
  return d;
}

}  // namespace testing
