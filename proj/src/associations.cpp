#include <string>
#include <vector>

#include "trialmed/errors.hpp"
#include "trialmed/glm.hpp"

namespace trialmed {
namespace {

OddsRatio first_term_or(const Dataset& data, const std::string& predictor, const std::string& response,
                        const std::vector<std::string>& adjust, const FitOptions& options, double level) {
  std::vector<std::string> mains{predictor};
  mains.insert(mains.end(), adjust.begin(), adjust.end());
  const TermSet terms(std::move(mains));
  try {
    return odds_ratios(fit_logistic(data, terms, response, options), level).front();
  } catch (const FitError& e) {
    throw FitError(e.kind(), std::string(e.what()) + " [association " + predictor + " -> " + response + "]",
                   e.term());
  }
}

}  // namespace

std::vector<Association> associations(const Dataset& data, const FitOptions& options, double level) {
  const auto& roles = data.roles();
  std::vector<Association> out;

  auto add = [&](std::string section, const std::string& predictor, const std::string& response,
                 std::vector<std::string> adjust) {
    Association row;
    row.section = std::move(section);
    row.predictor = predictor;
    row.response = response;
    row.crude = first_term_or(data, predictor, response, {}, options, level);
    row.adjusted = first_term_or(data, predictor, response, adjust, options, level);
    out.push_back(std::move(row));
  };

  add("exposure-outcome", roles.exposure, roles.outcome, roles.confounders);
  for (const auto& m : roles.mediators) add("exposure-mediator", roles.exposure, m, roles.confounders);
  for (const auto& m : roles.mediators) {
    std::vector<std::string> adjust{roles.exposure};
    adjust.insert(adjust.end(), roles.confounders.begin(), roles.confounders.end());
    add("mediator-outcome", m, roles.outcome, std::move(adjust));
  }
  return out;
}

}  // namespace trialmed
