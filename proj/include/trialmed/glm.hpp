#pragma once

// Logistic regression by iteratively reweighted least squares over an
// explicit list of terms.

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trialmed/data.hpp"

namespace trialmed {

/// Main effects plus product interactions. Every interaction lists two or
/// more distinct main-effect columns; its design column is their product.
class TermSet {
 public:
  TermSet() = default;
  TermSet(std::vector<std::string> mains, std::vector<std::vector<std::string>> interactions = {});

  const std::vector<std::string>& mains() const noexcept { return mains_; }
  const std::vector<std::vector<std::string>>& interactions() const noexcept { return interactions_; }
  std::size_t size() const noexcept { return mains_.size() + interactions_.size(); }

  /// Term labels in design order (mains, then "X:Z" interactions).
  std::vector<std::string> labels() const;
  /// Design column labels: "(Intercept)" followed by labels().
  std::vector<std::string> coefficient_labels() const;

  bool operator==(const TermSet&) const = default;

 private:
  std::vector<std::string> mains_;
  std::vector<std::vector<std::string>> interactions_;
};

std::string interaction_label(const std::vector<std::string>& factors);

/// n x (1 + terms) design with a leading intercept column.
Eigen::MatrixXd build_design(const Dataset& data, const TermSet& terms);

struct FitOptions {
  int max_iter = 100;
  /// Relative change in deviance, |dev - dev_prev| / (|dev| + 0.1).
  double deviance_tol = 1e-10;
  double score_tol = 1e-8;
  /// Penalty (ridge / 2) * ||beta||^2 on all coefficients but the intercept.
  double ridge = 0.0;
  /// |coefficient| above this is reported as separation when ridge == 0.
  double separation_bound = 30.0;
  /// A converged unpenalized fit with a fitted probability within this of 0
  /// or 1 is also reported as separation (the likelihood only flattens out).
  double boundary_prob = 1e-8;
};

struct FittedModel {
  TermSet terms;
  std::string response;
  Eigen::VectorXd coefficients;  // intercept first
  Eigen::MatrixXd covariance;    // inverse (penalized) observed information
  bool converged = false;
  int iterations = 0;
  double max_abs_score = 0.0;
  double deviance = 0.0;
  std::size_t observations = 0;

  double linear_predictor(std::span<const double> design_row) const;
};

FittedModel fit_logistic(const Eigen::MatrixXd& design, std::span<const double> response,
                         const TermSet& terms, std::string response_name, const FitOptions& options = {});

/// Convenience: build_design + fit_logistic on a dataset column.
FittedModel fit_logistic(const Dataset& data, const TermSet& terms, std::string_view response,
                         const FitOptions& options = {});

/// Bernoulli log-likelihood, minus the ridge penalty when `ridge` > 0.
double log_likelihood(const Eigen::MatrixXd& design, std::span<const double> response,
                      const Eigen::VectorXd& beta, double ridge = 0.0);
/// Gradient of log_likelihood with respect to beta.
Eigen::VectorXd score(const Eigen::MatrixXd& design, std::span<const double> response,
                      const Eigen::VectorXd& beta, double ridge = 0.0);

/// Covariate lookup by column name; must supply every main-effect column.
using CovariateLookup = std::function<double(std::string_view)>;

double predict_prob(const FittedModel& model, const CovariateLookup& covariates);
/// Throws DataError(kMissingColumn) when a required covariate is absent.
double predict_prob(const FittedModel& model, const std::map<std::string, double, std::less<>>& row);
double inverse_logit(double eta) noexcept;
double logit(double p) noexcept;

struct OddsRatio {
  std::string term;
  double estimate = 1.0;
  double lower = 1.0;
  double upper = 1.0;
};

/// exp(coefficient) with Wald intervals exp(coef -/+ z * SE) for every
/// non-intercept term.
std::vector<OddsRatio> odds_ratios(const FittedModel& model, double level = 0.95);

// Crude and adjusted associations between exposure, mediators and outcome.
struct Association {
  std::string section;  // "exposure-outcome", "exposure-mediator", "mediator-outcome"
  std::string predictor;
  std::string response;
  OddsRatio crude;
  OddsRatio adjusted;
};

/// Crude: single-predictor logistic models. Adjusted: plus all confounders,
/// and for mediator-outcome pairs also the exposure.
std::vector<Association> associations(const Dataset& data, const FitOptions& options = {}, double level = 0.95);

}  // namespace trialmed
