#include "trialmed/glm.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "trialmed/errors.hpp"
#include "trialmed/kernels.hpp"
#include "trialmed/stats.hpp"

namespace trialmed {
namespace {

constexpr double kMinWeight = 1e-15;

// log(1 + exp(x)) without overflow.
double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

void linear_predictor(const Eigen::MatrixXd& design, const Eigen::VectorXd& beta, std::vector<double>& eta) {
  const auto n = static_cast<std::size_t>(design.rows());
  eta.assign(n, 0.0);
  for (Eigen::Index j = 0; j < design.cols(); ++j) {
    kernels::axpy(beta[j], std::span<const double>(design.col(j).data(), n), eta);
  }
}

double penalized_deviance(std::span<const double> eta, std::span<const double> y, const Eigen::VectorXd& beta,
                          double ridge) {
  double ll = 0.0;
  for (std::size_t i = 0; i < eta.size(); ++i) ll += y[i] * eta[i] - softplus(eta[i]);
  if (ridge > 0.0) ll -= 0.5 * ridge * beta.tail(beta.size() - 1).squaredNorm();
  return -2.0 * ll;
}

Eigen::VectorXd score_at(const Eigen::MatrixXd& design, std::span<const double> y, std::span<const double> mu,
                         const Eigen::VectorXd& beta, double ridge) {
  Eigen::VectorXd resid(static_cast<Eigen::Index>(y.size()));
  for (std::size_t i = 0; i < y.size(); ++i) resid[static_cast<Eigen::Index>(i)] = y[i] - mu[i];
  Eigen::VectorXd g = design.transpose() * resid;
  if (ridge > 0.0) g.tail(g.size() - 1) -= ridge * beta.tail(beta.size() - 1);
  return g;
}

// Information matrix X'WX (+ ridge on non-intercept diagonal).
Eigen::MatrixXd information(const Eigen::MatrixXd& design, std::span<const double> mu, double ridge) {
  Eigen::VectorXd w(design.rows());
  for (Eigen::Index i = 0; i < design.rows(); ++i) {
    const double m = mu[static_cast<std::size_t>(i)];
    w[i] = m * (1.0 - m);
  }
  Eigen::MatrixXd info = design.transpose() * w.asDiagonal() * design;
  if (ridge > 0.0) info.diagonal().tail(info.rows() - 1).array() += ridge;
  return info;
}

void check_binary(std::span<const double> y) {
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] != 0.0 && y[i] != 1.0) {
      throw DataError(DataError::Kind::kNonBinaryValue, "response value at row " + std::to_string(i + 1) +
                                                            " is not 0 or 1");
    }
  }
}

}  // namespace

std::string interaction_label(const std::vector<std::string>& factors) {
  std::string out;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    if (i) out += ':';
    out += factors[i];
  }
  return out;
}

TermSet::TermSet(std::vector<std::string> mains, std::vector<std::vector<std::string>> interactions)
    : mains_(std::move(mains)), interactions_(std::move(interactions)) {
  std::set<std::string> seen;
  for (const auto& m : mains_) {
    if (m.empty()) throw UsageError("empty term name");
    if (!seen.insert(m).second) throw UsageError("duplicate term '" + m + "'");
  }
  std::set<std::set<std::string>> seen_products;
  for (const auto& inter : interactions_) {
    const std::set<std::string> members(inter.begin(), inter.end());
    if (inter.size() < 2 || members.size() != inter.size()) {
      throw UsageError("interaction '" + interaction_label(inter) + "' needs two or more distinct columns");
    }
    for (const auto& f : inter) {
      if (std::find(mains_.begin(), mains_.end(), f) == mains_.end()) {
        throw UsageError("interaction '" + interaction_label(inter) + "' uses '" + f +
                         "', which is not a main effect");
      }
    }
    if (!seen_products.insert(members).second) {
      throw UsageError("duplicate interaction '" + interaction_label(inter) + "'");
    }
  }
}

std::vector<std::string> TermSet::labels() const {
  std::vector<std::string> out = mains_;
  for (const auto& inter : interactions_) out.push_back(interaction_label(inter));
  return out;
}

std::vector<std::string> TermSet::coefficient_labels() const {
  std::vector<std::string> out{"(Intercept)"};
  const auto l = labels();
  out.insert(out.end(), l.begin(), l.end());
  return out;
}

Eigen::MatrixXd build_design(const Dataset& data, const TermSet& terms) {
  const auto n = static_cast<Eigen::Index>(data.rows());
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(terms.size() + 1));
  x.col(0).setOnes();
  Eigen::Index j = 1;
  for (const auto& m : terms.mains()) {
    const auto col = data.column(m);
    x.col(j++) = Eigen::Map<const Eigen::VectorXd>(col.data(), n);
  }
  for (const auto& inter : terms.interactions()) {
    auto dst = x.col(j++);
    dst = Eigen::Map<const Eigen::VectorXd>(data.column(inter.front()).data(), n);
    for (std::size_t f = 1; f < inter.size(); ++f) {
      dst.array() *= Eigen::Map<const Eigen::ArrayXd>(data.column(inter[f]).data(), n);
    }
  }
  return x;
}

double FittedModel::linear_predictor(std::span<const double> design_row) const {
  double eta = 0.0;
  for (Eigen::Index j = 0; j < coefficients.size(); ++j) eta += coefficients[j] * design_row[static_cast<std::size_t>(j)];
  return eta;
}

FittedModel fit_logistic(const Eigen::MatrixXd& design, std::span<const double> response, const TermSet& terms,
                         std::string response_name, const FitOptions& options) {
  const auto n = static_cast<std::size_t>(design.rows());
  const auto p = design.cols();
  const auto labels = terms.coefficient_labels();
  if (static_cast<std::size_t>(p) != labels.size()) throw UsageError("design width does not match the term list");
  if (response.size() != n) throw UsageError("response length does not match the design");
  if (n == 0) throw DataError(DataError::Kind::kEmptyData, "cannot fit " + response_name + " on zero rows");
  check_binary(response);

  const double ybar = std::accumulate(response.begin(), response.end(), 0.0) / static_cast<double>(n);
  if ((ybar == 0.0 || ybar == 1.0) && options.ridge <= 0.0) {
    throw FitError(FitError::Kind::kSeparation,
                   "model for " + response_name + ": response is constant (" + (ybar == 0.0 ? "all 0" : "all 1") +
                       "), so the maximum likelihood estimate diverges",
                   "(Intercept)");
  }

  if (options.ridge <= 0.0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < p) {
      const auto dropped = qr.colsPermutation().indices()[qr.rank()];
      throw FitError(FitError::Kind::kRankDeficient,
                     "model for " + response_name + ": design is rank deficient (" + std::to_string(qr.rank()) +
                         " of " + std::to_string(p) + " columns independent); term '" +
                         labels[static_cast<std::size_t>(dropped)] + "' is collinear with the others",
                     labels[static_cast<std::size_t>(dropped)]);
    }
  }

  FittedModel model;
  model.terms = terms;
  model.response = std::move(response_name);
  model.observations = n;

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  beta[0] = logit(std::clamp(ybar, 1e-6, 1.0 - 1e-6));

  std::vector<double> eta, mu(n);
  linear_predictor(design, beta, eta);
  kernels::logistic(eta, mu);
  double dev = penalized_deviance(eta, response, beta, options.ridge);

  const Eigen::Index penalty_rows = options.ridge > 0.0 ? p - 1 : 0;
  Eigen::MatrixXd lhs(static_cast<Eigen::Index>(n) + penalty_rows, p);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(n) + penalty_rows);
  std::vector<double> cand_eta, cand_mu(n);

  int iter = 0;
  bool converged = false;
  Eigen::VectorXd g = score_at(design, response, mu, beta, options.ridge);
  for (;;) {
    if (iter >= options.max_iter) break;

    // Newton step as least squares: [sqrt(W) X; sqrt(ridge) I] d = [(y - mu)/sqrt(W); -sqrt(ridge) beta].
    for (std::size_t i = 0; i < n; ++i) {
      const double w = std::max(mu[i] * (1.0 - mu[i]), kMinWeight);
      const double sw = std::sqrt(w);
      const auto r = static_cast<Eigen::Index>(i);
      lhs.row(r) = sw * design.row(r);
      rhs[r] = (response[i] - mu[i]) / sw;
    }
    if (penalty_rows > 0) {
      const double sr = std::sqrt(options.ridge);
      lhs.bottomRows(penalty_rows).setZero();
      for (Eigen::Index j = 1; j < p; ++j) {
        lhs(static_cast<Eigen::Index>(n) + j - 1, j) = sr;
        rhs[static_cast<Eigen::Index>(n) + j - 1] = -sr * beta[j];
      }
    }
    Eigen::VectorXd step = lhs.householderQr().solve(rhs);
    ++iter;

    // Step halving guards against overshooting on near-separated data.
    double cand_dev = 0.0;
    Eigen::VectorXd cand;
    for (int halving = 0;; ++halving) {
      cand = beta + step;
      linear_predictor(design, cand, cand_eta);
      cand_dev = penalized_deviance(cand_eta, response, cand, options.ridge);
      if (std::isfinite(cand_dev) && cand_dev <= dev + 1e-9 * (std::abs(dev) + 1.0)) break;
      if (halving == 30) break;
      step *= 0.5;
    }
    beta = cand;
    eta.swap(cand_eta);
    kernels::logistic(eta, mu);

    if (options.ridge <= 0.0) {
      Eigen::Index worst;
      if (beta.cwiseAbs().maxCoeff(&worst) > options.separation_bound) {
        throw FitError(FitError::Kind::kSeparation,
                       "model for " + model.response + ": coefficient of '" +
                           labels[static_cast<std::size_t>(worst)] + "' exceeds " +
                           std::to_string(options.separation_bound) +
                           " on the logit scale (quasi-complete separation); consider a small ridge penalty",
                       labels[static_cast<std::size_t>(worst)]);
      }
    }

    const double change = std::abs(cand_dev - dev) / (std::abs(cand_dev) + 0.1);
    dev = cand_dev;
    g = score_at(design, response, mu, beta, options.ridge);
    if (change <= options.deviance_tol && g.cwiseAbs().maxCoeff() <= options.score_tol) {
      converged = true;
      break;
    }
  }

  if (converged && options.ridge <= 0.0) {
    const auto [lo, hi] = std::minmax_element(mu.begin(), mu.end());
    if (*lo < options.boundary_prob || *hi > 1.0 - options.boundary_prob) {
      Eigen::Index worst = -1;
      if (p > 1) beta.tail(p - 1).cwiseAbs().maxCoeff(&worst);
      const auto& term = labels[static_cast<std::size_t>(worst + 1)];
      throw FitError(FitError::Kind::kSeparation,
                     "model for " + model.response + ": fitted probabilities reach 0 or 1 (quasi-complete separation, "
                     "largest coefficient on '" + term + "'); consider a small ridge penalty",
                     term);
    }
  }

  model.coefficients = beta;
  model.iterations = iter;
  model.deviance = dev;
  model.max_abs_score = g.cwiseAbs().maxCoeff();
  model.converged = converged;
  if (!converged) {
    throw FitError(FitError::Kind::kNonConvergence,
                   "model for " + model.response + " did not converge in " + std::to_string(options.max_iter) +
                       " iterations (max |score| = " + std::to_string(model.max_abs_score) + ")",
                   model.response);
  }

  const Eigen::MatrixXd info = information(design, mu, options.ridge);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      ldlt.vectorD().minCoeff() <= 1e-14 * std::max(1.0, ldlt.vectorD().maxCoeff())) {
    throw FitError(FitError::Kind::kSingularInformation,
                   "model for " + model.response + ": information matrix is singular at the estimate", model.response);
  }
  model.covariance = ldlt.solve(Eigen::MatrixXd::Identity(p, p));
  return model;
}

FittedModel fit_logistic(const Dataset& data, const TermSet& terms, std::string_view response,
                         const FitOptions& options) {
  return fit_logistic(build_design(data, terms), data.column(response), terms, std::string(response), options);
}

double log_likelihood(const Eigen::MatrixXd& design, std::span<const double> response, const Eigen::VectorXd& beta,
                      double ridge) {
  std::vector<double> eta;
  linear_predictor(design, beta, eta);
  return -0.5 * penalized_deviance(eta, response, beta, ridge);
}

Eigen::VectorXd score(const Eigen::MatrixXd& design, std::span<const double> response, const Eigen::VectorXd& beta,
                      double ridge) {
  std::vector<double> eta, mu(static_cast<std::size_t>(design.rows()));
  linear_predictor(design, beta, eta);
  kernels::logistic(eta, mu);
  return score_at(design, response, mu, beta, ridge);
}

double inverse_logit(double eta) noexcept { return 1.0 / (1.0 + std::exp(-eta)); }

double logit(double p) noexcept { return std::log(p / (1.0 - p)); }

double predict_prob(const FittedModel& model, const CovariateLookup& covariates) {
  double eta = model.coefficients[0];
  Eigen::Index j = 1;
  std::vector<double> mains;
  mains.reserve(model.terms.mains().size());
  for (const auto& m : model.terms.mains()) {
    mains.push_back(covariates(m));
    eta += model.coefficients[j++] * mains.back();
  }
  const auto& names = model.terms.mains();
  for (const auto& inter : model.terms.interactions()) {
    double prod = 1.0;
    for (const auto& f : inter) {
      prod *= mains[static_cast<std::size_t>(std::find(names.begin(), names.end(), f) - names.begin())];
    }
    eta += model.coefficients[j++] * prod;
  }
  return inverse_logit(eta);
}

double predict_prob(const FittedModel& model, const std::map<std::string, double, std::less<>>& row) {
  return predict_prob(model, [&](std::string_view name) {
    const auto it = row.find(name);
    if (it == row.end()) {
      throw DataError(DataError::Kind::kMissingColumn, "covariate '" + std::string(name) + "' is required by the model for " + model.response);
    }
    return it->second;
  });
}

std::vector<OddsRatio> odds_ratios(const FittedModel& model, double level) {
  const double z = stats::normal_quantile(0.5 + 0.5 * level);
  const auto labels = model.terms.coefficient_labels();
  std::vector<OddsRatio> out;
  for (std::size_t j = 1; j < labels.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const double b = model.coefficients[jj];
    const double se = std::sqrt(model.covariance(jj, jj));
    out.push_back({labels[j], std::exp(b), std::exp(b - z * se), std::exp(b + z * se)});
  }
  return out;
}

}  // namespace trialmed
