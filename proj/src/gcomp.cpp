#include "trialmed/gcomp.hpp"

#include <algorithm>
#include <cassert>
#include <map>
#include <optional>

#include "trialmed/errors.hpp"
#include "trialmed/kernels.hpp"
#include "trialmed/parallel.hpp"
#include "trialmed/rng.hpp"

namespace trialmed {
namespace {

constexpr std::size_t kChunk = 2048;

// A working model evaluated at a fixed exposure level. Everything that does
// not involve a drawn mediator is folded into `base`, once per individual.
struct CompiledModel {
  struct MediatorTerm {
    double coef = 0.0;
    std::vector<std::size_t> mediators;  // mediator indices multiplied together
    std::vector<double> confounder_product;  // per individual; empty when no confounder factor
  };
  std::vector<double> base;             // linear predictor without mediator terms
  std::vector<double> constant_prob;    // filled when there are no mediator terms
  std::vector<MediatorTerm> terms;
};

CompiledModel compile(const FittedModel& model, const Dataset& data, int exposure_level) {
  const auto& roles = data.roles();
  const std::size_t n = data.rows();
  const auto& mains = model.terms.mains();

  auto mediator_index = [&](const std::string& name) -> std::optional<std::size_t> {
    const auto it = std::find(roles.mediators.begin(), roles.mediators.end(), name);
    if (it == roles.mediators.end()) return std::nullopt;
    return static_cast<std::size_t>(it - roles.mediators.begin());
  };

  CompiledModel out;
  out.base.assign(n, model.coefficients[0]);

  auto add_term = [&](double coef, const std::vector<std::string>& factors) {
    std::vector<std::size_t> meds;
    std::vector<std::string> confs;
    for (const auto& f : factors) {
      if (f == roles.exposure) {
        coef *= static_cast<double>(exposure_level);
      } else if (const auto k = mediator_index(f)) {
        meds.push_back(*k);
      } else {
        confs.push_back(f);
      }
    }
    if (coef == 0.0) return;
    std::vector<double> conf_product;
    if (!confs.empty()) {
      conf_product.assign(n, 1.0);
      for (const auto& c : confs) kernels::multiply(conf_product, data.column(c), conf_product);
    }
    if (meds.empty()) {
      if (conf_product.empty()) {
        for (double& b : out.base) b += coef;
      } else {
        kernels::axpy(coef, conf_product, out.base);
      }
      return;
    }
    out.terms.push_back({coef, std::move(meds), std::move(conf_product)});
  };

  Eigen::Index j = 1;
  for (const auto& m : mains) add_term(model.coefficients[j++], {m});
  for (const auto& inter : model.terms.interactions()) add_term(model.coefficients[j++], inter);

  if (out.terms.empty()) {
    out.constant_prob.resize(n);
    kernels::logistic(out.base, out.constant_prob);
  }
  return out;
}

struct DrawStep {
  std::size_t mediator = 0;
  std::size_t model = 0;  // index into compiled models
};

struct ArmProgram {
  std::vector<DrawStep> steps;  // in draw order; each step's conditioning mediators precede it
  std::size_t outcome_model = 0;
};

struct Scratch {
  explicit Scratch(std::size_t mediators)
      : eta(kChunk), prob(kChunk), product(kChunk), uniforms(mediators, std::vector<double>(kChunk)),
        draws(mediators, std::vector<double>(kChunk)) {}
  std::vector<double> eta, prob, product;
  std::vector<std::vector<double>> uniforms, draws;
};

// Probability for rows [begin, begin + len) under `model`, given mediator draws in `s.draws`.
std::span<const double> evaluate(const CompiledModel& model, std::size_t begin, std::size_t len, Scratch& s) {
  if (!model.constant_prob.empty()) return std::span<const double>(model.constant_prob).subspan(begin, len);
  std::span<double> eta(s.eta.data(), len);
  std::copy_n(model.base.begin() + static_cast<std::ptrdiff_t>(begin), len, eta.begin());
  std::span<double> product(s.product.data(), len);
  for (const auto& term : model.terms) {
    const std::span<const double> first(s.draws[term.mediators.front()].data(), len);
    if (term.mediators.size() == 1 && term.confounder_product.empty()) {
      kernels::axpy(term.coef, first, eta);
      continue;
    }
    if (term.confounder_product.empty()) {
      std::copy(first.begin(), first.end(), product.begin());
    } else {
      kernels::multiply(first, std::span<const double>(term.confounder_product).subspan(begin, len), product);
    }
    for (std::size_t f = 1; f < term.mediators.size(); ++f) {
      kernels::multiply(product, std::span<const double>(s.draws[term.mediators[f]].data(), len), product);
    }
    kernels::axpy(term.coef, product, eta);
  }
  std::span<double> prob(s.prob.data(), len);
  kernels::logistic(eta, prob);
  return prob;
}

}  // namespace

void EstimationConfig::validate() const {
  if (n_sim < 1) throw UsageError("the number of Monte Carlo repetitions must be at least 1");
  if (threads < 1) throw UsageError("thread count must be at least 1");
  if (fit.ridge < 0.0) throw UsageError("ridge penalty must be non-negative");
}

std::string describe_model(const ModelRequirement& entry) {
  std::string out = entry.target + " ~ ";
  const auto labels = entry.terms.labels();
  for (std::size_t i = 0; i < labels.size(); ++i) out += (i ? " + " : "") + labels[i];
  return out;
}

FittedPlan fit_models(const Dataset& data, const ModelPlan& plan, const FitOptions& options, std::size_t threads) {
  FittedPlan fitted{plan, std::vector<FittedModel>(plan.entries.size())};
  parallel_for(plan.entries.size(), threads, [&](std::size_t i) {
    const auto& entry = plan.entries[i];
    try {
      fitted.models[i] = fit_logistic(data, entry.terms, entry.target, options);
    } catch (const FitError& e) {
      throw FitError(e.kind(), "fitting " + describe_model(entry) + ": " + e.what(), e.term());
    }
  });
  return fitted;
}

std::vector<double> simulate_arms(const FittedPlan& fitted, const Dataset& data, std::span<const ArmSpec> arms,
                                  std::size_t n_sim, std::uint64_t seed, std::size_t threads) {
  if (n_sim < 1) throw UsageError("the number of Monte Carlo repetitions must be at least 1");
  const auto& roles = data.roles();
  const std::size_t n = data.rows();
  const std::size_t k_max = roles.mediators.size();

  // Compile each (model, exposure level) pair an arm needs.
  std::map<std::pair<std::size_t, int>, std::size_t> compiled_index;
  std::vector<CompiledModel> compiled;
  auto compiled_for = [&](std::size_t model, int a) {
    const auto key = std::make_pair(model, a);
    if (const auto it = compiled_index.find(key); it != compiled_index.end()) return it->second;
    compiled.push_back(compile(fitted.models.at(model), data, a));
    compiled_index.emplace(key, compiled.size() - 1);
    return compiled.size() - 1;
  };

  const std::size_t outcome = fitted.plan.outcome_index();
  std::vector<ArmProgram> programs;
  for (const auto& arm : arms) {
    if (arm.draws.size() != k_max) throw UsageError("arm " + arm.label() + " does not match the mediator count");
    ArmProgram prog;
    for (const auto& block : draw_blocks(arm)) {
      for (std::size_t t = 0; t < block.members.size(); ++t) {
        const std::span<const std::size_t> previous(block.members.data(), t);
        const std::size_t k = block.members[t];
        const auto entry = fitted.plan.find(roles.mediators[k], mediator_conditioning(roles, previous));
        if (!entry) {
          throw UsageError("model plan lacks the model for " + roles.mediators[k] + " required by arm " + arm.label());
        }
        prog.steps.push_back({k, compiled_for(*entry, block.exposure)});
      }
    }
    prog.outcome_model = compiled_for(outcome, arm.outcome_exposure);
    programs.push_back(std::move(prog));
  }

  const std::uint64_t sim_key = rng::derive(seed, rng::kSimulation);
  // rep_sums[arm * n_sim + rep]: sum of predicted outcome probabilities over individuals.
  std::vector<double> rep_sums(arms.size() * n_sim, 0.0);

  parallel_for(n_sim, threads, [&](std::size_t rep) {
    Scratch s(k_max);
    std::vector<std::uint64_t> keys(k_max);
    const std::uint64_t rep_key = rng::derive(sim_key, rep);
    for (std::size_t k = 0; k < k_max; ++k) keys[k] = rng::derive(rep_key, k);

    std::vector<double> sums(arms.size(), 0.0);
    for (std::size_t begin = 0; begin < n; begin += kChunk) {
      const std::size_t len = std::min(kChunk, n - begin);
      for (std::size_t k = 0; k < k_max; ++k) {
        for (std::size_t i = 0; i < len; ++i) s.uniforms[k][i] = rng::uniform(keys[k], begin + i);
      }
      for (std::size_t a = 0; a < programs.size(); ++a) {
        const auto& prog = programs[a];
        for (const auto& step : prog.steps) {
          const auto prob = evaluate(compiled[step.model], begin, len, s);
          kernels::bernoulli(std::span<const double>(s.uniforms[step.mediator].data(), len), prob,
                             std::span<double>(s.draws[step.mediator].data(), len));
        }
        sums[a] += kernels::sum(evaluate(compiled[prog.outcome_model], begin, len, s));
      }
    }
    for (std::size_t a = 0; a < arms.size(); ++a) rep_sums[a * n_sim + rep] = sums[a];
  });

  std::vector<double> out(arms.size());
  const double denom = static_cast<double>(n) * static_cast<double>(n_sim);
  for (std::size_t a = 0; a < arms.size(); ++a) {
    double total = 0.0;
    for (std::size_t rep = 0; rep < n_sim; ++rep) total += rep_sums[a * n_sim + rep];
    const double p = total / denom;
    assert(p >= 0.0 && p <= 1.0);
    out[a] = std::clamp(p, 0.0, 1.0);
  }
  return out;
}

double simulate_arm(const FittedPlan& fitted, const Dataset& data, const ArmSpec& arm, std::size_t n_sim,
                    std::uint64_t seed) {
  return simulate_arms(fitted, data, std::span<const ArmSpec>(&arm, 1), n_sim, seed).front();
}

Estimation run_estimation(const Dataset& data, const EstimationConfig& config) {
  config.validate();
  data.require_both_exposure_groups();
  const std::size_t k_max = data.roles().mediators.size();

  Estimation est;
  if (config.arms.empty()) {
    est.arms = standard_arms(k_max);
  } else {
    for (const auto& label : config.arms) est.arms.push_back(arm_from_label(label, k_max));
  }
  est.groups = dedup_arms(est.arms);
  const ModelPlan plan = model_plan(est.groups.unique, data.roles(), config.interactions);
  est.fitted = fit_models(data, plan, config.fit, config.threads);

  const auto unique_p = simulate_arms(est.fitted, data, est.groups.unique, config.n_sim, config.seed, config.threads);
  std::map<std::string, double> arm_p;
  for (std::size_t i = 0; i < est.arms.size(); ++i) arm_p[est.arms[i].label()] = unique_p[est.groups.index_of[i]];
  est.table = assemble_effects(k_max, arm_p);
  return est;
}

EffectTable estimate_effects(const Dataset& data, const EstimationConfig& config) {
  return run_estimation(data, config).table;
}

}  // namespace trialmed
