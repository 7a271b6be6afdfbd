#include "trialmed/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "trialmed/errors.hpp"
#include "trialmed/parallel.hpp"
#include "trialmed/rng.hpp"
#include "trialmed/stats.hpp"

namespace trialmed {

std::string ci_method_name(CiMethod method) { return method == CiMethod::kNormal ? "normal" : "percentile"; }

CiMethod parse_ci_method(std::string_view name) {
  if (name == "normal") return CiMethod::kNormal;
  if (name == "percentile") return CiMethod::kPercentile;
  throw UsageError("unknown interval method '" + std::string(name) + "' (expected normal|percentile)");
}

void BootstrapConfig::validate() const {
  if (n_boot < 2) throw UsageError("at least 2 bootstrap replicates are required");
  if (!(level > 0.0 && level < 1.0)) throw UsageError("confidence level must lie strictly between 0 and 1");
  if (threads < 1) throw UsageError("thread count must be at least 1");
  if (!(max_failure_fraction >= 0.0 && max_failure_fraction < 1.0)) {
    throw UsageError("maximum failure fraction must lie in [0, 1)");
  }
}

Dataset resample(const Dataset& data, std::uint64_t seed, std::uint64_t replicate) {
  const std::uint64_t key = rng::derive(rng::derive(seed, rng::kBootstrapResample), replicate);
  const std::size_t n = data.rows();
  std::vector<std::size_t> index(n);
  for (std::size_t j = 0; j < n; ++j) index[j] = static_cast<std::size_t>(rng::below(key, j, n));
  return data.select_rows(index);
}

Interval summarize_replicates(double point, std::span<const double> replicates, CiMethod method, double level) {
  Interval out;
  out.se = stats::sample_sd(replicates);
  if (method == CiMethod::kNormal) {
    const double half = stats::normal_quantile(0.5 + 0.5 * level) * out.se;
    out.lower = point - half;
    out.upper = point + half;
  } else {
    std::vector<double> sorted(replicates.begin(), replicates.end());
    std::sort(sorted.begin(), sorted.end());
    out.lower = stats::quantile_sorted(sorted, 0.5 * (1.0 - level));
    out.upper = stats::quantile_sorted(sorted, 0.5 * (1.0 + level));
  }
  return out;
}

ReplicateDraws run_replicates(const Dataset& data, std::size_t n_boot, std::uint64_t seed, std::size_t threads,
                              const std::function<std::vector<double>(const Dataset&, std::size_t)>& statistic) {
  std::vector<std::optional<std::vector<double>>> slots(n_boot);
  std::vector<std::string> errors(n_boot);
  parallel_for(n_boot, threads, [&](std::size_t b) {
    try {
      slots[b] = statistic(resample(data, seed, b), b);
    } catch (const Error& e) {
      errors[b] = e.what();
    }
  });

  ReplicateDraws out;
  for (std::size_t b = 0; b < n_boot; ++b) {
    if (slots[b]) {
      out.values.push_back(std::move(*slots[b]));
    } else {
      out.failures.push_back({b, std::move(errors[b])});
    }
  }
  return out;
}

BootstrapResult bootstrap_effects(const Dataset& data, const EstimationConfig& estimation,
                                  const BootstrapConfig& config) {
  config.validate();
  BootstrapResult result;
  result.table = estimate_effects(data, estimation);
  const auto& effects = result.table.effects;

  const std::uint64_t sim_key = rng::derive(config.seed, rng::kBootstrapSimulation);
  auto statistic = [&](const Dataset& sample, std::size_t b) {
    EstimationConfig cfg = estimation;
    cfg.seed = rng::derive(sim_key, b);
    cfg.threads = 1;
    const EffectTable t = estimate_effects(sample, cfg);
    std::vector<double> values;
    values.reserve(effects.size());
    for (const auto& e : effects) values.push_back(t.estimate(e.name));
    return values;
  };

  ReplicateDraws draws = run_replicates(data, config.n_boot, config.seed, config.threads, statistic);
  result.successful = draws.values.size();
  result.failures = std::move(draws.failures);

  const double allowed = config.max_failure_fraction * static_cast<double>(config.n_boot);
  if (static_cast<double>(result.failures.size()) > allowed || result.successful < 2) {
    std::string msg = std::to_string(result.failures.size()) + " of " + std::to_string(config.n_boot) +
                      " bootstrap replicates failed (limit " +
                      std::to_string(static_cast<int>(std::round(100.0 * config.max_failure_fraction))) + "%)";
    if (!result.failures.empty()) msg += "; first failure: " + result.failures.front().message;
    throw FitError(FitError::Kind::kExcessiveFailures, msg);
  }

  std::vector<double> column(result.successful);
  for (std::size_t j = 0; j < effects.size(); ++j) {
    for (std::size_t b = 0; b < result.successful; ++b) column[b] = draws.values[b][j];
    const Interval iv = summarize_replicates(effects[j].estimate, column, config.method, config.level);
    result.table.effects[j].se = iv.se;
    result.table.effects[j].ci = std::make_pair(iv.lower, iv.upper);
  }
  return result;
}

}  // namespace trialmed
