#include "trialmed/synth.hpp"

#include "trialmed/errors.hpp"
#include "trialmed/parallel.hpp"
#include "trialmed/rng.hpp"

namespace trialmed {
namespace {

constexpr std::size_t kRowChunk = 4096;

LogisticLaw law(double intercept, std::vector<std::pair<std::string, double>> coefs) {
  LogisticLaw out;
  out.intercept = intercept;
  for (auto& [key, value] : coefs) {
    std::vector<std::string> factors;
    std::size_t start = 0;
    for (std::size_t pos; (pos = key.find(':', start)) != std::string::npos; start = pos + 1) {
      factors.push_back(key.substr(start, pos - start));
    }
    factors.push_back(key.substr(start));
    out.terms.push_back({std::move(factors), value, 0});
  }
  return out;
}

}  // namespace

Dataset generate(const Dgp& dgp, std::size_t n, std::uint64_t seed, std::size_t threads) {
  if (n == 0) throw UsageError("sample size must be at least 1");
  const std::size_t nc = dgp.confounders.size();
  const std::size_t k_max = dgp.mediator_count();
  // Column order follows VariableRoles::columns(): A, M..., Y, C...
  std::vector<std::vector<double>> columns(k_max + 2 + nc, std::vector<double>(n));
  const std::uint64_t key = rng::derive(seed, rng::kSynthesis);

  parallel_for((n + kRowChunk - 1) / kRowChunk, threads, [&](std::size_t chunk) {
    const std::size_t end = std::min(n, (chunk + 1) * kRowChunk);
    for (std::size_t i = chunk * kRowChunk; i < end; ++i) {
      const std::uint64_t row = rng::derive(key, i);
      std::uint64_t node = 0;
      std::uint64_t cfg = 0;
      if (dgp.confounder_law == Dgp::ConfounderLaw::kIndependent) {
        for (std::size_t j = 0; j < nc; ++j) {
          if (rng::uniform(row, node++) < dgp.confounder_probs[j]) cfg |= std::uint64_t{1} << j;
        }
      } else {
        const double u = rng::uniform(row, node++);
        double cum = 0.0;
        std::uint64_t chosen = 0;
        // Falls back to the last positive cell when rounding leaves u >= cum.
        for (std::uint64_t c = 0; c < dgp.confounder_probs.size(); ++c) {
          if (dgp.confounder_probs[c] <= 0.0) continue;
          chosen = c;
          cum += dgp.confounder_probs[c];
          if (u < cum) break;
        }
        cfg = chosen;
      }
      if (rng::uniform(row, node++) < dgp.exposure_law.probability(cfg)) cfg |= std::uint64_t{1} << dgp.exposure_bit();
      for (std::size_t k = 0; k < k_max; ++k) {
        if (rng::uniform(row, node++) < dgp.mediator_laws[k].probability(cfg)) {
          cfg |= std::uint64_t{1} << dgp.mediator_bit(k);
        }
      }
      const bool y = rng::uniform(row, node++) < dgp.outcome_law.probability(cfg);

      columns[0][i] = static_cast<double>((cfg >> dgp.exposure_bit()) & 1U);
      for (std::size_t k = 0; k < k_max; ++k) columns[1 + k][i] = static_cast<double>((cfg >> dgp.mediator_bit(k)) & 1U);
      columns[1 + k_max][i] = y ? 1.0 : 0.0;
      for (std::size_t j = 0; j < nc; ++j) columns[2 + k_max + j][i] = static_cast<double>((cfg >> j) & 1U);
    }
  });
  return Dataset(dgp.roles(), std::move(columns));
}

Dgp default_dgp() {
  Dgp d;
  d.confounders = {"C1", "C2", "C3", "C4", "C5", "C6"};
  d.confounder_law = Dgp::ConfounderLaw::kIndependent;
  d.confounder_probs = {0.5, 0.3, 0.4, 0.2, 0.6, 0.35};
  d.exposure = "A";
  d.exposure_law = law(-2.0, {{"C1", 0.4}, {"C2", 0.3}, {"C3", -0.2}, {"C4", 0.5}, {"C5", 0.2}, {"C6", 0.3}});
  d.mediators = {"M1", "M2", "M3", "M4"};
  d.mediator_laws = {
      law(-1.5, {{"A", 0.8}, {"C1", 0.3}, {"C2", 0.2}, {"C3", -0.1}, {"C4", 0.2}, {"C6", 0.1}}),
      law(-1.2, {{"A", 0.6}, {"M1", 0.7}, {"C1", 0.2}, {"C3", 0.3}, {"C5", -0.2}}),
      law(-1.0, {{"A", 0.5}, {"M1", 0.4}, {"M2", 0.5}, {"A:M1", 0.2}, {"C2", 0.3}, {"C4", 0.2}}),
      law(-2.0, {{"A", 0.7}, {"M2", 0.3}, {"M3", 0.6}, {"A:M3", 0.3}, {"C1", 0.2}, {"C5", 0.3}, {"C6", -0.2}}),
  };
  d.outcome = "Y";
  d.outcome_law = law(-2.5, {{"A", 0.3},
                             {"M1", 0.4},
                             {"M2", 0.3},
                             {"M3", 0.5},
                             {"M4", 0.6},
                             {"A:M4", 0.2},
                             {"C1", 0.3},
                             {"C2", 0.2},
                             {"C4", 0.3},
                             {"C5", -0.1},
                             {"C6", 0.2}});
  d.finalize();
  return d;
}

Dgp reference_k2_dgp() {
  Dgp d;
  d.confounders = {"C"};
  d.confounder_law = Dgp::ConfounderLaw::kIndependent;
  d.confounder_probs = {0.4};
  d.exposure = "A";
  d.exposure_law = law(-0.3, {{"C", 0.8}});
  d.mediators = {"M1", "M2"};
  d.mediator_laws = {
      law(-0.5, {{"A", 1.0}, {"C", 0.5}}),
      law(-1.0, {{"A", 0.7}, {"M1", 1.5}, {"C", 0.4}}),
  };
  d.outcome = "Y";
  d.outcome_law = law(-1.2, {{"A", 0.5}, {"M1", 0.6}, {"M2", 0.8}, {"A:M1", 0.4}, {"C", 0.5}});
  d.finalize();
  return d;
}

}  // namespace trialmed
