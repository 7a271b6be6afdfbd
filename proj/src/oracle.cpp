#include "trialmed/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "trialmed/errors.hpp"

namespace trialmed {
namespace {

// Bits of m at positions `members`, packed low to high.
std::uint64_t project(std::uint64_t m, const std::vector<std::size_t>& members) {
  std::uint64_t out = 0;
  for (std::size_t t = 0; t < members.size(); ++t) out |= ((m >> members[t]) & 1U) << t;
  return out;
}

// The arm's mediator law for one c: product over draw blocks of the block
// marginal of law_at[a], where law_at[a][m] = P(M = m | a, c).
std::vector<double> arm_law(const ArmSpec& arm, const std::vector<double> (&law_at)[2]) {
  const std::size_t cells = std::size_t{1} << arm.draws.size();
  std::vector<double> out(cells, 1.0);
  for (const auto& block : draw_blocks(arm)) {
    const auto& source = law_at[block.exposure];
    std::vector<double> marg(std::size_t{1} << block.members.size(), 0.0);
    for (std::uint64_t m = 0; m < cells; ++m) marg[project(m, block.members)] += source[m];
    for (std::uint64_t m = 0; m < cells; ++m) out[m] *= marg[project(m, block.members)];
  }
  return out;
}

bool needs_exposure(const ArmSpec& arm, int a) {
  if (arm.outcome_exposure == a) return true;
  return std::any_of(arm.draws.begin(), arm.draws.end(), [&](const DrawSource& d) { return d.exposure == a; });
}

void check_arm(const ArmSpec& arm, std::size_t mediators) {
  if (arm.draws.size() != mediators) {
    throw UsageError("arm " + arm.label() + " does not match the DGP's " + std::to_string(mediators) + " mediators");
  }
}

}  // namespace

double JointTable::marginal(std::uint64_t mask, std::uint64_t value) const noexcept {
  double total = 0.0;
  for (std::uint64_t i = 0; i < probability.size(); ++i) {
    if ((i & mask) == value) total += probability[i];
  }
  return total;
}

double JointTable::outcome_marginal() const noexcept {
  double total = 0.0;
  for (std::size_t i = 0; i < probability.size(); ++i) total += probability[i] * outcome_mean[i];
  return total;
}

void check_enumeration_cap(const Dgp& dgp, std::size_t cap) {
  if (dgp.variable_count() > cap) {
    throw DataError(DataError::Kind::kCapExceeded,
                    "DGP has " + std::to_string(dgp.variable_count()) +
                        " binary confounders and mediators; exact enumeration is capped at " + std::to_string(cap));
  }
}

JointTable enumerate(const Dgp& dgp, std::size_t cap) {
  check_enumeration_cap(dgp, cap);
  JointTable t;
  t.confounders = dgp.confounders.size();
  t.mediators = dgp.mediator_count();
  const std::uint64_t nc = std::uint64_t{1} << t.confounders;
  const std::uint64_t nm = std::uint64_t{1} << t.mediators;
  t.probability.assign(nc * 2 * nm, 0.0);
  t.outcome_mean.assign(nc * 2 * nm, 0.0);

  for (std::uint64_t c = 0; c < nc; ++c) {
    const double pc = dgp.confounder_probability(c);
    const double pa1 = dgp.exposure_law.probability(dgp.config(c, 0, 0));
    for (int a = 0; a < 2; ++a) {
      const double pca = pc * (a ? pa1 : 1.0 - pa1);
      for (std::uint64_t m = 0; m < nm; ++m) {
        const std::uint64_t cfg = dgp.config(c, a, m);
        double p = pca;
        for (std::size_t k = 0; k < t.mediators; ++k) {
          // Mediator k only reads bits below its own.
          const double pk = dgp.mediator_laws[k].probability(cfg);
          p *= ((m >> k) & 1U) ? pk : 1.0 - pk;
        }
        t.probability[cfg] = p;
        t.outcome_mean[cfg] = dgp.outcome_law.probability(cfg);
      }
    }
  }
  return t;
}

double true_p_ident(const JointTable& table, const ArmSpec& arm) {
  check_arm(arm, table.mediators);
  const std::uint64_t nc = std::uint64_t{1} << table.confounders;
  const std::uint64_t nm = std::uint64_t{1} << table.mediators;

  double total = 0.0;
  std::vector<double> cond[2];
  for (std::uint64_t c = 0; c < nc; ++c) {
    double pca[2] = {0.0, 0.0};
    for (int a = 0; a < 2; ++a) {
      for (std::uint64_t m = 0; m < nm; ++m) pca[a] += table.probability[table.index(c, a, m)];
    }
    const double pc = pca[0] + pca[1];
    if (pc == 0.0) continue;

    for (int a = 0; a < 2; ++a) {
      cond[a].assign(nm, 0.0);
      if (!needs_exposure(arm, a)) continue;
      if (pca[a] == 0.0) {
        throw DataError(DataError::Kind::kPositivity, "arm " + arm.label() + ": P(A = " + std::to_string(a) +
                                                          ", C = c" + std::to_string(c) + ") is 0");
      }
      for (std::uint64_t m = 0; m < nm; ++m) cond[a][m] = table.probability[table.index(c, a, m)] / pca[a];
    }

    const std::vector<double> law = arm_law(arm, cond);
    double inner = 0.0;
    for (std::uint64_t m = 0; m < nm; ++m) {
      if (law[m] == 0.0) continue;
      const std::uint64_t cell = table.index(c, arm.outcome_exposure, m);
      if (table.probability[cell] == 0.0) {
        throw DataError(DataError::Kind::kPositivity,
                        "arm " + arm.label() + ": E(Y | A, M, C) is needed on a configuration of probability 0");
      }
      inner += law[m] * table.outcome_mean[cell];
    }
    total += pc * inner;
  }
  return total;
}

double true_p_ident(const Dgp& dgp, const ArmSpec& arm, std::size_t cap) {
  return true_p_ident(enumerate(dgp, cap), arm);
}

double true_p_trial(const Dgp& dgp, const ArmSpec& arm, std::size_t cap) {
  check_enumeration_cap(dgp, cap);
  check_arm(arm, dgp.mediator_count());
  const std::size_t k_max = dgp.mediator_count();
  const std::uint64_t nc = std::uint64_t{1} << dgp.confounders.size();
  const std::uint64_t nm = std::uint64_t{1} << k_max;

  double total = 0.0;
  std::vector<double> under[2];
  for (std::uint64_t c = 0; c < nc; ++c) {
    const double pc = dgp.confounder_probability(c);
    if (pc == 0.0) continue;
    // P(M = m | do(A = a), c) by the mediator chain alone.
    for (int a = 0; a < 2; ++a) {
      under[a].assign(nm, 0.0);
      if (!needs_exposure(arm, a)) continue;
      for (std::uint64_t m = 0; m < nm; ++m) {
        double p = 1.0;
        for (std::size_t k = 0; k < k_max; ++k) {
          const double pk = dgp.mediator_laws[k].probability(dgp.config(c, a, m));
          p *= ((m >> k) & 1U) ? pk : 1.0 - pk;
        }
        under[a][m] = p;
      }
    }
    const std::vector<double> law = arm_law(arm, under);
    double inner = 0.0;
    for (std::uint64_t m = 0; m < nm; ++m) {
      inner += law[m] * dgp.outcome_law.probability(dgp.config(c, arm.outcome_exposure, m));
    }
    total += pc * inner;
  }
  return total;
}

EffectTable true_effects(const Dgp& dgp, OracleRoute route, std::size_t cap) {
  const auto arms = standard_arms(dgp.mediator_count());
  std::map<std::string, double> arm_p;
  if (route == OracleRoute::kIdentification) {
    const JointTable table = enumerate(dgp, cap);
    for (const auto& arm : arms) arm_p[arm.label()] = true_p_ident(table, arm);
  } else {
    for (const auto& arm : arms) arm_p[arm.label()] = true_p_trial(dgp, arm, cap);
  }
  return assemble_effects(dgp.mediator_count(), arm_p);
}

OracleComparison compare_routes(const Dgp& dgp, std::size_t cap) {
  OracleComparison out{true_effects(dgp, OracleRoute::kIdentification, cap),
                       true_effects(dgp, OracleRoute::kTrial, cap), 0.0};
  for (std::size_t i = 0; i < out.ident.arms.size(); ++i) {
    out.max_discrepancy = std::max(out.max_discrepancy, std::abs(out.ident.arms[i].second - out.trial.arms[i].second));
  }
  return out;
}

}  // namespace trialmed
