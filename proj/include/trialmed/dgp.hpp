#pragma once

// Fully specified binary structural model: binary confounders C, exposure
// A | C, mediators M_k | A, M_1..M_{k-1}, C in declared order, and outcome
// Y | A, M, C. Every conditional is logistic in an explicit list of main
// effects and products.

#include <cstdint>
#include <filesystem>
#include "json.hpp"
#include <string>
#include <vector>

#include "trialmed/data.hpp"

namespace trialmed {

struct LogisticLaw {
  struct Term {
    std::vector<std::string> factors;
    double coef = 0.0;
    std::uint64_t mask = 0;  // filled by Dgp::finalize
  };

  double intercept = 0.0;
  std::vector<Term> terms;

  /// P(node = 1) given a configuration bitset (see Dgp::bit).
  double probability(std::uint64_t config) const noexcept;
};

struct Dgp {
  enum class ConfounderLaw { kIndependent, kTable };

  std::vector<std::string> confounders;
  ConfounderLaw confounder_law = ConfounderLaw::kIndependent;
  /// kIndependent: P(C_j = 1) per confounder. kTable: 2^|C| cell
  /// probabilities indexed by the bitset with bit j = C_j.
  std::vector<double> confounder_probs;

  std::string exposure = "A";
  LogisticLaw exposure_law;
  std::vector<std::string> mediators;
  std::vector<LogisticLaw> mediator_laws;
  std::string outcome = "Y";
  LogisticLaw outcome_law;

  std::size_t mediator_count() const noexcept { return mediators.size(); }
  /// Binary variables other than exposure and outcome: |C| + K.
  std::size_t variable_count() const noexcept { return confounders.size() + mediators.size(); }

  /// Bit positions: C_j -> j, A -> |C|, M_k -> |C| + 1 + k.
  std::size_t exposure_bit() const noexcept { return confounders.size(); }
  std::size_t mediator_bit(std::size_t k) const noexcept { return confounders.size() + 1 + k; }
  std::uint64_t config(std::uint64_t c, int a, std::uint64_t m) const noexcept {
    return c | (static_cast<std::uint64_t>(a) << exposure_bit()) | (m << mediator_bit(0));
  }

  double confounder_probability(std::uint64_t c) const noexcept;

  /// Checks names, parents and probabilities and fills term masks.
  /// Throws DataError(kInvalidDgp).
  void finalize();

  VariableRoles roles() const;
};

Dgp dgp_from_json(const nlohmann::ordered_json& doc);
nlohmann::ordered_json dgp_to_json(const Dgp& dgp);
/// "default" and "reference_k2" name the built-in models; anything else is a path.
Dgp load_dgp(const std::string& name_or_path);

}  // namespace trialmed
