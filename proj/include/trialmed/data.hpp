#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace trialmed {

/// Declared roles of the analysis columns. Mediator order is the policy
/// sequence and the factorization order used for joint mediator draws.
struct VariableRoles {
  std::string exposure;
  std::vector<std::string> mediators;
  std::string outcome;
  std::vector<std::string> confounders;

  /// Throws DataError(kInvalidRoles) on empty/duplicate names or no mediators.
  void validate() const;
  /// exposure, mediators..., outcome, confounders...
  std::vector<std::string> columns() const;
  bool is_binary_role(std::string_view name) const;
};

/// Immutable column-major analysis table. Exposure, mediator and outcome
/// values are exactly 0 or 1; confounders are finite reals.
class Dataset {
 public:
  /// `columns[j]` holds the values of `roles.columns()[j]`.
  Dataset(VariableRoles roles, std::vector<std::vector<double>> columns);

  const VariableRoles& roles() const noexcept { return roles_; }
  std::size_t rows() const noexcept { return rows_; }
  const std::vector<std::string>& column_names() const noexcept { return names_; }

  bool has_column(std::string_view name) const noexcept;
  /// Throws DataError(kMissingColumn) for unknown names.
  std::span<const double> column(std::string_view name) const;

  std::span<const double> exposure() const { return column(roles_.exposure); }
  std::span<const double> outcome() const { return column(roles_.outcome); }
  std::span<const double> mediator(std::size_t k) const { return column(roles_.mediators.at(k)); }

  /// New dataset holding rows `index[0], index[1], ...` (repeats allowed).
  Dataset select_rows(std::span<const std::size_t> index) const;

  /// Throws DataError(kPositivity) unless both exposure groups are present.
  void require_both_exposure_groups() const;

 private:
  VariableRoles roles_;
  std::vector<std::string> names_;
  std::vector<std::vector<double>> columns_;
  std::size_t rows_ = 0;
};

enum class MissingPolicy { kReject, kDrop };

struct LoadResult {
  Dataset data;
  std::size_t dropped_rows = 0;
};

/// Comma-separated, header row first, no quoting. Empty fields and "NA" are
/// missing values. Columns not named in `roles` are ignored.
LoadResult read_csv(std::istream& in, const VariableRoles& roles, MissingPolicy policy);
LoadResult load_csv(const std::filesystem::path& path, const VariableRoles& roles,
                    MissingPolicy policy);

void write_csv(const Dataset& data, std::ostream& out);

// Descriptive statistics by exposure group.
struct VariableSummary {
  std::string name;
  std::string role;
  bool binary = true;
  // Binary columns: count of ones and percent within the group.
  // Other columns: count is 0 and `value` is the group mean.
  std::size_t count[2] = {0, 0};
  double value[2] = {0.0, 0.0};
};

struct DataSummary {
  std::size_t group_size[2] = {0, 0};
  std::vector<VariableSummary> variables;
};

DataSummary summarize(const Dataset& data);

}  // namespace trialmed
