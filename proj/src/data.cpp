#include "trialmed/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "trialmed/errors.hpp"

namespace trialmed {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      return fields;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

bool is_missing(std::string_view field) { return field.empty() || field == "NA"; }

bool parse_double(std::string_view field, double& out) {
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

void check_value(const VariableRoles& roles, const std::string& name, double v, std::size_t row) {
  if (!std::isfinite(v)) {
    throw DataError(DataError::Kind::kUnparseable,
                    "column " + name + ", row " + std::to_string(row + 1) + ": non-finite value");
  }
  if (roles.is_binary_role(name) && v != 0.0 && v != 1.0) {
    std::ostringstream msg;
    msg << "column " << name << ", row " << row + 1 << ": value " << v
        << " is not 0 or 1 (exposure, mediators and outcome must be binary)";
    throw DataError(DataError::Kind::kNonBinaryValue, msg.str());
  }
}

}  // namespace

void VariableRoles::validate() const {
  if (exposure.empty()) throw DataError(DataError::Kind::kInvalidRoles, "no exposure column declared");
  if (outcome.empty()) throw DataError(DataError::Kind::kInvalidRoles, "no outcome column declared");
  if (mediators.empty()) throw DataError(DataError::Kind::kInvalidRoles, "at least one mediator is required");
  std::set<std::string> seen;
  for (const auto& name : columns()) {
    if (name.empty()) throw DataError(DataError::Kind::kInvalidRoles, "empty column name in roles");
    if (name.find(':') != std::string::npos) {
      throw DataError(DataError::Kind::kInvalidRoles,
                      "column name '" + name + "' contains ':' (reserved for interaction terms)");
    }
    if (!seen.insert(name).second) {
      throw DataError(DataError::Kind::kInvalidRoles, "column '" + name + "' is declared in more than one role");
    }
  }
}

std::vector<std::string> VariableRoles::columns() const {
  std::vector<std::string> out;
  out.reserve(2 + mediators.size() + confounders.size());
  out.push_back(exposure);
  out.insert(out.end(), mediators.begin(), mediators.end());
  out.push_back(outcome);
  out.insert(out.end(), confounders.begin(), confounders.end());
  return out;
}

bool VariableRoles::is_binary_role(std::string_view name) const {
  return name == exposure || name == outcome ||
         std::find(mediators.begin(), mediators.end(), name) != mediators.end();
}

Dataset::Dataset(VariableRoles roles, std::vector<std::vector<double>> columns)
    : roles_(std::move(roles)), names_(roles_.columns()), columns_(std::move(columns)) {
  roles_.validate();
  if (columns_.size() != names_.size()) {
    throw DataError(DataError::Kind::kMissingColumn, "dataset needs one column per declared role");
  }
  rows_ = columns_.front().size();
  if (rows_ == 0) throw DataError(DataError::Kind::kEmptyData, "dataset has no rows");
  for (std::size_t j = 0; j < names_.size(); ++j) {
    if (columns_[j].size() != rows_) {
      throw DataError(DataError::Kind::kMissingColumn, "column " + names_[j] + " has the wrong length");
    }
    for (std::size_t i = 0; i < rows_; ++i) check_value(roles_, names_[j], columns_[j][i], i);
  }
}

bool Dataset::has_column(std::string_view name) const noexcept {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

std::span<const double> Dataset::column(std::string_view name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) {
    throw DataError(DataError::Kind::kMissingColumn, "unknown column '" + std::string(name) + "'");
  }
  return columns_[static_cast<std::size_t>(it - names_.begin())];
}

Dataset Dataset::select_rows(std::span<const std::size_t> index) const {
  std::vector<std::vector<double>> cols(columns_.size());
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    cols[j].reserve(index.size());
    for (const std::size_t i : index) cols[j].push_back(columns_[j].at(i));
  }
  return Dataset(roles_, std::move(cols));
}

void Dataset::require_both_exposure_groups() const {
  const auto a = exposure();
  const bool has0 = std::find(a.begin(), a.end(), 0.0) != a.end();
  const bool has1 = std::find(a.begin(), a.end(), 1.0) != a.end();
  if (!has0 || !has1) {
    throw DataError(DataError::Kind::kPositivity,
                    "exposure " + roles_.exposure + " must take both values 0 and 1 in the data");
  }
}

LoadResult read_csv(std::istream& in, const VariableRoles& roles, MissingPolicy policy) {
  roles.validate();
  std::string line;
  if (!std::getline(in, line)) throw DataError(DataError::Kind::kEmptyData, "input has no header row");
  const auto header = split_fields(line);

  const auto names = roles.columns();
  std::vector<std::size_t> position(names.size());
  for (std::size_t j = 0; j < names.size(); ++j) {
    const auto it = std::find(header.begin(), header.end(), names[j]);
    if (it == header.end()) {
      throw DataError(DataError::Kind::kMissingColumn, "column '" + names[j] + "' not found in header");
    }
    position[j] = static_cast<std::size_t>(it - header.begin());
  }

  std::vector<std::vector<double>> columns(names.size());
  std::size_t dropped = 0;
  std::size_t row = 0;
  std::vector<double> values(names.size());
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw DataError(DataError::Kind::kUnparseable, "row " + std::to_string(row) + ": expected " +
                                                         std::to_string(header.size()) + " fields, found " +
                                                         std::to_string(fields.size()));
    }
    bool missing = false;
    for (std::size_t j = 0; j < names.size(); ++j) {
      const std::string_view field = fields[position[j]];
      if (is_missing(field)) {
        if (policy == MissingPolicy::kReject) {
          throw DataError(DataError::Kind::kMissingValue,
                          "column " + names[j] + ", row " + std::to_string(row) +
                              ": missing value (use the drop policy to discard incomplete rows)");
        }
        missing = true;
        break;
      }
      if (!parse_double(field, values[j])) {
        throw DataError(DataError::Kind::kUnparseable, "column " + names[j] + ", row " + std::to_string(row) +
                                                           ": cannot parse '" + std::string(field) + "'");
      }
      check_value(roles, names[j], values[j], row - 1);
    }
    if (missing) {
      ++dropped;
      continue;
    }
    for (std::size_t j = 0; j < names.size(); ++j) columns[j].push_back(values[j]);
  }
  if (columns.front().empty()) {
    throw DataError(DataError::Kind::kEmptyData,
                    dropped > 0 ? "no complete rows remain after dropping " + std::to_string(dropped)
                                : std::string("input has no data rows"));
  }
  return LoadResult{Dataset(roles, std::move(columns)), dropped};
}

LoadResult load_csv(const std::filesystem::path& path, const VariableRoles& roles, MissingPolicy policy) {
  std::ifstream in(path);
  if (!in) throw DataError(DataError::Kind::kEmptyData, "cannot open " + path.string());
  return read_csv(in, roles, policy);
}

void write_csv(const Dataset& data, std::ostream& out) {
  const auto& names = data.column_names();
  for (std::size_t j = 0; j < names.size(); ++j) out << (j ? "," : "") << names[j];
  out << '\n';
  std::vector<std::span<const double>> cols;
  for (const auto& name : names) cols.push_back(data.column(name));
  char buf[64];
  for (std::size_t i = 0; i < data.rows(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), cols[j][i]);
      if (j) out << ',';
      out.write(buf, ptr - buf);
    }
    out << '\n';
  }
}

DataSummary summarize(const Dataset& data) {
  DataSummary s;
  const auto a = data.exposure();
  for (const double v : a) ++s.group_size[v == 1.0 ? 1 : 0];

  const auto& roles = data.roles();
  auto role_of = [&](const std::string& name) -> std::string {
    if (name == roles.exposure) return "exposure";
    if (name == roles.outcome) return "outcome";
    if (std::find(roles.mediators.begin(), roles.mediators.end(), name) != roles.mediators.end()) return "mediator";
    return "confounder";
  };

  for (const auto& name : data.column_names()) {
    if (name == roles.exposure) continue;
    VariableSummary v;
    v.name = name;
    v.role = role_of(name);
    const auto col = data.column(name);
    v.binary = std::all_of(col.begin(), col.end(), [](double x) { return x == 0.0 || x == 1.0; });
    double total[2] = {0.0, 0.0};
    for (std::size_t i = 0; i < col.size(); ++i) {
      const int g = a[i] == 1.0 ? 1 : 0;
      total[g] += col[i];
      if (col[i] == 1.0) ++v.count[g];
    }
    for (int g = 0; g < 2; ++g) {
      const double n = static_cast<double>(s.group_size[g]);
      if (v.binary) {
        v.value[g] = n > 0 ? 100.0 * static_cast<double>(v.count[g]) / n : 0.0;
      } else {
        v.count[g] = 0;
        v.value[g] = n > 0 ? total[g] / n : 0.0;
      }
    }
    s.variables.push_back(std::move(v));
  }
  return s;
}

}  // namespace trialmed
