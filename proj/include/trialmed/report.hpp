#pragma once

// JSON documents and fixed-width text tables for command output.

#include <string>
#include <vector>

#include "json.hpp"
#include "trialmed/data.hpp"
#include "trialmed/effects.hpp"
#include "trialmed/gcomp.hpp"
#include "trialmed/glm.hpp"
#include "trialmed/oracle.hpp"

namespace trialmed {

inline constexpr const char* kSoftwareName = "trialmed";
inline constexpr const char* kSoftwareVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

using Json = nlohmann::ordered_json;

/// {"schema_version", "software": {"name", "version"}}, to be extended.
Json document_header(const std::string& command);

/// "arms" and "effects" arrays; "se"/"ci" appear only when set and
/// "proportion_of_tce" is null when TCE is 0.
Json effect_table_json(const EffectTable& table);
/// Arms with their draw plans and merge targets, plus fitted working models.
Json plan_json(const Estimation& estimation, const VariableRoles& roles);
Json associations_json(const std::vector<Association>& rows, double level);
Json summary_json(const DataSummary& summary);

/// Two-space indented with a trailing newline.
std::string dump(const Json& doc);

/// Effect, Estimate (3 dp), CI, proportion of TCE (integer percent), in
/// display order.
std::string format_effect_table(const EffectTable& table, double level = 0.95);
std::string format_associations(const std::vector<Association>& rows, double level = 0.95);
std::string format_summary(const DataSummary& summary);

/// Fixed-point with `decimals` places; never prints a negative zero.
std::string fixed(double value, int decimals);

}  // namespace trialmed
