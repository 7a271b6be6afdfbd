#pragma once

#include <stdexcept>
#include <string>

namespace trialmed {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad command-line or configuration input (exit code 2).
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Problems with the input data or a data-generating process (exit code 3).
class DataError : public Error {
 public:
  enum class Kind {
    kMissingColumn,
    kNonBinaryValue,
    kEmptyData,
    kUnparseable,
    kMissingValue,
    kInvalidRoles,
    kPositivity,
    kCapExceeded,
    kInvalidDgp,
  };

  DataError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Model fitting failures (exit code 4). `term()` names the offending
/// coefficient or model when one can be identified.
class FitError : public Error {
 public:
  enum class Kind {
    kRankDeficient,
    kNonConvergence,
    kSeparation,
    kSingularInformation,
    kExcessiveFailures,
  };

  FitError(Kind kind, const std::string& what, std::string term = {})
      : Error(what), kind_(kind), term_(std::move(term)) {}
  Kind kind() const noexcept { return kind_; }
  const std::string& term() const noexcept { return term_; }

 private:
  Kind kind_;
  std::string term_;
};

}  // namespace trialmed
