#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "support.hpp"
#include "trialmed/bootstrap.hpp"
#include "trialmed/errors.hpp"
#include "trialmed/stats.hpp"
#include "trialmed/synth.hpp"

using namespace trialmed;

namespace {

std::vector<double> column_of(const Dataset& d, const std::string& name) {
  const auto c = d.column(name);
  return {c.begin(), c.end()};
}

double outcome_mean(const Dataset& d) { return stats::mean(d.outcome()); }

}  // namespace

TEST_CASE("resample basics") {
  const Dataset one(testing::roles_k(1, 0), {{1}, {0}, {1}});
  const Dataset r = resample(one, 5, 0);
  CHECK(r.rows() == 1);
  CHECK(column_of(r, "Y") == std::vector<double>{1});

  const Dataset same(testing::roles_k(1, 1), {std::vector<double>(6, 1), std::vector<double>(6, 0),
                                              std::vector<double>(6, 1), std::vector<double>(6, 0.25)});
  const Dataset rs = resample(same, 5, 3);
  for (const auto& name : same.column_names()) CHECK(column_of(rs, name) == column_of(same, name));

  const Dataset data = generate(reference_k2_dgp(), 200, 1);
  CHECK(column_of(resample(data, 9, 4), "Y") == column_of(resample(data, 9, 4), "Y"));
  CHECK(column_of(resample(data, 9, 4), "C") != column_of(resample(data, 9, 5), "C"));
}

TEST_CASE("interval construction") {
  const std::vector<double> reps{0.1, 0.3, 0.2, 0.5, 0.4};
  const double s = stats::sample_sd(reps);
  const auto normal = summarize_replicates(1.0, reps, CiMethod::kNormal, 0.95);
  CHECK(normal.se == s);
  CHECK((normal.upper - normal.lower) / 2 == doctest::Approx(1.959963984540054 * s).epsilon(1e-12));
  CHECK(1.0 - normal.lower == doctest::Approx(normal.upper - 1.0).epsilon(1e-12));

  const auto pct = summarize_replicates(1.0, reps, CiMethod::kPercentile, 0.9);
  CHECK(pct.lower >= 0.1);
  CHECK(pct.upper <= 0.5);
  CHECK(pct.lower == doctest::Approx(0.12));  // type 7 at p = 0.05 on 0.1..0.5
  CHECK(pct.upper == doctest::Approx(0.48));
}

TEST_CASE("identical rows give zero standard errors") {
  const Dataset same(testing::roles_k(1, 1), {std::vector<double>(8, 1), std::vector<double>(8, 0),
                                              std::vector<double>(8, 1), std::vector<double>(8, 2.0)});
  const auto draws = run_replicates(same, 25, 3, 1, [](const Dataset& d, std::size_t) {
    return std::vector<double>{outcome_mean(d)};
  });
  REQUIRE(draws.values.size() == 25);
  std::vector<double> col;
  for (const auto& v : draws.values) col.push_back(v[0]);
  for (auto method : {CiMethod::kNormal, CiMethod::kPercentile}) {
    const auto iv = summarize_replicates(1.0, col, method, 0.95);
    CHECK(iv.se == 0.0);
    CHECK(iv.upper - iv.lower == 0.0);
  }
}

TEST_CASE("replicate failures are recorded in order") {
  const Dataset data = generate(reference_k2_dgp(), 50, 2);
  const auto draws = run_replicates(data, 10, 1, 2, [](const Dataset& d, std::size_t b) -> std::vector<double> {
    if (b % 3 == 0) throw FitError(FitError::Kind::kSeparation, "boom " + std::to_string(b));
    return {outcome_mean(d)};
  });
  CHECK(draws.values.size() == 6);
  REQUIRE(draws.failures.size() == 4);
  CHECK(draws.failures[1].replicate == 3);
  CHECK(draws.failures[1].message == "boom 3");
}

TEST_CASE("bootstrap effects are reproducible and schedule independent") {
  const Dataset data = generate(reference_k2_dgp(), 400, 3);
  EstimationConfig est;
  est.n_sim = 5;
  BootstrapConfig boot;
  boot.n_boot = 8;
  const auto a = bootstrap_effects(data, est, boot);
  boot.threads = 3;
  const auto b = bootstrap_effects(data, est, boot);
  CHECK(a.successful == 8);
  for (std::size_t i = 0; i < a.table.effects.size(); ++i) {
    const auto& x = a.table.effects[i];
    const auto& y = b.table.effects[i];
    REQUIRE(x.se);
    CHECK(*x.se >= 0.0);
    CHECK(*x.se == *y.se);
    CHECK(x.ci->first == y.ci->first);
    CHECK(x.ci->second == y.ci->second);
    CHECK(x.estimate == estimate_effects(data, est).effects[i].estimate);
  }
}

TEST_CASE("too many failed replicates is an error") {
  // Two exposed rows out of 30: about one resample in eight has none.
  std::vector<double> a(30, 0.0), m1(30), m2(30), y(30), c(30);
  a[0] = a[1] = 1.0;
  for (std::size_t i = 0; i < 30; ++i) {
    m1[i] = static_cast<double>(i % 2);
    m2[i] = static_cast<double>((i / 2) % 2);
    y[i] = static_cast<double>((i / 3) % 2);
    c[i] = static_cast<double>((i / 5) % 2);
  }
  m1[0] = 0, m1[1] = 1, m2[0] = 1, m2[1] = 0, y[0] = 0, y[1] = 1;
  const Dataset data(testing::roles_k(2, 1), {a, m1, m2, y, c});
  EstimationConfig est;
  est.n_sim = 2;
  est.interactions = InteractionSpec::parse("1");
  REQUIRE_NOTHROW(estimate_effects(data, est));
  BootstrapConfig boot;
  boot.n_boot = 50;
  try {
    bootstrap_effects(data, est, boot);
    FAIL("expected excessive failures");
  } catch (const FitError& e) {
    CHECK(e.kind() == FitError::Kind::kExcessiveFailures);
  }
}

TEST_CASE("bootstrap configuration validation") {
  BootstrapConfig boot;
  boot.n_boot = 1;
  CHECK_THROWS_AS(boot.validate(), UsageError);
  boot.n_boot = 10;
  boot.level = 1.0;
  CHECK_THROWS_AS(boot.validate(), UsageError);
  CHECK(parse_ci_method("percentile") == CiMethod::kPercentile);
  CHECK_THROWS_AS(parse_ci_method("bca"), UsageError);
}
