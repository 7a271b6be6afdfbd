#include <cmath>
#include <fstream>
#include <random>

#include "doctest.h"
#include "support.hpp"
#include "trialmed/errors.hpp"
#include "trialmed/oracle.hpp"
#include "trialmed/report.hpp"
#include "trialmed/synth.hpp"

using namespace trialmed;
using testing::make_law;

namespace {

double expit(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Dgp k2_base() {
  Dgp d;
  d.confounders = {"C1"};
  d.confounder_probs = {0.35};
  d.exposure_law = make_law(0.1, {{{"C1"}, -0.7}});
  d.mediators = {"M1", "M2"};
  d.mediator_laws = {make_law(-0.2, {{{"A"}, 0.9}, {{"C1"}, 0.5}}),
                     make_law(0.3, {{{"A"}, -0.6}, {{"M1"}, 1.1}, {{"C1"}, -0.4}, {{"A", "M1"}, 0.5}})};
  d.outcome_law = make_law(-0.8, {{{"A"}, 0.7}, {{"M1"}, 0.4}, {{"M2"}, -0.9}, {{"C1"}, 0.6}, {{"M1", "M2"}, 0.8}});
  d.finalize();
  return d;
}

Json load_json(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in);
  return Json::parse(in);
}

}  // namespace

TEST_CASE("symmetric DGP enumerates to equal cells") {
  Dgp d;
  d.confounders = {"C1"};
  d.confounder_probs = {0.5};
  d.mediators = {"M1"};
  d.mediator_laws = {LogisticLaw{}};
  d.finalize();
  const auto t = enumerate(d);
  REQUIRE(t.probability.size() == 8);
  for (double p : t.probability) CHECK(p == 0.125);
  for (double y : t.outcome_mean) CHECK(y == 0.5);
}

TEST_CASE("cells follow the chain rule") {
  const Dgp d = reference_k2_dgp();
  const auto t = enumerate(d);
  // c = 1, a = 1, m1 = 1, m2 = 0.
  const double expected = 0.4 * expit(-0.3 + 0.8) * expit(-0.5 + 1.0 + 0.5) * (1.0 - expit(-1.0 + 0.7 + 1.5 + 0.4));
  CHECK(std::abs(t.probability[t.index(1, 1, 0b01)] - expected) <= 1e-15);
  CHECK(std::abs(t.outcome_mean[t.index(1, 1, 0b01)] - expit(-1.2 + 0.5 + 0.6 + 0.4 + 0.5)) <= 1e-15);
  // c = 0, a = 0, m1 = 0, m2 = 1.
  const double e2 = 0.6 * (1.0 - expit(-0.3)) * (1.0 - expit(-0.5)) * expit(-1.0);
  CHECK(std::abs(t.probability[t.index(0, 0, 0b10)] - e2) <= 1e-15);
}

TEST_CASE("conditional blocks are normalized") {
  std::mt19937_64 gen(17);
  for (int rep = 0; rep < 20; ++rep) {
    const Dgp d = testing::random_dgp(gen, 1 + rep % 3, rep % 4);
    const auto t = enumerate(d);
    double total = 0.0;
    for (std::uint64_t c = 0; c < (std::uint64_t{1} << t.confounders); ++c) {
      for (int a = 0; a < 2; ++a) {
        double block = 0.0;
        for (std::uint64_t m = 0; m < (std::uint64_t{1} << t.mediators); ++m) block += t.probability[t.index(c, a, m)];
        total += block;
        const double pca = d.confounder_probability(c) *
                           (a ? d.exposure_law.probability(d.config(c, 0, 0))
                              : 1.0 - d.exposure_law.probability(d.config(c, 0, 0)));
        if (pca > 0.0) CHECK(std::abs(block / pca - 1.0) <= 1e-12);
      }
    }
    CHECK(std::abs(total - 1.0) <= 1e-12);
  }
}

TEST_CASE("brute-force reference values for the K=2 reference DGP") {
  // Printed by tests/scripts/bruteforce_k2.py.
  const std::pair<const char*, double> expected[] = {
      {"ctr", 0.4138638641135278},     {"trt", 0.6545809918597021}, {"shift_1", 0.6042230940787774},
      {"shift_2", 0.617253840696713}, {"all", 0.560321426059895},  {"seq_2", 0.5630921665530487},
  };
  const Dgp d = reference_k2_dgp();
  for (const auto& [label, value] : expected) {
    CHECK(std::abs(true_p_ident(d, arm_from_label(label, 2)) - value) <= 1e-14);
    CHECK(std::abs(true_p_trial(d, arm_from_label(label, 2)) - value) <= 1e-14);
  }
}

TEST_CASE("outcome independent of everything") {
  Dgp d = k2_base();
  d.outcome_law = make_law(std::log(0.3 / 0.7), {});
  d.finalize();
  for (const auto& arm : standard_arms(2)) {
    CHECK(std::abs(true_p_ident(d, arm) - 0.3) <= 1e-15);
    CHECK(std::abs(true_p_trial(d, arm) - 0.3) <= 1e-15);
  }
}

TEST_CASE("conditionally independent mediators free of A make every shift a no-op") {
  Dgp d = k2_base();
  d.mediator_laws = {make_law(-0.2, {{{"C1"}, 0.5}}), make_law(0.3, {{{"C1"}, -0.4}})};
  d.finalize();
  const double trt = true_p_ident(d, arm_from_label("trt", 2));
  for (const char* label : {"shift_1", "shift_2", "all", "seq_2"}) {
    CHECK(std::abs(true_p_ident(d, arm_from_label(label, 2)) - trt) <= 1e-15);
    CHECK(std::abs(true_p_trial(d, arm_from_label(label, 2)) - trt) <= 1e-15);
  }
  const auto t = true_effects(d);
  CHECK(std::abs(t.estimate("IIE_1")) <= 1e-15);
  CHECK(std::abs(t.estimate("IIE_2")) <= 1e-15);
  CHECK(std::abs(t.estimate("IDE") - t.estimate("TCE")) <= 1e-15);
}

TEST_CASE("dependent mediators free of A: shifts still break the dependence") {
  Dgp d = k2_base();
  d.mediator_laws = {make_law(-0.2, {{{"C1"}, 0.5}}), make_law(0.3, {{{"M1"}, 1.1}, {{"C1"}, -0.4}})};
  d.finalize();
  const auto t = true_effects(d);
  CHECK(std::abs(t.estimate("IDE") - t.estimate("TCE")) <= 1e-15);
  // shift_1 draws M1 independently of M2, which changes E(Y) through M1:M2.
  CHECK(std::abs(t.estimate("IIE_1")) > 1e-3);
  CHECK(std::abs(t.estimate("IIE_1") + t.estimate("IIE_2") + t.estimate("IIE_int_onepolicy")) <= 1e-15);
}

TEST_CASE("null exposure gives zero effects") {
  Dgp d = k2_base();
  d.mediator_laws = {make_law(-0.2, {{{"C1"}, 0.5}}), make_law(0.3, {{{"C1"}, -0.4}})};
  d.outcome_law = make_law(-0.8, {{{"M1"}, 0.4}, {{"M2"}, -0.9}, {{"C1"}, 0.6}, {{"M1", "M2"}, 0.8}});
  d.finalize();
  for (auto route : {OracleRoute::kIdentification, OracleRoute::kTrial}) {
    for (const auto& e : true_effects(d, route).effects) CHECK(std::abs(e.estimate) <= 1e-15);
  }
  d.mediator_laws[1] = make_law(0.3, {{{"M1"}, 1.1}, {{"C1"}, -0.4}});
  d.finalize();
  for (auto route : {OracleRoute::kIdentification, OracleRoute::kTrial}) {
    const auto t = true_effects(d, route);
    CHECK(std::abs(t.estimate("TCE")) <= 1e-15);
    CHECK(std::abs(t.estimate("IDE")) <= 1e-15);
  }
}

TEST_CASE("identification and trial routes agree on random DGPs") {
  std::mt19937_64 gen(2024);
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const Dgp d = testing::random_dgp(gen, 1 + rep % 3, rep % 4);
    const auto cmp = compare_routes(d);
    worst = std::max(worst, cmp.max_discrepancy);
    CHECK(decomposition_residual(cmp.trial) <= 1e-12);
    CHECK(decomposition_residual(cmp.ident) <= 1e-12);
    for (const char* label : {"ctr", "trt"}) CHECK(*cmp.ident.arm(label) == doctest::Approx(*cmp.trial.arm(label)));
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("dependent mediators separate seq_2 from all") {
  Dgp d = k2_base();
  d.mediator_laws[1] = make_law(-2.0, {{{"M1"}, 4.0}, {{"A"}, 0.3}});
  d.outcome_law = make_law(-1.0, {{{"A"}, 0.3}, {{"M1", "M2"}, 2.5}});
  d.finalize();
  const double seq = true_p_trial(d, arm_from_label("seq_2", 2));
  const double all = true_p_trial(d, arm_from_label("all", 2));
  CHECK(std::abs(seq - all) > 0.01);
}

TEST_CASE("raising the outcome intercept raises every arm") {
  Dgp d = k2_base();
  const auto before = true_effects(d);
  d.outcome_law.intercept += 0.25;
  const auto after = true_effects(d);
  for (std::size_t i = 0; i < before.arms.size(); ++i) CHECK(after.arms[i].second > before.arms[i].second);
}

TEST_CASE("enumeration cap") {
  Dgp d = k2_base();
  d.confounders.clear();
  d.confounder_probs.clear();
  for (int j = 1; j <= 19; ++j) {
    d.confounders.push_back("C" + std::to_string(j));
    d.confounder_probs.push_back(0.5);
  }
  d.finalize();
  try {
    enumerate(d);
    FAIL("expected cap error");
  } catch (const DataError& e) {
    CHECK(e.kind() == DataError::Kind::kCapExceeded);
    CHECK(std::string(e.what()).find("20") != std::string::npos);
  }
  CHECK_THROWS_AS(true_p_trial(d, arm_from_label("trt", 2)), DataError);
}

TEST_CASE("positivity violations are errors on the identification route only") {
  Dgp d = k2_base();
  d.exposure_law = make_law(-800.0, {{{"C1"}, 1600.0}});  // A = C1 almost surely
  d.finalize();
  CHECK_THROWS_AS(true_p_ident(d, arm_from_label("trt", 2)), DataError);
  CHECK_NOTHROW(true_p_trial(d, arm_from_label("trt", 2)));
}

TEST_CASE("golden effect tables") {
  for (const char* name : {"default", "reference_k2"}) {
    const Json golden = load_json(std::string(TRIALMED_SOURCE_DIR) + "/tests/golden/" + name + "_effects.json");
    const auto table = true_effects(load_dgp(name));
    const auto& effects = golden["trial"]["effects"];
    REQUIRE(effects.size() == table.effects.size());
    for (std::size_t i = 0; i < table.effects.size(); ++i) {
      CHECK(effects[i]["name"] == table.effects[i].name);
      CHECK(std::abs(effects[i]["estimate"].get<double>() - table.effects[i].estimate) <= 1e-12);
    }
  }
}

TEST_CASE("DGP JSON round trip and committed files") {
  for (const char* name : {"default", "reference_k2"}) {
    const Dgp builtin = load_dgp(name);
    const Dgp file = load_dgp(std::string(TRIALMED_SOURCE_DIR) + "/data/" + name + "_dgp.json");
    CHECK(dgp_to_json(builtin) == dgp_to_json(file));
    const Dgp again = dgp_from_json(dgp_to_json(builtin));
    CHECK(enumerate(again).probability == enumerate(builtin).probability);
  }
}

TEST_CASE("invalid DGP documents") {
  Json doc = dgp_to_json(reference_k2_dgp());
  Json bad = doc;
  bad["mediators"][0]["coefficients"]["M2"] = 0.5;  // M2 is not a parent of M1
  CHECK_THROWS_AS(dgp_from_json(bad), DataError);
  bad = doc;
  bad["confounder_law"] = {{"table", {0.5, 0.4}}};
  CHECK_THROWS_AS(dgp_from_json(bad), DataError);
  bad = doc;
  bad["outcome"]["coefficients"]["A:A"] = 1.0;
  CHECK_THROWS_AS(dgp_from_json(bad), DataError);
  bad = doc;
  bad.erase("mediators");
  CHECK_THROWS_AS(dgp_from_json(bad), DataError);
  CHECK_THROWS_AS(load_dgp("/nonexistent/dgp.json"), DataError);
}
