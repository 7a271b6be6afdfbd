#include "trialmed/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <optional>
#include <sstream>

#include "trialmed/bootstrap.hpp"
#include "trialmed/errors.hpp"
#include "trialmed/kernels.hpp"
#include "trialmed/oracle.hpp"
#include "trialmed/report.hpp"
#include "trialmed/synth.hpp"

namespace trialmed::cli {
namespace {

struct DataFlags {
  std::string path;
  VariableRoles roles;
  std::string missing = "reject";

  void add(CLI::App& app) {
    app.add_option("--data", path, "CSV file with a header row")->required();
    app.add_option("--exposure", roles.exposure, "binary exposure column")->required();
    app.add_option("--mediators", roles.mediators, "binary mediator columns, in policy order")
        ->required()
        ->delimiter(',');
    app.add_option("--outcome", roles.outcome, "binary outcome column")->required();
    app.add_option("--confounders", roles.confounders, "confounder columns")->delimiter(',');
    app.add_option("--missing", missing, "reject|drop rows with missing values")
        ->check(CLI::IsMember({"reject", "drop"}));
  }

  LoadResult load() const {
    roles.validate();
    return load_csv(path, roles, missing == "drop" ? MissingPolicy::kDrop : MissingPolicy::kReject);
  }

  Json echo() const {
    return {{"data", path},
            {"exposure", roles.exposure},
            {"mediators", roles.mediators},
            {"outcome", roles.outcome},
            {"confounders", roles.confounders},
            {"missing", missing}};
  }
};

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path == "-") {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw UsageError("cannot write " + path);
  file << text;
  if (!file) throw UsageError("failed writing " + path);
}

struct EstimateCommand {
  DataFlags data;
  std::size_t n_sim = 200;
  std::size_t n_boot = 1000;
  std::string ci = "normal";
  double level = 0.95;
  std::uint64_t seed = kDefaultSeed;
  std::string interactions = "2";
  std::vector<std::string> arms;
  std::string out_path;
  bool explain_plan = false;
  std::size_t threads = 1;

  void add(CLI::App& app) {
    data.add(app);
    app.add_option("--nsim", n_sim, "Monte Carlo repetitions")->capture_default_str();
    app.add_option("--nboot", n_boot, "bootstrap replicates (0 disables the bootstrap)")->capture_default_str();
    app.add_option("--ci", ci, "normal|percentile")->check(CLI::IsMember({"normal", "percentile"}));
    app.add_option("--level", level, "confidence level")->capture_default_str();
    app.add_option("--seed", seed, "random seed")->capture_default_str();
    app.add_option("--interactions", interactions, "1|2|3|saturated")->capture_default_str();
    app.add_option("--arms", arms, "simulate only these arms")->delimiter(',');
    app.add_option("--out", out_path, "write results JSON here ('-' for standard output)");
    app.add_flag("--explain-plan", explain_plan, "include arm draw plans and fitted models in the JSON");
    app.add_option("--threads", threads, "worker threads")->capture_default_str();
  }

  int run(std::ostream& out) const {
    EstimationConfig est;
    est.n_sim = n_sim;
    est.interactions = InteractionSpec::parse(interactions);
    est.seed = seed;
    est.arms = arms;
    est.threads = threads;
    est.validate();
    BootstrapConfig boot;
    boot.n_boot = n_boot;
    boot.method = parse_ci_method(ci);
    boot.level = level;
    boot.seed = seed;
    boot.threads = threads;
    if (n_boot > 0) boot.validate();

    const LoadResult loaded = data.load();
    Estimation estimation = run_estimation(loaded.data, est);
    std::optional<BootstrapResult> bootstrap;
    if (n_boot > 0) {
      bootstrap = bootstrap_effects(loaded.data, est, boot);
      estimation.table = bootstrap->table;
    }

    Json doc = document_header("estimate");
    Json config = data.echo();
    config["nsim"] = n_sim;
    config["nboot"] = n_boot;
    config["ci"] = ci;
    config["level"] = level;
    config["seed"] = seed;
    config["interactions"] = est.interactions.describe();
    config["arms"] = arms;
    config["kernels"] = kernels::isa_name(kernels::active_isa());
    doc["config"] = config;
    doc["data"] = {{"rows", loaded.data.rows()}, {"dropped_rows", loaded.dropped_rows}};
    const Json table = effect_table_json(estimation.table);
    doc["arms"] = table["arms"];
    doc["effects"] = table["effects"];
    if (bootstrap) {
      Json failures = Json::array();
      for (const auto& f : bootstrap->failures) failures.push_back({{"replicate", f.replicate}, {"message", f.message}});
      doc["bootstrap"] = {{"replicates", n_boot},
                          {"successful", bootstrap->successful},
                          {"failed", bootstrap->failures.size()},
                          {"method", ci},
                          {"level", level},
                          {"failures", failures}};
    }
    if (explain_plan) doc["plan"] = plan_json(estimation, loaded.data.roles());

    if (out_path == "-") {
      out << dump(doc);
    } else {
      out << format_effect_table(estimation.table, level);
      if (bootstrap && !bootstrap->failures.empty()) {
        out << bootstrap->failures.size() << " of " << n_boot << " bootstrap replicates failed and were skipped\n";
      }
      if (!out_path.empty()) write_text(out_path, dump(doc), out);
    }
    return kOk;
  }
};

struct AssociationsCommand {
  DataFlags data;
  double level = 0.95;
  std::string out_path;

  void add(CLI::App& app) {
    data.add(app);
    app.add_option("--level", level, "confidence level")->capture_default_str();
    app.add_option("--out", out_path, "write results JSON here ('-' for standard output)");
  }

  int run(std::ostream& out) const {
    if (!(level > 0.0 && level < 1.0)) throw UsageError("confidence level must lie strictly between 0 and 1");
    const LoadResult loaded = data.load();
    const auto rows = associations(loaded.data, {}, level);
    Json doc = document_header("associations");
    Json config = data.echo();
    config["level"] = level;
    doc["config"] = config;
    doc["data"] = {{"rows", loaded.data.rows()}, {"dropped_rows", loaded.dropped_rows}};
    doc["results"] = associations_json(rows, level);
    if (out_path == "-") {
      out << dump(doc);
    } else {
      out << format_associations(rows, level);
      if (!out_path.empty()) write_text(out_path, dump(doc), out);
    }
    return kOk;
  }

};

struct SummarizeCommand {
  DataFlags data;
  std::string out_path;

  void add(CLI::App& app) {
    data.add(app);
    app.add_option("--out", out_path, "write the summary JSON here ('-' for standard output)");
  }

  int run(std::ostream& out) const {
    const LoadResult loaded = data.load();
    const DataSummary summary = summarize(loaded.data);
    Json doc = document_header("summarize");
    doc["config"] = data.echo();
    doc["data"] = {{"rows", loaded.data.rows()}, {"dropped_rows", loaded.dropped_rows}};
    doc["summary"] = summary_json(summary);
    if (out_path == "-") {
      out << dump(doc);
    } else {
      out << format_summary(summary);
      if (!out_path.empty()) write_text(out_path, dump(doc), out);
    }
    return kOk;
  }
};

struct SynthCommand {
  std::string dgp = "default";
  std::size_t n = 0;
  std::uint64_t seed = kDefaultSeed;
  std::string out_path = "-";
  std::size_t threads = 1;

  void add(CLI::App& app) {
    app.add_option("--dgp", dgp, "DGP JSON file, or 'default' / 'reference_k2'")->capture_default_str();
    app.add_option("--n", n, "number of rows")->required();
    app.add_option("--seed", seed, "random seed")->capture_default_str();
    app.add_option("--out", out_path, "CSV destination ('-' for standard output)")->capture_default_str();
    app.add_option("--threads", threads, "worker threads")->capture_default_str();
  }

  int run(std::ostream& out) const {
    if (n == 0) throw UsageError("--n must be at least 1");
    if (threads < 1) throw UsageError("thread count must be at least 1");
    const Dataset data = generate(load_dgp(dgp), n, seed, threads);
    std::ostringstream csv;
    write_csv(data, csv);
    write_text(out_path, csv.str(), out);
    return kOk;
  }
};

struct OracleCommand {
  std::string dgp = "default";
  std::string compare = "trial";
  std::size_t cap = kEnumerationCap;
  std::string out_path;
  std::string dump_dgp;

  void add(CLI::App& app) {
    app.add_option("--dgp", dgp, "DGP JSON file, or 'default' / 'reference_k2'")->capture_default_str();
    app.add_option("--compare", compare, "ident|trial|both")
        ->check(CLI::IsMember({"ident", "trial", "both"}))
        ->capture_default_str();
    app.add_option("--cap", cap, "largest |C| + K to enumerate")->capture_default_str();
    app.add_option("--out", out_path, "write the exact effect table JSON here ('-' for standard output)");
    app.add_option("--dump-dgp", dump_dgp, "also write the DGP as JSON here");
  }

  int run(std::ostream& out) const {
    const Dgp model = load_dgp(dgp);
    if (!dump_dgp.empty()) write_text(dump_dgp, dump(dgp_to_json(model)), out);
    check_enumeration_cap(model, cap);

    Json doc = document_header("oracle");
    doc["config"] = {{"dgp", dgp}, {"compare", compare}, {"cap", cap}};
    std::string text;
    if (compare == "both") {
      const OracleComparison cmp = compare_routes(model, cap);
      doc["ident"] = effect_table_json(cmp.ident);
      doc["trial"] = effect_table_json(cmp.trial);
      doc["max_discrepancy"] = cmp.max_discrepancy;
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.3e", cmp.max_discrepancy);
      text = format_effect_table(cmp.trial) + "max discrepancy (ident vs trial): " + buf + "\n";
    } else {
      const auto route = compare == "ident" ? OracleRoute::kIdentification : OracleRoute::kTrial;
      const EffectTable table = true_effects(model, route, cap);
      doc[compare] = effect_table_json(table);
      text = format_effect_table(table);
    }
    if (out_path == "-") {
      out << dump(doc);
    } else {
      out << text;
      if (!out_path.empty()) write_text(out_path, dump(doc), out);
    }
    return kOk;
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Interventional mediation effects for emulated target trials"};
  app.name("trialmed");
  app.require_subcommand(1);
  std::string kernels_choice = "auto";
  app.add_option("--kernels", kernels_choice, "numeric kernels: auto|scalar|avx2")->capture_default_str();
  app.set_version_flag("--version", std::string(kSoftwareVersion));

  EstimateCommand estimate;
  AssociationsCommand assoc;
  SummarizeCommand summary;
  SynthCommand synth;
  OracleCommand oracle;
  CLI::App* estimate_app = app.add_subcommand("estimate", "estimate interventional effects");
  CLI::App* assoc_app = app.add_subcommand("associations", "crude and adjusted odds ratios");
  CLI::App* summary_app = app.add_subcommand("summarize", "descriptive statistics by exposure group");
  CLI::App* synth_app = app.add_subcommand("synth", "simulate a dataset from a DGP");
  CLI::App* oracle_app = app.add_subcommand("oracle", "exact effects of a DGP by enumeration");
  estimate.add(*estimate_app);
  assoc.add(*assoc_app);
  summary.add(*summary_app);
  synth.add(*synth_app);
  oracle.add(*oracle_app);
  for (CLI::App* sub : {estimate_app, assoc_app, summary_app, synth_app, oracle_app}) {
    sub->add_option("--kernels", kernels_choice, "numeric kernels: auto|scalar|avx2");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const CLI::App* context = &app;
    for (const CLI::App* sub : app.get_subcommands()) context = sub;
    err << context->help();
    return kUsage;
  }

  try {
    kernels::set_active_isa(kernels::parse_isa(kernels_choice));
    if (estimate_app->parsed()) return estimate.run(out);
    if (assoc_app->parsed()) return assoc.run(out);
    if (summary_app->parsed()) return summary.run(out);
    if (synth_app->parsed()) return synth.run(out);
    return oracle.run(out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kData;
  } catch (const FitError& e) {
    err << "fit error: " << e.what() << "\n";
    return kFit;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInternal;
  }
}

}  // namespace trialmed::cli
