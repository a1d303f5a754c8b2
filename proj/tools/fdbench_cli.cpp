// Command-line front end; talks to the library only through fdbench.h.
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "fdbench/fdbench.h"

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> variants;
  std::optional<std::string> classifiers;
  std::optional<std::string> smote;
  std::optional<std::string> out;
  std::optional<std::size_t> jobs;
  std::optional<std::string> format;
  std::string density_csv;
  std::string metrics_csv;
  bool quiet = false;
};

// Library statuses map onto exit codes 1..3; caller errors count as runtime.
int exit_code(fdb_status s) {
  switch (s) {
    case FDB_OK: return 0;
    case FDB_ERR_CONFIG: return 1;
    case FDB_ERR_DATA: return 2;
    default: return 3;
  }
}

int fail(fdb_status s, const char* what) {
  std::fprintf(stderr, "fdbench %s: %s\n", what, fdb_last_error());
  return exit_code(s);
}

std::string overrides(const Options& o) {
  nlohmann::json j = nlohmann::json::object();
  if (o.seed) j["seed"] = *o.seed;
  if (o.variants) j["variants"] = *o.variants;
  if (o.classifiers) j["classifiers"] = *o.classifiers;
  if (o.smote) j["smote"] = *o.smote;
  if (o.out) j["out"] = *o.out;
  if (o.jobs) j["jobs"] = *o.jobs;
  if (o.format) j["format"] = *o.format;
  return j.dump();
}

void on_cell(const char* variant, const char* family, size_t fold, int smote, int reused, double f1,
             void*) {
  std::fprintf(stderr, "%-8s %-6s %-5s fold %zu  f1 %.4f%s\n", variant, family,
               smote ? "smote" : "plain", fold, f1, reused ? "  (reused)" : "");
}

int dispatch(const std::string& cmd, const Options& o) {
  fdb_experiment* exp = nullptr;
  const std::string ov = overrides(o);
  fdb_status s = fdb_experiment_open(o.config.empty() ? nullptr : o.config.c_str(), ov.c_str(), &exp);
  if (s != FDB_OK) return fail(s, "config");

  const char* summary = nullptr;
  if (cmd == "ingest") {
    s = fdb_ingest(exp, &summary);
  } else if (cmd == "variants") {
    s = fdb_variants(exp, &summary);
  } else if (cmd == "density") {
    s = fdb_density(exp, &summary);
  } else if (cmd == "run") {
    s = fdb_run(exp, o.quiet ? nullptr : on_cell, nullptr, &summary);
  } else if (cmd == "correlate") {
    s = fdb_correlate(exp, o.density_csv.empty() ? nullptr : o.density_csv.c_str(),
                      o.metrics_csv.empty() ? nullptr : o.metrics_csv.c_str(), &summary);
  } else {
    s = fdb_report(exp, &summary);
  }
  int rc = 0;
  if (s == FDB_OK) {
    std::cout << summary << '\n';
  } else {
    rc = fail(s, cmd.c_str());
  }
  fdb_experiment_free(exp);
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feature-density benchmark for harmful-content classification"};
  app.set_version_flag("--version", std::string(fdb_version()));
  app.require_subcommand(1);

  Options o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "Experiment config (JSON)");
    sub->add_option("--seed", o.seed, "Master seed");
    sub->add_option("--variants", o.variants, "Comma-separated variants, or 'all'");
    sub->add_option("--classifiers", o.classifiers, "Comma-separated families, or 'all'");
    sub->add_option("--smote", o.smote, "on, off or both");
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--format", o.format, "csv, markdown or both");
  };

  const std::pair<const char*, const char*> commands[] = {
      {"ingest", "Load samples and annotations; write corpus statistics"},
      {"variants", "Derive the feature corpora of every variant"},
      {"density", "Compute feature density per variant"},
      {"run", "Cross-validate the full variant x classifier grid and write the report"},
      {"correlate", "Correlate feature density with F1 and t-test the top classifiers"},
      {"report", "Re-render the report from the CSVs in the output directory"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_common(sub);
    if (std::string(name) == "run") sub->add_flag("-q,--quiet", o.quiet, "No per-cell progress");
    if (std::string(name) == "correlate") {
      sub->add_option("--density", o.density_csv, "Density CSV (default: <out>/density.csv)");
      sub->add_option("--metrics", o.metrics_csv, "Metrics CSV (default: <out>/metrics.csv)");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  return dispatch(app.get_subcommands().front()->get_name(), o);
}
