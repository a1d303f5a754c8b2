#include "fdbench/fdbench.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <new>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fdbench/density.hpp"
#include "fdbench/error.hpp"
#include "fdbench/evaluate.hpp"
#include "fdbench/experiment.hpp"
#include "fdbench/variants.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace fdbench;

struct fdb_experiment {
  ExperimentConfig config;
  std::string buffer;  // backing store for returned strings
};

namespace {

thread_local std::string g_last_error;

template <typename F>
fdb_status guarded(F&& fn) noexcept {
  try {
    g_last_error.clear();
    fn();
    return FDB_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return static_cast<fdb_status>(static_cast<int>(e.kind()));
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown failure";
  }
  return FDB_ERR_RUNTIME;
}

void require(const void* p, const char* name) {
  if (!p) throw InvalidArgument(std::string(name) + " is null");
}

const char* hand_out(fdb_experiment* exp, std::string s, const char** out) {
  exp->buffer = std::move(s);
  if (out) *out = exp->buffer.c_str();
  return exp->buffer.c_str();
}

fs::path out_dir(const ExperimentConfig& c) {
  std::error_code ec;
  fs::create_directories(c.out, ec);
  if (ec || !fs::is_directory(c.out)) {
    throw RuntimeError("cannot create output directory '" + c.out.string() + "'");
  }
  return c.out;
}

template <typename F>
void write_text(const fs::path& path, F&& fn) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeError("cannot write '" + path.string() + "'");
  fn(out);
  if (!out) throw RuntimeError("write failed for '" + path.string() + "'");
}

CorpusData load(const ExperimentConfig& c) {
  c.validate_paths();
  return ingest(c);
}

ordered_json density_json(const std::vector<DensityReport>& rows) {
  ordered_json a = ordered_json::array();
  for (const auto& r : rows) {
    a.push_back({{"variant", variant_name(r.variant)},
                 {"unique", r.unique_1grams},
                 {"all", r.all_1grams},
                 {"fd", r.fd}});
  }
  return a;
}

// NaN is not representable in JSON; undefined statistics become null.
ordered_json num(double v) { return std::isnan(v) ? ordered_json(nullptr) : ordered_json(v); }

ordered_json stats_json(const std::vector<CorrelationRow>& corr, const std::vector<TTestRow>& tt) {
  ordered_json c = ordered_json::array();
  for (const auto& r : corr) {
    c.push_back({{"pairing", r.pairing},
                 {"family", family_name(r.family)},
                 {"rho", num(r.corr.rho)},
                 {"p", num(r.corr.p_two_sided)},
                 {"n", r.corr.n},
                 {"defined", r.defined}});
  }
  ordered_json t = ordered_json::array();
  for (const auto& r : tt) {
    t.push_back({{"pairing", r.pairing},
                 {"mode", r.mode == TTestMode::kPaired ? "paired" : "two_sample"},
                 {"a", family_name(r.a)},
                 {"b", family_name(r.b)},
                 {"t", num(r.test.t)},
                 {"df", num(r.test.df)},
                 {"p", num(r.test.p_two_sided)},
                 {"defined", r.defined}});
  }
  return {{"correlations", c}, {"ttests", t}};
}

std::vector<std::string> report_files(const fs::path& dir) {
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file()) files.push_back(e.path().filename().string());
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

extern "C" {

const char* fdb_version(void) { return FDBENCH_VERSION; }

const char* fdb_last_error(void) { return g_last_error.c_str(); }

fdb_status fdb_experiment_open(const char* config_path, const char* overrides_json,
                               fdb_experiment** out) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    auto exp = std::make_unique<fdb_experiment>();
    exp->config = config_path ? ExperimentConfig::load(config_path)
                              : ExperimentConfig::from_json("{}", fs::current_path());
    if (overrides_json) exp->config.apply_overrides(overrides_json, fs::current_path());
    exp->config.validate();
    *out = exp.release();
  });
}

void fdb_experiment_free(fdb_experiment* exp) { delete exp; }

fdb_status fdb_experiment_config(fdb_experiment* exp, const char** json_out) {
  return guarded([&] {
    require(exp, "experiment");
    hand_out(exp, exp->config.to_json(), json_out);
  });
}

fdb_status fdb_experiment_hash(fdb_experiment* exp, const char** hex_out) {
  return guarded([&] {
    require(exp, "experiment");
    hand_out(exp, exp->config.hash(), hex_out);
  });
}

fdb_status fdb_ingest(fdb_experiment* exp, const char** summary_json) {
  return guarded([&] {
    require(exp, "experiment");
    const CorpusData d = load(exp->config);
    const fs::path dir = out_dir(exp->config);
    write_text(dir / "corpus.csv", [&](std::ostream& o) { write_corpus_csv(o, d.stats); });
    const CorpusStats& s = d.stats;
    ordered_json j = {{"samples", s.n_samples},
                      {"harmful", s.n_harmful},
                      {"nonharmful", s.n_nonharmful},
                      {"tokens", s.n_tokens},
                      {"unique_tokens", s.n_unique_tokens},
                      {"avg_post_words", s.avg_post_words},
                      {"avg_post_chars", s.avg_post_chars},
                      {"missing_ids", d.missing_ids},
                      {"written", {(dir / "corpus.csv").string()}}};
    hand_out(exp, j.dump(), summary_json);
  });
}

fdb_status fdb_variants(fdb_experiment* exp, const char** summary_json) {
  return guarded([&] {
    require(exp, "experiment");
    const CorpusData d = load(exp->config);
    const fs::path dir = out_dir(exp->config) / "variants";
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw RuntimeError("cannot create '" + dir.string() + "': " + ec.message());
    ordered_json rows = ordered_json::array();
    for (VariantId v : exp->config.variants) {
      auto seqs = derive_corpus(d.corpus, v, {exp->config.fold_case});
      const fs::path path = dir / (std::string(variant_name(v)) + ".txt");
      write_text(path, [&](std::ostream& o) { write_variant_corpus(o, seqs); });
      std::size_t total = 0;
      for (const auto& s : seqs) total += s.features.size();
      rows.push_back({{"variant", variant_name(v)},
                      {"documents", seqs.size()},
                      {"features", total},
                      {"file", path.string()}});
    }
    hand_out(exp, ordered_json{{"variants", rows}}.dump(), summary_json);
  });
}

fdb_status fdb_density(fdb_experiment* exp, const char** summary_json) {
  return guarded([&] {
    require(exp, "experiment");
    const CorpusData d = load(exp->config);
    const DeriveOptions derive{exp->config.fold_case};
    auto plain = density_table(d.corpus, exp->config.variants, {derive, false});
    auto stripped = density_table(d.corpus, exp->config.variants, {derive, true});
    const fs::path dir = out_dir(exp->config);
    write_text(dir / "density.csv", [&](std::ostream& o) { write_density_csv(o, plain); });
    write_text(dir / "density_nopunct.csv",
               [&](std::ostream& o) { write_density_csv(o, stripped); });
    ordered_json j = {{"density", density_json(plain)},
                      {"density_nopunct", density_json(stripped)}};
    hand_out(exp, j.dump(), summary_json);
  });
}

fdb_status fdb_run(fdb_experiment* exp, fdb_progress_fn progress, void* user,
                   const char** summary_json) {
  return guarded([&] {
    require(exp, "experiment");
    ProgressFn fn;
    if (progress) {
      fn = [&](const CellResult& c, bool reused) {
        const std::string v(variant_name(c.variant));
        const std::string f(family_name(c.family));
        progress(v.c_str(), f.c_str(), c.fold, c.smote ? 1 : 0, reused ? 1 : 0, c.metrics.f1, user);
      };
    }
    RunSummary s;
    const ExperimentReport r = run_experiment(exp->config, &s, fn);
    ordered_json j = {{"config_hash", r.provenance.config_hash},
                      {"cells_total", s.cells_total},
                      {"cells_trained", s.cells_trained},
                      {"cells_reused", s.cells_reused},
                      {"out", exp->config.out.string()},
                      {"files", report_files(exp->config.out)}};
    hand_out(exp, j.dump(), summary_json);
  });
}

fdb_status fdb_correlate(fdb_experiment* exp, const char* density_csv, const char* metrics_csv,
                         const char** summary_json) {
  return guarded([&] {
    require(exp, "experiment");
    const fs::path dpath = density_csv ? fs::path(density_csv) : exp->config.out / "density.csv";
    const fs::path mpath = metrics_csv ? fs::path(metrics_csv) : exp->config.out / "metrics.csv";
    std::ifstream din(dpath), min(mpath);
    if (!din) throw DataError("cannot read density CSV '" + dpath.string() + "'");
    if (!min) throw DataError("cannot read metrics CSV '" + mpath.string() + "'");
    const auto density = read_density_csv(din);
    const auto grid = read_grid_csv(min);
    std::vector<VariantId> variants;
    for (const auto& e : grid) {
      if (std::find(variants.begin(), variants.end(), e.variant) == variants.end()) {
        variants.push_back(e.variant);
      }
    }
    const auto corr = correlate(density, grid);
    const auto tt = top3_ttests(grid, variants);
    const fs::path dir = out_dir(exp->config);
    write_text(dir / "correlations.csv", [&](std::ostream& o) { write_correlations_csv(o, corr); });
    write_text(dir / "ttests.csv", [&](std::ostream& o) { write_ttests_csv(o, tt); });
    hand_out(exp, stats_json(corr, tt).dump(), summary_json);
  });
}

fdb_status fdb_report(fdb_experiment* exp, const char** summary_json) {
  return guarded([&] {
    require(exp, "experiment");
    const ExperimentReport r = read_report_csv(exp->config.out);
    render_report(r, exp->config.out, exp->config.format);
    ordered_json j = {{"out", exp->config.out.string()},
                      {"format", report_format_name(exp->config.format)},
                      {"files", report_files(exp->config.out)}};
    hand_out(exp, j.dump(), summary_json);
  });
}

fdb_status fdb_feature_density(uint64_t unique, uint64_t all, double* fd) {
  return guarded([&] {
    require(fd, "fd");
    *fd = make_density(VariantId::kTok, unique, all).fd;
  });
}

fdb_status fdb_pearson(const double* x, const double* y, size_t n, double* rho,
                       double* p_two_sided) {
  return guarded([&] {
    if (n > 0) {
      require(x, "x");
      require(y, "y");
    }
    const Correlation c = pearson(std::span<const double>(x, n), std::span<const double>(y, n));
    if (rho) *rho = c.rho;
    if (p_two_sided) *p_two_sided = c.p_two_sided;
  });
}

fdb_status fdb_pearson_p(double rho, size_t n, double* p_two_sided) {
  return guarded([&] {
    require(p_two_sided, "p_two_sided");
    *p_two_sided = pearson_p(rho, n);
  });
}

}  // extern "C"
