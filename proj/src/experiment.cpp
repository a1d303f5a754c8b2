// Experiment configuration and the cross-validated grid runner.
#include "fdbench/experiment.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "fdbench/error.hpp"
#include "json.hpp"

namespace fdbench {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view smote_mode_name(SmoteMode m) {
  switch (m) {
    case SmoteMode::kOff: return "off";
    case SmoteMode::kOn: return "on";
    case SmoteMode::kBoth: return "both";
  }
  return "?";
}

std::string_view report_format_name(ReportFormat f) {
  switch (f) {
    case ReportFormat::kCsv: return "csv";
    case ReportFormat::kMarkdown: return "markdown";
    case ReportFormat::kBoth: return "both";
  }
  return "?";
}

namespace {

SmoteMode parse_smote_mode(const std::string& s) {
  if (s == "off") return SmoteMode::kOff;
  if (s == "on") return SmoteMode::kOn;
  if (s == "both") return SmoteMode::kBoth;
  throw ConfigError("smote must be one of on, off, both (got '" + s + "')");
}

ReportFormat parse_format(const std::string& s) {
  if (s == "csv") return ReportFormat::kCsv;
  if (s == "markdown" || s == "md") return ReportFormat::kMarkdown;
  if (s == "both") return ReportFormat::kBoth;
  throw ConfigError("format must be one of csv, markdown, both (got '" + s + "')");
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  out.erase(std::remove(out.begin(), out.end(), std::string{}), out.end());
  return out;
}

Family family_or_throw(const std::string& name) {
  auto f = parse_family(name);
  if (!f) throw ConfigError("unknown classifier '" + name + "'");
  return *f;
}

std::vector<VariantId> parse_variants_value(const json& v) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "all") return {kAllVariants.begin(), kAllVariants.end()};
    try {
      return parse_variant_list(s);
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }
  if (!v.is_array()) throw ConfigError("variants must be \"all\", a list or a comma-separated string");
  std::vector<VariantId> out;
  for (const auto& item : v) {
    auto id = parse_variant(item.get<std::string>());
    if (!id) throw ConfigError("unknown variant '" + item.get<std::string>() + "'");
    out.push_back(*id);
  }
  return out;
}

ClassifierConfig parse_classifier(const json& item) {
  if (item.is_string()) return {family_or_throw(item.get<std::string>()), {}};
  if (!item.is_object() || !item.contains("family")) {
    throw ConfigError("a classifier entry is a family name or {\"family\": ..., \"params\": {...}}");
  }
  for (const auto& [key, _] : item.items()) {
    if (key != "family" && key != "params") throw ConfigError("classifier entry: unknown key '" + key + "'");
  }
  ClassifierConfig c{family_or_throw(item["family"].get<std::string>()), {}};
  if (item.contains("params")) c.params = apply_overrides(c.params, item["params"].dump());
  return c;
}

std::vector<ClassifierConfig> parse_classifiers_value(const json& v,
                                                      const std::vector<ClassifierConfig>& known) {
  std::vector<ClassifierConfig> out;
  auto by_name = [&](const std::string& name) {
    const Family f = family_or_throw(name);
    for (const auto& c : known) {
      if (c.family == f) return c;
    }
    return ClassifierConfig{f, {}};
  };
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "all") {
      for (Family f : kAllFamilies) out.push_back(by_name(std::string(family_name(f))));
      return out;
    }
    for (const auto& name : split_list(s)) out.push_back(by_name(name));
    return out;
  }
  if (!v.is_array()) throw ConfigError("classifiers must be \"all\", a list or a comma-separated string");
  for (const auto& item : v) {
    out.push_back(item.is_string() ? by_name(item.get<std::string>()) : parse_classifier(item));
  }
  return out;
}

std::size_t positive_size(const json& v, const char* key) {
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError(std::string(key) + " must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

void apply_object(ExperimentConfig& c, const json& j, const fs::path& base) {
  if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "samples") c.samples = resolve(base, v.get<std::string>());
      else if (key == "annotations") c.annotations = resolve(base, v.get<std::string>());
      else if (key == "variants") c.variants = parse_variants_value(v);
      else if (key == "classifiers") c.classifiers = parse_classifiers_value(v, c.classifiers);
      else if (key == "k") c.k = positive_size(v, "k");
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "smote") c.smote = parse_smote_mode(v.get<std::string>());
      else if (key == "smote_k") c.smote_k = positive_size(v, "smote_k");
      else if (key == "min_df") c.min_df = positive_size(v, "min_df");
      else if (key == "fold_case") c.fold_case = v.get<bool>();
      else if (key == "out") c.out = resolve(base, v.get<std::string>());
      else if (key == "jobs") c.jobs = positive_size(v, "jobs");
      else if (key == "format") c.format = parse_format(v.get<std::string>());
      else throw ConfigError("unknown config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

json params_json(const ClassifierConfig& c) {
  return json::parse(ModelSpec{c.family, c.params, 0}.to_json())["params"];
}

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw RuntimeError("SHA-256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

std::string file_digest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return sha256_hex(buf.str());
}

[[noreturn]] void rethrow_tagged(const std::string& stage, const Error& e) {
  const std::string msg = stage + ": " + e.what();
  switch (e.kind()) {
    case ErrorKind::kConfig: throw ConfigError(msg);
    case ErrorKind::kData: throw DataError(msg);
    case ErrorKind::kInvalidArgument: throw InvalidArgument(msg);
    case ErrorKind::kRuntime: break;
  }
  throw RuntimeError(msg);
}

template <typename F>
auto stage(const std::string& name, F&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    rethrow_tagged(name, e);
  } catch (const std::exception& e) {
    throw RuntimeError(name + ": " + e.what());
  }
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(std::string_view text, const fs::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config JSON: ") + e.what());
  }
  ExperimentConfig c;
  apply_object(c, j, base_dir);
  if (c.classifiers.empty() && !j.contains("classifiers")) {
    for (Family f : kAllFamilies) c.classifiers.push_back({f, {}});
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str(), path.parent_path());
}

void ExperimentConfig::apply_overrides(std::string_view json_object, const fs::path& base_dir) {
  json j;
  try {
    j = json::parse(json_object);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("overrides JSON: ") + e.what());
  }
  apply_object(*this, j, base_dir);
}

void ExperimentConfig::validate() const {
  if (k < 2) throw ConfigError("k must be >= 2");
  if (variants.empty()) throw ConfigError("at least one variant is required");
  if (classifiers.empty()) throw ConfigError("at least one classifier is required");
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
  if (smote_k < 1) throw ConfigError("smote_k must be >= 1");
  if (min_df < 1) throw ConfigError("min_df must be >= 1");
  std::set<VariantId> vs(variants.begin(), variants.end());
  if (vs.size() != variants.size()) throw ConfigError("duplicate variant in config");
  std::set<Family> fs_;
  for (const auto& c : classifiers) {
    if (!fs_.insert(c.family).second) {
      throw ConfigError("duplicate classifier " + std::string(family_name(c.family)));
    }
    ModelSpec{c.family, c.params, 0}.validate();
  }
}

void ExperimentConfig::validate_paths() const {
  validate();
  if (samples.empty() || !fs::is_regular_file(samples)) {
    throw ConfigError("samples file '" + samples.string() + "' does not exist");
  }
  if (annotations.empty() || !fs::is_regular_file(annotations)) {
    throw ConfigError("annotations file '" + annotations.string() + "' does not exist");
  }
}

std::string ExperimentConfig::to_json() const {
  json cls = json::array();
  for (const auto& c : classifiers) cls.push_back({{"family", family_name(c.family)}, {"params", params_json(c)}});
  json vs = json::array();
  for (auto v : variants) vs.push_back(variant_name(v));
  json j{{"samples", samples.string()},
         {"annotations", annotations.string()},
         {"variants", vs},
         {"classifiers", cls},
         {"k", k},
         {"seed", seed},
         {"smote", smote_mode_name(smote)},
         {"smote_k", smote_k},
         {"min_df", min_df},
         {"fold_case", fold_case},
         {"out", out.string()},
         {"jobs", jobs},
         {"format", report_format_name(format)}};
  return j.dump(2);
}

std::string ExperimentConfig::hash() const {
  std::vector<std::string> vs;
  for (auto v : variants) vs.emplace_back(variant_name(v));
  std::sort(vs.begin(), vs.end());
  json cls = json::object();
  for (const auto& c : classifiers) cls[std::string(family_name(c.family))] = params_json(c);
  json j{{"samples_sha256", file_digest(samples)},
         {"annotations_sha256", file_digest(annotations)},
         {"variants", vs},
         {"classifiers", cls},
         {"k", k},
         {"seed", seed},
         {"smote", smote_mode_name(smote)},
         {"smote_k", smote_k},
         {"min_df", min_df},
         {"fold_case", fold_case}};
  return sha256_hex(j.dump());
}

CorpusData ingest(const ExperimentConfig& config) {
  CorpusData d;
  auto samples = load_samples(config.samples);
  auto attached = attach_annotations(samples, config.annotations);
  d.corpus = std::move(attached.annotated);
  d.missing_ids = std::move(attached.missing_ids);
  if (d.corpus.empty()) throw DataError("no annotated samples");
  d.stats = corpus_stats(d.corpus);
  return d;
}

std::uint64_t cell_seed(std::uint64_t seed, VariantId variant, Family family) {
  return mix_seed(seed, {"cell", variant_name(variant), family_name(family)});
}

namespace {

struct Task {
  VariantId variant;
  std::size_t variant_index;
  std::size_t classifier_index;
  bool smote;
  std::size_t fold;
};

fs::path cell_path(const fs::path& dir, const Task& t, Family family) {
  return dir / (std::string(variant_name(t.variant)) + "__" + std::string(family_name(family)) +
                (t.smote ? "__smote" : "__plain") + "__f" + std::to_string(t.fold) + ".csv");
}

std::optional<CellResult> read_cell(const fs::path& path, const CellResult& expect) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  try {
    auto rows = read_cells_csv(in);
    if (rows.size() != 1) return std::nullopt;
    const auto& r = rows[0];
    if (r.variant != expect.variant || r.family != expect.family || r.fold != expect.fold ||
        r.smote != expect.smote || r.seed != expect.seed) {
      return std::nullopt;
    }
    return r;
  } catch (const Error&) {
    return std::nullopt;  // a torn or foreign file is recomputed
  }
}

void write_cell(const fs::path& path, const CellResult& r) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw RuntimeError("cannot write '" + tmp.string() + "'");
    write_cells_csv(out, std::span<const CellResult>(&r, 1));
    if (!out) throw RuntimeError("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

std::vector<GridEntry> aggregate(std::span<const CellResult> cells) {
  std::map<std::tuple<VariantId, Family, bool>, std::vector<Metrics>> groups;
  std::vector<std::tuple<VariantId, Family, bool>> order;
  for (const auto& c : cells) {
    auto key = std::make_tuple(c.variant, c.family, c.smote);
    auto [it, fresh] = groups.try_emplace(key);
    if (fresh) order.push_back(key);
    it->second.push_back(c.metrics);
  }
  std::vector<GridEntry> grid;
  for (const auto& key : order) {
    grid.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), mean_metrics(groups[key])});
  }
  return grid;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config, RunSummary* summary,
                                const ProgressFn& progress) {
  stage("config", [&] {
    config.validate_paths();
    return 0;
  });
  const std::string hash = stage("config", [&] { return config.hash(); });
  CorpusData data = stage("ingest", [&] { return ingest(config); });
  const std::vector<int> labels = labels_of(data.corpus);

  ExperimentReport report;
  report.provenance = {config.seed, hash, FDBENCH_VERSION, config.k,
                       std::string(smote_mode_name(config.smote))};
  report.corpus = data.stats;

  const DeriveOptions derive_opts{config.fold_case};
  std::vector<std::vector<FeatureSequence>> docs = stage("variants", [&] {
    std::vector<std::vector<FeatureSequence>> out;
    for (auto v : config.variants) out.push_back(derive_corpus(data.corpus, v, derive_opts));
    return out;
  });
  stage("density", [&] {
    report.density = density_table(data.corpus, config.variants, {derive_opts, false});
    report.density_stripped = density_table(data.corpus, config.variants, {derive_opts, true});
    return 0;
  });

  const FoldPlan plan = stage("folds", [&] { return stratified_folds(labels, config.k, config.seed); });

  std::vector<Task> tasks;
  for (std::size_t vi = 0; vi < config.variants.size(); ++vi) {
    for (std::size_t ci = 0; ci < config.classifiers.size(); ++ci) {
      const Family fam = config.classifiers[ci].family;
      std::vector<bool> modes;
      // Neural families never take SMOTE; they contribute plain runs to every mode.
      if (config.smote != SmoteMode::kOn || is_neural(fam)) modes.push_back(false);
      if (config.smote != SmoteMode::kOff && !is_neural(fam)) modes.push_back(true);
      for (bool sm : modes) {
        for (std::size_t f = 0; f < config.k; ++f) tasks.push_back({config.variants[vi], vi, ci, sm, f});
      }
    }
  }

  const fs::path cell_dir = config.out / "cells" / hash;
  stage("run", [&] {
    std::error_code ec;
    fs::create_directories(cell_dir, ec);
    if (ec) throw RuntimeError("cannot create '" + cell_dir.string() + "': " + ec.message());
    return 0;
  });

  std::vector<CellResult> results(tasks.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::atomic<std::size_t> trained{0}, reused{0};
  std::exception_ptr first_error;
  std::mutex mu;

  auto worker = [&] {
    while (!failed.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task& t = tasks[i];
      const ClassifierConfig& cc = config.classifiers[t.classifier_index];
      const std::uint64_t base_seed = cell_seed(config.seed, t.variant, cc.family);
      CellResult expect{t.variant, cc.family, t.fold, {}, t.smote, fold_seed(base_seed, t.fold)};
      try {
        const fs::path path = cell_path(cell_dir, t, cc.family);
        bool was_reused = false;
        if (auto cached = read_cell(path, expect)) {
          results[i] = *cached;
          was_reused = true;
          ++reused;
        } else {
          CvOptions opt;
          opt.smote = t.smote;
          opt.smote_k = config.smote_k;
          opt.min_df = config.min_df;
          expect.metrics = run_fold({cc.family, cc.params, base_seed}, docs[t.variant_index], labels,
                                    plan, t.fold, opt);
          write_cell(path, expect);
          results[i] = expect;
          ++trained;
        }
        if (progress) {
          std::lock_guard lock(mu);
          progress(results[i], was_reused);
        }
      } catch (...) {
        std::lock_guard lock(mu);
        if (!first_error) first_error = std::current_exception();
        failed = true;
      }
    }
  };

  const std::size_t n_threads = std::max<std::size_t>(1, std::min(config.jobs, tasks.size()));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (first_error) {
    try {
      std::rethrow_exception(first_error);
    } catch (const Error& e) {
      rethrow_tagged("run", e);
    } catch (const std::exception& e) {
      throw RuntimeError(std::string("run: ") + e.what());
    }
  }

  if (summary) *summary = {tasks.size(), trained.load(), reused.load()};
  report.cells = std::move(results);
  report.grid = aggregate(report.cells);
  stage("correlate", [&] {
    report.correlations = correlate(report.density, report.grid);
    report.ttests = top3_ttests(report.grid, config.variants);
    return 0;
  });
  stage("report", [&] {
    render_report(report, config.out, config.format);
    return 0;
  });
  return report;
}

}  // namespace fdbench
