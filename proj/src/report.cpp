// Report statistics, CSV persistence and markdown rendering.
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "csv.hpp"
#include "fdbench/error.hpp"
#include "fdbench/experiment.hpp"

namespace fdbench {

namespace fs = std::filesystem;

namespace {

using Row = std::vector<std::string>;

std::string fmt(double v) { return csv::format_double(v); }

void expect_header(csv::Reader& r, const Row& header, const char* what) {
  auto h = r.next();
  if (!h || *h != header) throw DataError(std::string(what) + ": unexpected header");
}

// Calls fn on each non-blank record with the expected width.
template <typename F>
void for_records(csv::Reader& r, std::size_t width, const char* what, F&& fn) {
  while (auto rec = r.next()) {
    if (rec->size() == 1 && rec->front().empty()) continue;
    if (rec->size() != width) {
      throw DataError(std::string(what) + " line " + std::to_string(r.record_line()) + ": expected " +
                      std::to_string(width) + " fields");
    }
    fn(*rec);
  }
}

VariantId variant_of(const std::string& s) {
  auto v = parse_variant(s);
  if (!v) throw DataError("unknown variant '" + s + "'");
  return *v;
}

Family family_of(const std::string& s) {
  auto f = parse_family(s);
  if (!f) throw DataError("unknown classifier '" + s + "'");
  return *f;
}

bool flag_of(const std::string& s) {
  if (s == "1" || s == "on") return true;
  if (s == "0" || s == "off") return false;
  throw DataError("expected 0/1, got '" + s + "'");
}

std::string mode_name(TTestMode m) { return m == TTestMode::kPaired ? "paired" : "two_sample"; }

TTestMode mode_of(const std::string& s) {
  if (s == "paired") return TTestMode::kPaired;
  if (s == "two_sample") return TTestMode::kTwoSample;
  throw DataError("unknown t-test mode '" + s + "'");
}

const GridEntry* find_entry(std::span<const GridEntry> grid, VariantId v, Family f, bool smote) {
  for (const auto& e : grid) {
    if (e.variant == v && e.family == f && e.smote == smote) return &e;
  }
  return nullptr;
}

const GridEntry* view_entry(std::span<const GridEntry> grid, VariantId v, Family f,
                            std::string_view pairing) {
  if (pairing == "plain") return find_entry(grid, v, f, false);
  if (pairing == "smote") return find_entry(grid, v, f, true);
  if (const auto* e = find_entry(grid, v, f, true)) return e;
  return find_entry(grid, v, f, false);
}

// Variants and families present in the grid, in display order.
std::vector<VariantId> grid_variants(std::span<const GridEntry> grid) {
  std::vector<VariantId> out;
  for (auto v : kReportVariantOrder) {
    if (std::any_of(grid.begin(), grid.end(), [&](const GridEntry& e) { return e.variant == v; })) {
      out.push_back(v);
    }
  }
  return out;
}

std::vector<Family> grid_families(std::span<const GridEntry> grid) {
  std::vector<Family> out;
  for (auto f : kAllFamilies) {
    if (std::any_of(grid.begin(), grid.end(), [&](const GridEntry& e) { return e.family == f; })) {
      out.push_back(f);
    }
  }
  return out;
}

// NaN ranks below every number, so tables without some metric still order strictly.
int compare_desc(double a, double b) {
  const bool na = std::isnan(a), nb = std::isnan(b);
  if (na || nb) return na == nb ? 0 : (na ? 1 : -1);
  return a > b ? -1 : (a < b ? 1 : 0);
}

// Higher F1, then higher AUC, then lexicographically smaller name.
bool better(const Metrics& a, Family fa, const Metrics& b, Family fb) {
  if (int c = compare_desc(a.f1, b.f1)) return c < 0;
  if (int c = compare_desc(a.auc, b.auc)) return c < 0;
  return family_name(fa) < family_name(fb);
}

}  // namespace

void write_cells_csv(std::ostream& out, std::span<const CellResult> cells) {
  out << kCellCsvHeader << '\n';
  for (const auto& c : cells) {
    csv::write_row(out, {std::string(variant_name(c.variant)), std::string(family_name(c.family)),
                         std::to_string(c.fold), fmt(c.metrics.acc), fmt(c.metrics.prec),
                         fmt(c.metrics.rec), fmt(c.metrics.f1), fmt(c.metrics.auc),
                         c.smote ? "1" : "0", std::to_string(c.seed)});
  }
}

std::vector<CellResult> read_cells_csv(std::istream& in) {
  csv::Reader r(in);
  expect_header(r, {"variant", "family", "fold", "acc", "prec", "rec", "f1", "auc", "smote", "seed"},
                "fold CSV");
  std::vector<CellResult> out;
  for_records(r, 10, "fold CSV", [&](const Row& x) {
    out.push_back({variant_of(x[0]),
                   family_of(x[1]),
                   csv::parse_u64(x[2]),
                   {csv::parse_double(x[3]), csv::parse_double(x[4]), csv::parse_double(x[5]),
                    csv::parse_double(x[6]), csv::parse_double(x[7])},
                   flag_of(x[8]),
                   csv::parse_u64(x[9])});
  });
  return out;
}

void write_grid_csv(std::ostream& out, std::span<const GridEntry> grid) {
  csv::write_row(out, {"variant", "family", "smote", "acc", "prec", "rec", "f1", "auc"});
  for (const auto& e : grid) {
    csv::write_row(out, {std::string(variant_name(e.variant)), std::string(family_name(e.family)),
                         e.smote ? "1" : "0", fmt(e.mean.acc), fmt(e.mean.prec), fmt(e.mean.rec),
                         fmt(e.mean.f1), fmt(e.mean.auc)});
  }
}

std::vector<GridEntry> read_grid_csv(std::istream& in) {
  csv::Reader r(in);
  expect_header(r, {"variant", "family", "smote", "acc", "prec", "rec", "f1", "auc"}, "metrics CSV");
  std::vector<GridEntry> out;
  for_records(r, 8, "metrics CSV", [&](const Row& x) {
    out.push_back({variant_of(x[0]),
                   family_of(x[1]),
                   flag_of(x[2]),
                   {csv::parse_double(x[3]), csv::parse_double(x[4]), csv::parse_double(x[5]),
                    csv::parse_double(x[6]), csv::parse_double(x[7])}});
  });
  return out;
}

void write_correlations_csv(std::ostream& out, std::span<const CorrelationRow> rows) {
  csv::write_row(out, {"pairing", "family", "rho", "p", "n", "defined"});
  for (const auto& r : rows) {
    csv::write_row(out, {r.pairing, std::string(family_name(r.family)), fmt(r.corr.rho),
                         fmt(r.corr.p_two_sided), std::to_string(r.corr.n), r.defined ? "1" : "0"});
  }
}

std::vector<CorrelationRow> read_correlations_csv(std::istream& in) {
  csv::Reader r(in);
  expect_header(r, {"pairing", "family", "rho", "p", "n", "defined"}, "correlations CSV");
  std::vector<CorrelationRow> out;
  for_records(r, 6, "correlations CSV", [&](const Row& x) {
    out.push_back({x[0], family_of(x[1]),
                   {csv::parse_double(x[2]), csv::parse_double(x[3]), csv::parse_u64(x[4])},
                   flag_of(x[5])});
  });
  return out;
}

void write_ttests_csv(std::ostream& out, std::span<const TTestRow> rows) {
  csv::write_row(out, {"pairing", "mode", "a", "b", "t", "df", "p", "defined"});
  for (const auto& r : rows) {
    csv::write_row(out, {r.pairing, mode_name(r.mode), std::string(family_name(r.a)),
                         std::string(family_name(r.b)), fmt(r.test.t), fmt(r.test.df),
                         fmt(r.test.p_two_sided), r.defined ? "1" : "0"});
  }
}

std::vector<TTestRow> read_ttests_csv(std::istream& in) {
  csv::Reader r(in);
  expect_header(r, {"pairing", "mode", "a", "b", "t", "df", "p", "defined"}, "t-test CSV");
  std::vector<TTestRow> out;
  for_records(r, 8, "t-test CSV", [&](const Row& x) {
    out.push_back({x[0], mode_of(x[1]), family_of(x[2]), family_of(x[3]),
                   {csv::parse_double(x[4]), csv::parse_double(x[5]), csv::parse_double(x[6])},
                   flag_of(x[7])});
  });
  return out;
}

std::optional<std::vector<double>> f1_vector(std::span<const GridEntry> grid, Family family,
                                             std::span<const VariantId> variants,
                                             std::string_view pairing) {
  std::vector<double> out;
  for (auto v : variants) {
    const GridEntry* e = view_entry(grid, v, family, pairing);
    if (!e) return std::nullopt;
    out.push_back(e->mean.f1);
  }
  return out;
}

std::vector<CorrelationRow> correlate(std::span<const DensityReport> density,
                                      std::span<const GridEntry> grid) {
  std::vector<VariantId> variants;
  std::vector<double> fd;
  for (auto v : kReportVariantOrder) {
    auto it = std::find_if(density.begin(), density.end(),
                           [&](const DensityReport& d) { return d.variant == v; });
    if (it == density.end()) continue;
    if (std::none_of(grid.begin(), grid.end(), [&](const GridEntry& e) { return e.variant == v; })) {
      continue;
    }
    variants.push_back(v);
    fd.push_back(it->fd);
  }
  std::vector<CorrelationRow> out;
  for (std::string_view pairing : {"plain", "smote", "mixed"}) {
    for (Family f : grid_families(grid)) {
      if (pairing == "smote" && is_neural(f)) continue;
      auto f1 = f1_vector(grid, f, variants, pairing);
      if (!f1) continue;
      CorrelationRow row{std::string(pairing), f, {}, true};
      row.corr.n = variants.size();
      try {
        row.corr = pearson(fd, *f1);
      } catch (const InvalidArgument&) {
        row.defined = false;
        row.corr.rho = std::numeric_limits<double>::quiet_NaN();
        row.corr.p_two_sided = std::numeric_limits<double>::quiet_NaN();
      }
      out.push_back(row);
    }
  }
  return out;
}

std::vector<Family> rank_families(std::span<const GridEntry> grid) {
  struct Score {
    Family f;
    Metrics m;
  };
  std::vector<Score> scores;
  for (Family f : grid_families(grid)) {
    std::vector<Metrics> ms;
    for (const auto& e : grid) {
      if (e.family == f && !e.smote) ms.push_back(e.mean);
    }
    if (ms.empty()) {
      for (const auto& e : grid) {
        if (e.family == f) ms.push_back(e.mean);
      }
    }
    scores.push_back({f, mean_metrics(ms)});
  }
  std::sort(scores.begin(), scores.end(),
            [](const Score& a, const Score& b) { return better(a.m, a.f, b.m, b.f); });
  std::vector<Family> out;
  for (const auto& s : scores) out.push_back(s.f);
  return out;
}

std::vector<TTestRow> top3_ttests(std::span<const GridEntry> grid,
                                  std::span<const VariantId> variants) {
  std::vector<VariantId> order;
  for (auto v : kReportVariantOrder) {
    if (std::find(variants.begin(), variants.end(), v) != variants.end()) order.push_back(v);
  }
  auto ranked = rank_families(grid);
  if (ranked.size() > 3) ranked.resize(3);
  std::vector<TTestRow> out;
  for (std::string_view pairing : {"plain", "mixed"}) {
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      for (std::size_t j = i + 1; j < ranked.size(); ++j) {
        auto a = f1_vector(grid, ranked[i], order, pairing);
        auto b = f1_vector(grid, ranked[j], order, pairing);
        if (!a || !b) continue;
        for (TTestMode mode : {TTestMode::kPaired, TTestMode::kTwoSample}) {
          TTestRow row{std::string(pairing), mode, ranked[i], ranked[j], {}, true};
          try {
            row.test = t_test(*a, *b, mode);
          } catch (const InvalidArgument&) {
            row.defined = false;
            row.test = {std::numeric_limits<double>::quiet_NaN(), 0,
                        std::numeric_limits<double>::quiet_NaN()};
          }
          out.push_back(row);
        }
      }
    }
  }
  return out;
}

std::optional<Family> winner(std::span<const GridEntry> grid, VariantId variant, bool smote) {
  std::optional<Family> best;
  const GridEntry* best_e = nullptr;
  for (Family f : grid_families(grid)) {
    const GridEntry* e = view_entry(grid, variant, f, smote ? "mixed" : "plain");
    if (!e) continue;
    if (!best_e || better(e->mean, f, best_e->mean, *best)) {
      best = f;
      best_e = e;
    }
  }
  return best;
}

namespace {

std::string dp3(double v) { return std::isnan(v) ? "n/a" : format_fixed(v, 3); }
std::string dp4(double v) { return std::isnan(v) ? "n/a" : format_fixed(v, 4); }

void table_header(std::ostream& out, const std::vector<std::string>& cols) {
  out << '|';
  for (const auto& c : cols) out << ' ' << c << " |";
  out << "\n|";
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i == 0 ? "---|" : "---:|");
  out << '\n';
}

void table_row(std::ostream& out, const std::vector<std::string>& cells) {
  out << '|';
  for (const auto& c : cells) out << ' ' << c << " |";
  out << '\n';
}

void density_section(std::ostream& out, const std::string& title,
                     std::span<const DensityReport> rows) {
  out << "## " << title << "\n\n";
  table_header(out, {"Variant", "Unique 1-grams", "All 1-grams", "FD"});
  for (const auto& r : rows) {
    table_row(out, {std::string(variant_name(r.variant)), std::to_string(r.unique_1grams),
                    std::to_string(r.all_1grams), dp4(r.fd)});
  }
  out << '\n';
}

// Families as rows, variants as columns. With emphasis, the best family of
// each column is bold and the best variant of each row underlined (by F1).
void metric_grid(std::ostream& out, std::span<const GridEntry> grid, std::string_view pairing,
                 double Metrics::*field, bool emphasis) {
  const auto variants = grid_variants(grid);
  const auto families = grid_families(grid);
  std::vector<std::string> cols{"Classifier"};
  for (auto v : variants) cols.emplace_back(variant_name(v));
  table_header(out, cols);
  for (Family f : families) {
    std::optional<VariantId> row_best;
    const GridEntry* row_best_e = nullptr;
    for (auto v : variants) {
      const GridEntry* e = view_entry(grid, v, f, pairing);
      if (e && (!row_best_e || e->mean.f1 > row_best_e->mean.f1)) {
        row_best = v;
        row_best_e = e;
      }
    }
    std::vector<std::string> cells{std::string(family_name(f))};
    for (auto v : variants) {
      const GridEntry* e = view_entry(grid, v, f, pairing);
      if (!e) {
        cells.emplace_back("-");
        continue;
      }
      std::string s = dp3(e->mean.*field);
      if (emphasis) {
        if (winner(grid, v, pairing != "plain") == f) s = "**" + s + "**";
        if (row_best == v) s = "<u>" + s + "</u>";
      }
      cells.push_back(s);
    }
    table_row(out, cells);
  }
  out << '\n';
}

bool has_smote(std::span<const GridEntry> grid) {
  return std::any_of(grid.begin(), grid.end(), [](const GridEntry& e) { return e.smote; });
}

bool has_plain(std::span<const GridEntry> grid) {
  return std::any_of(grid.begin(), grid.end(), [](const GridEntry& e) { return !e.smote; });
}

}  // namespace

std::string render_markdown(const ExperimentReport& r) {
  std::ostringstream out;
  out << "# Feature density benchmark report\n\n";
  out << "## Provenance\n\n";
  table_header(out, {"Field", "Value"});
  table_row(out, {"seed", std::to_string(r.provenance.seed)});
  table_row(out, {"config hash", "`" + r.provenance.config_hash + "`"});
  table_row(out, {"version", r.provenance.version});
  table_row(out, {"folds", std::to_string(r.provenance.k)});
  table_row(out, {"smote", r.provenance.smote});
  out << '\n';

  if (r.corpus) {
    const auto& c = *r.corpus;
    out << "## Corpus\n\n";
    table_header(out, {"Statistic", "Value"});
    table_row(out, {"samples", std::to_string(c.n_samples)});
    table_row(out, {"harmful samples", std::to_string(c.n_harmful)});
    table_row(out, {"non-harmful samples", std::to_string(c.n_nonharmful)});
    table_row(out, {"tokens", std::to_string(c.n_tokens)});
    table_row(out, {"unique tokens", std::to_string(c.n_unique_tokens)});
    table_row(out, {"avg post length (words)", format_fixed(c.avg_post_words, 2)});
    table_row(out, {"avg post length (chars)", format_fixed(c.avg_post_chars, 2)});
    table_row(out, {"avg question length (words)", format_fixed(c.avg_question_words, 2)});
    table_row(out, {"avg answer length (words)", format_fixed(c.avg_answer_words, 2)});
    table_row(out, {"avg harmful post length (words)", format_fixed(c.avg_harmful_post_words, 2)});
    table_row(out, {"avg non-harmful post length (words)", format_fixed(c.avg_nonharmful_post_words, 2)});
    out << '\n';
  }

  if (!r.density.empty()) density_section(out, "Feature density", r.density);
  if (!r.density_stripped.empty()) {
    density_section(out, "Feature density without punctuation", r.density_stripped);
  }

  if (has_plain(r.grid)) {
    out << "## Macro F1 without SMOTE\n\n"
        << "Bold: best classifier for the variant. Underlined: best variant for the classifier.\n\n";
    metric_grid(out, r.grid, "plain", &Metrics::f1, true);
    out << "## Accuracy without SMOTE\n\n";
    metric_grid(out, r.grid, "plain", &Metrics::acc, false);
    out << "## Macro precision without SMOTE\n\n";
    metric_grid(out, r.grid, "plain", &Metrics::prec, false);
    out << "## Macro recall without SMOTE\n\n";
    metric_grid(out, r.grid, "plain", &Metrics::rec, false);
    out << "## AUC without SMOTE\n\n";
    metric_grid(out, r.grid, "plain", &Metrics::auc, false);
  }
  if (has_smote(r.grid)) {
    out << "## Macro F1 with SMOTE\n\n"
        << "Neural classifiers are not retrained with SMOTE; their rows repeat the plain runs.\n\n";
    metric_grid(out, r.grid, "mixed", &Metrics::f1, true);
  }

  if (!r.grid.empty()) {
    out << "## Best classifier per variant\n\n";
    std::vector<std::string> cols{"Variant"};
    if (has_plain(r.grid)) cols.emplace_back("Without SMOTE");
    if (has_smote(r.grid)) cols.emplace_back("With SMOTE");
    table_header(out, cols);
    for (auto v : grid_variants(r.grid)) {
      std::vector<std::string> cells{std::string(variant_name(v))};
      if (has_plain(r.grid)) {
        auto w = winner(r.grid, v, false);
        cells.emplace_back(w ? std::string(family_name(*w)) : "-");
      }
      if (has_smote(r.grid)) {
        auto w = winner(r.grid, v, true);
        cells.emplace_back(w ? std::string(family_name(*w)) : "-");
      }
      table_row(out, cells);
    }
    out << '\n';
  }

  out << "## Correlation of FD with macro F1\n\n"
      << "Pairings: plain uses runs without SMOTE; smote uses SMOTE runs (non-neural "
         "classifiers only); mixed uses SMOTE runs where they exist and plain runs otherwise.\n\n";
  if (r.correlations.empty()) {
    out << "No correlations: fewer than three variants or no complete classifier row.\n\n";
  } else {
    table_header(out, {"Pairing", "Classifier", "rho", "p (2-sided)", "n"});
    for (const auto& c : r.correlations) {
      table_row(out, {c.pairing, std::string(family_name(c.family)),
                      c.defined ? dp4(c.corr.rho) : "undefined",
                      c.defined ? dp4(c.corr.p_two_sided) : "undefined", std::to_string(c.corr.n)});
    }
    out << '\n';
  }

  out << "## t-tests between the top three classifiers\n\n";
  if (r.ttests.empty()) {
    out << "No t-tests: fewer than two ranked classifiers with complete rows.\n\n";
  } else {
    table_header(out, {"Pairing", "Mode", "Pair", "t", "df", "p (2-sided)"});
    for (const auto& t : r.ttests) {
      table_row(out, {t.pairing, mode_name(t.mode),
                      std::string(family_name(t.a)) + " & " + std::string(family_name(t.b)),
                      t.defined ? dp4(t.test.t) : "undefined", format_fixed(t.test.df, 0),
                      t.defined ? dp4(t.test.p_two_sided) : "undefined"});
    }
    out << '\n';
  }
  return out.str();
}

namespace {

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeError("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw RuntimeError("write failed for '" + path.string() + "'");
}

template <typename F>
std::string to_string_with(F&& fn) {
  std::ostringstream s;
  fn(s);
  return s.str();
}

std::vector<std::pair<std::string, std::string>> corpus_fields(const CorpusStats& c) {
  return {{"n_samples", std::to_string(c.n_samples)},
          {"n_harmful", std::to_string(c.n_harmful)},
          {"n_nonharmful", std::to_string(c.n_nonharmful)},
          {"n_tokens", std::to_string(c.n_tokens)},
          {"n_unique_tokens", std::to_string(c.n_unique_tokens)},
          {"avg_post_chars", fmt(c.avg_post_chars)},
          {"avg_post_words", fmt(c.avg_post_words)},
          {"avg_question_chars", fmt(c.avg_question_chars)},
          {"avg_question_words", fmt(c.avg_question_words)},
          {"avg_answer_chars", fmt(c.avg_answer_chars)},
          {"avg_answer_words", fmt(c.avg_answer_words)},
          {"avg_harmful_post_chars", fmt(c.avg_harmful_post_chars)},
          {"avg_harmful_post_words", fmt(c.avg_harmful_post_words)},
          {"avg_nonharmful_post_chars", fmt(c.avg_nonharmful_post_chars)},
          {"avg_nonharmful_post_words", fmt(c.avg_nonharmful_post_words)}};
}

std::map<std::string, std::string> read_key_values(const fs::path& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw DataError(std::string("cannot read ") + what + " '" + path.string() + "'");
  csv::Reader r(in);
  expect_header(r, {"key", "value"}, what);
  std::map<std::string, std::string> kv;
  for_records(r, 2, what, [&](const Row& x) { kv[x[0]] = x[1]; });
  return kv;
}

std::ifstream open_or_throw(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read '" + path.string() + "'");
  return in;
}

}  // namespace

void write_corpus_csv(std::ostream& out, const CorpusStats& stats) {
  csv::write_row(out, {"key", "value"});
  for (const auto& [k, v] : corpus_fields(stats)) csv::write_row(out, {k, v});
}

void render_report(const ExperimentReport& r, const fs::path& dir, ReportFormat format) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw RuntimeError("cannot create output directory '" + dir.string() + "'");
  }
  if (format != ReportFormat::kMarkdown) {
    write_file(dir / "provenance.csv", to_string_with([&](std::ostream& o) {
                 csv::write_row(o, {"key", "value"});
                 csv::write_row(o, {"seed", std::to_string(r.provenance.seed)});
                 csv::write_row(o, {"config_hash", r.provenance.config_hash});
                 csv::write_row(o, {"version", r.provenance.version});
                 csv::write_row(o, {"k", std::to_string(r.provenance.k)});
                 csv::write_row(o, {"smote", r.provenance.smote});
               }));
    if (r.corpus) {
      write_file(dir / "corpus.csv",
                 to_string_with([&](std::ostream& o) { write_corpus_csv(o, *r.corpus); }));
    }
    write_file(dir / "density.csv",
               to_string_with([&](std::ostream& o) { write_density_csv(o, r.density); }));
    write_file(dir / "density_nopunct.csv",
               to_string_with([&](std::ostream& o) { write_density_csv(o, r.density_stripped); }));
    write_file(dir / "folds.csv", to_string_with([&](std::ostream& o) { write_cells_csv(o, r.cells); }));
    write_file(dir / "metrics.csv", to_string_with([&](std::ostream& o) { write_grid_csv(o, r.grid); }));
    write_file(dir / "smote_f1.csv", to_string_with([&](std::ostream& o) {
                 csv::write_row(o, {"variant", "family", "f1", "source"});
                 for (auto v : grid_variants(r.grid)) {
                   for (Family f : grid_families(r.grid)) {
                     const GridEntry* e = view_entry(r.grid, v, f, "mixed");
                     if (!e) continue;
                     csv::write_row(o, {std::string(variant_name(v)), std::string(family_name(f)),
                                        fmt(e->mean.f1), e->smote ? "smote" : "plain"});
                   }
                 }
               }));
    write_file(dir / "correlations.csv",
               to_string_with([&](std::ostream& o) { write_correlations_csv(o, r.correlations); }));
    write_file(dir / "ttests.csv", to_string_with([&](std::ostream& o) { write_ttests_csv(o, r.ttests); }));
  }
  if (format != ReportFormat::kCsv) write_file(dir / "report.md", render_markdown(r));
}

ExperimentReport read_report_csv(const fs::path& dir) {
  ExperimentReport r;
  auto prov = read_key_values(dir / "provenance.csv", "provenance CSV");
  try {
    r.provenance.seed = csv::parse_u64(prov.at("seed"));
    r.provenance.config_hash = prov.at("config_hash");
    r.provenance.version = prov.at("version");
    r.provenance.k = csv::parse_u64(prov.at("k"));
    r.provenance.smote = prov.at("smote");
  } catch (const std::out_of_range&) {
    throw DataError("provenance CSV: missing field");
  }
  if (fs::exists(dir / "corpus.csv")) {
    auto kv = read_key_values(dir / "corpus.csv", "corpus CSV");
    CorpusStats c;
    auto u = [&](const char* k) { return csv::parse_u64(kv.at(k)); };
    auto d = [&](const char* k) { return csv::parse_double(kv.at(k)); };
    try {
      c = {u("n_samples"), u("n_harmful"), u("n_nonharmful"), u("n_tokens"), u("n_unique_tokens"),
           d("avg_post_chars"), d("avg_post_words"), d("avg_question_chars"),
           d("avg_question_words"), d("avg_answer_chars"), d("avg_answer_words"),
           d("avg_harmful_post_chars"), d("avg_harmful_post_words"),
           d("avg_nonharmful_post_chars"), d("avg_nonharmful_post_words")};
    } catch (const std::out_of_range&) {
      throw DataError("corpus CSV: missing field");
    }
    r.corpus = c;
  }
  {
    auto in = open_or_throw(dir / "density.csv");
    r.density = read_density_csv(in);
  }
  {
    auto in = open_or_throw(dir / "density_nopunct.csv");
    r.density_stripped = read_density_csv(in);
  }
  {
    auto in = open_or_throw(dir / "folds.csv");
    r.cells = read_cells_csv(in);
  }
  {
    auto in = open_or_throw(dir / "metrics.csv");
    r.grid = read_grid_csv(in);
  }
  {
    auto in = open_or_throw(dir / "correlations.csv");
    r.correlations = read_correlations_csv(in);
  }
  {
    auto in = open_or_throw(dir / "ttests.csv");
    r.ttests = read_ttests_csv(in);
  }
  return r;
}

}  // namespace fdbench
