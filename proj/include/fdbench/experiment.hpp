#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fdbench/corpus.hpp"
#include "fdbench/density.hpp"
#include "fdbench/evaluate.hpp"
#include "fdbench/learn.hpp"
#include "fdbench/variants.hpp"

namespace fdbench {

enum class SmoteMode { kOff, kOn, kBoth };
enum class ReportFormat { kCsv, kMarkdown, kBoth };

std::string_view smote_mode_name(SmoteMode m);
std::string_view report_format_name(ReportFormat f);

struct ClassifierConfig {
  Family family = Family::kLR;
  Hyperparams params;

  bool operator==(const ClassifierConfig&) const = default;
};

/// Column order of the published metric tables.
inline constexpr std::array<VariantId, 11> kReportVariantOrder = {
    VariantId::kTok,    VariantId::kLem,    VariantId::kLemNer, VariantId::kPos,
    VariantId::kTokNer, VariantId::kTokPos, VariantId::kLemPos, VariantId::kChnk,
    VariantId::kChnkNer, VariantId::kDep,   VariantId::kDepNer,
};

struct ExperimentConfig {
  std::filesystem::path samples;
  std::filesystem::path annotations;
  std::vector<VariantId> variants{kAllVariants.begin(), kAllVariants.end()};
  std::vector<ClassifierConfig> classifiers;  // empty after parsing means "all, defaults"
  std::size_t k = 5;
  std::uint64_t seed = 0;
  SmoteMode smote = SmoteMode::kBoth;
  std::size_t smote_k = 5;
  std::size_t min_df = 1;
  bool fold_case = false;
  std::filesystem::path out = "out";
  std::size_t jobs = 1;
  ReportFormat format = ReportFormat::kBoth;

  /// Parses a config object. Relative paths resolve against base_dir.
  /// Unknown keys, unknown names and wrong types throw ConfigError.
  static ExperimentConfig from_json(std::string_view text, const std::filesystem::path& base_dir);
  static ExperimentConfig load(const std::filesystem::path& path);

  /// Applies flag-style overrides; accepts the same keys as the config file,
  /// plus comma-separated strings for "variants" and "classifiers".
  /// Classifiers named here keep the hyperparameters the config gave them.
  void apply_overrides(std::string_view json_object, const std::filesystem::path& base_dir);

  /// Throws ConfigError: k < 2, no variants, no classifiers, jobs < 1,
  /// duplicate variants or families, invalid hyperparameters.
  void validate() const;
  /// validate() plus existence of the corpus files.
  void validate_paths() const;

  /// Canonical JSON of every field.
  std::string to_json() const;

  /// SHA-256 (hex) over the fields that change results: corpus file
  /// contents, the variant set, classifiers with hyperparameters, k, seed,
  /// SMOTE mode and k, min_df and fold_case. Output location, job count,
  /// report format and the order of list entries do not enter it.
  std::string hash() const;
};

/// One trained-and-scored fold; the persisted unit of work.
struct CellResult {
  VariantId variant = VariantId::kTok;
  Family family = Family::kLR;
  std::size_t fold = 0;
  Metrics metrics;
  bool smote = false;
  std::uint64_t seed = 0;

  bool operator==(const CellResult&) const = default;
};

inline constexpr std::string_view kCellCsvHeader = "variant,family,fold,acc,prec,rec,f1,auc,smote,seed";

void write_cells_csv(std::ostream& out, std::span<const CellResult> cells);
std::vector<CellResult> read_cells_csv(std::istream& in);

/// Mean over the folds of one (variant, family, smote) cell.
struct GridEntry {
  VariantId variant = VariantId::kTok;
  Family family = Family::kLR;
  bool smote = false;
  Metrics mean;

  bool operator==(const GridEntry&) const = default;
};

void write_grid_csv(std::ostream& out, std::span<const GridEntry> grid);
std::vector<GridEntry> read_grid_csv(std::istream& in);

/// Which F1 values a correlation row pairs with FD: "plain" uses runs without
/// SMOTE for every family; "smote" uses SMOTE runs (non-neural families
/// only); "mixed" uses SMOTE runs where they exist and plain runs otherwise.
struct CorrelationRow {
  std::string pairing;
  Family family = Family::kLR;
  Correlation corr;
  bool defined = true;  // false when the F1 or FD vector is constant or too short

  bool operator==(const CorrelationRow&) const = default;
};

struct TTestRow {
  std::string pairing;  // "plain" or "mixed"
  TTestMode mode = TTestMode::kPaired;
  Family a = Family::kLR;
  Family b = Family::kLR;
  TTest test;
  bool defined = true;

  bool operator==(const TTestRow&) const = default;
};

void write_correlations_csv(std::ostream& out, std::span<const CorrelationRow> rows);
std::vector<CorrelationRow> read_correlations_csv(std::istream& in);
void write_ttests_csv(std::ostream& out, std::span<const TTestRow> rows);
std::vector<TTestRow> read_ttests_csv(std::istream& in);

/// The F1 of every family over the given variants, in variant order;
/// nullopt when a needed entry is missing.
std::optional<std::vector<double>> f1_vector(std::span<const GridEntry> grid, Family family,
                                             std::span<const VariantId> variants,
                                             std::string_view pairing);

/// FD-vs-F1 Pearson rows for each family and pairing.
std::vector<CorrelationRow> correlate(std::span<const DensityReport> density,
                                      std::span<const GridEntry> grid);

/// Families ranked by mean F1 over variants (plain pairing), best first;
/// ties go to higher mean AUC, then name.
std::vector<Family> rank_families(std::span<const GridEntry> grid);

/// Pairwise paired and two-sample t-tests between the top three families,
/// on both the plain and the mixed F1 vectors.
std::vector<TTestRow> top3_ttests(std::span<const GridEntry> grid,
                                  std::span<const VariantId> variants);

/// Best family for one variant column: highest F1, then AUC, then name.
std::optional<Family> winner(std::span<const GridEntry> grid, VariantId variant, bool smote);

struct Provenance {
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string version;
  std::size_t k = 5;
  std::string smote;
};

struct ExperimentReport {
  Provenance provenance;
  std::optional<CorpusStats> corpus;
  std::vector<DensityReport> density;           // FD descending
  std::vector<DensityReport> density_stripped;  // punctuation removed
  std::vector<CellResult> cells;                // fold-level rows
  std::vector<GridEntry> grid;
  std::vector<CorrelationRow> correlations;
  std::vector<TTestRow> ttests;
};

/// `key,value` rows of the corpus statistics (corpus.csv).
void write_corpus_csv(std::ostream& out, const CorpusStats& stats);

/// Writes density.csv, density_nopunct.csv, folds.csv, metrics.csv,
/// smote_f1.csv, correlations.csv, ttests.csv (csv) and report.md
/// (markdown). Throws RuntimeError when the directory is not writable.
void render_report(const ExperimentReport& report, const std::filesystem::path& dir,
                   ReportFormat format);
std::string render_markdown(const ExperimentReport& report);

/// Re-reads the CSV side of a rendered report.
ExperimentReport read_report_csv(const std::filesystem::path& dir);

struct CorpusData {
  std::vector<AnnotatedSample> corpus;
  std::vector<std::string> missing_ids;
  CorpusStats stats;
};

/// Loads samples and annotations; samples without annotations are dropped
/// (and listed). Throws DataError when nothing is left.
CorpusData ingest(const ExperimentConfig& config);

struct RunSummary {
  std::size_t cells_total = 0;
  std::size_t cells_trained = 0;
  std::size_t cells_reused = 0;
};

using ProgressFn = std::function<void(const CellResult&, bool reused)>;

/// The whole pipeline: ingest, variants, density, the cross-validated grid
/// (resuming from per-fold CSVs under out/cells/<hash>/), statistics, and
/// report rendering into config.out.
ExperimentReport run_experiment(const ExperimentConfig& config, RunSummary* summary = nullptr,
                                const ProgressFn& progress = {});

/// Seed of the models of one (variant, family) cell.
std::uint64_t cell_seed(std::uint64_t seed, VariantId variant, Family family);

}  // namespace fdbench
