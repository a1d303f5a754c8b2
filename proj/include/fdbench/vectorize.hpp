#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fdbench/variants.hpp"

namespace fdbench {

/// Feature index fitted on training documents. Indices follow lexicographic
/// (byte-wise) order of the features, so identical inputs give identical ids.
class Vocabulary {
 public:
  Vocabulary() = default;

  /// Keeps features whose document frequency is at least min_df.
  static Vocabulary build(std::span<const FeatureSequence> train, std::size_t min_df = 1);

  std::size_t size() const { return terms_.size(); }
  std::size_t n_documents() const { return n_documents_; }
  const std::string& term(std::size_t i) const { return terms_[i]; }
  std::size_t doc_freq(std::size_t i) const { return doc_freq_[i]; }
  std::optional<std::size_t> index_of(std::string_view feature) const;

  /// ln(|D| / n_t)
  double idf(std::size_t i) const;

  std::string to_json() const;
  static Vocabulary from_json(std::string_view text);

  bool operator==(const Vocabulary& o) const {
    return terms_ == o.terms_ && doc_freq_ == o.doc_freq_ && n_documents_ == o.n_documents_;
  }

 private:
  void reindex();

  std::vector<std::string> terms_;
  std::vector<std::size_t> doc_freq_;
  std::size_t n_documents_ = 0;
  std::unordered_map<std::string, std::size_t> index_;
};

struct SparseRow {
  std::span<const std::uint32_t> cols;
  std::span<const double> values;
};

/// Compressed sparse rows; column indices strictly increase within a row and
/// no explicit zeros are stored.
struct SparseMatrix {
  std::size_t n_cols = 0;
  std::vector<std::size_t> row_ptr{0};
  std::vector<std::uint32_t> cols;
  std::vector<double> values;

  std::size_t rows() const { return row_ptr.size() - 1; }
  std::size_t nnz() const { return values.size(); }
  SparseRow row(std::size_t r) const;

  /// Appends a row given (col, value) pairs in any order; zeros are dropped and
  /// duplicate columns summed.
  void append_row(std::vector<std::pair<std::uint32_t, double>> entries);
  void append_dense_row(std::span<const double> dense);

  std::vector<double> dense_row(std::size_t r) const;
  SparseMatrix select_rows(std::span<const std::size_t> rows) const;

  bool operator==(const SparseMatrix&) const = default;
};

struct TfidfOptions {
  bool l2_normalize = false;
};

/// weight(d, t) = tf(t, d) * ln(|D| / n_t) with raw counts for tf. Features
/// outside the vocabulary are dropped; zero weights are not stored.
SparseMatrix tfidf(std::span<const FeatureSequence> docs, const Vocabulary& vocab,
                   const TfidfOptions& options = {});

/// Fixed-length id sequence for embedding input: 0 pads, 1 is unknown, and
/// vocabulary index i maps to i + 2.
using IndexSequence = std::vector<std::int32_t>;

inline constexpr std::int32_t kPadId = 0;
inline constexpr std::int32_t kUnknownId = 1;

IndexSequence encode_indices(const FeatureSequence& seq, const Vocabulary& vocab,
                             std::size_t max_len);

/// Row-major batch of IndexSequences; ids are < vocab_size (= |V| + 2).
struct IndexBatch {
  std::size_t max_len = 0;
  std::size_t vocab_size = 2;
  std::vector<std::int32_t> ids;

  std::size_t rows() const { return max_len ? ids.size() / max_len : 0; }
  std::span<const std::int32_t> row(std::size_t r) const {
    return {ids.data() + r * max_len, max_len};
  }
  void append(const IndexSequence& seq);
  IndexBatch select_rows(std::span<const std::size_t> rows) const;
};

IndexBatch encode_batch(std::span<const FeatureSequence> docs, const Vocabulary& vocab,
                        std::size_t max_len);

/// Binary CSR cache, little-endian:
///   magic "FDBCSR01", u64 rows, u64 cols, u64 nnz,
///   u64 row_ptr[rows + 1], u32 cols[nnz], f64 values[nnz]
/// The vocabulary goes to a JSON sidecar at `<path>.vocab.json`.
void write_matrix_cache(const std::filesystem::path& path, const SparseMatrix& m,
                        const Vocabulary& vocab);
std::pair<SparseMatrix, Vocabulary> read_matrix_cache(const std::filesystem::path& path);

}  // namespace fdbench
