#include "fdbench/vectorize.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <type_traits>
#include <unordered_set>

#include "fdbench/error.hpp"
#include "json.hpp"

namespace fdbench {

using nlohmann::json;

Vocabulary Vocabulary::build(std::span<const FeatureSequence> train, std::size_t min_df) {
  if (train.empty()) throw InvalidArgument("build_vocab: no training documents");
  if (min_df < 1) min_df = 1;
  std::map<std::string, std::size_t> df;
  std::unordered_set<std::string_view> seen;
  for (const FeatureSequence& doc : train) {
    seen.clear();
    for (const std::string& f : doc.features) {
      if (seen.insert(f).second) ++df[f];
    }
  }
  Vocabulary v;
  v.n_documents_ = train.size();
  for (auto& [term, n] : df) {
    if (n < min_df) continue;
    v.terms_.push_back(term);
    v.doc_freq_.push_back(n);
  }
  v.reindex();
  return v;
}

void Vocabulary::reindex() {
  index_.clear();
  index_.reserve(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) index_.emplace(terms_[i], i);
}

std::optional<std::size_t> Vocabulary::index_of(std::string_view feature) const {
  auto it = index_.find(std::string(feature));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

double Vocabulary::idf(std::size_t i) const {
  return std::log(static_cast<double>(n_documents_) / static_cast<double>(doc_freq_[i]));
}

std::string Vocabulary::to_json() const {
  json j;
  j["format"] = "fdbench-vocabulary";
  j["version"] = 1;
  j["n_documents"] = n_documents_;
  j["terms"] = terms_;
  j["doc_freq"] = doc_freq_;
  return j.dump();
}

Vocabulary Vocabulary::from_json(std::string_view text) {
  Vocabulary v;
  try {
    json j = json::parse(text);
    if (j.at("format") != "fdbench-vocabulary") throw DataError("not a vocabulary file");
    v.n_documents_ = j.at("n_documents").get<std::size_t>();
    v.terms_ = j.at("terms").get<std::vector<std::string>>();
    v.doc_freq_ = j.at("doc_freq").get<std::vector<std::size_t>>();
  } catch (const json::exception& e) {
    throw DataError(std::string("vocabulary JSON: ") + e.what());
  }
  if (v.terms_.size() != v.doc_freq_.size()) {
    throw DataError("vocabulary JSON: terms and doc_freq differ in length");
  }
  for (std::size_t n : v.doc_freq_) {
    if (n < 1 || n > v.n_documents_) throw DataError("vocabulary JSON: doc_freq out of range");
  }
  if (!std::is_sorted(v.terms_.begin(), v.terms_.end()) ||
      std::adjacent_find(v.terms_.begin(), v.terms_.end()) != v.terms_.end()) {
    throw DataError("vocabulary JSON: terms must be strictly increasing");
  }
  v.reindex();
  return v;
}

// ---------------------------------------------------------------------------

SparseRow SparseMatrix::row(std::size_t r) const {
  const std::size_t b = row_ptr[r], e = row_ptr[r + 1];
  return {std::span<const std::uint32_t>(cols.data() + b, e - b),
          std::span<const double>(values.data() + b, e - b)};
}

void SparseMatrix::append_row(std::vector<std::pair<std::uint32_t, double>> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::size_t i = 0;
  while (i < entries.size()) {
    std::uint32_t c = entries[i].first;
    double v = 0;
    for (; i < entries.size() && entries[i].first == c; ++i) v += entries[i].second;
    if (c >= n_cols) throw InvalidArgument("append_row: column out of range");
    if (v != 0.0) {
      cols.push_back(c);
      values.push_back(v);
    }
  }
  row_ptr.push_back(values.size());
}

void SparseMatrix::append_dense_row(std::span<const double> dense) {
  if (dense.size() != n_cols) throw InvalidArgument("append_dense_row: width mismatch");
  for (std::size_t c = 0; c < dense.size(); ++c) {
    if (dense[c] != 0.0) {
      cols.push_back(static_cast<std::uint32_t>(c));
      values.push_back(dense[c]);
    }
  }
  row_ptr.push_back(values.size());
}

std::vector<double> SparseMatrix::dense_row(std::size_t r) const {
  std::vector<double> out(n_cols, 0.0);
  SparseRow row_view = row(r);
  for (std::size_t k = 0; k < row_view.cols.size(); ++k) out[row_view.cols[k]] = row_view.values[k];
  return out;
}

SparseMatrix SparseMatrix::select_rows(std::span<const std::size_t> rows) const {
  SparseMatrix out;
  out.n_cols = n_cols;
  for (std::size_t r : rows) {
    SparseRow v = row(r);
    out.cols.insert(out.cols.end(), v.cols.begin(), v.cols.end());
    out.values.insert(out.values.end(), v.values.begin(), v.values.end());
    out.row_ptr.push_back(out.values.size());
  }
  return out;
}

SparseMatrix tfidf(std::span<const FeatureSequence> docs, const Vocabulary& vocab,
                   const TfidfOptions& options) {
  SparseMatrix m;
  m.n_cols = vocab.size();
  std::map<std::size_t, std::size_t> tf;
  for (const FeatureSequence& doc : docs) {
    tf.clear();
    for (const std::string& f : doc.features) {
      if (auto idx = vocab.index_of(f)) ++tf[*idx];
    }
    const std::size_t start = m.values.size();
    for (const auto& [idx, count] : tf) {
      const double w = static_cast<double>(count) * vocab.idf(idx);
      if (w == 0.0) continue;
      m.cols.push_back(static_cast<std::uint32_t>(idx));
      m.values.push_back(w);
    }
    if (options.l2_normalize) {
      double ss = 0;
      for (std::size_t k = start; k < m.values.size(); ++k) ss += m.values[k] * m.values[k];
      if (ss > 0) {
        const double inv = 1.0 / std::sqrt(ss);
        for (std::size_t k = start; k < m.values.size(); ++k) m.values[k] *= inv;
      }
    }
    m.row_ptr.push_back(m.values.size());
  }
  return m;
}

IndexSequence encode_indices(const FeatureSequence& seq, const Vocabulary& vocab,
                             std::size_t max_len) {
  if (max_len < 1) throw InvalidArgument("encode_indices: max_len must be >= 1");
  IndexSequence out(max_len, kPadId);
  const std::size_t n = std::min(max_len, seq.features.size());
  for (std::size_t i = 0; i < n; ++i) {
    auto idx = vocab.index_of(seq.features[i]);
    out[i] = idx ? static_cast<std::int32_t>(*idx + 2) : kUnknownId;
  }
  return out;
}

void IndexBatch::append(const IndexSequence& seq) {
  if (seq.size() != max_len) throw InvalidArgument("IndexBatch: sequence length mismatch");
  ids.insert(ids.end(), seq.begin(), seq.end());
}

IndexBatch IndexBatch::select_rows(std::span<const std::size_t> rows) const {
  IndexBatch out;
  out.max_len = max_len;
  out.vocab_size = vocab_size;
  out.ids.reserve(rows.size() * max_len);
  for (std::size_t r : rows) {
    auto v = row(r);
    out.ids.insert(out.ids.end(), v.begin(), v.end());
  }
  return out;
}

IndexBatch encode_batch(std::span<const FeatureSequence> docs, const Vocabulary& vocab,
                        std::size_t max_len) {
  IndexBatch b;
  b.max_len = max_len;
  b.vocab_size = vocab.size() + 2;
  b.ids.reserve(docs.size() * max_len);
  for (const FeatureSequence& d : docs) b.append(encode_indices(d, vocab, max_len));
  return b;
}

// ---------------------------------------------------------------------------
// Matrix cache

namespace {

constexpr char kMagic[8] = {'F', 'D', 'B', 'C', 'S', 'R', '0', '1'};

template <typename T>
void put_le(std::ostream& out, T v) {
  unsigned char buf[sizeof(T)];
  std::uint64_t bits = 0;
  if constexpr (std::is_same_v<T, double>) {
    std::memcpy(&bits, &v, sizeof v);
  } else {
    bits = static_cast<std::uint64_t>(v);
  }
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), sizeof buf);
}

template <typename T>
T get_le(std::istream& in) {
  unsigned char buf[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof buf)) {
    throw DataError("matrix cache: truncated file");
  }
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  if constexpr (std::is_same_v<T, double>) {
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
  } else {
    return static_cast<T>(bits);
  }
}

std::filesystem::path sidecar(const std::filesystem::path& p) {
  return std::filesystem::path(p.string() + ".vocab.json");
}

}  // namespace

void write_matrix_cache(const std::filesystem::path& path, const SparseMatrix& m,
                        const Vocabulary& vocab) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeError("cannot write '" + path.string() + "'");
  out.write(kMagic, sizeof kMagic);
  put_le<std::uint64_t>(out, m.rows());
  put_le<std::uint64_t>(out, m.n_cols);
  put_le<std::uint64_t>(out, m.nnz());
  for (std::size_t p : m.row_ptr) put_le<std::uint64_t>(out, p);
  for (std::uint32_t c : m.cols) put_le<std::uint32_t>(out, c);
  for (double v : m.values) put_le<double>(out, v);
  std::ofstream side(sidecar(path), std::ios::binary);
  if (!side) throw RuntimeError("cannot write '" + sidecar(path).string() + "'");
  side << vocab.to_json() << '\n';
  if (!out || !side) throw RuntimeError("write failed for matrix cache '" + path.string() + "'");
}

std::pair<SparseMatrix, Vocabulary> read_matrix_cache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw DataError("'" + path.string() + "' is not a matrix cache");
  }
  SparseMatrix m;
  const auto rows = get_le<std::uint64_t>(in);
  m.n_cols = get_le<std::uint64_t>(in);
  const auto nnz = get_le<std::uint64_t>(in);
  m.row_ptr.resize(rows + 1);
  for (auto& p : m.row_ptr) p = get_le<std::uint64_t>(in);
  m.cols.resize(nnz);
  for (auto& c : m.cols) c = get_le<std::uint32_t>(in);
  m.values.resize(nnz);
  for (auto& v : m.values) v = get_le<double>(in);
  if (m.row_ptr.front() != 0 || m.row_ptr.back() != nnz ||
      !std::is_sorted(m.row_ptr.begin(), m.row_ptr.end())) {
    throw DataError("matrix cache: inconsistent row offsets");
  }
  std::ifstream side(sidecar(path), std::ios::binary);
  if (!side) throw DataError("cannot open '" + sidecar(path).string() + "'");
  std::string text((std::istreambuf_iterator<char>(side)), std::istreambuf_iterator<char>());
  Vocabulary vocab = Vocabulary::from_json(text);
  if (vocab.size() != m.n_cols) throw DataError("matrix cache: vocabulary size mismatch");
  return {std::move(m), std::move(vocab)};
}

}  // namespace fdbench
