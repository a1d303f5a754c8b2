#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "fdbench/error.hpp"
#include "fdbench/vectorize.hpp"
#include "fixtures.hpp"

using namespace fdbench;

namespace {

FeatureSequence seq(std::vector<std::string> f) {
  FeatureSequence s;
  s.variant = VariantId::kTok;
  s.from_punct.assign(f.size(), false);
  s.features = std::move(f);
  return s;
}

std::vector<FeatureSequence> random_docs(Rng& rng, std::size_t n) {
  std::vector<FeatureSequence> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::string> f;
    const std::size_t len = rng.below(10);
    for (std::size_t k = 0; k < len; ++k) f.push_back("f" + std::to_string(rng.below(30)));
    out.push_back(seq(f));
  }
  return out;
}

}  // namespace

TEST(Vocabulary, LexicographicIndicesAndDocFreq) {
  std::vector<FeatureSequence> docs{seq({"b", "a", "a"}), seq({"c", "a"})};
  auto v = Vocabulary::build(docs);
  ASSERT_EQ(v.size(), 3u);
  EXPECT_EQ(v.term(0), "a");
  EXPECT_EQ(v.term(2), "c");
  EXPECT_EQ(v.doc_freq(0), 2u);
  EXPECT_EQ(v.doc_freq(1), 1u);
  EXPECT_EQ(v.n_documents(), 2u);
  EXPECT_EQ(v.index_of("c"), 2u);
  EXPECT_FALSE(v.index_of("zz"));
  EXPECT_DOUBLE_EQ(v.idf(1), std::log(2.0));
}

TEST(Vocabulary, MinDfAndEmptyInput) {
  std::vector<FeatureSequence> docs{seq({"b", "a"}), seq({"a"})};
  EXPECT_EQ(Vocabulary::build(docs, 2).size(), 1u);
  EXPECT_THROW(Vocabulary::build(std::span<const FeatureSequence>{}), InvalidArgument);
}

TEST(Vocabulary, JsonRoundTripAndValidation) {
  Rng rng(1);
  auto v = Vocabulary::build(random_docs(rng, 30));
  EXPECT_EQ(Vocabulary::from_json(v.to_json()), v);
  EXPECT_THROW(Vocabulary::from_json("{}"), DataError);
  EXPECT_THROW(Vocabulary::from_json(R"({"format":"fdbench-vocabulary","version":1,"n_documents":1,"terms":["b","a"],"doc_freq":[1,1]})"),
               DataError);
  EXPECT_THROW(Vocabulary::from_json(R"({"format":"fdbench-vocabulary","version":1,"n_documents":1,"terms":["a"],"doc_freq":[2]})"),
               DataError);
}

TEST(Tfidf, MatchesDirectFormula) {
  Rng rng(2);
  auto train = random_docs(rng, 40);
  auto test = random_docs(rng, 10);
  auto v = Vocabulary::build(train);
  for (const auto* docs : {&train, &test}) {
    auto m = tfidf(*docs, v);
    ASSERT_EQ(m.rows(), docs->size());
    for (std::size_t r = 0; r < docs->size(); ++r) {
      std::map<std::string, int> tf;
      for (const auto& f : (*docs)[r].features) ++tf[f];
      std::vector<double> expect(v.size(), 0.0);
      for (const auto& [f, c] : tf) {
        auto i = v.index_of(f);
        if (!i) continue;
        const double df = static_cast<double>(v.doc_freq(*i));
        expect[*i] = c * std::log(static_cast<double>(train.size()) / df);
      }
      EXPECT_EQ(m.dense_row(r), expect);
      auto row = m.row(r);
      for (std::size_t k = 0; k < row.cols.size(); ++k) {
        EXPECT_NE(row.values[k], 0.0);
        if (k) EXPECT_LT(row.cols[k - 1], row.cols[k]);
      }
    }
  }
}

TEST(Tfidf, L2Normalisation) {
  std::vector<FeatureSequence> docs{seq({"a", "b", "b"}), seq({"c"}), seq({"a"})};
  auto v = Vocabulary::build(docs);
  auto m = tfidf(docs, v, {.l2_normalize = true});
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double ss = 0;
    for (double x : m.row(r).values) ss += x * x;
    EXPECT_NEAR(ss, 1.0, 1e-12);
  }
}

TEST(SparseMatrix, AppendAndSelect) {
  SparseMatrix m;
  m.n_cols = 5;
  m.append_row({{3, 1.0}, {0, 2.0}, {3, 0.5}, {4, 0.0}});
  m.append_dense_row(std::vector<double>{0, 0, 7, 0, 0});
  EXPECT_EQ(m.dense_row(0), (std::vector<double>{2, 0, 0, 1.5, 0}));
  EXPECT_EQ(m.nnz(), 3u);
  std::vector<std::size_t> pick{1, 0, 1};
  auto s = m.select_rows(pick);
  EXPECT_EQ(s.rows(), 3u);
  EXPECT_EQ(s.dense_row(0), m.dense_row(1));
  EXPECT_EQ(s.dense_row(1), m.dense_row(0));
}

TEST(IndexSequence, PadUnknownAndTruncate) {
  std::vector<FeatureSequence> docs{seq({"a", "b"})};
  auto v = Vocabulary::build(docs);
  EXPECT_EQ(encode_indices(seq({"b", "zz", "a"}), v, 5), (IndexSequence{3, 1, 2, 0, 0}));
  EXPECT_EQ(encode_indices(seq({"b", "zz", "a"}), v, 2), (IndexSequence{3, 1}));
  EXPECT_THROW(encode_indices(seq({"a"}), v, 0), InvalidArgument);
  std::vector<FeatureSequence> batch_docs{seq({"a"}), seq({"b", "a"})};
  auto b = encode_batch(batch_docs, v, 3);
  EXPECT_EQ(b.rows(), 2u);
  EXPECT_EQ(b.vocab_size, 4u);
  for (auto id : b.ids) EXPECT_LT(static_cast<std::size_t>(id), b.vocab_size);
}

TEST(MatrixCache, RoundTrip) {
  Rng rng(3);
  auto docs = random_docs(rng, 25);
  auto v = Vocabulary::build(docs);
  auto m = tfidf(docs, v);
  auto dir = fdbench::testing::temp_dir("cache");
  write_matrix_cache(dir / "m.bin", m, v);
  auto [m2, v2] = read_matrix_cache(dir / "m.bin");
  EXPECT_EQ(m2, m);
  EXPECT_EQ(v2, v);
  EXPECT_TRUE(std::filesystem::exists(dir / "m.bin.vocab.json"));
  {
    std::ofstream bad(dir / "bad.bin", std::ios::binary);
    bad << "NOTACACHE";
  }
  EXPECT_THROW(read_matrix_cache(dir / "bad.bin"), DataError);
  // Little-endian header: rows field starts at byte 8.
  std::ifstream in(dir / "m.bin", std::ios::binary);
  unsigned char hdr[16];
  in.read(reinterpret_cast<char*>(hdr), 16);
  EXPECT_EQ(hdr[8], 25);
  EXPECT_EQ(hdr[9], 0);
}
