#include <gtest/gtest.h>

#include <map>
#include <set>
#include <sstream>

#include "fdbench/density.hpp"
#include "fdbench/error.hpp"
#include "fixtures.hpp"

using namespace fdbench;
using fdbench::testing::random_corpus;

namespace {

FeatureSequence seq(std::vector<std::string> f) {
  FeatureSequence s;
  s.variant = VariantId::kTok;
  s.from_punct.assign(f.size(), false);
  s.features = std::move(f);
  return s;
}

}  // namespace

TEST(FeatureDensity, PublishedRows) {
  EXPECT_EQ(format_fixed(make_density(VariantId::kTok, 25785, 367139).fd, 4), "0.0702");
  EXPECT_EQ(format_fixed(make_density(VariantId::kPos, 19, 357604).fd, 4), "0.0001");
}

TEST(FeatureDensity, AllDistinctIsOne) {
  std::vector<FeatureSequence> c{seq({"a", "b"}), seq({"c"})};
  EXPECT_DOUBLE_EQ(feature_density(c).fd, 1.0);
}

TEST(FeatureDensity, CountsMultiset) {
  std::vector<FeatureSequence> c{seq({"a", "b", "a"}), seq({}), seq({"b", "c"})};
  auto r = feature_density(c);
  EXPECT_EQ(r.unique_1grams, 3u);
  EXPECT_EQ(r.all_1grams, 5u);
  EXPECT_DOUBLE_EQ(r.fd, 0.6);
}

TEST(FeatureDensity, EmptyIsError) {
  std::vector<FeatureSequence> c{seq({}), seq({})};
  EXPECT_THROW(feature_density(c), DataError);
  EXPECT_THROW(feature_density(std::span<const FeatureSequence>{}), DataError);
  EXPECT_THROW(make_density(VariantId::kTok, 5, 4), DataError);
}

TEST(FeatureDensity, Properties) {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    auto corpus = random_corpus(rng, 1 + rng.below(20));
    auto seqs = derive_corpus(corpus, VariantId::kTok);
    const auto base = feature_density(seqs);
    EXPECT_GT(base.fd, 0.0);
    EXPECT_LE(base.fd, 1.0);

    // Permuting samples and features within samples.
    auto shuffled = seqs;
    rng.shuffle(shuffled);
    for (auto& s : shuffled) rng.shuffle(s.features);
    EXPECT_EQ(feature_density(shuffled), base);

    // Doubling the corpus.
    auto doubled = seqs;
    doubled.insert(doubled.end(), seqs.begin(), seqs.end());
    const auto d = feature_density(doubled);
    EXPECT_EQ(d.unique_1grams, base.unique_1grams);
    EXPECT_EQ(d.all_1grams, 2 * base.all_1grams);
    EXPECT_LE(d.fd, base.fd);

    // A never-seen feature.
    auto extra = seqs;
    extra.push_back(seq({"never-seen-feature"}));
    const auto e = feature_density(extra);
    EXPECT_EQ(e.unique_1grams, base.unique_1grams + 1);
    EXPECT_EQ(e.all_1grams, base.all_1grams + 1);
  }
}

TEST(FeatureCounter, MergeIsAssociativeAndCommutative) {
  FeatureCounter a, b, c;
  a.add(seq({"x", "y"}));
  b.add(seq({"y", "z", "z"}));
  c.add(seq({"w"}));
  FeatureCounter ab_c = a, a_bc = a, cb = c;
  ab_c.merge(b);
  ab_c.merge(c);
  cb.merge(b);
  FeatureCounter bc = b;
  bc.merge(c);
  a_bc.merge(bc);
  cb.merge(a);
  EXPECT_EQ(ab_c.counts(), a_bc.counts());
  EXPECT_EQ(ab_c.counts(), cb.counts());
  EXPECT_EQ(ab_c.total(), 6u);
  EXPECT_EQ(ab_c.unique(), 4u);
}

TEST(DensityTable, SortedDescendingAndMatchesBruteForce) {
  Rng rng(8);
  auto corpus = random_corpus(rng, 40);
  std::vector<VariantId> all(kAllVariants.begin(), kAllVariants.end());
  auto table = density_table(corpus, all);
  ASSERT_EQ(table.size(), 11u);
  for (std::size_t i = 1; i < table.size(); ++i) EXPECT_GE(table[i - 1].fd, table[i].fd);
  for (const auto& r : table) {
    std::set<std::string> uniq;
    std::size_t total = 0;
    for (const auto& s : corpus) {
      for (const auto& f : derive(s, r.variant).features) {
        uniq.insert(f);
        ++total;
      }
    }
    EXPECT_EQ(r.unique_1grams, uniq.size()) << variant_name(r.variant);
    EXPECT_EQ(r.all_1grams, total) << variant_name(r.variant);
  }
}

TEST(DensityTable, SingleVariantAndEmptyRequest) {
  Rng rng(9);
  auto corpus = random_corpus(rng, 5);
  std::vector<VariantId> one{VariantId::kLem};
  EXPECT_EQ(density_table(corpus, one).size(), 1u);
  EXPECT_THROW(density_table(corpus, std::span<const VariantId>{}), InvalidArgument);
}

TEST(DensityTable, PublishedOrdering) {
  // Published counts; DEP comes first and POS last.
  std::vector<DensityReport> r{
      make_density(VariantId::kTok, 25785, 367139),  make_density(VariantId::kPos, 19, 357604),
      make_density(VariantId::kDep, 149360, 309592), make_density(VariantId::kLem, 21766, 367180),
      make_density(VariantId::kDepNer, 147560, 309592)};
  sort_by_density(r);
  EXPECT_EQ(r.front().variant, VariantId::kDep);
  EXPECT_EQ(r.back().variant, VariantId::kPos);
}

TEST(DensityCsv, RoundTripIsLossless) {
  std::vector<DensityReport> r{make_density(VariantId::kTok, 25785, 367139),
                               make_density(VariantId::kChnkNer, 33612, 309592)};
  std::stringstream io;
  write_density_csv(io, r);
  EXPECT_EQ(io.str().substr(0, 19), "variant,unique,all,");
  EXPECT_EQ(read_density_csv(io), r);
}
