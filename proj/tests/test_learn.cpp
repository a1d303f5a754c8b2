#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "fdbench/error.hpp"
#include "fdbench/learn.hpp"
#include "fixtures.hpp"

using namespace fdbench;
using fdbench::testing::exact_labels;
using fdbench::testing::random_labels;
using fdbench::testing::separable_docs;

namespace {

SparseMatrix dense_to_sparse(const std::vector<std::vector<double>>& rows) {
  SparseMatrix m;
  m.n_cols = rows.empty() ? 0 : rows[0].size();
  for (const auto& r : rows) m.append_dense_row(r);
  return m;
}

struct SparseSet {
  SparseMatrix x;
  std::vector<int> y;
};

SparseSet separable_tfidf(std::uint64_t seed, std::size_t n_pos, std::size_t n_neg) {
  Rng rng(seed);
  SparseSet s;
  s.y = exact_labels(n_pos, n_neg);
  rng.shuffle(s.y);
  auto docs = separable_docs(rng, s.y);
  auto v = Vocabulary::build(docs);
  s.x = tfidf(docs, v);
  return s;
}

struct IndexSet {
  IndexBatch x;
  std::vector<int> y;
};

// Label 1 iff token 2 appears; other positions hold tokens 3..9 or padding.
IndexSet marker_sequences(std::uint64_t seed, std::size_t n, std::size_t max_len) {
  Rng rng(seed);
  IndexSet s;
  s.x.max_len = max_len;
  s.x.vocab_size = 10;
  for (std::size_t i = 0; i < n; ++i) {
    const int y = static_cast<int>(i % 2);
    IndexSequence seq(max_len, 0);
    const std::size_t len = 3 + rng.below(max_len - 3);
    for (std::size_t t = 0; t < len; ++t) seq[t] = static_cast<std::int32_t>(3 + rng.below(7));
    if (y) seq[rng.below(len)] = 2;
    s.x.append(seq);
    s.y.push_back(y);
  }
  return s;
}

Hyperparams tiny_cnn() {
  Hyperparams h;
  h.max_len = 12;
  h.embed_dim = 8;
  h.feature_maps = 4;
  h.dense_units = 8;
  return h;
}

double accuracy(const std::vector<Prediction>& p, std::span<const int> y) {
  std::size_t ok = 0;
  for (std::size_t i = 0; i < y.size(); ++i) ok += p[i].label == y[i];
  return static_cast<double>(ok) / static_cast<double>(y.size());
}

double f1_positive(const std::vector<Prediction>& p, std::span<const int> y) {
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    tp += p[i].label == 1 && y[i] == 1;
    fp += p[i].label == 1 && y[i] == 0;
    fn += p[i].label == 0 && y[i] == 1;
  }
  return 2 * tp / (2 * tp + fp + fn);
}

// Mean weighted log loss from predicted probabilities.
double log_loss(const std::vector<Prediction>& p, std::span<const int> y, const ClassWeights& w) {
  double s = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double q = std::clamp(p[i].score, 1e-300, 1.0 - 1e-16);
    s += w.of(y[i]) * -(y[i] ? std::log(q) : std::log1p(-q));
  }
  return s / static_cast<double>(y.size());
}

double hinge_loss(const std::vector<Prediction>& p, std::span<const int> y, const ClassWeights& w) {
  double s = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double t = y[i] ? 1.0 : -1.0;
    s += w.of(y[i]) * std::max(0.0, 1 - t * p[i].score);
  }
  return s / static_cast<double>(y.size());
}

}  // namespace

TEST(Families, NamesAndParsing) {
  for (Family f : kAllFamilies) EXPECT_EQ(parse_family(family_name(f)), f);
  EXPECT_EQ(parse_family("kNN"), Family::kKNN);
  EXPECT_EQ(parse_family("CNN-1L"), Family::kCNN1L);
  EXPECT_EQ(parse_family("cnn_2l"), Family::kCNN2L);
  EXPECT_FALSE(parse_family("xgboost"));
  EXPECT_TRUE(uses_index_input(Family::kCNN2L));
  EXPECT_FALSE(uses_index_input(Family::kMLP));
  EXPECT_TRUE(is_differentiable(Family::kSVM));
  EXPECT_FALSE(is_differentiable(Family::kRF));
}

TEST(ModelSpecTest, ValidateAndJsonRoundTrip) {
  ModelSpec s{Family::kCNN2L, tiny_cnn(), 42};
  s.validate();
  EXPECT_EQ(ModelSpec::from_json(s.to_json()), s);
  ModelSpec bad = s;
  bad.params.dropout = 1.0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = s;
  bad.params.learning_rate = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
  ModelSpec knn{Family::kKNN, {}, 0};
  knn.params.knn_k = 0;
  EXPECT_THROW(knn.validate(), ConfigError);
  ModelSpec rf{Family::kRF, {}, 0};
  rf.params.rf_trees = 0;
  EXPECT_THROW(rf.validate(), ConfigError);
}

TEST(ModelSpecTest, DefaultsMatchBenchmark) {
  Hyperparams h;
  EXPECT_EQ(h.knn_k, 1);
  EXPECT_EQ(h.rf_trees, 100);
  EXPECT_EQ(h.feature_maps, 128);
  EXPECT_EQ(h.kernel_h, 4);
  EXPECT_EQ(h.kernel_w, 4);
  EXPECT_EQ(h.pool_h, 2);
  EXPECT_EQ(h.pool_w, 2);
  EXPECT_EQ(h.hidden_layers, 1);
}

TEST(ModelSpecTest, Overrides) {
  auto h = apply_overrides({}, R"({"k": 3, "trees": 50})");
  EXPECT_EQ(h.knn_k, 3);
  EXPECT_EQ(h.rf_trees, 50);
  EXPECT_THROW(apply_overrides({}, R"({"no_such_knob": 1})"), ConfigError);
}

TEST(NaiveBayes, HandComputedPosterior) {
  // d1 = [a, a, b] -> 1, d2 = [b, b] -> 0 as raw counts over columns {a, b}.
  auto x = dense_to_sparse({{2, 1}, {0, 2}});
  std::vector<int> y{1, 0};
  auto m = train({Family::kNB, {}, 0}, x, y, ClassWeights::uniform());
  // P(a|1) = (2+1)/(3+2), P(a|0) = (0+1)/(2+2), equal priors.
  const double p1 = 3.0 / 5.0, p0 = 1.0 / 4.0;
  auto q = m.predict(dense_to_sparse({{1, 0}}));
  EXPECT_NEAR(q[0].score, p1 / (p1 + p0), 1e-12);
  EXPECT_EQ(q[0].label, 1);
  auto r = m.predict(dense_to_sparse({{0, 1}}));
  // P(b|1) = 2/5, P(b|0) = 3/4.
  EXPECT_NEAR(r[0].score, 0.4 / (0.4 + 0.75), 1e-12);
  EXPECT_EQ(r[0].label, 0);
}

TEST(Knn, MatchesExhaustiveCosineScan) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    // At least two non-zero coordinates per row, so no two rows are parallel
    // and rounding cannot reorder a tie.
    auto random_row = [&] {
      std::vector<double> r(6);
      for (double& v : r) v = rng.bernoulli(0.5) ? 0.0 : rng.uniform(0.1, 2);
      const std::size_t a = rng.below(6);
      r[a] = rng.uniform(0.1, 2);
      r[(a + 1 + rng.below(5)) % 6] = rng.uniform(0.1, 2);
      return r;
    };
    std::vector<std::vector<double>> train_rows(25);
    for (auto& r : train_rows) r = random_row();
    auto y = random_labels(rng, train_rows.size(), 0.4);
    y[0] = 0;
    y[1] = 1;
    auto m = train({Family::kKNN, {}, 0}, dense_to_sparse(train_rows), y, ClassWeights::uniform());
    std::vector<std::vector<double>> queries(10);
    for (auto& r : queries) r = random_row();
    queries.push_back(std::vector<double>(6, 0.0));  // empty: every row at distance 1
    queries.push_back(train_rows[7]);
    auto pred = m.predict(dense_to_sparse(queries));
    for (std::size_t q = 0; q < queries.size(); ++q) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t arg = 0;
      for (std::size_t i = 0; i < train_rows.size(); ++i) {
        double dot = 0, na = 0, nb = 0;
        for (std::size_t k = 0; k < 6; ++k) {
          dot += queries[q][k] * train_rows[i][k];
          na += queries[q][k] * queries[q][k];
          nb += train_rows[i][k] * train_rows[i][k];
        }
        const double d = (na == 0 || nb == 0) ? 1.0 : 1 - dot / std::sqrt(na * nb);
        if (d < best - 1e-12) {
          best = d;
          arg = i;
        }
      }
      EXPECT_EQ(pred[q].label, y[arg]) << "trial " << trial << " query " << q;
    }
    EXPECT_EQ(pred[queries.size() - 2].label, y[0]);
    EXPECT_EQ(pred.back().label, y[7]);
  }
}

TEST(LogisticRegression, SeparableTwoDimensionalSet) {
  Rng rng(7);
  std::vector<std::vector<double>> rows;
  std::vector<int> y;
  for (int i = 0; i < 20; ++i) {
    const int label = i % 2;
    const double u = rng.uniform(-1, 1);
    const double v = rng.uniform(0.5, 2) * (label ? 1 : -1);
    rows.push_back({u + v, v - u});  // x0 + x1 = 2v, sign follows the label
    y.push_back(label);
  }
  auto x = dense_to_sparse(rows);
  auto m = train({Family::kLR, {}, 0}, x, y, ClassWeights::uniform());
  EXPECT_EQ(f1_positive(m.predict(x), y), 1.0);
}

TEST(LogisticRegression, ZeroWeightsScoreOneHalf) {
  // Empty rows and balanced labels give a zero gradient, so the weights stay
  // at their zero start.
  SparseMatrix empty;
  empty.n_cols = 2;
  empty.append_row({});
  empty.append_row({});
  std::vector<int> y{1, 0};
  auto m = train({Family::kLR, {}, 0}, empty, y, ClassWeights::uniform());
  for (const auto& p : m.predict(dense_to_sparse({{1, 0}, {0, 1}, {3, 2}}))) EXPECT_EQ(p.score, 0.5);
}

TEST(RandomForest, SingleTreeEqualsDecisionTree) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto s = separable_tfidf(seed, 10, 30);
    Rng rng(seed + 100);
    // Flip a few labels so the tree has to grow past one split.
    for (int k = 0; k < 4; ++k) s.y[rng.below(s.y.size())] ^= 1;
    ModelSpec spec{Family::kRF, {}, seed};
    spec.params.rf_trees = 1;
    spec.params.rf_bootstrap = false;
    spec.params.rf_max_features = static_cast<int>(s.x.n_cols);
    auto w = class_weights(s.y);
    auto rf = train(spec, s.x, s.y, w);
    std::vector<std::size_t> rows(s.y.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    auto tree = DecisionTree::fit(s.x, s.y, rows, w, s.x.n_cols, nullptr);
    auto pred = rf.predict(s.x);
    for (std::size_t i = 0; i < s.y.size(); ++i) {
      EXPECT_EQ(pred[i].label, tree.predict_label(s.x.row(i)));
    }
  }
}

TEST(RandomForest, UnprunedTreeFitsTrainingSet) {
  auto s = separable_tfidf(3, 8, 20);
  Rng rng(9);
  for (int k = 0; k < 5; ++k) s.y[rng.below(s.y.size())] ^= 1;
  std::vector<std::size_t> rows(s.y.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  auto tree = DecisionTree::fit(s.x, s.y, rows, ClassWeights::uniform(), s.x.n_cols, nullptr);
  // Rows with identical features and different labels are the only source of error.
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < s.y.size(); ++i) wrong += tree.predict_label(s.x.row(i)) != s.y[i];
  EXPECT_EQ(wrong, 0u);
  EXPECT_EQ(DecisionTree::from_nodes(tree.nodes()).nodes().size(), tree.nodes().size());
}

TEST(RandomForest, VoteFractionInUnitInterval) {
  auto s = separable_tfidf(4, 10, 30);
  ModelSpec spec{Family::kRF, {}, 4};
  spec.params.rf_trees = 15;
  auto m = train(spec, s.x, s.y, ClassWeights::uniform());
  for (const auto& p : m.predict(s.x)) {
    EXPECT_GE(p.score, 0.0);
    EXPECT_LE(p.score, 1.0);
    EXPECT_DOUBLE_EQ(p.score * 15, std::round(p.score * 15));
    EXPECT_EQ(p.label, p.score >= 0.5 ? 1 : 0);
  }
}

TEST(GradientCheck, LogisticRegression) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    auto s = separable_tfidf(seed, 5, 12);
    auto r = gradient_check({Family::kLR, {}, seed}, s.x, s.y, class_weights(s.y), 1e-5);
    EXPECT_LT(r.max_relative_error, 1e-6);
    EXPECT_EQ(r.n_checked, std::min<std::size_t>(r.n_parameters, 200));
  }
}

TEST(GradientCheck, Svm) {
  auto s = separable_tfidf(2, 5, 12);
  auto r = gradient_check({Family::kSVM, {}, 2}, s.x, s.y, class_weights(s.y), 1e-6);
  EXPECT_LT(r.max_relative_error, 1e-4);
}

TEST(GradientCheck, Mlp) {
  auto s = separable_tfidf(3, 6, 10);
  ModelSpec spec{Family::kMLP, {}, 3};
  spec.params.hidden_units = 16;
  auto r = gradient_check(spec, s.x, s.y, class_weights(s.y), 1e-5);
  EXPECT_LT(r.max_relative_error, 1e-4);
  EXPECT_GE(r.n_checked, 200u);
  spec.params.hidden_layers = 2;
  EXPECT_LT(gradient_check(spec, s.x, s.y, class_weights(s.y), 1e-5).max_relative_error, 1e-4);
}

TEST(GradientCheck, CnnOneAndTwoLayers) {
  auto s = marker_sequences(4, 6, 12);
  for (Family f : {Family::kCNN1L, Family::kCNN2L}) {
    ModelSpec spec{f, tiny_cnn(), 4};
    auto r = gradient_check(spec, s.x, s.y, class_weights(s.y), 1e-5);
    EXPECT_LT(r.max_relative_error, 1e-4) << family_name(f);
    EXPECT_GE(r.n_checked, 200u);
    spec.params.padding = Padding::kValid;
    spec.params.kernel_h = spec.params.kernel_w = 2;
    spec.params.dense_units = 0;
    EXPECT_LT(gradient_check(spec, s.x, s.y, class_weights(s.y), 1e-5).max_relative_error, 1e-4)
        << family_name(f) << " valid";
  }
}

TEST(GradientCheck, ContractErrors) {
  auto s = separable_tfidf(1, 3, 3);
  EXPECT_THROW(gradient_check({Family::kLR, {}, 0}, s.x, s.y, {}, 0.0), InvalidArgument);
  EXPECT_THROW(gradient_check({Family::kNB, {}, 0}, s.x, s.y, {}, 1e-5), InvalidArgument);
  EXPECT_THROW(gradient_check({Family::kRF, {}, 0}, s.x, s.y, {}, 1e-5), InvalidArgument);
  EXPECT_THROW(gradient_check({Family::kKNN, {}, 0}, s.x, s.y, {}, 1e-5), InvalidArgument);
}

TEST(Training, LossDecreasesAfterOneEpoch) {
  auto s = separable_tfidf(5, 6, 10);
  const auto w = class_weights(s.y);
  {
    ModelSpec spec{Family::kLR, {}, 5};
    spec.params.lr_max_iter = 1;
    auto m = train(spec, s.x, s.y, w);
    EXPECT_LT(log_loss(m.predict(s.x), s.y, w), (w.w_pos * 6 + w.w_neg * 10) / 16 * std::log(2.0));
  }
  {
    ModelSpec spec{Family::kSVM, {}, 5};
    spec.params.svm_epochs = 1;
    spec.params.svm_eta0 = 0.01;
    auto m = train(spec, s.x, s.y, w);
    EXPECT_LE(hinge_loss(m.predict(s.x), s.y, w), 1.0);  // weights start at zero: loss 1
  }
  // Neural nets: a vanishing learning rate stands in for the initial point.
  auto check_nn = [&](ModelSpec spec, auto&& x, std::span<const int> y) {
    spec.params.epochs = 1;
    spec.params.dropout = 0;
    spec.params.batch_size = static_cast<int>(y.size());
    spec.params.learning_rate = 1e-3;
    const double trained = log_loss(train(spec, x, y, w).predict(x), y, w);
    spec.params.learning_rate = 1e-12;
    const double initial = log_loss(train(spec, x, y, w).predict(x), y, w);
    EXPECT_LE(trained, initial) << family_name(spec.family);
  };
  ModelSpec mlp{Family::kMLP, {}, 5};
  mlp.params.hidden_units = 16;
  check_nn(mlp, s.x, s.y);
  auto seqs = marker_sequences(5, 16, 12);
  check_nn(ModelSpec{Family::kCNN1L, tiny_cnn(), 5}, seqs.x, seqs.y);
  check_nn(ModelSpec{Family::kCNN2L, tiny_cnn(), 5}, seqs.x, seqs.y);
}

TEST(Training, NeuralNetsOverfitThirtyTwoSamples) {
  auto s = separable_tfidf(6, 16, 16);
  ModelSpec mlp{Family::kMLP, {}, 6};
  mlp.params.hidden_units = 32;
  mlp.params.epochs = 200;
  mlp.params.learning_rate = 1e-2;
  auto m = train(mlp, s.x, s.y, ClassWeights::uniform());
  EXPECT_EQ(accuracy(m.predict(s.x), s.y), 1.0);

  auto seqs = marker_sequences(6, 32, 12);
  for (Family f : {Family::kCNN1L, Family::kCNN2L}) {
    ModelSpec spec{f, tiny_cnn(), 6};
    spec.params.epochs = 200;
    spec.params.learning_rate = 1e-2;
    spec.params.feature_maps = 8;
    auto c = train(spec, seqs.x, seqs.y, ClassWeights::uniform());
    EXPECT_EQ(accuracy(c.predict(seqs.x), seqs.y), 1.0) << family_name(f);
  }
}

TEST(Training, ClassWeightMonotonicity) {
  Rng rng(12);
  // Overlapping classes so the decision boundary has room to move.
  std::vector<std::vector<double>> rows;
  std::vector<int> y;
  for (int i = 0; i < 60; ++i) {
    const int label = i < 10 ? 1 : 0;
    rows.push_back({rng.uniform(0, 1) + 0.4 * label, rng.uniform(0, 1), 1.0});
    y.push_back(label);
  }
  auto x = dense_to_sparse(rows);
  for (Family f : {Family::kLR, Family::kSVM}) {
    std::size_t prev = 0;
    for (double wp : {0.25, 0.5, 1.0, 2.0, 3.0, 6.0, 12.0}) {
      auto m = train({f, {}, 3}, x, y, ClassWeights{1.0, wp});
      std::size_t pos = 0;
      for (const auto& p : m.predict(x)) pos += p.label;
      EXPECT_GE(pos, prev) << family_name(f) << " w_pos=" << wp;
      prev = pos;
    }
  }
}

TEST(Training, DeterministicAndRoundTrips) {
  auto s = separable_tfidf(8, 8, 16);
  auto seqs = marker_sequences(8, 12, 12);
  const auto w = class_weights(s.y);
  for (Family f : kAllFamilies) {
    ModelSpec spec{f, uses_index_input(f) ? tiny_cnn() : Hyperparams{}, 8};
    spec.params.rf_trees = 10;
    spec.params.hidden_units = 8;
    spec.params.epochs = 2;
    auto fit = [&] {
      return uses_index_input(f) ? train(spec, seqs.x, seqs.y, class_weights(seqs.y))
                                 : train(spec, s.x, s.y, w);
    };
    auto predict = [&](const TrainedModel& m) {
      return uses_index_input(f) ? m.predict(seqs.x) : m.predict(s.x);
    };
    auto a = fit();
    auto b = fit();
    EXPECT_EQ(a.save(), b.save()) << family_name(f);
    const auto pa = predict(a);
    EXPECT_EQ(predict(a), pa);
    auto loaded = TrainedModel::load(a.save());
    EXPECT_EQ(loaded.family(), f);
    EXPECT_EQ(loaded.spec(), a.spec());
    EXPECT_EQ(predict(loaded), pa) << family_name(f);
    EXPECT_EQ(loaded.save(), a.save());
    for (const auto& p : pa) {
      const double threshold = f == Family::kSVM ? 0.0 : 0.5;
      EXPECT_EQ(p.label, p.score >= threshold ? 1 : 0);
    }
  }
}

TEST(Training, ContractErrors) {
  auto s = separable_tfidf(9, 4, 4);
  auto ones = exact_labels(8, 0);
  EXPECT_THROW(train({Family::kLR, {}, 0}, s.x, ones, {}), DataError);
  std::vector<int> short_labels(s.y.begin(), s.y.end() - 1);
  EXPECT_THROW(train({Family::kLR, {}, 0}, s.x, short_labels, {}), InvalidArgument);
  auto seqs = marker_sequences(9, 8, 12);
  EXPECT_THROW(train({Family::kLR, {}, 0}, seqs.x, seqs.y, {}), InvalidArgument);
  EXPECT_THROW(train({Family::kCNN1L, tiny_cnn(), 0}, s.x, s.y, {}), InvalidArgument);

  auto lr = train({Family::kLR, {}, 0}, s.x, s.y, {});
  EXPECT_THROW(lr.predict(seqs.x), InvalidArgument);
  SparseMatrix wider = s.x;
  wider.n_cols += 1;
  EXPECT_THROW(lr.predict(wider), InvalidArgument);
  auto cnn = train({Family::kCNN1L, tiny_cnn(), 0}, seqs.x, seqs.y, {});
  EXPECT_THROW(cnn.predict(s.x), InvalidArgument);
  EXPECT_THROW(TrainedModel::load("{\"format\":\"nope\"}"), DataError);
}
