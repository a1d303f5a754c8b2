#include <algorithm>
#include <numeric>
#include <string>

#include "fdbench/balance.hpp"
#include "fdbench/error.hpp"
#include "fdbench/evaluate.hpp"
#include "fdbench/rng.hpp"

namespace fdbench {

std::vector<std::size_t> FoldPlan::train_indices(std::size_t f) const {
  std::vector<std::size_t> out;
  for (std::size_t g = 0; g < folds.size(); ++g) {
    if (g != f) out.insert(out.end(), folds[g].begin(), folds[g].end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

FoldPlan stratified_folds(std::span<const int> labels, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw InvalidArgument("stratified_folds: k must be >= 2");
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) {
      throw InvalidArgument("stratified_folds: label at " + std::to_string(i) + " is not 0/1");
    }
    by_class[labels[i]].push_back(i);
  }
  for (int c = 0; c < 2; ++c) {
    if (by_class[c].size() < k) {
      throw DataError("stratified_folds: class " + std::to_string(c) + " has " +
                      std::to_string(by_class[c].size()) + " members, fewer than k = " +
                      std::to_string(k));
    }
  }
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.folds.resize(k);
  Rng rng(mix_seed(seed, "folds"));
  std::size_t next = 0;
  for (auto& members : by_class) {
    rng.shuffle(members);
    for (std::size_t i : members) {
      plan.folds[next].push_back(i);
      next = (next + 1) % k;
    }
  }
  for (auto& f : plan.folds) std::sort(f.begin(), f.end());
  return plan;
}

Confusion confusion(std::span<const int> predicted, std::span<const int> labels) {
  if (predicted.size() != labels.size()) {
    throw InvalidArgument("confusion: " + std::to_string(predicted.size()) + " predictions for " +
                          std::to_string(labels.size()) + " labels");
  }
  Confusion c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) {
      (predicted[i] == 1 ? c.tp : c.fn)++;
    } else {
      (predicted[i] == 1 ? c.fp : c.tn)++;
    }
  }
  return c;
}

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double harmonic(double p, double r) { return p + r == 0 ? 0.0 : 2 * p * r / (p + r); }

void require_both_classes(std::span<const int> labels, const char* who) {
  bool seen[2] = {false, false};
  for (int y : labels) {
    if (y != 0 && y != 1) throw InvalidArgument(std::string(who) + ": labels must be 0/1");
    seen[y] = true;
  }
  if (!seen[0] || !seen[1]) throw DataError(std::string(who) + ": both classes must be present");
}

}  // namespace

double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw InvalidArgument("auc: scores and labels differ in length");
  require_both_classes(labels, "auc");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Twice the rank sum of the positives, with tied groups at their mean rank,
  // stays integral and exact.
  double twice_rank_sum = 0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double twice_mean_rank = static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]] == 1) {
        twice_rank_sum += twice_mean_rank;
        ++n_pos;
      }
    }
    i = j;
  }
  const double np = static_cast<double>(n_pos);
  const double nn = static_cast<double>(labels.size() - n_pos);
  const double u = (twice_rank_sum - np * (np + 1)) / 2;
  return u / (np * nn);
}

Metrics score(std::span<const Prediction> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) {
    throw InvalidArgument("score: " + std::to_string(predictions.size()) + " predictions for " +
                          std::to_string(labels.size()) + " labels");
  }
  require_both_classes(labels, "score");
  std::vector<int> predicted(predictions.size());
  std::vector<double> scores(predictions.size());
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    predicted[i] = predictions[i].label;
    scores[i] = predictions[i].score;
  }
  const Confusion c = confusion(predicted, labels);
  const double prec_pos = ratio(c.tp, c.tp + c.fp), rec_pos = ratio(c.tp, c.tp + c.fn);
  const double prec_neg = ratio(c.tn, c.tn + c.fn), rec_neg = ratio(c.tn, c.tn + c.fp);
  Metrics m;
  m.acc = ratio(c.tp + c.tn, labels.size());
  m.prec = (prec_pos + prec_neg) / 2;
  m.rec = (rec_pos + rec_neg) / 2;
  m.f1 = (harmonic(prec_pos, rec_pos) + harmonic(prec_neg, rec_neg)) / 2;
  m.auc = auc(scores, labels);
  return m;
}

Metrics mean_metrics(std::span<const Metrics> folds) {
  if (folds.empty()) throw InvalidArgument("mean_metrics: no folds");
  Metrics m;
  for (const Metrics& f : folds) {
    m.acc += f.acc;
    m.prec += f.prec;
    m.rec += f.rec;
    m.f1 += f.f1;
    m.auc += f.auc;
  }
  const double n = static_cast<double>(folds.size());
  m.acc /= n;
  m.prec /= n;
  m.rec /= n;
  m.f1 /= n;
  m.auc /= n;
  return m;
}

bool class_weights_by_default(Family f) { return f == Family::kSVM || is_neural(f); }

std::uint64_t fold_seed(std::uint64_t model_seed, std::size_t fold) {
  return mix_seed(model_seed, {"fold", std::to_string(fold)});
}

namespace {

std::vector<FeatureSequence> pick(std::span<const FeatureSequence> docs,
                                  std::span<const std::size_t> rows) {
  std::vector<FeatureSequence> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(docs[r]);
  return out;
}

std::vector<int> pick(std::span<const int> labels, std::span<const std::size_t> rows) {
  std::vector<int> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(labels[r]);
  return out;
}

// Appends SMOTE rows for the smaller class until both classes are the same size.
void oversample(SparseMatrix& x, std::vector<int>& y, std::size_t k, std::uint64_t seed) {
  std::size_t count[2] = {0, 0};
  for (int v : y) ++count[v];
  if (count[0] == count[1]) return;
  const int minority = count[1] < count[0] ? 1 : 0;
  std::vector<DenseRow> rows;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    if (y[r] == minority) rows.push_back(x.dense_row(r));
  }
  if (rows.size() < 2) {
    throw DataError("SMOTE: the training portion has " + std::to_string(rows.size()) +
                    " minority rows, at least 2 are needed");
  }
  SmoteConfig cfg;
  cfg.k_neighbors = std::min(k, rows.size() - 1);
  cfg.target = count[1 - minority];
  cfg.seed = seed;
  for (const DenseRow& s : smote(rows, cfg)) {
    x.append_dense_row(s);
    y.push_back(minority);
  }
}

}  // namespace

Vocabulary fold_vocabulary(std::span<const FeatureSequence> docs, const FoldPlan& plan,
                           std::size_t fold, std::size_t min_df) {
  if (fold >= plan.folds.size()) throw InvalidArgument("fold index out of range");
  const auto train = pick(docs, plan.train_indices(fold));
  return Vocabulary::build(train, min_df);
}

Metrics run_fold(const ModelSpec& base, std::span<const FeatureSequence> docs,
                 std::span<const int> labels, const FoldPlan& plan, std::size_t fold,
                 const CvOptions& options) {
  if (docs.size() != labels.size()) {
    throw InvalidArgument("run_fold: " + std::to_string(docs.size()) + " documents for " +
                          std::to_string(labels.size()) + " labels");
  }
  if (fold >= plan.folds.size()) throw InvalidArgument("run_fold: fold index out of range");
  std::size_t covered = 0;
  for (const auto& f : plan.folds) covered += f.size();
  if (covered != labels.size()) {
    throw InvalidArgument("run_fold: fold plan covers " + std::to_string(covered) +
                          " samples, data has " + std::to_string(labels.size()));
  }
  const bool index_input = uses_index_input(base.family);
  if (options.smote && index_input) {
    throw InvalidArgument("run_fold: SMOTE needs TF-IDF input, " +
                          std::string(family_name(base.family)) + " reads index sequences");
  }
  ModelSpec spec = base;
  spec.seed = fold_seed(base.seed, fold);

  const auto train_rows = plan.train_indices(fold);
  const auto& test_rows = plan.folds[fold];
  const auto train_docs = pick(docs, train_rows);
  const auto test_docs = pick(docs, test_rows);
  std::vector<int> train_y = pick(labels, train_rows);
  const std::vector<int> test_y = pick(labels, test_rows);
  const Vocabulary vocab = Vocabulary::build(train_docs, options.min_df);
  const bool weighted = options.class_weights.value_or(class_weights_by_default(spec.family));

  std::vector<Prediction> predictions;
  if (index_input) {
    const auto len = static_cast<std::size_t>(spec.params.max_len);
    IndexBatch train_x = encode_batch(train_docs, vocab, len);
    IndexBatch test_x = encode_batch(test_docs, vocab, len);
    const ClassWeights cw = weighted ? class_weights(train_y) : ClassWeights::uniform();
    predictions = train(spec, train_x, train_y, cw).predict(test_x);
  } else {
    SparseMatrix train_x = tfidf(train_docs, vocab);
    SparseMatrix test_x = tfidf(test_docs, vocab);
    if (options.smote) oversample(train_x, train_y, options.smote_k, mix_seed(spec.seed, "smote"));
    const ClassWeights cw = weighted ? class_weights(train_y) : ClassWeights::uniform();
    predictions = train(spec, train_x, train_y, cw).predict(test_x);
  }
  return score(predictions, test_y);
}

CvResult cross_validate(const ModelSpec& spec, std::span<const FeatureSequence> docs,
                        std::span<const int> labels, const FoldPlan& plan,
                        const CvOptions& options) {
  CvResult r;
  for (std::size_t f = 0; f < plan.folds.size(); ++f) {
    r.folds.push_back(run_fold(spec, docs, labels, plan, f, options));
  }
  r.mean = mean_metrics(r.folds);
  return r;
}

}  // namespace fdbench
