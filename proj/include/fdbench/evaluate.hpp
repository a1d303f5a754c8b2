#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fdbench/learn.hpp"
#include "fdbench/variants.hpp"
#include "fdbench/vectorize.hpp"

namespace fdbench {

struct FoldPlan {
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<std::size_t>> folds;  // each sorted ascending

  /// Every index outside fold f, ascending.
  std::vector<std::size_t> train_indices(std::size_t f) const;
};

/// Shuffles each class with the seed's "folds" substream and deals it
/// round-robin over the folds; the deal position carries over from one class
/// to the next so fold sizes also differ by at most one. Throws DataError when
/// a class has fewer than k members, InvalidArgument when k < 2.
FoldPlan stratified_folds(std::span<const int> labels, std::size_t k, std::uint64_t seed);

struct Confusion {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

Confusion confusion(std::span<const int> predicted, std::span<const int> labels);

/// prec, rec and f1 are macro averages over the two classes; a class's
/// precision, recall or F1 is 0 when its denominator is 0.
struct Metrics {
  double acc = 0, prec = 0, rec = 0, f1 = 0, auc = 0;

  bool operator==(const Metrics&) const = default;
};

Metrics score(std::span<const Prediction> predictions, std::span<const int> labels);

/// Mann-Whitney: P(score_pos > score_neg) + P(tie) / 2, exact.
double auc(std::span<const double> scores, std::span<const int> labels);

/// Unweighted mean of each field.
Metrics mean_metrics(std::span<const Metrics> folds);

struct Correlation {
  double rho = 0;
  double p_two_sided = 1;
  std::size_t n = 0;

  bool operator==(const Correlation&) const = default;
};

/// Product-moment correlation; p from t = rho sqrt((n-2)/(1-rho^2)) with n-2
/// degrees of freedom. Throws InvalidArgument for n < 3, length mismatch or
/// a constant vector.
Correlation pearson(std::span<const double> x, std::span<const double> y);

/// Two-sided p-value of a correlation coefficient over n pairs.
double pearson_p(double rho, std::size_t n);

enum class TTestMode { kPaired, kTwoSample };

struct TTest {
  double t = 0;
  double df = 0;
  double p_two_sided = 1;

  bool operator==(const TTest&) const = default;
};

/// Student's t-test; the two-sample form pools the variances. A zero
/// statistic over zero variance gives p = 1; zero variance with a non-zero
/// mean difference throws InvalidArgument.
TTest t_test(std::span<const double> a, std::span<const double> b, TTestMode mode);

/// Regularized incomplete beta I_x(a, b) (continued fraction, modified Lentz).
double incomplete_beta(double a, double b, double x);

/// P(|T| >= |t|) for Student's t with df degrees of freedom.
double student_t_two_sided(double t, double df);

struct CvOptions {
  bool smote = false;
  std::size_t smote_k = 5;  // clamped to (minority rows - 1) per fold
  /// Inverse-frequency class weights; unset means the family default.
  std::optional<bool> class_weights;
  std::size_t min_df = 1;
};

/// SVM, MLP and the CNNs are trained with class weights by default.
bool class_weights_by_default(Family f);

struct CvResult {
  Metrics mean;
  std::vector<Metrics> folds;
};

/// Seed of the model trained in fold f.
std::uint64_t fold_seed(std::uint64_t model_seed, std::size_t fold);

/// Vocabulary of fold f's training portion.
Vocabulary fold_vocabulary(std::span<const FeatureSequence> docs, const FoldPlan& plan,
                           std::size_t fold, std::size_t min_df = 1);

/// Fits vocabulary, optional SMOTE and the model on the training portion of
/// fold f and scores the held-out portion. SMOTE needs TF-IDF input, so CNN
/// families with options.smote throw InvalidArgument.
Metrics run_fold(const ModelSpec& spec, std::span<const FeatureSequence> docs,
                 std::span<const int> labels, const FoldPlan& plan, std::size_t fold,
                 const CvOptions& options = {});

CvResult cross_validate(const ModelSpec& spec, std::span<const FeatureSequence> docs,
                        std::span<const int> labels, const FoldPlan& plan,
                        const CvOptions& options = {});

}  // namespace fdbench
