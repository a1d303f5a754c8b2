#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fdbench/balance.hpp"
#include "fdbench/rng.hpp"
#include "fdbench/vectorize.hpp"

namespace fdbench {

enum class Family { kNB, kKNN, kSVM, kLR, kRF, kMLP, kCNN1L, kCNN2L };

inline constexpr std::array<Family, 8> kAllFamilies = {
    Family::kNB,  Family::kKNN, Family::kSVM,   Family::kLR,
    Family::kRF,  Family::kMLP, Family::kCNN1L, Family::kCNN2L,
};

/// NB, KNN, SVM, LR, RF, MLP, CNN1L, CNN2L.
std::string_view family_name(Family f);
/// Case-insensitive; also accepts "kNN", "CNN-1L", "CNN_2L".
std::optional<Family> parse_family(std::string_view name);

/// CNNs read IndexBatch input; every other family reads TF-IDF rows.
bool uses_index_input(Family f);
bool is_neural(Family f);
bool is_differentiable(Family f);

enum class Padding { kValid, kSame };

/// Hyperparameters of every family in one record; each family reads its own
/// fields. Defaults are the benchmark defaults.
struct Hyperparams {
  // NB
  double nb_alpha = 1.0;
  // kNN
  int knn_k = 1;
  // SVM / LR
  double l2 = 1e-4;
  int svm_epochs = 20;
  double svm_eta0 = 0.1;
  int lr_max_iter = 300;
  double lr_tol = 1e-7;
  // RF
  int rf_trees = 100;
  int rf_max_features = 0;  // 0 = floor(sqrt(V))
  bool rf_bootstrap = true;
  // MLP and CNN
  int hidden_units = 128;
  int hidden_layers = 1;
  double dropout = 0.5;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-7;
  int epochs = 10;
  int batch_size = 32;
  // CNN
  int max_len = 128;
  int embed_dim = 64;
  double embed_init = 0.05;
  int feature_maps = 128;
  int kernel_h = 4;
  int kernel_w = 4;
  int pool_h = 2;
  int pool_w = 2;
  Padding padding = Padding::kSame;
  int dense_units = 128;  // 0: flatten feeds the output layer directly

  bool operator==(const Hyperparams&) const = default;
};

struct ModelSpec {
  Family family = Family::kLR;
  Hyperparams params;
  std::uint64_t seed = 0;

  /// Throws ConfigError on out-of-range hyperparameters for this family.
  void validate() const;
  std::string to_json() const;
  static ModelSpec from_json(std::string_view text);

  bool operator==(const ModelSpec&) const = default;
};

/// Applies a JSON object of hyperparameter overrides, e.g. {"k": 3, "trees": 50}.
Hyperparams apply_overrides(Hyperparams base, std::string_view json_object);

/// score: probability for NB/LR/MLP/CNN, margin for SVM, vote fraction for
/// RF/kNN. label is 1 iff score reaches the family's threshold (0 for SVM,
/// 0.5 otherwise).
struct Prediction {
  int label = 0;
  double score = 0;

  bool operator==(const Prediction&) const = default;
};

namespace detail {
class ModelState;
}

class TrainedModel {
 public:
  explicit TrainedModel(std::shared_ptr<const detail::ModelState> state);

  Family family() const;
  const ModelSpec& spec() const;

  /// Throws InvalidArgument when the representation does not match training.
  std::vector<Prediction> predict(const SparseMatrix& x) const;
  std::vector<Prediction> predict(const IndexBatch& x) const;

  /// JSON envelope {format, format_version, family, seed, spec, params} with
  /// parameter arrays as base64 little-endian blobs. Reloads bit-exactly.
  std::string save() const;
  static TrainedModel load(std::string_view text);

  const detail::ModelState& state() const { return *state_; }

 private:
  std::shared_ptr<const detail::ModelState> state_;
};

/// Trains one model. Class weights scale each sample's loss (or vote/count)
/// contribution. Throws DataError when only one class is present and
/// InvalidArgument on shape mismatches or a representation the family does
/// not accept.
TrainedModel train(const ModelSpec& spec, const SparseMatrix& x, std::span<const int> labels,
                   const ClassWeights& weights);
TrainedModel train(const ModelSpec& spec, const IndexBatch& x, std::span<const int> labels,
                   const ClassWeights& weights);

struct GradientCheckResult {
  double max_relative_error = 0;
  std::size_t n_checked = 0;
  std::size_t n_parameters = 0;
};

/// Compares analytic gradients of the weighted training loss (dropout off)
/// against central differences at freshly initialised parameters.
///
/// relative error = |analytic - numeric| / max(|analytic|, |numeric|, 1e-6)
///
/// At least 200 parameters are checked (all of them when there are fewer).
/// LR, SVM, MLP, CNN1L and CNN2L only; other families and epsilon <= 0 throw
/// InvalidArgument.
GradientCheckResult gradient_check(const ModelSpec& spec, const SparseMatrix& batch,
                                   std::span<const int> labels, const ClassWeights& weights,
                                   double epsilon);
GradientCheckResult gradient_check(const ModelSpec& spec, const IndexBatch& batch,
                                   std::span<const int> labels, const ClassWeights& weights,
                                   double epsilon);

/// Unpruned CART tree with weighted Gini impurity; the building block of RF.
class DecisionTree {
 public:
  struct Node {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0;       // x[feature] <= threshold goes left
    std::int32_t left = -1;
    std::int32_t right = -1;
    double value = 0;  // weighted fraction of class 1 at this node
  };

  /// rows lists training row indices (repeats allowed, e.g. a bootstrap
  /// sample). max_features >= x.n_cols inspects every feature in index order
  /// and needs no rng.
  static DecisionTree fit(const SparseMatrix& x, std::span<const int> labels,
                          std::span<const std::size_t> rows, const ClassWeights& weights,
                          std::size_t max_features, Rng* rng);

  double predict_value(const SparseRow& row) const;
  int predict_label(const SparseRow& row) const { return predict_value(row) >= 0.5 ? 1 : 0; }

  const std::vector<Node>& nodes() const { return nodes_; }
  static DecisionTree from_nodes(std::vector<Node> nodes);

 private:
  std::vector<Node> nodes_;
};

}  // namespace fdbench
