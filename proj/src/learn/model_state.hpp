#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fdbench/error.hpp"
#include "fdbench/learn.hpp"
#include "json.hpp"

namespace fdbench::detail {

using nlohmann::json;

class ModelState {
 public:
  explicit ModelState(ModelSpec spec) : spec(std::move(spec)) {}
  virtual ~ModelState() = default;

  virtual std::vector<Prediction> predict_sparse(const SparseMatrix&) const {
    throw InvalidArgument(std::string(family_name(spec.family)) +
                          " models take index-sequence input, not TF-IDF rows");
  }
  virtual std::vector<Prediction> predict_index(const IndexBatch&) const {
    throw InvalidArgument(std::string(family_name(spec.family)) +
                          " models take TF-IDF rows, not index sequences");
  }

  /// Fitted parameters for the save envelope.
  virtual json params() const = 0;

  ModelSpec spec;
};

// Little-endian base64 blobs.
std::string encode_doubles(std::span<const double> v);
std::vector<double> decode_doubles(const json& blob);
std::string encode_u32(std::span<const std::uint32_t> v);
std::vector<std::uint32_t> decode_u32(const json& blob);
std::string encode_u64(std::span<const std::uint64_t> v);
std::vector<std::uint64_t> decode_u64(const json& blob);

json sparse_to_json(const SparseMatrix& m);
SparseMatrix sparse_from_json(const json& j);

double sigmoid(double z);
/// Weighted binary cross-entropy on a logit, numerically stable.
double bce_with_logit(double z, int y);

void check_training_set(std::size_t n_rows, std::span<const int> labels);

using StatePtr = std::shared_ptr<const ModelState>;

StatePtr train_naive_bayes(const ModelSpec&, const SparseMatrix&, std::span<const int>,
                           const ClassWeights&);
StatePtr load_naive_bayes(const ModelSpec&, const json&);

StatePtr train_knn(const ModelSpec&, const SparseMatrix&, std::span<const int>,
                   const ClassWeights&);
StatePtr load_knn(const ModelSpec&, const json&);

StatePtr train_linear(const ModelSpec&, const SparseMatrix&, std::span<const int>,
                      const ClassWeights&);
StatePtr load_linear(const ModelSpec&, const json&);

StatePtr train_forest(const ModelSpec&, const SparseMatrix&, std::span<const int>,
                      const ClassWeights&);
StatePtr load_forest(const ModelSpec&, const json&);

StatePtr train_mlp(const ModelSpec&, const SparseMatrix&, std::span<const int>,
                   const ClassWeights&);
StatePtr load_mlp(const ModelSpec&, const json&);

StatePtr train_cnn(const ModelSpec&, const IndexBatch&, std::span<const int>,
                   const ClassWeights&);
StatePtr load_cnn(const ModelSpec&, const json&);

/// A contiguous block of trainable parameters and its gradient buffer.
struct ParamRef {
  double* value = nullptr;
  double* grad = nullptr;
  std::size_t size = 0;
};

/// Weighted training loss over one fixed batch at the current parameters,
/// evaluated without dropout.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual std::vector<ParamRef> params() = 0;
  /// Returns the loss; fills every ParamRef::grad when want_grad is set.
  virtual double evaluate(bool want_grad) = 0;
};

std::unique_ptr<Objective> linear_objective(const ModelSpec&, const SparseMatrix&,
                                            std::span<const int>, const ClassWeights&);
std::unique_ptr<Objective> mlp_objective(const ModelSpec&, const SparseMatrix&,
                                         std::span<const int>, const ClassWeights&);
std::unique_ptr<Objective> cnn_objective(const ModelSpec&, const IndexBatch&,
                                         std::span<const int>, const ClassWeights&);

}  // namespace fdbench::detail
