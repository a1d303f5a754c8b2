#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <numeric>
#include <unordered_set>

#include "model_state.hpp"

namespace fdbench {

using detail::json;

namespace {

struct FamilyInfo {
  Family family;
  std::string_view name;
};

constexpr std::array<FamilyInfo, 8> kFamilies = {{
    {Family::kNB, "NB"},
    {Family::kKNN, "KNN"},
    {Family::kSVM, "SVM"},
    {Family::kLR, "LR"},
    {Family::kRF, "RF"},
    {Family::kMLP, "MLP"},
    {Family::kCNN1L, "CNN1L"},
    {Family::kCNN2L, "CNN2L"},
}};

std::string upper_alnum(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
  }
  return out;
}

json hyperparams_to_json(const Hyperparams& h) {
  return json{
      {"alpha", h.nb_alpha},
      {"k", h.knn_k},
      {"l2", h.l2},
      {"svm_epochs", h.svm_epochs},
      {"eta0", h.svm_eta0},
      {"max_iter", h.lr_max_iter},
      {"tol", h.lr_tol},
      {"trees", h.rf_trees},
      {"max_features", h.rf_max_features},
      {"bootstrap", h.rf_bootstrap},
      {"hidden_units", h.hidden_units},
      {"hidden_layers", h.hidden_layers},
      {"dropout", h.dropout},
      {"learning_rate", h.learning_rate},
      {"beta1", h.adam_beta1},
      {"beta2", h.adam_beta2},
      {"adam_epsilon", h.adam_epsilon},
      {"epochs", h.epochs},
      {"batch_size", h.batch_size},
      {"max_len", h.max_len},
      {"embed_dim", h.embed_dim},
      {"embed_init", h.embed_init},
      {"feature_maps", h.feature_maps},
      {"kernel_h", h.kernel_h},
      {"kernel_w", h.kernel_w},
      {"pool_h", h.pool_h},
      {"pool_w", h.pool_w},
      {"padding", h.padding == Padding::kSame ? "same" : "valid"},
      {"dense_units", h.dense_units},
  };
}

void apply_json(Hyperparams& h, const json& j) {
  if (!j.is_object()) throw ConfigError("hyperparameter overrides must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "alpha") h.nb_alpha = value.get<double>();
      else if (key == "k") h.knn_k = value.get<int>();
      else if (key == "l2") h.l2 = value.get<double>();
      else if (key == "svm_epochs") h.svm_epochs = value.get<int>();
      else if (key == "eta0") h.svm_eta0 = value.get<double>();
      else if (key == "max_iter") h.lr_max_iter = value.get<int>();
      else if (key == "tol") h.lr_tol = value.get<double>();
      else if (key == "trees") h.rf_trees = value.get<int>();
      else if (key == "max_features") h.rf_max_features = value.get<int>();
      else if (key == "bootstrap") h.rf_bootstrap = value.get<bool>();
      else if (key == "hidden_units") h.hidden_units = value.get<int>();
      else if (key == "hidden_layers") h.hidden_layers = value.get<int>();
      else if (key == "dropout") h.dropout = value.get<double>();
      else if (key == "learning_rate") h.learning_rate = value.get<double>();
      else if (key == "beta1") h.adam_beta1 = value.get<double>();
      else if (key == "beta2") h.adam_beta2 = value.get<double>();
      else if (key == "adam_epsilon") h.adam_epsilon = value.get<double>();
      else if (key == "epochs") h.epochs = value.get<int>();
      else if (key == "batch_size") h.batch_size = value.get<int>();
      else if (key == "max_len") h.max_len = value.get<int>();
      else if (key == "embed_dim") h.embed_dim = value.get<int>();
      else if (key == "embed_init") h.embed_init = value.get<double>();
      else if (key == "feature_maps") h.feature_maps = value.get<int>();
      else if (key == "kernel_h") h.kernel_h = value.get<int>();
      else if (key == "kernel_w") h.kernel_w = value.get<int>();
      else if (key == "pool_h") h.pool_h = value.get<int>();
      else if (key == "pool_w") h.pool_w = value.get<int>();
      else if (key == "dense_units") h.dense_units = value.get<int>();
      else if (key == "padding") {
        const auto p = value.get<std::string>();
        if (p == "same") h.padding = Padding::kSame;
        else if (p == "valid") h.padding = Padding::kValid;
        else throw ConfigError("padding must be 'same' or 'valid'");
      } else {
        throw ConfigError("unknown hyperparameter '" + key + "'");
      }
    } catch (const json::exception& e) {
      throw ConfigError("hyperparameter '" + key + "': " + e.what());
    }
  }
}

void require(bool ok, Family f, const std::string& what) {
  if (!ok) throw ConfigError(std::string(family_name(f)) + ": " + what);
}

}  // namespace

std::string_view family_name(Family f) {
  for (const auto& info : kFamilies) {
    if (info.family == f) return info.name;
  }
  return "?";
}

std::optional<Family> parse_family(std::string_view name) {
  const std::string norm = upper_alnum(name);
  for (const auto& info : kFamilies) {
    if (info.name == norm) return info.family;
  }
  if (norm == "NAIVEBAYES") return Family::kNB;
  if (norm == "LOGREG") return Family::kLR;
  return std::nullopt;
}

bool uses_index_input(Family f) { return f == Family::kCNN1L || f == Family::kCNN2L; }
bool is_neural(Family f) { return f == Family::kMLP || uses_index_input(f); }
bool is_differentiable(Family f) {
  return f == Family::kLR || f == Family::kSVM || is_neural(f);
}

void ModelSpec::validate() const {
  const Hyperparams& h = params;
  switch (family) {
    case Family::kNB:
      require(h.nb_alpha > 0, family, "alpha must be > 0");
      break;
    case Family::kKNN:
      require(h.knn_k >= 1, family, "k must be >= 1");
      break;
    case Family::kSVM:
      require(h.l2 >= 0, family, "l2 must be >= 0");
      require(h.svm_epochs >= 1, family, "svm_epochs must be >= 1");
      require(h.svm_eta0 > 0, family, "eta0 must be > 0");
      break;
    case Family::kLR:
      require(h.l2 >= 0, family, "l2 must be >= 0");
      require(h.lr_max_iter >= 1, family, "max_iter must be >= 1");
      require(h.lr_tol >= 0, family, "tol must be >= 0");
      break;
    case Family::kRF:
      require(h.rf_trees >= 1, family, "trees must be >= 1");
      require(h.rf_max_features >= 0, family, "max_features must be >= 0");
      break;
    case Family::kMLP:
    case Family::kCNN1L:
    case Family::kCNN2L: {
      require(h.dropout >= 0 && h.dropout < 1, family, "dropout must be in [0, 1)");
      require(h.learning_rate > 0, family, "learning_rate must be > 0");
      require(h.adam_beta1 >= 0 && h.adam_beta1 < 1, family, "beta1 must be in [0, 1)");
      require(h.adam_beta2 >= 0 && h.adam_beta2 < 1, family, "beta2 must be in [0, 1)");
      require(h.adam_epsilon > 0, family, "adam_epsilon must be > 0");
      require(h.epochs >= 1, family, "epochs must be >= 1");
      require(h.batch_size >= 1, family, "batch_size must be >= 1");
      if (family == Family::kMLP) {
        require(h.hidden_units >= 1, family, "hidden_units must be >= 1");
        require(h.hidden_layers >= 1, family, "hidden_layers must be >= 1");
        break;
      }
      require(h.max_len >= 1, family, "max_len must be >= 1");
      require(h.embed_dim >= 1, family, "embed_dim must be >= 1");
      require(h.embed_init >= 0, family, "embed_init must be >= 0");
      require(h.feature_maps >= 1, family, "feature_maps must be >= 1");
      require(h.kernel_h >= 1 && h.kernel_w >= 1, family, "kernel must be >= 1x1");
      require(h.pool_h >= 1 && h.pool_w >= 1, family, "pool must be >= 1x1");
      require(h.dense_units >= 0, family, "dense_units must be >= 0");
      long rows = h.max_len, cols = h.embed_dim;
      const int layers = family == Family::kCNN1L ? 1 : 2;
      for (int l = 0; l < layers; ++l) {
        if (h.padding == Padding::kValid) {
          rows -= h.kernel_h - 1;
          cols -= h.kernel_w - 1;
        }
        require(rows >= 1 && cols >= 1, family,
                "convolution " + std::to_string(l + 1) + " does not fit the input map");
        rows /= h.pool_h;
        cols /= h.pool_w;
        require(rows >= 1 && cols >= 1, family,
                "pooling " + std::to_string(l + 1) + " leaves an empty map");
      }
      break;
    }
  }
}

std::string ModelSpec::to_json() const {
  json j{{"family", family_name(family)}, {"seed", seed}, {"params", hyperparams_to_json(params)}};
  return j.dump();
}

ModelSpec ModelSpec::from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model spec JSON: ") + e.what());
  }
  ModelSpec s;
  auto fam = parse_family(j.value("family", std::string{}));
  if (!fam) throw ConfigError("model spec: unknown family");
  s.family = *fam;
  s.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("params")) apply_json(s.params, j["params"]);
  return s;
}

Hyperparams apply_overrides(Hyperparams base, std::string_view json_object) {
  json j;
  try {
    j = json::parse(json_object);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("hyperparameter overrides: ") + e.what());
  }
  apply_json(base, j);
  return base;
}

// ---------------------------------------------------------------------------

TrainedModel::TrainedModel(std::shared_ptr<const detail::ModelState> state)
    : state_(std::move(state)) {}

Family TrainedModel::family() const { return state_->spec.family; }
const ModelSpec& TrainedModel::spec() const { return state_->spec; }

std::vector<Prediction> TrainedModel::predict(const SparseMatrix& x) const {
  return state_->predict_sparse(x);
}

std::vector<Prediction> TrainedModel::predict(const IndexBatch& x) const {
  return state_->predict_index(x);
}

std::string TrainedModel::save() const {
  json spec = json::parse(state_->spec.to_json());
  json j{{"format", "fdbench-model"},
         {"format_version", 1},
         {"family", family_name(family())},
         {"seed", state_->spec.seed},
         {"spec", spec},
         {"params", state_->params()}};
  return j.dump();
}

TrainedModel TrainedModel::load(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("model file: ") + e.what());
  }
  if (j.value("format", std::string{}) != "fdbench-model") {
    throw DataError("model file: not an fdbench model");
  }
  if (j.value("format_version", 0) != 1) throw DataError("model file: unsupported format_version");
  ModelSpec spec = ModelSpec::from_json(j.at("spec").dump());
  const json& p = j.at("params");
  try {
    switch (spec.family) {
      case Family::kNB: return TrainedModel(detail::load_naive_bayes(spec, p));
      case Family::kKNN: return TrainedModel(detail::load_knn(spec, p));
      case Family::kSVM:
      case Family::kLR: return TrainedModel(detail::load_linear(spec, p));
      case Family::kRF: return TrainedModel(detail::load_forest(spec, p));
      case Family::kMLP: return TrainedModel(detail::load_mlp(spec, p));
      case Family::kCNN1L:
      case Family::kCNN2L: return TrainedModel(detail::load_cnn(spec, p));
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("model file: ") + e.what());
  }
  throw DataError("model file: unknown family");
}

TrainedModel train(const ModelSpec& spec, const SparseMatrix& x, std::span<const int> labels,
                   const ClassWeights& weights) {
  spec.validate();
  detail::check_training_set(x.rows(), labels);
  switch (spec.family) {
    case Family::kNB: return TrainedModel(detail::train_naive_bayes(spec, x, labels, weights));
    case Family::kKNN: return TrainedModel(detail::train_knn(spec, x, labels, weights));
    case Family::kSVM:
    case Family::kLR: return TrainedModel(detail::train_linear(spec, x, labels, weights));
    case Family::kRF: return TrainedModel(detail::train_forest(spec, x, labels, weights));
    case Family::kMLP: return TrainedModel(detail::train_mlp(spec, x, labels, weights));
    case Family::kCNN1L:
    case Family::kCNN2L:
      break;
  }
  throw InvalidArgument(std::string(family_name(spec.family)) +
                        " trains on index sequences, not TF-IDF rows");
}

TrainedModel train(const ModelSpec& spec, const IndexBatch& x, std::span<const int> labels,
                   const ClassWeights& weights) {
  spec.validate();
  if (!uses_index_input(spec.family)) {
    throw InvalidArgument(std::string(family_name(spec.family)) +
                          " trains on TF-IDF rows, not index sequences");
  }
  if (x.max_len != static_cast<std::size_t>(spec.params.max_len)) {
    throw InvalidArgument("index batch max_len does not match the model's max_len");
  }
  detail::check_training_set(x.rows(), labels);
  return TrainedModel(detail::train_cnn(spec, x, labels, weights));
}

// ---------------------------------------------------------------------------

namespace {

GradientCheckResult run_gradient_check(detail::Objective& obj, const ModelSpec& spec,
                                       double epsilon) {
  std::vector<detail::ParamRef> params = obj.params();
  std::size_t total = 0;
  for (const auto& p : params) total += p.size;

  obj.evaluate(true);
  std::vector<double> analytic;
  analytic.reserve(total);
  for (const auto& p : params) analytic.insert(analytic.end(), p.grad, p.grad + p.size);

  constexpr std::size_t kMinChecked = 200;
  std::vector<std::size_t> picks;
  if (total <= kMinChecked) {
    picks.resize(total);
    std::iota(picks.begin(), picks.end(), 0);
  } else {
    Rng rng(mix_seed(spec.seed, "gradient-check"));
    std::unordered_set<std::size_t> chosen;
    while (chosen.size() < kMinChecked) chosen.insert(rng.below(total));
    picks.assign(chosen.begin(), chosen.end());
    std::sort(picks.begin(), picks.end());
  }

  GradientCheckResult result;
  result.n_parameters = total;
  for (std::size_t flat : picks) {
    std::size_t block = 0, offset = flat;
    while (offset >= params[block].size) offset -= params[block++].size;
    double* slot = params[block].value + offset;
    const double saved = *slot;
    *slot = saved + epsilon;
    const double up = obj.evaluate(false);
    *slot = saved - epsilon;
    const double down = obj.evaluate(false);
    *slot = saved;
    const double numeric = (up - down) / (2 * epsilon);
    const double a = analytic[flat];
    const double denom = std::max({std::abs(a), std::abs(numeric), 1e-6});
    result.max_relative_error = std::max(result.max_relative_error, std::abs(a - numeric) / denom);
    ++result.n_checked;
  }
  return result;
}

void check_gradient_args(const ModelSpec& spec, double epsilon) {
  if (!is_differentiable(spec.family)) {
    throw InvalidArgument(std::string("gradient_check: ") + std::string(family_name(spec.family)) +
                          " is not a gradient-trained family");
  }
  if (!(epsilon > 0)) throw InvalidArgument("gradient_check: epsilon must be > 0");
  spec.validate();
}

}  // namespace

GradientCheckResult gradient_check(const ModelSpec& spec, const SparseMatrix& batch,
                                   std::span<const int> labels, const ClassWeights& weights,
                                   double epsilon) {
  check_gradient_args(spec, epsilon);
  if (batch.rows() < 1 || batch.rows() != labels.size()) {
    throw InvalidArgument("gradient_check: batch must be non-empty and match labels");
  }
  std::unique_ptr<detail::Objective> obj;
  if (spec.family == Family::kMLP) {
    obj = detail::mlp_objective(spec, batch, labels, weights);
  } else if (spec.family == Family::kLR || spec.family == Family::kSVM) {
    obj = detail::linear_objective(spec, batch, labels, weights);
  } else {
    throw InvalidArgument("gradient_check: CNN families take index-sequence batches");
  }
  return run_gradient_check(*obj, spec, epsilon);
}

GradientCheckResult gradient_check(const ModelSpec& spec, const IndexBatch& batch,
                                   std::span<const int> labels, const ClassWeights& weights,
                                   double epsilon) {
  check_gradient_args(spec, epsilon);
  if (!uses_index_input(spec.family)) {
    throw InvalidArgument("gradient_check: only CNN families take index-sequence batches");
  }
  if (batch.rows() < 1 || batch.rows() != labels.size()) {
    throw InvalidArgument("gradient_check: batch must be non-empty and match labels");
  }
  auto obj = detail::cnn_objective(spec, batch, labels, weights);
  return run_gradient_check(*obj, spec, epsilon);
}

// ---------------------------------------------------------------------------

namespace detail {

namespace {

std::string base64(const unsigned char* data, std::size_t n) {
  std::string out(4 * ((n + 2) / 3), '\0');
  const int len = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), data,
                                  static_cast<int>(n));
  out.resize(static_cast<std::size_t>(len));
  return out;
}

std::vector<unsigned char> unbase64(const std::string& text) {
  if (text.size() % 4 != 0) throw DataError("model file: bad base64 length");
  std::vector<unsigned char> out(3 * text.size() / 4);
  const int len = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                  static_cast<int>(text.size()));
  if (len < 0) throw DataError("model file: bad base64 payload");
  std::size_t pad = 0;
  if (!text.empty() && text.back() == '=') ++pad;
  if (text.size() > 1 && text[text.size() - 2] == '=') ++pad;
  out.resize(static_cast<std::size_t>(len) - pad);
  return out;
}

template <typename T>
std::string encode_le(std::span<const T> v) {
  std::vector<unsigned char> bytes(v.size() * sizeof(T));
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &v[i], sizeof(T));
    for (std::size_t b = 0; b < sizeof(T); ++b) {
      bytes[i * sizeof(T) + b] = static_cast<unsigned char>(bits >> (8 * b));
    }
  }
  return base64(bytes.data(), bytes.size());
}

template <typename T>
std::vector<T> decode_le(const json& blob) {
  std::vector<unsigned char> bytes = unbase64(blob.get<std::string>());
  if (bytes.size() % sizeof(T) != 0) throw DataError("model file: blob size mismatch");
  std::vector<T> out(bytes.size() / sizeof(T));
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint64_t bits = 0;
    for (std::size_t b = 0; b < sizeof(T); ++b) {
      bits |= static_cast<std::uint64_t>(bytes[i * sizeof(T) + b]) << (8 * b);
    }
    std::memcpy(&out[i], &bits, sizeof(T));
  }
  return out;
}

}  // namespace

std::string encode_doubles(std::span<const double> v) { return encode_le(v); }
std::vector<double> decode_doubles(const json& blob) { return decode_le<double>(blob); }
std::string encode_u32(std::span<const std::uint32_t> v) { return encode_le(v); }
std::vector<std::uint32_t> decode_u32(const json& blob) { return decode_le<std::uint32_t>(blob); }
std::string encode_u64(std::span<const std::uint64_t> v) { return encode_le(v); }
std::vector<std::uint64_t> decode_u64(const json& blob) { return decode_le<std::uint64_t>(blob); }

json sparse_to_json(const SparseMatrix& m) {
  std::vector<std::uint64_t> ptr(m.row_ptr.begin(), m.row_ptr.end());
  return json{{"n_cols", m.n_cols},
              {"row_ptr", encode_u64(ptr)},
              {"cols", encode_u32(m.cols)},
              {"values", encode_doubles(m.values)}};
}

SparseMatrix sparse_from_json(const json& j) {
  SparseMatrix m;
  m.n_cols = j.at("n_cols").get<std::size_t>();
  auto ptr = decode_u64(j.at("row_ptr"));
  m.row_ptr.assign(ptr.begin(), ptr.end());
  m.cols = decode_u32(j.at("cols"));
  m.values = decode_doubles(j.at("values"));
  if (m.row_ptr.empty() || m.row_ptr.back() != m.values.size() ||
      m.cols.size() != m.values.size()) {
    throw DataError("model file: inconsistent sparse matrix");
  }
  return m;
}

double sigmoid(double z) {
  if (z >= 0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double bce_with_logit(double z, int y) {
  // -y log s(z) - (1 - y) log(1 - s(z)) = max(z, 0) - y z + log(1 + exp(-|z|))
  return std::max(z, 0.0) - (y == 1 ? z : 0.0) + std::log1p(std::exp(-std::abs(z)));
}

void check_training_set(std::size_t n_rows, std::span<const int> labels) {
  if (n_rows != labels.size()) {
    throw InvalidArgument("training data has " + std::to_string(n_rows) + " rows but " +
                          std::to_string(labels.size()) + " labels");
  }
  if (n_rows < 2) throw InvalidArgument("training needs at least 2 samples");
  bool pos = false, neg = false;
  for (int y : labels) {
    if (y != 0 && y != 1) throw InvalidArgument("labels must be 0 or 1");
    (y == 1 ? pos : neg) = true;
  }
  if (!pos || !neg) throw DataError("training set contains a single class");
}

}  // namespace detail
}  // namespace fdbench
