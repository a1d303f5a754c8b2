// Multinomial naive Bayes over non-negative feature weights (TF-IDF by default).

#include <cmath>

#include "model_state.hpp"

namespace fdbench::detail {
namespace {

class NaiveBayes final : public ModelState {
 public:
  NaiveBayes(ModelSpec spec, std::size_t n_features) : ModelState(std::move(spec)) {
    for (auto& lt : log_theta) lt.assign(n_features, 0.0);
  }

  std::vector<Prediction> predict_sparse(const SparseMatrix& x) const override {
    if (x.n_cols != log_theta[0].size()) {
      throw InvalidArgument("NB: input has " + std::to_string(x.n_cols) + " columns, model " +
                            std::to_string(log_theta[0].size()));
    }
    std::vector<Prediction> out;
    out.reserve(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) {
      SparseRow row = x.row(r);
      double joint[2] = {log_prior[0], log_prior[1]};
      for (std::size_t k = 0; k < row.cols.size(); ++k) {
        for (int c = 0; c < 2; ++c) joint[c] += row.values[k] * log_theta[c][row.cols[k]];
      }
      const double p = sigmoid(joint[1] - joint[0]);
      out.push_back({p >= 0.5 ? 1 : 0, p});
    }
    return out;
  }

  json params() const override {
    return json{{"log_prior", encode_doubles(log_prior)},
                {"log_theta_neg", encode_doubles(log_theta[0])},
                {"log_theta_pos", encode_doubles(log_theta[1])}};
  }

  std::array<double, 2> log_prior{};
  std::array<std::vector<double>, 2> log_theta;
};

}  // namespace

StatePtr train_naive_bayes(const ModelSpec& spec, const SparseMatrix& x,
                           std::span<const int> labels, const ClassWeights& weights) {
  const std::size_t v = x.n_cols;
  auto nb = std::make_shared<NaiveBayes>(spec, v);
  const double alpha = spec.params.nb_alpha;

  std::array<double, 2> class_mass{0, 0};
  std::array<std::vector<double>, 2> feature_mass{std::vector<double>(v, 0.0),
                                                  std::vector<double>(v, 0.0)};
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const int c = labels[r];
    const double w = weights.of(c);
    class_mass[c] += w;
    SparseRow row = x.row(r);
    for (std::size_t k = 0; k < row.cols.size(); ++k) {
      if (row.values[k] < 0) throw InvalidArgument("NB: feature weights must be non-negative");
      feature_mass[c][row.cols[k]] += w * row.values[k];
    }
  }
  const double total_mass = class_mass[0] + class_mass[1];
  for (int c = 0; c < 2; ++c) {
    nb->log_prior[c] = std::log(class_mass[c] / total_mass);
    double denom = alpha * static_cast<double>(v);
    for (double m : feature_mass[c]) denom += m;
    for (std::size_t j = 0; j < v; ++j) {
      nb->log_theta[c][j] = std::log((feature_mass[c][j] + alpha) / denom);
    }
  }
  return nb;
}

StatePtr load_naive_bayes(const ModelSpec& spec, const json& p) {
  auto prior = decode_doubles(p.at("log_prior"));
  auto neg = decode_doubles(p.at("log_theta_neg"));
  auto pos = decode_doubles(p.at("log_theta_pos"));
  if (prior.size() != 2 || neg.size() != pos.size()) throw DataError("NB: malformed parameters");
  auto nb = std::make_shared<NaiveBayes>(spec, neg.size());
  nb->log_prior = {prior[0], prior[1]};
  nb->log_theta = {std::move(neg), std::move(pos)};
  return nb;
}

}  // namespace fdbench::detail
