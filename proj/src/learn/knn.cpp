#include <algorithm>
#include <cmath>

#include "model_state.hpp"

namespace fdbench::detail {
namespace {

// Cosine distance 1 - <a, b> / (|a| |b|); rows with no entries sit at
// distance 1 from everything.
class Knn final : public ModelState {
 public:
  Knn(ModelSpec spec, SparseMatrix train, std::vector<int> labels, ClassWeights weights)
      : ModelState(std::move(spec)),
        train_(std::move(train)),
        labels_(std::move(labels)),
        weights_(weights) {
    norms_.resize(train_.rows());
    postings_.resize(train_.n_cols);
    for (std::size_t r = 0; r < train_.rows(); ++r) {
      SparseRow row = train_.row(r);
      double ss = 0;
      for (std::size_t k = 0; k < row.cols.size(); ++k) {
        ss += row.values[k] * row.values[k];
        postings_[row.cols[k]].push_back({static_cast<std::uint32_t>(r), row.values[k]});
      }
      norms_[r] = std::sqrt(ss);
    }
  }

  std::vector<Prediction> predict_sparse(const SparseMatrix& x) const override {
    if (x.n_cols != train_.n_cols) {
      throw InvalidArgument("kNN: input has " + std::to_string(x.n_cols) + " columns, model " +
                            std::to_string(train_.n_cols));
    }
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(spec.params.knn_k),
                                                train_.rows());
    std::vector<double> dot(train_.rows());
    std::vector<std::pair<double, std::size_t>> dist(train_.rows());
    std::vector<Prediction> out;
    out.reserve(x.rows());
    for (std::size_t q = 0; q < x.rows(); ++q) {
      SparseRow row = x.row(q);
      std::fill(dot.begin(), dot.end(), 0.0);
      double qss = 0;
      for (std::size_t i = 0; i < row.cols.size(); ++i) {
        qss += row.values[i] * row.values[i];
        for (const auto& [r, v] : postings_[row.cols[i]]) dot[r] += row.values[i] * v;
      }
      const double qnorm = std::sqrt(qss);
      for (std::size_t r = 0; r < train_.rows(); ++r) {
        const double denom = qnorm * norms_[r];
        dist[r] = {denom > 0 ? 1.0 - dot[r] / denom : 1.0, r};
      }
      std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
      double pos = 0, all = 0;
      for (std::size_t n = 0; n < k; ++n) {
        const int y = labels_[dist[n].second];
        const double w = weights_.of(y);
        all += w;
        if (y == 1) pos += w;
      }
      const double score = pos / all;
      out.push_back({score >= 0.5 ? 1 : 0, score});
    }
    return out;
  }

  json params() const override {
    std::vector<std::uint32_t> y(labels_.begin(), labels_.end());
    return json{{"train", sparse_to_json(train_)},
                {"labels", encode_u32(y)},
                {"weights", encode_doubles(std::vector<double>{weights_.w_neg, weights_.w_pos})}};
  }

 private:
  struct Posting {
    std::uint32_t row;
    double value;
  };

  SparseMatrix train_;
  std::vector<int> labels_;
  ClassWeights weights_;
  std::vector<double> norms_;
  std::vector<std::vector<Posting>> postings_;
};

}  // namespace

StatePtr train_knn(const ModelSpec& spec, const SparseMatrix& x, std::span<const int> labels,
                   const ClassWeights& weights) {
  return std::make_shared<Knn>(spec, x, std::vector<int>(labels.begin(), labels.end()), weights);
}

StatePtr load_knn(const ModelSpec& spec, const json& p) {
  SparseMatrix train = sparse_from_json(p.at("train"));
  auto y = decode_u32(p.at("labels"));
  auto w = decode_doubles(p.at("weights"));
  if (y.size() != train.rows() || w.size() != 2) throw DataError("kNN: malformed parameters");
  return std::make_shared<Knn>(spec, std::move(train), std::vector<int>(y.begin(), y.end()),
                               ClassWeights{w[0], w[1]});
}

}  // namespace fdbench::detail
