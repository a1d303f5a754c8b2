// Linear SVM (hinge loss, SGD) and logistic regression (full-batch gradient
// descent with Armijo backtracking). Both minimise
//
//   L(w, b) = (1/n) sum_i c_i loss_i(w . x_i + b) + (l2 / 2) |w|^2
//
// where c_i is the class weight of sample i; the bias is not regularised.

#include <cmath>
#include <numeric>

#include "model_state.hpp"

namespace fdbench::detail {
namespace {

double dot(const SparseRow& row, const std::vector<double>& w) {
  double z = 0;
  for (std::size_t k = 0; k < row.cols.size(); ++k) z += row.values[k] * w[row.cols[k]];
  return z;
}

class LinearModel final : public ModelState {
 public:
  LinearModel(ModelSpec spec, std::vector<double> w, double b)
      : ModelState(std::move(spec)), w(std::move(w)), b(b) {}

  std::vector<Prediction> predict_sparse(const SparseMatrix& x) const override {
    if (x.n_cols != w.size()) {
      throw InvalidArgument(std::string(family_name(spec.family)) + ": input has " +
                            std::to_string(x.n_cols) + " columns, model " +
                            std::to_string(w.size()));
    }
    std::vector<Prediction> out;
    out.reserve(x.rows());
    const bool svm = spec.family == Family::kSVM;
    for (std::size_t r = 0; r < x.rows(); ++r) {
      const double z = dot(x.row(r), w) + b;
      if (svm) {
        out.push_back({z >= 0 ? 1 : 0, z});
      } else {
        const double p = sigmoid(z);
        out.push_back({p >= 0.5 ? 1 : 0, p});
      }
    }
    return out;
  }

  json params() const override {
    return json{{"w", encode_doubles(w)}, {"b", encode_doubles(std::vector<double>{b})}};
  }

  std::vector<double> w;
  double b;
};

// Loss and gradient of the objective above for either family.
double linear_loss(Family family, const SparseMatrix& x, std::span<const int> labels,
                   const ClassWeights& cw, double l2, const std::vector<double>& w, double b,
                   std::vector<double>* grad_w, double* grad_b) {
  const double n = static_cast<double>(x.rows());
  double loss = 0;
  if (grad_w) {
    grad_w->assign(w.size(), 0.0);
    *grad_b = 0;
  }
  for (std::size_t r = 0; r < x.rows(); ++r) {
    SparseRow row = x.row(r);
    const double z = dot(row, w) + b;
    const int y = labels[r];
    const double c = cw.of(y) / n;
    double dz = 0;
    if (family == Family::kLR) {
      loss += c * bce_with_logit(z, y);
      dz = c * (sigmoid(z) - y);
    } else {
      const double t = y == 1 ? 1.0 : -1.0;
      const double margin = t * z;
      if (margin < 1) {
        loss += c * (1 - margin);
        dz = -c * t;
      }
    }
    if (grad_w && dz != 0) {
      for (std::size_t k = 0; k < row.cols.size(); ++k) (*grad_w)[row.cols[k]] += dz * row.values[k];
      *grad_b += dz;
    }
  }
  double ss = 0;
  for (double v : w) ss += v * v;
  loss += 0.5 * l2 * ss;
  if (grad_w) {
    for (std::size_t j = 0; j < w.size(); ++j) (*grad_w)[j] += l2 * w[j];
  }
  return loss;
}

std::shared_ptr<LinearModel> fit_logistic(const ModelSpec& spec, const SparseMatrix& x,
                                          std::span<const int> labels, const ClassWeights& cw) {
  const Hyperparams& h = spec.params;
  std::vector<double> w(x.n_cols, 0.0), gw, trial_w(x.n_cols);
  double b = 0, gb = 0;
  double loss = linear_loss(Family::kLR, x, labels, cw, h.l2, w, b, &gw, &gb);
  double step = 1.0;
  for (int it = 0; it < h.lr_max_iter; ++it) {
    double gnorm2 = gb * gb, gmax = std::abs(gb);
    for (double g : gw) {
      gnorm2 += g * g;
      gmax = std::max(gmax, std::abs(g));
    }
    if (gmax <= h.lr_tol) break;
    step = std::min(step * 2.0, 1e6);
    double trial_loss = 0, trial_b = 0;
    for (;;) {
      for (std::size_t j = 0; j < w.size(); ++j) trial_w[j] = w[j] - step * gw[j];
      trial_b = b - step * gb;
      trial_loss = linear_loss(Family::kLR, x, labels, cw, h.l2, trial_w, trial_b, nullptr, nullptr);
      if (trial_loss <= loss - 1e-4 * step * gnorm2 || step < 1e-12) break;
      step *= 0.5;
    }
    if (step < 1e-12) break;
    w.swap(trial_w);
    b = trial_b;
    loss = linear_loss(Family::kLR, x, labels, cw, h.l2, w, b, &gw, &gb);
  }
  return std::make_shared<LinearModel>(spec, std::move(w), b);
}

// Plain SGD with eta_t = eta0 / (1 + eta0 * l2 * t). The weight vector is kept
// as scale * v so the l2 shrink step costs O(1) per sample.
std::shared_ptr<LinearModel> fit_svm(const ModelSpec& spec, const SparseMatrix& x,
                                     std::span<const int> labels, const ClassWeights& cw) {
  const Hyperparams& h = spec.params;
  std::vector<double> v(x.n_cols, 0.0);
  double scale = 1.0, b = 0;
  Rng rng(mix_seed(spec.seed, "svm-shuffle"));
  std::vector<std::size_t> order(x.rows());
  std::iota(order.begin(), order.end(), 0);
  std::uint64_t t = 0;
  for (int epoch = 0; epoch < h.svm_epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t r : order) {
      const double eta = h.svm_eta0 / (1.0 + h.svm_eta0 * h.l2 * static_cast<double>(t));
      ++t;
      SparseRow row = x.row(r);
      const double z = scale * dot(row, v) + b;
      const double y = labels[r] == 1 ? 1.0 : -1.0;
      const double shrink = 1.0 - eta * h.l2;
      if (shrink > 0) {
        scale *= shrink;
      } else {
        std::fill(v.begin(), v.end(), 0.0);
        scale = 1.0;
      }
      if (y * z < 1) {
        const double step = eta * cw.of(labels[r]) * y;
        for (std::size_t k = 0; k < row.cols.size(); ++k) v[row.cols[k]] += step / scale * row.values[k];
        b += step;
      }
      if (scale < 1e-9) {
        for (double& e : v) e *= scale;
        scale = 1.0;
      }
    }
  }
  for (double& e : v) e *= scale;
  return std::make_shared<LinearModel>(spec, std::move(v), b);
}

class LinearObjective final : public Objective {
 public:
  LinearObjective(const ModelSpec& spec, const SparseMatrix& x, std::span<const int> labels,
                  const ClassWeights& cw)
      : spec_(spec), x_(x), labels_(labels.begin(), labels.end()), cw_(cw) {
    Rng rng(mix_seed(spec.seed, "gradient-check-init"));
    w_.resize(x.n_cols);
    for (double& e : w_) e = rng.uniform(-0.5, 0.5);
    b_ = rng.uniform(-0.5, 0.5);
    gw_.assign(w_.size(), 0.0);
  }

  std::vector<ParamRef> params() override {
    return {{w_.data(), gw_.data(), w_.size()}, {&b_, &gb_, 1}};
  }

  double evaluate(bool want_grad) override {
    return linear_loss(spec_.family, x_, labels_, cw_, spec_.params.l2, w_, b_,
                       want_grad ? &gw_ : nullptr, want_grad ? &gb_ : nullptr);
  }

 private:
  ModelSpec spec_;
  const SparseMatrix& x_;
  std::vector<int> labels_;
  ClassWeights cw_;
  std::vector<double> w_, gw_;
  double b_ = 0, gb_ = 0;
};

}  // namespace

StatePtr train_linear(const ModelSpec& spec, const SparseMatrix& x, std::span<const int> labels,
                      const ClassWeights& weights) {
  if (spec.family == Family::kLR) return fit_logistic(spec, x, labels, weights);
  return fit_svm(spec, x, labels, weights);
}

StatePtr load_linear(const ModelSpec& spec, const json& p) {
  auto w = decode_doubles(p.at("w"));
  auto b = decode_doubles(p.at("b"));
  if (b.size() != 1) throw DataError("linear model: malformed bias");
  return std::make_shared<LinearModel>(spec, std::move(w), b[0]);
}

std::unique_ptr<Objective> linear_objective(const ModelSpec& spec, const SparseMatrix& x,
                                            std::span<const int> labels,
                                            const ClassWeights& weights) {
  return std::make_unique<LinearObjective>(spec, x, labels, weights);
}

}  // namespace fdbench::detail
