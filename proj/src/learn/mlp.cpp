// Feed-forward network on TF-IDF rows: hidden_layers x (dense, ReLU, dropout)
// and a single logit trained with class-weighted binary cross-entropy.

#include <numeric>

#include "nn.hpp"

namespace fdbench::detail {
namespace {

struct MlpParams {
  std::size_t n_in = 0;
  std::vector<std::size_t> widths;        // hidden layer widths
  std::vector<std::vector<double>> w, b;  // w[0] is n_in x widths[0], feature-major
  std::vector<double> w_out;
  std::vector<double> b_out{0.0};

  std::size_t layers() const { return widths.size(); }
  std::size_t fan_in(std::size_t l) const { return l == 0 ? n_in : widths[l - 1]; }
};

MlpParams init_mlp(const ModelSpec& spec, std::size_t n_in, std::uint64_t seed, bool random_bias) {
  MlpParams p;
  p.n_in = n_in;
  p.widths.assign(static_cast<std::size_t>(spec.params.hidden_layers),
                  static_cast<std::size_t>(spec.params.hidden_units));
  Rng rng(seed);
  for (std::size_t l = 0; l < p.layers(); ++l) {
    p.w.emplace_back(p.fan_in(l) * p.widths[l]);
    glorot_uniform(rng, p.w.back(), p.fan_in(l), p.widths[l]);
    p.b.emplace_back(p.widths[l], 0.0);
  }
  p.w_out.resize(p.widths.back());
  glorot_uniform(rng, p.w_out, p.widths.back(), 1);
  if (random_bias) {
    // Keeps ReLU pre-activations away from the kink for finite differences.
    for (auto& b : p.b) {
      for (double& e : b) e = rng.uniform(-0.1, 0.1);
    }
    p.b_out[0] = rng.uniform(-0.1, 0.1);
  }
  return p;
}

// Parameters plus gradient buffers of the same shapes.
class MlpNet {
 public:
  explicit MlpNet(MlpParams params) : p(std::move(params)) {
    for (std::size_t l = 0; l < p.layers(); ++l) {
      gw.emplace_back(p.w[l].size(), 0.0);
      gb.emplace_back(p.b[l].size(), 0.0);
    }
    gw_out.assign(p.w_out.size(), 0.0);
  }

  std::vector<ParamRef> refs() {
    std::vector<ParamRef> out;
    for (std::size_t l = 0; l < p.layers(); ++l) {
      out.push_back({p.w[l].data(), gw[l].data(), p.w[l].size()});
      out.push_back({p.b[l].data(), gb[l].data(), p.b[l].size()});
    }
    out.push_back({p.w_out.data(), gw_out.data(), p.w_out.size()});
    out.push_back({p.b_out.data(), &gb_out, 1});
    return out;
  }

  /// Logits for the given rows. With `rng`, applies dropout and keeps the
  /// activations needed by backward().
  Eigen::VectorXd forward(const SparseMatrix& x, std::span<const std::size_t> rows, Rng* rng,
                          double dropout) {
    const auto n = static_cast<Eigen::Index>(rows.size());
    pre_.assign(p.layers(), {});
    act_.assign(p.layers(), {});
    mask_.assign(p.layers(), {});
    for (std::size_t l = 0; l < p.layers(); ++l) {
      const auto width = static_cast<Eigen::Index>(p.widths[l]);
      RowMat z(n, width);
      if (l == 0) {
        ConstMatMap w0(p.w[0].data(), static_cast<Eigen::Index>(p.n_in), width);
        z.setZero();
        for (Eigen::Index i = 0; i < n; ++i) {
          SparseRow row = x.row(rows[static_cast<std::size_t>(i)]);
          for (std::size_t k = 0; k < row.cols.size(); ++k) {
            z.row(i) += row.values[k] * w0.row(row.cols[k]);
          }
        }
      } else {
        ConstMatMap wl(p.w[l].data(), static_cast<Eigen::Index>(p.fan_in(l)), width);
        z.noalias() = act_[l - 1] * wl;
      }
      z.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(p.b[l].data(), width);
      RowMat a = z.cwiseMax(0.0);
      if (rng && dropout > 0) {
        RowMat m(n, width);
        dropout_mask(*rng, dropout, m.data(), static_cast<std::size_t>(m.size()));
        a.array() *= m.array();
        mask_[l] = std::move(m);
      }
      pre_[l] = std::move(z);
      act_[l] = std::move(a);
    }
    Eigen::VectorXd logits =
        act_.back() * Eigen::Map<const Eigen::VectorXd>(p.w_out.data(),
                                                        static_cast<Eigen::Index>(p.w_out.size()));
    logits.array() += p.b_out[0];
    return logits;
  }

  /// Accumulates parameter gradients given dL/dlogit per row (after forward()).
  void backward(const SparseMatrix& x, std::span<const std::size_t> rows,
                const Eigen::VectorXd& dlogit) {
    const std::size_t top = p.layers() - 1;
    VecMap(gw_out.data(), static_cast<Eigen::Index>(gw_out.size())) +=
        act_[top].transpose() * dlogit;
    gb_out += dlogit.sum();
    RowMat da = dlogit *
                Eigen::Map<const Eigen::RowVectorXd>(p.w_out.data(),
                                                     static_cast<Eigen::Index>(p.w_out.size()));
    for (std::size_t l = p.layers(); l-- > 0;) {
      const auto width = static_cast<Eigen::Index>(p.widths[l]);
      RowMat dz = (pre_[l].array() > 0).select(da, 0.0);
      if (mask_[l].size()) dz.array() *= mask_[l].array();
      Eigen::Map<Eigen::RowVectorXd>(gb[l].data(), width) += dz.colwise().sum();
      if (l == 0) {
        MatMap g0(gw[0].data(), static_cast<Eigen::Index>(p.n_in), width);
        for (Eigen::Index i = 0; i < dz.rows(); ++i) {
          SparseRow row = x.row(rows[static_cast<std::size_t>(i)]);
          for (std::size_t k = 0; k < row.cols.size(); ++k) {
            g0.row(row.cols[k]) += row.values[k] * dz.row(i);
          }
        }
      } else {
        const auto fan = static_cast<Eigen::Index>(p.fan_in(l));
        MatMap(gw[l].data(), fan, width) += act_[l - 1].transpose() * dz;
        da = dz * ConstMatMap(p.w[l].data(), fan, width).transpose();
      }
    }
  }

  MlpParams p;
  std::vector<std::vector<double>> gw, gb;
  std::vector<double> gw_out;
  double gb_out = 0;

 private:
  std::vector<RowMat> pre_, act_, mask_;
};

// Weighted mean BCE over the rows; fills dlogit with its derivative.
double weighted_bce(const Eigen::VectorXd& logits, std::span<const int> labels,
                    std::span<const std::size_t> rows, const ClassWeights& cw,
                    Eigen::VectorXd& dlogit) {
  const double inv_n = 1.0 / static_cast<double>(rows.size());
  dlogit.resize(logits.size());
  double loss = 0;
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    const int y = labels[rows[static_cast<std::size_t>(i)]];
    const double c = cw.of(y) * inv_n;
    loss += c * bce_with_logit(logits[i], y);
    dlogit[i] = c * (sigmoid(logits[i]) - y);
  }
  return loss;
}

class MlpModel final : public ModelState {
 public:
  MlpModel(ModelSpec spec, MlpParams params) : ModelState(std::move(spec)), net_(std::move(params)) {}

  std::vector<Prediction> predict_sparse(const SparseMatrix& x) const override {
    if (x.n_cols != net_.p.n_in) {
      throw InvalidArgument("MLP: input has " + std::to_string(x.n_cols) + " columns, model " +
                            std::to_string(net_.p.n_in));
    }
    std::vector<std::size_t> rows(x.rows());
    std::iota(rows.begin(), rows.end(), 0);
    MlpNet net = net_;  // forward() keeps activations
    Eigen::VectorXd logits = net.forward(x, rows, nullptr, 0.0);
    std::vector<Prediction> out;
    out.reserve(rows.size());
    for (Eigen::Index i = 0; i < logits.size(); ++i) {
      const double s = sigmoid(logits[i]);
      out.push_back({s >= 0.5 ? 1 : 0, s});
    }
    return out;
  }

  json params() const override {
    json w = json::array(), b = json::array();
    for (std::size_t l = 0; l < net_.p.layers(); ++l) {
      w.push_back(encode_doubles(net_.p.w[l]));
      b.push_back(encode_doubles(net_.p.b[l]));
    }
    return json{{"n_in", net_.p.n_in}, {"widths", net_.p.widths}, {"w", w}, {"b", b},
                {"w_out", encode_doubles(net_.p.w_out)}, {"b_out", encode_doubles(net_.p.b_out)}};
  }

 private:
  MlpNet net_;
};

class MlpObjective final : public Objective {
 public:
  MlpObjective(const ModelSpec& spec, const SparseMatrix& x, std::span<const int> labels,
               const ClassWeights& cw)
      : net_(init_mlp(spec, x.n_cols, mix_seed(spec.seed, "gradient-check-init"), true)),
        x_(x), labels_(labels.begin(), labels.end()), cw_(cw), rows_(x.rows()) {
    std::iota(rows_.begin(), rows_.end(), 0);
  }

  std::vector<ParamRef> params() override { return net_.refs(); }

  double evaluate(bool want_grad) override {
    Eigen::VectorXd logits = net_.forward(x_, rows_, nullptr, 0.0), dlogit;
    const double loss = weighted_bce(logits, labels_, rows_, cw_, dlogit);
    if (want_grad) {
      zero_grads(net_.refs());
      net_.backward(x_, rows_, dlogit);
    }
    return loss;
  }

 private:
  MlpNet net_;
  const SparseMatrix& x_;
  std::vector<int> labels_;
  ClassWeights cw_;
  std::vector<std::size_t> rows_;
};

}  // namespace

StatePtr train_mlp(const ModelSpec& spec, const SparseMatrix& x, std::span<const int> labels,
                   const ClassWeights& weights) {
  const Hyperparams& h = spec.params;
  MlpNet net(init_mlp(spec, x.n_cols, mix_seed(spec.seed, "mlp-init"), false));
  std::vector<ParamRef> refs = net.refs();
  Adam adam(h, refs);
  Rng rng(mix_seed(spec.seed, "mlp-train"));
  std::vector<std::size_t> order(x.rows());
  std::iota(order.begin(), order.end(), 0);
  const auto batch = static_cast<std::size_t>(h.batch_size);
  Eigen::VectorXd dlogit;
  for (int epoch = 0; epoch < h.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      std::span<const std::size_t> rows(order.data() + start,
                                        std::min(batch, order.size() - start));
      Eigen::VectorXd logits = net.forward(x, rows, &rng, h.dropout);
      weighted_bce(logits, labels, rows, weights, dlogit);
      zero_grads(refs);
      net.backward(x, rows, dlogit);
      adam.step();
    }
  }
  return std::make_shared<MlpModel>(spec, std::move(net.p));
}

StatePtr load_mlp(const ModelSpec& spec, const json& j) {
  MlpParams p;
  p.n_in = j.at("n_in").get<std::size_t>();
  p.widths = j.at("widths").get<std::vector<std::size_t>>();
  if (p.widths.empty() || j.at("w").size() != p.widths.size() ||
      j.at("b").size() != p.widths.size()) {
    throw DataError("MLP: malformed parameters");
  }
  for (std::size_t l = 0; l < p.widths.size(); ++l) {
    p.w.push_back(decode_doubles(j["w"][l]));
    p.b.push_back(decode_doubles(j["b"][l]));
    if (p.w[l].size() != p.fan_in(l) * p.widths[l] || p.b[l].size() != p.widths[l]) {
      throw DataError("MLP: layer " + std::to_string(l) + " has the wrong shape");
    }
  }
  p.w_out = decode_doubles(j.at("w_out"));
  p.b_out = decode_doubles(j.at("b_out"));
  if (p.w_out.size() != p.widths.back() || p.b_out.size() != 1) {
    throw DataError("MLP: output layer has the wrong shape");
  }
  return std::make_shared<MlpModel>(spec, std::move(p));
}

std::unique_ptr<Objective> mlp_objective(const ModelSpec& spec, const SparseMatrix& x,
                                         std::span<const int> labels,
                                         const ClassWeights& weights) {
  return std::make_unique<MlpObjective>(spec, x, labels, weights);
}

}  // namespace fdbench::detail
