// Embedding -> 1 or 2 x (2D conv over the positions x dimensions plane, ReLU,
// max-pool) -> flatten -> [dense, ReLU] -> dropout -> logit.
//
// Feature maps are stored as (rows * cols) x channels row-major matrices.

#include <numeric>

#include "nn.hpp"

namespace fdbench::detail {
namespace {

struct ConvGeom {
  int in_h, in_w, in_c;
  int k_h, k_w, out_c;
  int pad_t, pad_l;
  int out_h, out_w;    // after convolution
  int pool_h, pool_w;  // window
  int p_h, p_w;        // after pooling

  int patch() const { return k_h * k_w * in_c; }
};

std::vector<ConvGeom> plan_layers(const Hyperparams& h, int n_layers) {
  std::vector<ConvGeom> out;
  int rows = h.max_len, cols = h.embed_dim, ch = 1;
  for (int l = 0; l < n_layers; ++l) {
    ConvGeom g{};
    g.in_h = rows;
    g.in_w = cols;
    g.in_c = ch;
    g.k_h = h.kernel_h;
    g.k_w = h.kernel_w;
    g.out_c = h.feature_maps;
    if (h.padding == Padding::kSame) {
      g.pad_t = (h.kernel_h - 1) / 2;
      g.pad_l = (h.kernel_w - 1) / 2;
      g.out_h = rows;
      g.out_w = cols;
    } else {
      g.out_h = rows - h.kernel_h + 1;
      g.out_w = cols - h.kernel_w + 1;
    }
    g.pool_h = h.pool_h;
    g.pool_w = h.pool_w;
    g.p_h = g.out_h / h.pool_h;
    g.p_w = g.out_w / h.pool_w;
    out.push_back(g);
    rows = g.p_h;
    cols = g.p_w;
    ch = g.out_c;
  }
  return out;
}

void im2col(const ConvGeom& g, const RowMat& in, RowMat& cols) {
  cols.setZero(static_cast<Eigen::Index>(g.out_h) * g.out_w, g.patch());
  for (int oh = 0; oh < g.out_h; ++oh) {
    for (int ow = 0; ow < g.out_w; ++ow) {
      const Eigen::Index r = static_cast<Eigen::Index>(oh) * g.out_w + ow;
      for (int i = 0; i < g.k_h; ++i) {
        const int ih = oh + i - g.pad_t;
        if (ih < 0 || ih >= g.in_h) continue;
        for (int j = 0; j < g.k_w; ++j) {
          const int iw = ow + j - g.pad_l;
          if (iw < 0 || iw >= g.in_w) continue;
          cols.row(r).segment((i * g.k_w + j) * g.in_c, g.in_c) =
              in.row(static_cast<Eigen::Index>(ih) * g.in_w + iw);
        }
      }
    }
  }
}

void col2im(const ConvGeom& g, const RowMat& dcols, RowMat& din) {
  din.setZero(static_cast<Eigen::Index>(g.in_h) * g.in_w, g.in_c);
  for (int oh = 0; oh < g.out_h; ++oh) {
    for (int ow = 0; ow < g.out_w; ++ow) {
      const Eigen::Index r = static_cast<Eigen::Index>(oh) * g.out_w + ow;
      for (int i = 0; i < g.k_h; ++i) {
        const int ih = oh + i - g.pad_t;
        if (ih < 0 || ih >= g.in_h) continue;
        for (int j = 0; j < g.k_w; ++j) {
          const int iw = ow + j - g.pad_l;
          if (iw < 0 || iw >= g.in_w) continue;
          din.row(static_cast<Eigen::Index>(ih) * g.in_w + iw) +=
              dcols.row(r).segment((i * g.k_w + j) * g.in_c, g.in_c);
        }
      }
    }
  }
}

struct CnnParams {
  std::size_t vocab = 0;
  Hyperparams h;
  int n_layers = 1;
  std::vector<double> embed;                   // vocab x embed_dim
  std::vector<std::vector<double>> kernel, bias;  // patch x out_c, out_c
  std::vector<double> w_dense, b_dense;        // flat x dense_units
  std::vector<double> w_out, b_out{0.0};       // (dense_units or flat)
};

std::size_t flat_size(const std::vector<ConvGeom>& geo) {
  const ConvGeom& g = geo.back();
  return static_cast<std::size_t>(g.p_h) * g.p_w * g.out_c;
}

CnnParams init_cnn(const ModelSpec& spec, std::size_t vocab, std::uint64_t seed, bool random_bias) {
  CnnParams p;
  p.vocab = vocab;
  p.h = spec.params;
  p.n_layers = spec.family == Family::kCNN1L ? 1 : 2;
  const auto geo = plan_layers(p.h, p.n_layers);
  Rng rng(seed);
  p.embed.resize(vocab * static_cast<std::size_t>(p.h.embed_dim));
  for (double& e : p.embed) e = rng.uniform(-p.h.embed_init, p.h.embed_init);
  for (const ConvGeom& g : geo) {
    p.kernel.emplace_back(static_cast<std::size_t>(g.patch()) * g.out_c);
    glorot_uniform(rng, p.kernel.back(), static_cast<std::size_t>(g.patch()),
                   static_cast<std::size_t>(g.k_h * g.k_w * g.out_c));
    p.bias.emplace_back(static_cast<std::size_t>(g.out_c), 0.0);
  }
  const std::size_t flat = flat_size(geo);
  std::size_t head_in = flat;
  if (p.h.dense_units > 0) {
    const auto units = static_cast<std::size_t>(p.h.dense_units);
    p.w_dense.resize(flat * units);
    glorot_uniform(rng, p.w_dense, flat, units);
    p.b_dense.assign(units, 0.0);
    head_in = units;
  }
  p.w_out.resize(head_in);
  glorot_uniform(rng, p.w_out, head_in, 1);
  if (random_bias) {
    for (auto& b : p.bias) {
      for (double& e : b) e = rng.uniform(-0.1, 0.1);
    }
    for (double& e : p.b_dense) e = rng.uniform(-0.1, 0.1);
    p.b_out[0] = rng.uniform(-0.1, 0.1);
  }
  return p;
}

class CnnNet {
 public:
  explicit CnnNet(CnnParams params) : p(std::move(params)), geo_(plan_layers(p.h, p.n_layers)) {
    g_embed.assign(p.embed.size(), 0.0);
    for (std::size_t l = 0; l < p.kernel.size(); ++l) {
      g_kernel.emplace_back(p.kernel[l].size(), 0.0);
      g_bias.emplace_back(p.bias[l].size(), 0.0);
    }
    g_w_dense.assign(p.w_dense.size(), 0.0);
    g_b_dense.assign(p.b_dense.size(), 0.0);
    g_w_out.assign(p.w_out.size(), 0.0);
    cache_.resize(geo_.size());
  }

  std::vector<ParamRef> refs() {
    std::vector<ParamRef> out{{p.embed.data(), g_embed.data(), p.embed.size()}};
    for (std::size_t l = 0; l < p.kernel.size(); ++l) {
      out.push_back({p.kernel[l].data(), g_kernel[l].data(), p.kernel[l].size()});
      out.push_back({p.bias[l].data(), g_bias[l].data(), p.bias[l].size()});
    }
    if (!p.w_dense.empty()) {
      out.push_back({p.w_dense.data(), g_w_dense.data(), p.w_dense.size()});
      out.push_back({p.b_dense.data(), g_b_dense.data(), p.b_dense.size()});
    }
    out.push_back({p.w_out.data(), g_w_out.data(), p.w_out.size()});
    out.push_back({p.b_out.data(), &g_b_out, 1});
    return out;
  }

  /// Logit for one sequence. With `rng`, applies dropout. Activations for
  /// backward() are kept.
  double forward(std::span<const std::int32_t> ids, Rng* rng) {
    const int dim = p.h.embed_dim;
    RowMat in(static_cast<Eigen::Index>(ids.size()) * dim, 1);
    for (std::size_t t = 0; t < ids.size(); ++t) {
      const auto id = static_cast<std::size_t>(ids[t]);
      for (int d = 0; d < dim; ++d) {
        in(static_cast<Eigen::Index>(t) * dim + d, 0) = p.embed[id * static_cast<std::size_t>(dim) + static_cast<std::size_t>(d)];
      }
    }
    for (std::size_t l = 0; l < geo_.size(); ++l) {
      const ConvGeom& g = geo_[l];
      Cache& c = cache_[l];
      im2col(g, in, c.cols);
      c.pre.noalias() = c.cols * ConstMatMap(p.kernel[l].data(), g.patch(), g.out_c);
      c.pre.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(p.bias[l].data(), g.out_c);
      RowMat pooled(static_cast<Eigen::Index>(g.p_h) * g.p_w, g.out_c);
      c.argmax.assign(static_cast<std::size_t>(pooled.size()), 0);
      for (int ph = 0; ph < g.p_h; ++ph) {
        for (int pw = 0; pw < g.p_w; ++pw) {
          const Eigen::Index pr = static_cast<Eigen::Index>(ph) * g.p_w + pw;
          for (int ch = 0; ch < g.out_c; ++ch) {
            double best = -std::numeric_limits<double>::infinity();
            Eigen::Index arg = 0;
            for (int i = 0; i < g.pool_h; ++i) {
              for (int j = 0; j < g.pool_w; ++j) {
                const Eigen::Index r =
                    static_cast<Eigen::Index>(ph * g.pool_h + i) * g.out_w + pw * g.pool_w + j;
                const double v = std::max(c.pre(r, ch), 0.0);
                if (v > best) {
                  best = v;
                  arg = r;
                }
              }
            }
            pooled(pr, ch) = best;
            c.argmax[static_cast<std::size_t>(pr * g.out_c + ch)] = arg;
          }
        }
      }
      in = std::move(pooled);
    }
    flat_ = Eigen::Map<const Eigen::VectorXd>(in.data(), in.size());
    Eigen::VectorXd head;
    if (!p.w_dense.empty()) {
      const auto units = static_cast<Eigen::Index>(p.b_dense.size());
      dense_pre_ = ConstMatMap(p.w_dense.data(), flat_.size(), units).transpose() * flat_ +
                   Eigen::Map<const Eigen::VectorXd>(p.b_dense.data(), units);
      head = dense_pre_.cwiseMax(0.0);
    } else {
      head = flat_;
    }
    mask_.resize(0);
    if (rng && p.h.dropout > 0) {
      mask_.resize(head.size());
      dropout_mask(*rng, p.h.dropout, mask_.data(), static_cast<std::size_t>(mask_.size()));
      head.array() *= mask_.array();
    }
    head_ = head;
    return head_.dot(Eigen::Map<const Eigen::VectorXd>(p.w_out.data(), head_.size())) + p.b_out[0];
  }

  void backward(std::span<const std::int32_t> ids, double dlogit) {
    VecMap(g_w_out.data(), head_.size()) += dlogit * head_;
    g_b_out += dlogit;
    Eigen::VectorXd dhead = dlogit * Eigen::Map<const Eigen::VectorXd>(p.w_out.data(), head_.size());
    if (mask_.size()) dhead.array() *= mask_.array();
    Eigen::VectorXd dflat;
    if (!p.w_dense.empty()) {
      const auto units = static_cast<Eigen::Index>(p.b_dense.size());
      Eigen::VectorXd dpre = (dense_pre_.array() > 0).select(dhead, 0.0);
      MatMap(g_w_dense.data(), flat_.size(), units) += flat_ * dpre.transpose();
      VecMap(g_b_dense.data(), units) += dpre;
      dflat = ConstMatMap(p.w_dense.data(), flat_.size(), units) * dpre;
    } else {
      dflat = dhead;
    }
    const ConvGeom& last = geo_.back();
    RowMat dout = Eigen::Map<const RowMat>(dflat.data(), static_cast<Eigen::Index>(last.p_h) * last.p_w,
                                           last.out_c);
    for (std::size_t l = geo_.size(); l-- > 0;) {
      const ConvGeom& g = geo_[l];
      const Cache& c = cache_[l];
      RowMat dpre = RowMat::Zero(c.pre.rows(), c.pre.cols());
      for (Eigen::Index pr = 0; pr < dout.rows(); ++pr) {
        for (int ch = 0; ch < g.out_c; ++ch) {
          const Eigen::Index r = c.argmax[static_cast<std::size_t>(pr * g.out_c + ch)];
          if (c.pre(r, ch) > 0) dpre(r, ch) += dout(pr, ch);
        }
      }
      MatMap(g_kernel[l].data(), g.patch(), g.out_c) += c.cols.transpose() * dpre;
      Eigen::Map<Eigen::RowVectorXd>(g_bias[l].data(), g.out_c) += dpre.colwise().sum();
      RowMat dcols = dpre * ConstMatMap(p.kernel[l].data(), g.patch(), g.out_c).transpose();
      col2im(g, dcols, dout);
    }
    const int dim = p.h.embed_dim;
    for (std::size_t t = 0; t < ids.size(); ++t) {
      double* row = g_embed.data() + static_cast<std::size_t>(ids[t]) * static_cast<std::size_t>(dim);
      for (int d = 0; d < dim; ++d) row[d] += dout(static_cast<Eigen::Index>(t) * dim + d, 0);
    }
  }

  CnnParams p;
  std::vector<double> g_embed;
  std::vector<std::vector<double>> g_kernel, g_bias;
  std::vector<double> g_w_dense, g_b_dense, g_w_out;
  double g_b_out = 0;

 private:
  struct Cache {
    RowMat cols, pre;
    std::vector<Eigen::Index> argmax;
  };
  std::vector<ConvGeom> geo_;
  std::vector<Cache> cache_;
  Eigen::VectorXd flat_, dense_pre_, head_, mask_;
};

void check_ids(const IndexBatch& x, std::size_t vocab, std::size_t max_len) {
  if (x.max_len != max_len) {
    throw InvalidArgument("CNN: sequences have length " + std::to_string(x.max_len) +
                          ", model expects " + std::to_string(max_len));
  }
  for (std::int32_t id : x.ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= vocab) {
      throw InvalidArgument("CNN: id " + std::to_string(id) + " outside the embedding table");
    }
  }
}

class CnnModel final : public ModelState {
 public:
  CnnModel(ModelSpec spec, CnnParams params) : ModelState(std::move(spec)), params_(std::move(params)) {}

  std::vector<Prediction> predict_index(const IndexBatch& x) const override {
    check_ids(x, params_.vocab, static_cast<std::size_t>(params_.h.max_len));
    CnnNet net(params_);
    std::vector<Prediction> out;
    out.reserve(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) {
      const double s = sigmoid(net.forward(x.row(r), nullptr));
      out.push_back({s >= 0.5 ? 1 : 0, s});
    }
    return out;
  }

  json params() const override {
    json k = json::array(), b = json::array();
    for (std::size_t l = 0; l < params_.kernel.size(); ++l) {
      k.push_back(encode_doubles(params_.kernel[l]));
      b.push_back(encode_doubles(params_.bias[l]));
    }
    return json{{"vocab", params_.vocab},
                {"embed", encode_doubles(params_.embed)},
                {"kernel", k},
                {"bias", b},
                {"w_dense", encode_doubles(params_.w_dense)},
                {"b_dense", encode_doubles(params_.b_dense)},
                {"w_out", encode_doubles(params_.w_out)},
                {"b_out", encode_doubles(params_.b_out)}};
  }

 private:
  CnnParams params_;
};

double weighted_batch_loss(CnnNet& net, const IndexBatch& x, std::span<const int> labels,
                           std::span<const std::size_t> rows, const ClassWeights& cw, Rng* rng,
                           bool want_grad) {
  const double inv_n = 1.0 / static_cast<double>(rows.size());
  double loss = 0;
  for (std::size_t r : rows) {
    const double z = net.forward(x.row(r), rng);
    const int y = labels[r];
    const double c = cw.of(y) * inv_n;
    loss += c * bce_with_logit(z, y);
    if (want_grad) net.backward(x.row(r), c * (sigmoid(z) - y));
  }
  return loss;
}

class CnnObjective final : public Objective {
 public:
  CnnObjective(const ModelSpec& spec, const IndexBatch& x, std::span<const int> labels,
               const ClassWeights& cw)
      : net_(init_cnn(spec, x.vocab_size, mix_seed(spec.seed, "gradient-check-init"), true)),
        x_(x), labels_(labels.begin(), labels.end()), cw_(cw), rows_(x.rows()) {
    std::iota(rows_.begin(), rows_.end(), 0);
  }

  std::vector<ParamRef> params() override { return net_.refs(); }

  double evaluate(bool want_grad) override {
    if (want_grad) zero_grads(net_.refs());
    return weighted_batch_loss(net_, x_, labels_, rows_, cw_, nullptr, want_grad);
  }

 private:
  CnnNet net_;
  const IndexBatch& x_;
  std::vector<int> labels_;
  ClassWeights cw_;
  std::vector<std::size_t> rows_;
};

}  // namespace

StatePtr train_cnn(const ModelSpec& spec, const IndexBatch& x, std::span<const int> labels,
                   const ClassWeights& weights) {
  check_ids(x, x.vocab_size, static_cast<std::size_t>(spec.params.max_len));
  const Hyperparams& h = spec.params;
  CnnNet net(init_cnn(spec, x.vocab_size, mix_seed(spec.seed, "cnn-init"), false));
  std::vector<ParamRef> refs = net.refs();
  Adam adam(h, refs);
  Rng rng(mix_seed(spec.seed, "cnn-train"));
  std::vector<std::size_t> order(x.rows());
  std::iota(order.begin(), order.end(), 0);
  const auto batch = static_cast<std::size_t>(h.batch_size);
  for (int epoch = 0; epoch < h.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      std::span<const std::size_t> rows(order.data() + start, std::min(batch, order.size() - start));
      zero_grads(refs);
      weighted_batch_loss(net, x, labels, rows, weights, &rng, true);
      adam.step();
    }
  }
  return std::make_shared<CnnModel>(spec, std::move(net.p));
}

StatePtr load_cnn(const ModelSpec& spec, const json& j) {
  CnnParams p;
  p.vocab = j.at("vocab").get<std::size_t>();
  p.h = spec.params;
  p.n_layers = spec.family == Family::kCNN1L ? 1 : 2;
  p.embed = decode_doubles(j.at("embed"));
  if (j.at("kernel").size() != static_cast<std::size_t>(p.n_layers) ||
      j.at("bias").size() != static_cast<std::size_t>(p.n_layers)) {
    throw DataError("CNN: wrong number of convolution layers");
  }
  for (int l = 0; l < p.n_layers; ++l) {
    p.kernel.push_back(decode_doubles(j["kernel"][static_cast<std::size_t>(l)]));
    p.bias.push_back(decode_doubles(j["bias"][static_cast<std::size_t>(l)]));
  }
  p.w_dense = decode_doubles(j.at("w_dense"));
  p.b_dense = decode_doubles(j.at("b_dense"));
  p.w_out = decode_doubles(j.at("w_out"));
  p.b_out = decode_doubles(j.at("b_out"));

  // Shapes must match a freshly planned network.
  const CnnParams ref = init_cnn(spec, p.vocab, 0, false);
  bool ok = p.embed.size() == ref.embed.size() && p.w_dense.size() == ref.w_dense.size() &&
            p.b_dense.size() == ref.b_dense.size() && p.w_out.size() == ref.w_out.size() &&
            p.b_out.size() == 1;
  for (int l = 0; ok && l < p.n_layers; ++l) {
    ok = p.kernel[static_cast<std::size_t>(l)].size() == ref.kernel[static_cast<std::size_t>(l)].size() &&
         p.bias[static_cast<std::size_t>(l)].size() == ref.bias[static_cast<std::size_t>(l)].size();
  }
  if (!ok) throw DataError("CNN: parameter shapes do not match the model specification");
  return std::make_shared<CnnModel>(spec, std::move(p));
}

std::unique_ptr<Objective> cnn_objective(const ModelSpec& spec, const IndexBatch& x,
                                         std::span<const int> labels,
                                         const ClassWeights& weights) {
  check_ids(x, x.vocab_size, static_cast<std::size_t>(spec.params.max_len));
  return std::make_unique<CnnObjective>(spec, x, labels, weights);
}

}  // namespace fdbench::detail
