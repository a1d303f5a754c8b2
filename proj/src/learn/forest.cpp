#include <algorithm>
#include <cmath>
#include <numeric>

#include "model_state.hpp"

namespace fdbench {

namespace {

double lookup(const SparseRow& row, std::uint32_t feature) {
  auto it = std::lower_bound(row.cols.begin(), row.cols.end(), feature);
  if (it == row.cols.end() || *it != feature) return 0.0;
  return row.values[static_cast<std::size_t>(it - row.cols.begin())];
}

struct Entry {
  std::uint32_t feature;
  double value;
  std::uint32_t pos;  // position in the node's sample list
};

struct Split {
  std::uint32_t feature = 0;
  double threshold = 0;
  double impurity = std::numeric_limits<double>::infinity();
  bool found = false;
};

// Weighted Gini impurity times node mass: W - (w0^2 + w1^2) / W.
double mass_gini(double w0, double w1) {
  const double w = w0 + w1;
  return w > 0 ? w - (w0 * w0 + w1 * w1) / w : 0.0;
}

// Scans the thresholds of one feature. `entries` are the node's non-zero
// values of that feature sorted by value; everything else sits at zero.
void scan_feature(std::span<const Entry> entries, std::span<const int> node_labels,
                  const ClassWeights& cw, double w0, double w1, std::size_t n_node,
                  Split& best) {
  struct Group {
    double value;
    double g0, g1;
  };
  std::vector<Group> groups;
  groups.reserve(entries.size() + 1);
  double nz0 = 0, nz1 = 0;
  for (const Entry& e : entries) {
    const int y = node_labels[e.pos];
    const double a = y == 0 ? cw.w_neg : 0.0, b = y == 1 ? cw.w_pos : 0.0;
    nz0 += a;
    nz1 += b;
    if (!groups.empty() && groups.back().value == e.value) {
      groups.back().g0 += a;
      groups.back().g1 += b;
    } else {
      groups.push_back({e.value, a, b});
    }
  }
  if (entries.size() < n_node) {
    Group zero{0.0, w0 - nz0, w1 - nz1};
    auto it = std::lower_bound(groups.begin(), groups.end(), 0.0,
                               [](const Group& g, double v) { return g.value < v; });
    groups.insert(it, zero);
  }
  if (groups.size() < 2) return;
  double l0 = 0, l1 = 0;
  for (std::size_t i = 0; i + 1 < groups.size(); ++i) {
    l0 += groups[i].g0;
    l1 += groups[i].g1;
    const double imp = mass_gini(l0, l1) + mass_gini(w0 - l0, w1 - l1);
    if (imp < best.impurity) {
      const double a = groups[i].value, b = groups[i + 1].value;
      double t = a + (b - a) / 2;
      if (!(t < b)) t = a;
      best = {entries.empty() ? 0u : entries.front().feature, t, imp, true};
    }
  }
}

}  // namespace

DecisionTree DecisionTree::fit(const SparseMatrix& x, std::span<const int> labels,
                               std::span<const std::size_t> rows, const ClassWeights& cw,
                               std::size_t max_features, Rng* rng) {
  const bool all_features = max_features >= x.n_cols;
  if (!all_features && rng == nullptr) {
    throw InvalidArgument("DecisionTree::fit: feature sampling needs an rng");
  }
  DecisionTree tree;
  struct Work {
    std::int32_t node;
    std::vector<std::size_t> samples;
  };
  std::vector<Work> stack;
  tree.nodes_.push_back({});
  stack.push_back({0, std::vector<std::size_t>(rows.begin(), rows.end())});

  std::vector<Entry> entries;
  std::vector<int> node_labels;
  while (!stack.empty()) {
    Work work = std::move(stack.back());
    stack.pop_back();
    const std::vector<std::size_t>& samples = work.samples;

    double w0 = 0, w1 = 0;
    node_labels.clear();
    for (std::size_t r : samples) {
      node_labels.push_back(labels[r]);
      (labels[r] == 1 ? w1 : w0) += cw.of(labels[r]);
    }
    Node& node = tree.nodes_[static_cast<std::size_t>(work.node)];
    node.value = w0 + w1 > 0 ? w1 / (w0 + w1) : 0.0;
    if (w0 == 0 || w1 == 0) continue;

    entries.clear();
    for (std::size_t p = 0; p < samples.size(); ++p) {
      SparseRow row = x.row(samples[p]);
      for (std::size_t k = 0; k < row.cols.size(); ++k) {
        entries.push_back({row.cols[k], row.values[k], static_cast<std::uint32_t>(p)});
      }
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
      if (a.feature != b.feature) return a.feature < b.feature;
      if (a.value != b.value) return a.value < b.value;
      return a.pos < b.pos;
    });

    // Non-constant features at this node, as [begin, end) ranges of entries.
    struct Range {
      std::size_t begin, end;
    };
    std::vector<Range> candidates;
    for (std::size_t i = 0; i < entries.size();) {
      std::size_t j = i;
      while (j < entries.size() && entries[j].feature == entries[i].feature) ++j;
      const bool has_zero = j - i < samples.size();
      const bool varies = has_zero || entries[i].value != entries[j - 1].value;
      if (varies) candidates.push_back({i, j});
      i = j;
    }
    if (candidates.empty()) continue;

    std::size_t n_inspect = candidates.size();
    if (!all_features && max_features < candidates.size()) {
      // Partial Fisher-Yates: the first max_features slots become the sample.
      for (std::size_t i = 0; i < max_features; ++i) {
        std::size_t j = i + rng->below(candidates.size() - i);
        std::swap(candidates[i], candidates[j]);
      }
      n_inspect = max_features;
    }

    Split best;
    for (std::size_t c = 0; c < n_inspect; ++c) {
      const Range rg = candidates[c];
      scan_feature(std::span<const Entry>(entries.data() + rg.begin, rg.end - rg.begin),
                   node_labels, cw, w0, w1, samples.size(), best);
    }
    if (!best.found) continue;

    std::vector<std::size_t> left, right;
    for (std::size_t r : samples) {
      (lookup(x.row(r), best.feature) <= best.threshold ? left : right).push_back(r);
    }
    const auto left_id = static_cast<std::int32_t>(tree.nodes_.size());
    tree.nodes_.push_back({});
    tree.nodes_.push_back({});
    Node& parent = tree.nodes_[static_cast<std::size_t>(work.node)];
    parent.feature = static_cast<std::int32_t>(best.feature);
    parent.threshold = best.threshold;
    parent.left = left_id;
    parent.right = left_id + 1;
    stack.push_back({left_id + 1, std::move(right)});
    stack.push_back({left_id, std::move(left)});
  }
  return tree;
}

double DecisionTree::predict_value(const SparseRow& row) const {
  std::size_t n = 0;
  while (nodes_[n].feature >= 0) {
    const Node& node = nodes_[n];
    n = static_cast<std::size_t>(
        lookup(row, static_cast<std::uint32_t>(node.feature)) <= node.threshold ? node.left
                                                                                : node.right);
  }
  return nodes_[n].value;
}

DecisionTree DecisionTree::from_nodes(std::vector<Node> nodes) {
  if (nodes.empty()) throw DataError("decision tree: no nodes");
  for (const Node& n : nodes) {
    if (n.feature >= 0 &&
        (n.left < 0 || n.right < 0 || static_cast<std::size_t>(n.left) >= nodes.size() ||
         static_cast<std::size_t>(n.right) >= nodes.size())) {
      throw DataError("decision tree: child index out of range");
    }
  }
  DecisionTree t;
  t.nodes_ = std::move(nodes);
  return t;
}

namespace detail {
namespace {

class Forest final : public ModelState {
 public:
  Forest(ModelSpec spec, std::size_t n_features, std::vector<DecisionTree> trees)
      : ModelState(std::move(spec)), n_features_(n_features), trees_(std::move(trees)) {}

  std::vector<Prediction> predict_sparse(const SparseMatrix& x) const override {
    if (x.n_cols != n_features_) {
      throw InvalidArgument("RF: input has " + std::to_string(x.n_cols) + " columns, model " +
                            std::to_string(n_features_));
    }
    std::vector<Prediction> out;
    out.reserve(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) {
      SparseRow row = x.row(r);
      std::size_t votes = 0;
      for (const DecisionTree& t : trees_) votes += static_cast<std::size_t>(t.predict_label(row));
      const double score = static_cast<double>(votes) / static_cast<double>(trees_.size());
      out.push_back({score >= 0.5 ? 1 : 0, score});
    }
    return out;
  }

  json params() const override {
    std::vector<std::uint64_t> offsets{0};
    std::vector<std::uint32_t> feature, left, right;
    std::vector<double> threshold, value;
    for (const DecisionTree& t : trees_) {
      for (const auto& n : t.nodes()) {
        feature.push_back(static_cast<std::uint32_t>(n.feature));
        left.push_back(static_cast<std::uint32_t>(n.left));
        right.push_back(static_cast<std::uint32_t>(n.right));
        threshold.push_back(n.threshold);
        value.push_back(n.value);
      }
      offsets.push_back(feature.size());
    }
    return json{{"n_features", n_features_},     {"offsets", encode_u64(offsets)},
                {"feature", encode_u32(feature)}, {"threshold", encode_doubles(threshold)},
                {"left", encode_u32(left)},       {"right", encode_u32(right)},
                {"value", encode_doubles(value)}};
  }

 private:
  std::size_t n_features_;
  std::vector<DecisionTree> trees_;
};

}  // namespace

StatePtr train_forest(const ModelSpec& spec, const SparseMatrix& x, std::span<const int> labels,
                      const ClassWeights& weights) {
  const Hyperparams& h = spec.params;
  std::size_t max_features = h.rf_max_features > 0
                                 ? static_cast<std::size_t>(h.rf_max_features)
                                 : static_cast<std::size_t>(std::sqrt(static_cast<double>(x.n_cols)));
  max_features = std::max<std::size_t>(max_features, 1);
  const std::size_t n = x.rows();
  std::vector<DecisionTree> trees;
  trees.reserve(static_cast<std::size_t>(h.rf_trees));
  for (int t = 0; t < h.rf_trees; ++t) {
    Rng rng(mix_seed(spec.seed, {"rf-tree", std::to_string(t)}));
    std::vector<std::size_t> rows(n);
    if (h.rf_bootstrap) {
      for (std::size_t& r : rows) r = rng.below(n);
    } else {
      std::iota(rows.begin(), rows.end(), 0);
    }
    trees.push_back(DecisionTree::fit(x, labels, rows, weights, max_features, &rng));
  }
  return std::make_shared<Forest>(spec, x.n_cols, std::move(trees));
}

StatePtr load_forest(const ModelSpec& spec, const json& p) {
  auto offsets = decode_u64(p.at("offsets"));
  auto feature = decode_u32(p.at("feature"));
  auto threshold = decode_doubles(p.at("threshold"));
  auto left = decode_u32(p.at("left"));
  auto right = decode_u32(p.at("right"));
  auto value = decode_doubles(p.at("value"));
  const std::size_t total = feature.size();
  if (offsets.empty() || offsets.back() != total || threshold.size() != total ||
      left.size() != total || right.size() != total || value.size() != total) {
    throw DataError("RF: malformed parameters");
  }
  std::vector<DecisionTree> trees;
  for (std::size_t t = 0; t + 1 < offsets.size(); ++t) {
    std::vector<DecisionTree::Node> nodes;
    for (std::uint64_t i = offsets[t]; i < offsets[t + 1]; ++i) {
      nodes.push_back({static_cast<std::int32_t>(feature[i]), threshold[i],
                       static_cast<std::int32_t>(left[i]), static_cast<std::int32_t>(right[i]),
                       value[i]});
    }
    trees.push_back(DecisionTree::from_nodes(std::move(nodes)));
  }
  if (trees.empty()) throw DataError("RF: no trees");
  return std::make_shared<Forest>(spec, p.at("n_features").get<std::size_t>(), std::move(trees));
}

}  // namespace detail
}  // namespace fdbench
