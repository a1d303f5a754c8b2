#include "fdbench/balance.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "fdbench/error.hpp"
#include "fdbench/rng.hpp"

namespace fdbench {

ClassWeights class_weights(std::span<const int> labels) {
  std::size_t pos = 0, neg = 0;
  for (int y : labels) (y == 1 ? pos : neg) += 1;
  if (pos == 0 || neg == 0) {
    throw DataError("class_weights: both classes must be present (pos=" + std::to_string(pos) +
                    ", neg=" + std::to_string(neg) + ")");
  }
  const double n = static_cast<double>(labels.size());
  return {n / (2.0 * static_cast<double>(neg)), n / (2.0 * static_cast<double>(pos))};
}

DenseRow smote_interpolate(std::span<const double> x, std::span<const double> neighbor,
                           double lambda) {
  if (x.size() != neighbor.size()) throw InvalidArgument("smote: row width mismatch");
  DenseRow out(x.size());
  for (std::size_t d = 0; d < x.size(); ++d) {
    // Endpoints are reproduced exactly at lambda 0 and 1.
    if (lambda == 0.0) {
      out[d] = x[d];
    } else if (lambda == 1.0) {
      out[d] = neighbor[d];
    } else {
      // Rounding can step one ulp past the segment; clamp back onto it.
      const double lo = std::min(x[d], neighbor[d]), hi = std::max(x[d], neighbor[d]);
      out[d] = std::clamp(x[d] + lambda * (neighbor[d] - x[d]), lo, hi);
    }
  }
  return out;
}

std::vector<std::size_t> nearest_neighbors(std::span<const DenseRow> rows, std::size_t i,
                                           std::size_t k) {
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(rows.size());
  for (std::size_t j = 0; j < rows.size(); ++j) {
    if (j == i) continue;
    double d2 = 0;
    for (std::size_t d = 0; d < rows[i].size(); ++d) {
      const double diff = rows[i][d] - rows[j][d];
      d2 += diff * diff;
    }
    dist.emplace_back(d2, j);
  }
  k = std::min(k, dist.size());
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
  std::vector<std::size_t> out(k);
  for (std::size_t n = 0; n < k; ++n) out[n] = dist[n].second;
  return out;
}

std::vector<DenseRow> smote(std::span<const DenseRow> rows, const SmoteConfig& cfg) {
  const std::size_t n = rows.size();
  if (n < 2) throw InvalidArgument("smote: need at least 2 minority rows");
  if (cfg.k_neighbors < 1 || cfg.k_neighbors >= n) {
    throw InvalidArgument("smote: k_neighbors must be in [1, minority count)");
  }
  if (cfg.target < n) throw InvalidArgument("smote: target below current minority count");
  const std::size_t width = rows.front().size();
  for (const DenseRow& r : rows) {
    if (r.size() != width) throw InvalidArgument("smote: ragged rows");
  }

  std::vector<std::vector<std::size_t>> neighbors(n);
  for (std::size_t i = 0; i < n; ++i) neighbors[i] = nearest_neighbors(rows, i, cfg.k_neighbors);

  Rng rng(mix_seed(cfg.seed, "smote"));
  std::vector<DenseRow> out;
  out.reserve(cfg.target - n);
  for (std::size_t s = n; s < cfg.target; ++s) {
    const std::size_t i = rng.below(n);
    const std::size_t nn = neighbors[i][rng.below(neighbors[i].size())];
    const double lambda = rng.uniform();
    out.push_back(smote_interpolate(rows[i], rows[nn], lambda));
  }
  return out;
}

}  // namespace fdbench
