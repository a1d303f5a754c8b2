#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace fdbench {

struct ClassWeights {
  double w_neg = 1.0;
  double w_pos = 1.0;

  double of(int label) const { return label == 1 ? w_pos : w_neg; }
  static ClassWeights uniform() { return {1.0, 1.0}; }
};

/// Inverse-frequency weights w_c = N / (2 N_c). Throws DataError when one
/// class is absent.
ClassWeights class_weights(std::span<const int> labels);

struct SmoteConfig {
  std::size_t k_neighbors = 5;
  std::size_t target = 0;  // minority count after synthesis; 0 means "match majority"
  std::uint64_t seed = 0;
};

using DenseRow = std::vector<double>;

/// x + lambda * (neighbor - x)
DenseRow smote_interpolate(std::span<const double> x, std::span<const double> neighbor,
                           double lambda);

/// Indices of the k nearest rows to rows[i] by Euclidean distance, excluding
/// i itself; ties go to the lower index.
std::vector<std::size_t> nearest_neighbors(std::span<const DenseRow> rows, std::size_t i,
                                           std::size_t k);

/// SMOTE over the minority rows. Produces exactly cfg.target - rows.size()
/// synthetic rows; each picks a base row uniformly, one of its k nearest
/// minority neighbors uniformly, and lambda uniformly on [0, 1].
/// Requires rows.size() >= 2, 1 <= k < rows.size() and target >= rows.size()
/// (a zero target is resolved by the caller, not here).
std::vector<DenseRow> smote(std::span<const DenseRow> minority_rows, const SmoteConfig& cfg);

}  // namespace fdbench
