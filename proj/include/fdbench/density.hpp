#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "fdbench/corpus.hpp"
#include "fdbench/variants.hpp"

namespace fdbench {

/// Feature Density of one variant corpus: unique 1-grams over all 1-grams.
struct DensityReport {
  VariantId variant = VariantId::kTok;
  std::uint64_t unique_1grams = 0;
  std::uint64_t all_1grams = 0;
  double fd = 0;

  bool operator==(const DensityReport&) const = default;
};

/// Mergeable feature multiset counts; merge is associative and commutative.
class FeatureCounter {
 public:
  void add(const FeatureSequence& seq);
  void add(const std::string& feature, std::uint64_t count = 1);
  void merge(const FeatureCounter& other);

  std::uint64_t unique() const { return counts_.size(); }
  std::uint64_t total() const { return total_; }
  const std::unordered_map<std::string, std::uint64_t>& counts() const { return counts_; }

 private:
  std::unordered_map<std::string, std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

/// Ratio helper; throws DataError when all == 0 or unique > all.
DensityReport make_density(VariantId variant, std::uint64_t unique, std::uint64_t all);

/// Throws DataError when every sequence is empty.
DensityReport feature_density(std::span<const FeatureSequence> variant_corpus);

struct DensityOptions {
  DeriveOptions derive;
  bool strip_punct = false;  // only applied to token-granular variants
};

/// One report per variant, sorted by fd descending (ties keep input order).
std::vector<DensityReport> density_table(std::span<const AnnotatedSample> corpus,
                                         std::span<const VariantId> variants,
                                         const DensityOptions& options = {});

void sort_by_density(std::vector<DensityReport>& reports);

/// Fixed-point rendering with `decimals` digits, e.g. 0.07023 -> "0.0702".
std::string format_fixed(double value, int decimals);

/// CSV with header `variant,unique,all,fd`; fd is written losslessly.
void write_density_csv(std::ostream& out, std::span<const DensityReport> reports);
std::vector<DensityReport> read_density_csv(std::istream& in);

}  // namespace fdbench
