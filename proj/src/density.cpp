#include "fdbench/density.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

#include "csv.hpp"
#include "fdbench/error.hpp"

namespace fdbench {

void FeatureCounter::add(const FeatureSequence& seq) {
  for (const std::string& f : seq.features) add(f);
}

void FeatureCounter::add(const std::string& feature, std::uint64_t count) {
  counts_[feature] += count;
  total_ += count;
}

void FeatureCounter::merge(const FeatureCounter& other) {
  for (const auto& [f, c] : other.counts_) counts_[f] += c;
  total_ += other.total_;
}

DensityReport make_density(VariantId variant, std::uint64_t unique, std::uint64_t all) {
  if (all == 0) throw DataError("feature density undefined: corpus has no features");
  if (unique == 0 || unique > all) {
    throw DataError("feature density: need 0 < unique <= all (got " + std::to_string(unique) +
                    "/" + std::to_string(all) + ")");
  }
  return DensityReport{variant, unique, all,
                       static_cast<double>(unique) / static_cast<double>(all)};
}

DensityReport feature_density(std::span<const FeatureSequence> variant_corpus) {
  if (variant_corpus.empty()) throw DataError("feature density: no sequences");
  FeatureCounter counter;
  for (const FeatureSequence& seq : variant_corpus) counter.add(seq);
  return make_density(variant_corpus.front().variant, counter.unique(), counter.total());
}

void sort_by_density(std::vector<DensityReport>& reports) {
  std::stable_sort(reports.begin(), reports.end(),
                   [](const DensityReport& a, const DensityReport& b) { return a.fd > b.fd; });
}

std::vector<DensityReport> density_table(std::span<const AnnotatedSample> corpus,
                                         std::span<const VariantId> variants,
                                         const DensityOptions& options) {
  if (variants.empty()) throw InvalidArgument("density_table: no variants requested");
  std::vector<DensityReport> out;
  for (VariantId v : variants) {
    std::vector<FeatureSequence> seqs = derive_corpus(corpus, v, options.derive);
    if (options.strip_punct && is_token_granular(v)) {
      for (auto& s : seqs) s = strip_punct(s);
    }
    out.push_back(feature_density(seqs));
  }
  sort_by_density(out);
  return out;
}

std::string format_fixed(double value, int decimals) {
  if (decimals < 0 || decimals > 17) throw InvalidArgument("format_fixed: decimals out of range");
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  return buf;
}

void write_density_csv(std::ostream& out, std::span<const DensityReport> reports) {
  csv::write_row(out, {"variant", "unique", "all", "fd"});
  for (const DensityReport& r : reports) {
    csv::write_row(out, {std::string(variant_name(r.variant)), std::to_string(r.unique_1grams),
                         std::to_string(r.all_1grams), csv::format_double(r.fd)});
  }
}

std::vector<DensityReport> read_density_csv(std::istream& in) {
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header || *header != std::vector<std::string>{"variant", "unique", "all", "fd"}) {
    throw DataError("density CSV: expected header variant,unique,all,fd");
  }
  std::vector<DensityReport> out;
  while (auto rec = reader.next()) {
    if (rec->size() == 1 && rec->front().empty()) continue;
    if (rec->size() != 4) {
      throw DataError("density CSV line " + std::to_string(reader.record_line()) +
                      ": expected 4 fields");
    }
    auto v = parse_variant((*rec)[0]);
    if (!v) throw DataError("density CSV: unknown variant '" + (*rec)[0] + "'");
    DensityReport r{*v, csv::parse_u64((*rec)[1]), csv::parse_u64((*rec)[2]),
                    csv::parse_double((*rec)[3])};
    out.push_back(r);
  }
  return out;
}

}  // namespace fdbench
