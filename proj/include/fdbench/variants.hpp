#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fdbench/corpus.hpp"

namespace fdbench {

enum class VariantId {
  kTok,
  kLem,
  kPos,
  kTokPos,
  kLemPos,
  kTokNer,
  kLemNer,
  kChnk,
  kChnkNer,
  kDep,
  kDepNer,
};

inline constexpr std::array<VariantId, 11> kAllVariants = {
    VariantId::kTok,    VariantId::kLem,    VariantId::kPos,     VariantId::kTokPos,
    VariantId::kLemPos, VariantId::kTokNer, VariantId::kLemNer,  VariantId::kChnk,
    VariantId::kChnkNer, VariantId::kDep,   VariantId::kDepNer,
};

/// Canonical name: TOK, LEM, POS, TOK_POS, ..., DEP_NER.
std::string_view variant_name(VariantId v);

/// Accepts canonical names, the `TOK+POS` spelling and any letter case.
std::optional<VariantId> parse_variant(std::string_view name);

/// Parses a comma-separated list; "all" expands to every variant.
std::vector<VariantId> parse_variant_list(std::string_view list);

/// One feature per token (the variants strip_punct accepts).
bool is_token_granular(VariantId v);
bool needs_ner(VariantId v);
bool needs_syntax(VariantId v);

enum class ChunkKind { kNoun, kVerb, kOther };

/// Tokens [begin, end) of one sample; head is a sample-level token index.
struct Chunk {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t head = 0;
  ChunkKind kind = ChunkKind::kOther;

  bool operator==(const Chunk&) const = default;
};

struct FeatureSequence {
  VariantId variant = VariantId::kTok;
  std::vector<std::string> features;
  // Parallel to features; true when the feature came from a punctuation token.
  std::vector<bool> from_punct;
};

struct DeriveOptions {
  bool fold_case = false;  // ASCII lowercasing of forms and lemmas
};

/// Deterministic chunker over the dependency layer.
///
/// A noun chunk is a NOUN/PROPN/PRON token plus its contiguous left-side
/// dependents attached by det, amod, compound, nummod or poss. A verb chunk is
/// a VERB/AUX token plus contiguous left-side aux/neg dependents. Heads are
/// visited right to left so a dependent that could head its own chunk joins
/// the larger phrase. Every remaining token is a singleton.
std::vector<Chunk> chunk(const AnnotatedSample& sample);

/// Builds the feature sequence of one sample under a variant. Throws
/// DataError when the variant needs an annotation layer the sample lacks.
FeatureSequence derive(const AnnotatedSample& sample, VariantId variant,
                       const DeriveOptions& options = {});

std::vector<FeatureSequence> derive_corpus(std::span<const AnnotatedSample> corpus,
                                           VariantId variant, const DeriveOptions& options = {});

/// Drops features that came from punctuation tokens. Token-granular variants
/// only (TOK, LEM, TOK_NER, LEM_NER); others throw InvalidArgument.
FeatureSequence strip_punct(const FeatureSequence& seq);

/// Escapes `\`, `/`, `_` and whitespace so the feature delimiters stay unambiguous.
std::string escape_atom(std::string_view atom);

/// One line per sequence, features separated by single spaces.
void write_variant_corpus(std::ostream& out, std::span<const FeatureSequence> corpus);

}  // namespace fdbench
