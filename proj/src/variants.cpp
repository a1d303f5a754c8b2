#include "fdbench/variants.hpp"

#include <algorithm>
#include <cctype>
#include <ostream>
#include <sstream>

#include "fdbench/error.hpp"

namespace fdbench {
namespace {

struct VariantInfo {
  VariantId id;
  std::string_view name;
};

constexpr std::array<VariantInfo, 11> kInfo = {{
    {VariantId::kTok, "TOK"},
    {VariantId::kLem, "LEM"},
    {VariantId::kPos, "POS"},
    {VariantId::kTokPos, "TOK_POS"},
    {VariantId::kLemPos, "LEM_POS"},
    {VariantId::kTokNer, "TOK_NER"},
    {VariantId::kLemNer, "LEM_NER"},
    {VariantId::kChnk, "CHNK"},
    {VariantId::kChnkNer, "CHNK_NER"},
    {VariantId::kDep, "DEP"},
    {VariantId::kDepNer, "DEP_NER"},
}};

bool relation_in(std::string_view deprel, std::initializer_list<std::string_view> set) {
  auto colon = deprel.find(':');
  std::string_view base = deprel.substr(0, colon);
  std::string_view sub = colon == std::string_view::npos ? std::string_view{} : deprel.substr(colon + 1);
  for (std::string_view r : set) {
    if (deprel == r || base == r || sub == r) return true;
  }
  return false;
}

bool is_noun_head(const AnnotatedToken& t) {
  return t.upos == "NOUN" || t.upos == "PROPN" || t.upos == "PRON";
}

bool is_verb_head(const AnnotatedToken& t) { return t.upos == "VERB" || t.upos == "AUX"; }

std::string fold(std::string_view s, bool fold_case) {
  std::string out(s);
  if (fold_case) {
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

// Entity span membership: span_of[i] is the span index of token i, or -1.
struct EntitySpans {
  std::vector<long> span_of;
  std::vector<std::string> type;  // per span
  std::vector<std::size_t> first;  // per span, first token index
};

EntitySpans entity_spans(const AnnotatedSample& s) {
  EntitySpans e;
  e.span_of.assign(s.tokens.size(), -1);
  for (std::size_t i = 0; i < s.tokens.size(); ++i) {
    const std::string& tag = s.tokens[i].ner;
    if (tag.size() > 2 && tag[1] == '-') {
      std::string type = tag.substr(2);
      bool continues = tag[0] == 'I' && i > 0 && e.span_of[i - 1] >= 0 &&
                       e.type[static_cast<std::size_t>(e.span_of[i - 1])] == type;
      if (!continues) {
        e.type.push_back(type);
        e.first.push_back(i);
      }
      e.span_of[i] = static_cast<long>(e.type.size()) - 1;
    }
  }
  return e;
}

const std::string& token_text(const AnnotatedToken& t, bool use_lemma) {
  return use_lemma ? t.lemma : t.form;
}

void emit(FeatureSequence& seq, std::string feature, bool punct) {
  if (feature.empty()) throw DataError("empty feature while deriving " +
                                       std::string(variant_name(seq.variant)));
  seq.features.push_back(std::move(feature));
  seq.from_punct.push_back(punct);
}

std::string chunk_text(const AnnotatedSample& s, const Chunk& c, const EntitySpans* ner,
                       const DeriveOptions& opt) {
  std::string out;
  for (std::size_t i = c.begin; i < c.end; ++i) {
    std::string atom;
    if (ner && ner->span_of[i] >= 0) {
      auto span = static_cast<std::size_t>(ner->span_of[i]);
      if (i != c.begin && ner->span_of[i - 1] == ner->span_of[i]) continue;
      atom = escape_atom(ner->type[span]);
    } else {
      atom = escape_atom(fold(s.tokens[i].form, opt.fold_case));
    }
    if (!out.empty()) out.push_back('_');
    out += atom;
  }
  return out;
}

}  // namespace

std::string_view variant_name(VariantId v) {
  for (const auto& info : kInfo) {
    if (info.id == v) return info.name;
  }
  return "?";
}

std::optional<VariantId> parse_variant(std::string_view name) {
  std::string norm;
  for (char c : name) {
    if (c == '+' || c == '-') c = '_';
    norm.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  for (const auto& info : kInfo) {
    if (info.name == norm) return info.id;
  }
  return std::nullopt;
}

std::vector<VariantId> parse_variant_list(std::string_view list) {
  std::vector<VariantId> out;
  std::stringstream ss{std::string(list)};
  for (std::string item; std::getline(ss, item, ',');) {
    item.erase(std::remove_if(item.begin(), item.end(),
                              [](unsigned char c) { return std::isspace(c); }),
               item.end());
    if (item.empty()) continue;
    if (item == "all" || item == "ALL") {
      out.insert(out.end(), kAllVariants.begin(), kAllVariants.end());
      continue;
    }
    auto v = parse_variant(item);
    if (!v) throw ConfigError("unknown variant '" + item + "'");
    out.push_back(*v);
  }
  std::vector<VariantId> dedup;
  for (VariantId v : out) {
    if (std::find(dedup.begin(), dedup.end(), v) == dedup.end()) dedup.push_back(v);
  }
  return dedup;
}

bool is_token_granular(VariantId v) {
  return v == VariantId::kTok || v == VariantId::kLem || v == VariantId::kTokNer ||
         v == VariantId::kLemNer;
}

bool needs_ner(VariantId v) {
  return v == VariantId::kTokNer || v == VariantId::kLemNer || v == VariantId::kChnkNer ||
         v == VariantId::kDepNer;
}

bool needs_syntax(VariantId v) {
  return v == VariantId::kChnk || v == VariantId::kChnkNer || v == VariantId::kDep ||
         v == VariantId::kDepNer;
}

std::string escape_atom(std::string_view atom) {
  std::string out;
  out.reserve(atom.size());
  for (char c : atom) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '/': out += "\\/"; break;
      case '_': out += "\\_"; break;
      case ' ': out += "\\s"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::vector<Chunk> chunk(const AnnotatedSample& s) {
  const std::size_t n = s.tokens.size();
  std::vector<bool> taken(n, false);
  std::vector<Chunk> chunks;
  for (std::size_t h = n; h-- > 0;) {
    if (taken[h]) continue;
    const AnnotatedToken& head = s.tokens[h];
    ChunkKind kind = ChunkKind::kOther;
    if (is_noun_head(head)) {
      kind = ChunkKind::kNoun;
    } else if (is_verb_head(head)) {
      kind = ChunkKind::kVerb;
    }
    std::size_t begin = h;
    if (kind != ChunkKind::kOther && s.has_syntax) {
      while (begin > 0) {
        const std::size_t j = begin - 1;
        const AnnotatedToken& dep = s.tokens[j];
        if (taken[j] || dep.head != h || j == dep.head) break;
        bool ok = kind == ChunkKind::kNoun
                      ? relation_in(dep.deprel, {"det", "amod", "compound", "nummod", "poss"})
                      : relation_in(dep.deprel, {"aux", "neg"});
        if (!ok) break;
        begin = j;
      }
    }
    for (std::size_t i = begin; i <= h; ++i) taken[i] = true;
    chunks.push_back(Chunk{begin, h + 1, h, kind});
  }
  std::reverse(chunks.begin(), chunks.end());
  return chunks;
}

FeatureSequence derive(const AnnotatedSample& s, VariantId variant, const DeriveOptions& opt) {
  if (needs_ner(variant) && !s.has_ner) {
    throw DataError("sample '" + s.sample.id + "' has no NER layer, required by " +
                    std::string(variant_name(variant)));
  }
  if (needs_syntax(variant) && !s.has_syntax) {
    throw DataError("sample '" + s.sample.id + "' has no dependency layer, required by " +
                    std::string(variant_name(variant)));
  }
  FeatureSequence seq;
  seq.variant = variant;
  seq.features.reserve(s.tokens.size());
  seq.from_punct.reserve(s.tokens.size());

  switch (variant) {
    case VariantId::kTok:
    case VariantId::kLem: {
      const bool lemma = variant == VariantId::kLem;
      for (const AnnotatedToken& t : s.tokens) {
        emit(seq, escape_atom(fold(token_text(t, lemma), opt.fold_case)), t.is_punct);
      }
      break;
    }
    case VariantId::kPos:
      for (const AnnotatedToken& t : s.tokens) emit(seq, escape_atom(t.upos), t.is_punct);
      break;
    case VariantId::kTokPos:
    case VariantId::kLemPos: {
      const bool lemma = variant == VariantId::kLemPos;
      for (const AnnotatedToken& t : s.tokens) {
        emit(seq,
             escape_atom(fold(token_text(t, lemma), opt.fold_case)) + "/" + escape_atom(t.upos),
             t.is_punct);
      }
      break;
    }
    case VariantId::kTokNer:
    case VariantId::kLemNer: {
      const bool lemma = variant == VariantId::kLemNer;
      const EntitySpans ner = entity_spans(s);
      for (std::size_t i = 0; i < s.tokens.size(); ++i) {
        const long span = ner.span_of[i];
        if (span < 0) {
          emit(seq, escape_atom(fold(token_text(s.tokens[i], lemma), opt.fold_case)),
               s.tokens[i].is_punct);
        } else if (ner.first[static_cast<std::size_t>(span)] == i) {
          emit(seq, escape_atom(ner.type[static_cast<std::size_t>(span)]), false);
        }
      }
      break;
    }
    case VariantId::kChnk:
    case VariantId::kChnkNer:
    case VariantId::kDep:
    case VariantId::kDepNer: {
      const bool with_ner = variant == VariantId::kChnkNer || variant == VariantId::kDepNer;
      const bool with_rel = variant == VariantId::kDep || variant == VariantId::kDepNer;
      const EntitySpans ner = with_ner ? entity_spans(s) : EntitySpans{};
      for (const Chunk& c : chunk(s)) {
        std::string f = chunk_text(s, c, with_ner ? &ner : nullptr, opt);
        if (with_rel) f += "/" + escape_atom(s.tokens[c.head].deprel);
        bool punct = true;
        for (std::size_t i = c.begin; i < c.end; ++i) punct = punct && s.tokens[i].is_punct;
        emit(seq, std::move(f), punct);
      }
      break;
    }
  }
  return seq;
}

std::vector<FeatureSequence> derive_corpus(std::span<const AnnotatedSample> corpus,
                                           VariantId variant, const DeriveOptions& options) {
  std::vector<FeatureSequence> out;
  out.reserve(corpus.size());
  for (const AnnotatedSample& s : corpus) out.push_back(derive(s, variant, options));
  return out;
}

FeatureSequence strip_punct(const FeatureSequence& seq) {
  if (!is_token_granular(seq.variant)) {
    throw InvalidArgument("strip_punct: " + std::string(variant_name(seq.variant)) +
                          " is not a token-granular variant");
  }
  FeatureSequence out;
  out.variant = seq.variant;
  for (std::size_t i = 0; i < seq.features.size(); ++i) {
    const bool punct = i < seq.from_punct.size() && seq.from_punct[i];
    if (punct) continue;
    out.features.push_back(seq.features[i]);
    out.from_punct.push_back(false);
  }
  return out;
}

void write_variant_corpus(std::ostream& out, std::span<const FeatureSequence> corpus) {
  for (const FeatureSequence& seq : corpus) {
    for (std::size_t i = 0; i < seq.features.size(); ++i) {
      if (i) out << ' ';
      out << seq.features[i];
    }
    out << '\n';
  }
}

}  // namespace fdbench
