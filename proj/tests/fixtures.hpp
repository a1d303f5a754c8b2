#pragma once

// Randomised corpora and datasets shared by the unit and acceptance tests.

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include "fdbench/corpus.hpp"
#include "fdbench/rng.hpp"
#include "fdbench/vectorize.hpp"

namespace fdbench::testing {

struct Tok {
  std::string form, lemma, upos, ner = "O";
  std::size_t head = 0;  // sample-level
  std::string deprel = "dep";
};

inline AnnotatedSample make_sample(std::string id, int label, const std::vector<Tok>& toks,
                                   std::size_t n_question = static_cast<std::size_t>(-1)) {
  AnnotatedSample s;
  s.sample.id = std::move(id);
  s.sample.label = label;
  s.n_question_tokens = std::min(n_question, toks.size());
  for (std::size_t i = 0; i < toks.size(); ++i) {
    const Tok& t = toks[i];
    s.tokens.push_back({t.form, t.lemma, t.upos, t.ner, t.head, t.deprel, t.upos == "PUNCT"});
    std::string& text = i < s.n_question_tokens ? s.sample.question : s.sample.answer;
    if (!text.empty()) text += ' ';
    text += t.form;
  }
  return s;
}

/// "the big dog barked": det, amod, nsubj, root.
inline AnnotatedSample dog_barked() {
  return make_sample("dog", 0,
                     {{"the", "the", "DET", "O", 2, "det"},
                      {"big", "big", "ADJ", "O", 2, "amod"},
                      {"dog", "dog", "NOUN", "O", 3, "nsubj"},
                      {"barked", "bark", "VERB", "O", 3, "root"}});
}

/// "John is dumb" with John = B-PERSON.
inline AnnotatedSample john_is_dumb() {
  return make_sample("john", 1,
                     {{"John", "John", "PROPN", "B-PERSON", 2, "nsubj"},
                      {"is", "be", "AUX", "O", 2, "cop"},
                      {"dumb", "dumb", "ADJ", "O", 2, "root"}});
}

struct FixtureOptions {
  std::size_t min_tokens = 1;
  std::size_t max_tokens = 12;
  std::size_t vocab = 40;
  double punct_rate = 0.12;
  double entity_rate = 0.15;
  double positive_rate = 0.3;
};

/// Random annotated corpus. Heads stay inside their part (question, answer);
/// entity tokens come from a vocabulary disjoint from ordinary words and
/// entity type labels never occur as forms.
inline std::vector<AnnotatedSample> random_corpus(Rng& rng, std::size_t n,
                                                  const FixtureOptions& o = {}) {
  static const char* kUpos[] = {"NOUN", "VERB", "ADJ", "DET", "AUX", "PRON", "ADV", "PROPN"};
  static const char* kRel[] = {"det", "amod", "compound", "nummod", "poss", "aux",
                               "neg", "nsubj", "obj", "advmod", "obl:tmod", "dep"};
  static const char* kPunct[] = {".", "!", "?", ","};
  static const char* kTypes[] = {"PERSON", "ORG", "GPE"};
  std::vector<AnnotatedSample> out;
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<Tok> toks;
    std::size_t n_question = 0;
    for (int part = 0; part < 2; ++part) {
      const std::size_t len = o.min_tokens + rng.below(o.max_tokens - o.min_tokens + 1);
      const std::size_t base = toks.size();
      const std::size_t root = base + rng.below(len);
      for (std::size_t i = 0; i < len; ++i) {
        Tok t;
        const std::size_t idx = base + i;
        if (rng.bernoulli(o.punct_rate)) {
          t.form = kPunct[rng.below(4)];
          t.lemma = t.form;
          t.upos = "PUNCT";
        } else {
          const std::size_t w = rng.below(o.vocab);
          t.form = (rng.bernoulli(0.2) ? "W" : "w") + std::to_string(w);
          t.lemma = "l" + std::to_string(w % (o.vocab / 2 + 1));
          t.upos = kUpos[rng.below(8)];
        }
        t.deprel = kRel[rng.below(12)];
        if (idx == root) {
          t.head = idx;
          t.deprel = "root";
        } else {
          t.head = base + rng.below(len);
          if (t.head == idx) t.head = root;
        }
        toks.push_back(t);
      }
      // Entity spans over non-punctuation runs.
      for (std::size_t i = base; i < toks.size(); ++i) {
        if (toks[i].upos == "PUNCT" || !rng.bernoulli(o.entity_rate)) continue;
        const std::string type = kTypes[rng.below(3)];
        std::size_t span = 1 + rng.below(3);
        for (std::size_t k = 0; k < span && i + k < toks.size() && toks[i + k].upos != "PUNCT";
             ++k) {
          Tok& t = toks[i + k];
          t.ner = (k == 0 ? "B-" : "I-") + type;
          const std::size_t e = rng.below(15);
          // Type-specific forms: every label used maps to at least one form.
          t.form = "Ent" + type.substr(0, 1) + std::to_string(e);
          t.lemma = "ent" + type.substr(0, 1) + std::to_string(e);
          t.upos = "PROPN";
        }
        i += span;
      }
      if (part == 0) n_question = toks.size();
    }
    out.push_back(make_sample("s" + std::to_string(s), rng.bernoulli(o.positive_rate) ? 1 : 0,
                              toks, n_question));
  }
  return out;
}

/// Two classes of documents over disjoint feature sets, so a hyperplane
/// separates them exactly in TF-IDF space.
inline std::vector<FeatureSequence> separable_docs(Rng& rng, std::span<const int> labels) {
  std::vector<FeatureSequence> docs;
  for (int y : labels) {
    FeatureSequence seq;
    seq.variant = VariantId::kTok;
    const std::size_t len = 4 + rng.below(6);
    for (std::size_t i = 0; i < len; ++i) {
      seq.features.push_back((y ? "pos" : "neg") + std::to_string(rng.below(8)));
      seq.from_punct.push_back(false);
    }
    seq.features.push_back("shared" + std::to_string(rng.below(5)));
    seq.from_punct.push_back(false);
    docs.push_back(std::move(seq));
  }
  return docs;
}

inline std::vector<int> random_labels(Rng& rng, std::size_t n, double positive_rate) {
  std::vector<int> y(n);
  for (int& v : y) v = rng.bernoulli(positive_rate) ? 1 : 0;
  return y;
}

inline std::vector<int> exact_labels(std::size_t n_pos, std::size_t n_neg) {
  std::vector<int> y(n_pos, 1);
  y.insert(y.end(), n_neg, 0);
  return y;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("fdbench_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fdbench::testing
