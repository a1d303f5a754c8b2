#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace fdbench {

/// One labeled post. label is 1 for harmful, 0 for non-harmful.
struct Sample {
  std::string id;
  std::string question;
  std::string answer;
  int label = 0;

  bool operator==(const Sample&) const = default;
};

/// Root tokens point at themselves: head == own index within the sample.
struct AnnotatedToken {
  std::string form;
  std::string lemma;
  std::string upos;
  std::string ner;  // BIO tag; empty when the sample carries no NER layer
  std::size_t head = 0;
  std::string deprel;
  bool is_punct = false;

  bool operator==(const AnnotatedToken&) const = default;
};

/// Question tokens followed by answer tokens.
struct AnnotatedSample {
  Sample sample;
  std::vector<AnnotatedToken> tokens;
  std::size_t n_question_tokens = 0;
  bool has_ner = true;
  bool has_syntax = true;

  bool operator==(const AnnotatedSample&) const = default;
};

struct CorpusStats {
  std::size_t n_samples = 0;
  std::size_t n_harmful = 0;
  std::size_t n_nonharmful = 0;
  std::size_t n_tokens = 0;
  std::size_t n_unique_tokens = 0;

  // Averages are per sample. Words are annotated tokens; characters are
  // Unicode scalar values of the raw text.
  double avg_post_chars = 0;
  double avg_post_words = 0;
  double avg_question_chars = 0;
  double avg_question_words = 0;
  double avg_answer_chars = 0;
  double avg_answer_words = 0;
  double avg_harmful_post_chars = 0;
  double avg_harmful_post_words = 0;
  double avg_nonharmful_post_chars = 0;
  double avg_nonharmful_post_words = 0;

  bool operator==(const CorpusStats&) const = default;
};

/// Reads `id,question,answer,label` CSV (RFC 4180). Labels accept 0/1/yes/no,
/// case-insensitively. Throws DataError naming the offending row.
std::vector<Sample> load_samples(const std::filesystem::path& path);
std::vector<Sample> parse_samples(std::istream& in);

void write_samples(std::ostream& out, std::span<const Sample> samples);

struct AttachResult {
  std::vector<AnnotatedSample> annotated;  // input order, annotated samples only
  std::vector<std::string> missing_ids;    // samples with text but no annotation block
};

/// Joins samples with a CoNLL-U-Plus annotation file.
///
/// The file declares its columns with `# global.columns = ...`; ID, FORM,
/// LEMMA, UPOS, HEAD, DEPREL and NER are required. Each sample starts with
/// `# sample_id = <id>`; an optional `# part = question|answer` comment
/// switches the part for the following sentences. Without part comments the
/// question/answer split is recovered by aligning token forms to the raw text.
AttachResult attach_annotations(std::span<const Sample> samples,
                                const std::filesystem::path& path);
AttachResult attach_annotations(std::span<const Sample> samples, std::istream& in);

/// Writes the interchange format read by attach_annotations. One sentence per
/// part; HEAD and ID are sentence-local and 1-based as in CoNLL-U.
void write_annotations(std::ostream& out, std::span<const AnnotatedSample> corpus);

CorpusStats corpus_stats(std::span<const AnnotatedSample> corpus);

/// Number of Unicode scalar values in a UTF-8 string.
std::size_t utf8_length(std::string_view s);

std::vector<int> labels_of(std::span<const AnnotatedSample> corpus);

}  // namespace fdbench
