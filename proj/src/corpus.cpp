#include "fdbench/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

#include "csv.hpp"
#include "fdbench/error.hpp"

namespace fdbench {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::optional<int> parse_label(std::string_view raw) {
  std::string v = lower(trim(raw));
  if (v == "1" || v == "yes") return 1;
  if (v == "0" || v == "no") return 0;
  return std::nullopt;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return in;
}

std::string strip_whitespace(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (!std::isspace(static_cast<unsigned char>(c))) out.push_back(c);
  }
  return out;
}

// ---------------------------------------------------------------------------
// CoNLL-U-Plus

enum class Part { kQuestion, kAnswer };

struct RawToken {
  AnnotatedToken token;
  std::string head_field;  // sentence-local, 1-based, "0" for root, "_" if absent
  Part part = Part::kQuestion;
  std::size_t sentence_start = 0;  // sample-level index of the sentence's first token
  std::size_t line = 0;
};

struct Block {
  std::string id;
  std::size_t line = 0;
  bool saw_part_comment = false;
  std::vector<RawToken> tokens;
};

struct Columns {
  std::size_t count = 0;
  std::size_t id = 0, form = 0, lemma = 0, upos = 0, head = 0, deprel = 0, ner = 0;
};

Columns parse_columns(std::string_view decl, std::size_t line) {
  std::istringstream ss{std::string(decl)};
  std::vector<std::string> names;
  for (std::string n; ss >> n;) names.push_back(n);
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < names.size(); ++i) pos[names[i]] = i;
  Columns c;
  c.count = names.size();
  auto need = [&](const char* name) {
    auto it = pos.find(name);
    if (it == pos.end()) {
      throw DataError("line " + std::to_string(line) + ": global.columns lacks required column " +
                      name);
    }
    return it->second;
  };
  c.id = need("ID");
  c.form = need("FORM");
  c.lemma = need("LEMMA");
  c.upos = need("UPOS");
  c.head = need("HEAD");
  c.deprel = need("DEPREL");
  c.ner = need("NER");
  return c;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

std::optional<std::string_view> comment_value(std::string_view line, std::string_view key) {
  // "# key = value"
  std::string_view body = line.substr(1);
  body = trim(body);
  if (body.substr(0, key.size()) != key) return std::nullopt;
  std::string_view rest = trim(body.substr(key.size()));
  if (rest.empty() || rest.front() != '=') return std::nullopt;
  return trim(rest.substr(1));
}

std::string token_ref(const Block& b, const RawToken& t) {
  return "sample '" + b.id + "' line " + std::to_string(t.line) + " token '" + t.token.form + "'";
}

void check_bio(const Block& b) {
  std::string open_type;
  std::size_t sentence = static_cast<std::size_t>(-1);
  for (const RawToken& t : b.tokens) {
    if (t.sentence_start != sentence) {
      sentence = t.sentence_start;
      open_type.clear();
    }
    const std::string& tag = t.token.ner;
    if (tag == "O") {
      open_type.clear();
    } else if (tag.size() > 2 && (tag[0] == 'B' || tag[0] == 'I') && tag[1] == '-') {
      std::string type = tag.substr(2);
      if (tag[0] == 'I' && open_type != type) {
        throw DataError("BIO violation at " + token_ref(b, t) + ": " + tag +
                        " without preceding B-" + type + " or I-" + type);
      }
      open_type = std::move(type);
    } else {
      throw DataError("malformed NER tag '" + tag + "' at " + token_ref(b, t));
    }
  }
}

std::size_t align_question_split(const Sample& s, const std::vector<AnnotatedToken>& tokens) {
  const std::string q = strip_whitespace(s.question);
  if (q.empty()) return 0;
  if (strip_whitespace(s.answer).empty()) return tokens.size();
  std::string acc;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    acc += strip_whitespace(tokens[i].form);
    if (acc == q) return i + 1;
    if (acc.size() >= q.size()) break;
  }
  throw DataError("sample '" + s.id +
                  "': cannot split tokens into question and answer (no '# part' comments and "
                  "token forms do not align with the question text)");
}

AnnotatedSample finalize(const Block& b, const Sample& sample) {
  if (b.tokens.empty()) {
    throw DataError("sample '" + b.id + "' (line " + std::to_string(b.line) +
                    "): annotation block has no tokens");
  }
  AnnotatedSample out;
  out.sample = sample;
  out.has_ner = std::none_of(b.tokens.begin(), b.tokens.end(),
                             [](const RawToken& t) { return t.token.ner == "_"; });
  out.has_syntax = std::none_of(b.tokens.begin(), b.tokens.end(), [](const RawToken& t) {
    return t.head_field == "_" || t.token.deprel == "_";
  });
  if (out.has_ner) check_bio(b);

  out.tokens.reserve(b.tokens.size());
  for (std::size_t i = 0; i < b.tokens.size(); ++i) {
    const RawToken& rt = b.tokens[i];
    AnnotatedToken t = rt.token;
    if (!out.has_ner) t.ner.clear();
    if (out.has_syntax) {
      std::size_t local = 0;
      auto res = std::from_chars(rt.head_field.data(), rt.head_field.data() + rt.head_field.size(),
                                 local);
      if (res.ec != std::errc() || res.ptr != rt.head_field.data() + rt.head_field.size()) {
        throw DataError("bad HEAD '" + rt.head_field + "' at " + token_ref(b, rt));
      }
      std::size_t sentence_len = 0;
      for (std::size_t j = rt.sentence_start; j < b.tokens.size() &&
                                              b.tokens[j].sentence_start == rt.sentence_start;
           ++j) {
        ++sentence_len;
      }
      if (local > sentence_len) {
        throw DataError("HEAD " + rt.head_field + " out of range at " + token_ref(b, rt));
      }
      t.head = local == 0 ? i : rt.sentence_start + local - 1;
    } else {
      t.head = i;
      t.deprel.clear();
    }
    out.tokens.push_back(std::move(t));
  }

  if (b.saw_part_comment) {
    std::size_t n_q = 0;
    bool seen_answer = false;
    for (const RawToken& t : b.tokens) {
      if (t.part == Part::kQuestion) {
        if (seen_answer) {
          throw DataError("sample '" + b.id + "': question tokens after answer tokens");
        }
        ++n_q;
      } else {
        seen_answer = true;
      }
    }
    out.n_question_tokens = n_q;
  } else {
    out.n_question_tokens = align_question_split(sample, out.tokens);
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<Sample> parse_samples(std::istream& in) {
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header) throw DataError("samples CSV is empty (no header row)");
  if (!header->empty() && header->front().rfind("\xEF\xBB\xBF", 0) == 0) {
    header->front().erase(0, 3);
  }
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header->size(); ++i) col[lower(trim((*header)[i]))] = i;
  for (const char* name : {"id", "question", "answer", "label"}) {
    if (!col.count(name)) {
      throw DataError(std::string("samples CSV header lacks column '") + name + "'");
    }
  }
  const std::size_t n_cols = header->size();

  std::vector<Sample> out;
  std::unordered_set<std::string> seen;
  std::size_t row = 0;
  while (auto rec = reader.next()) {
    if (rec->size() == 1 && rec->front().empty()) continue;  // blank line
    ++row;
    const std::string where =
        "row " + std::to_string(row) + " (line " + std::to_string(reader.record_line()) + ")";
    if (rec->size() != n_cols) {
      throw DataError("malformed " + where + ": expected " + std::to_string(n_cols) +
                      " fields, got " + std::to_string(rec->size()));
    }
    Sample s;
    s.id = std::string(trim((*rec)[col["id"]]));
    s.question = (*rec)[col["question"]];
    s.answer = (*rec)[col["answer"]];
    auto label = parse_label((*rec)[col["label"]]);
    if (!label) {
      throw DataError("unknown label at row " + std::to_string(row) + ": '" +
                      (*rec)[col["label"]] + "'");
    }
    s.label = *label;
    if (s.id.empty()) throw DataError("malformed " + where + ": empty id");
    if (trim(s.question).empty() && trim(s.answer).empty()) {
      throw DataError("malformed " + where + ": question and answer are both empty");
    }
    if (!seen.insert(s.id).second) {
      throw DataError("duplicate sample id '" + s.id + "' at " + where);
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Sample> load_samples(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_samples(in);
}

void write_samples(std::ostream& out, std::span<const Sample> samples) {
  csv::write_row(out, {"id", "question", "answer", "label"});
  for (const Sample& s : samples) {
    csv::write_row(out, {s.id, s.question, s.answer, std::to_string(s.label)});
  }
}

AttachResult attach_annotations(std::span<const Sample> samples, std::istream& in) {
  std::unordered_map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < samples.size(); ++i) by_id.emplace(samples[i].id, i);

  std::optional<Columns> columns;
  std::map<std::size_t, AnnotatedSample> done;  // keyed by sample position
  std::optional<Block> block;
  Part part = Part::kQuestion;
  bool sentence_open = false;
  std::size_t sentence_start = 0;

  auto flush = [&]() {
    if (!block) return;
    std::size_t idx = by_id.at(block->id);
    done.emplace(idx, finalize(*block, samples[idx]));
    block.reset();
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string_view lv = line;
    if (trim(lv).empty()) {
      sentence_open = false;
      continue;
    }
    if (lv.front() == '#') {
      if (auto decl = comment_value(lv, "global.columns")) {
        columns = parse_columns(*decl, line_no);
      } else if (auto id = comment_value(lv, "sample_id")) {
        flush();
        std::string sid(*id);
        if (!by_id.count(sid)) {
          throw DataError("line " + std::to_string(line_no) + ": annotation block for unknown id '" +
                          sid + "'");
        }
        if (done.count(by_id[sid])) {
          throw DataError("line " + std::to_string(line_no) + ": duplicate annotation block for id '" +
                          sid + "'");
        }
        block = Block{sid, line_no, false, {}};
        part = Part::kQuestion;
        sentence_open = false;
      } else if (auto p = comment_value(lv, "part")) {
        if (!block) {
          throw DataError("line " + std::to_string(line_no) + ": '# part' outside a sample block");
        }
        if (*p == "question") {
          part = Part::kQuestion;
        } else if (*p == "answer") {
          part = Part::kAnswer;
        } else {
          throw DataError("line " + std::to_string(line_no) + ": unknown part '" + std::string(*p) +
                          "'");
        }
        block->saw_part_comment = true;
        sentence_open = false;
      }
      continue;
    }
    if (!columns) {
      throw DataError("line " + std::to_string(line_no) +
                      ": token line before '# global.columns' declaration");
    }
    if (!block) {
      throw DataError("line " + std::to_string(line_no) + ": token line outside a sample block");
    }
    auto fields = split_tabs(lv);
    if (fields.size() != columns->count) {
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(columns->count) + " columns, got " +
                      std::to_string(fields.size()));
    }
    std::string_view id = fields[columns->id];
    if (id.find_first_of("-.") != std::string_view::npos) continue;  // multiword / empty node
    if (!sentence_open) {
      sentence_open = true;
      sentence_start = block->tokens.size();
    }
    RawToken rt;
    rt.token.form = std::string(fields[columns->form]);
    rt.token.lemma = std::string(fields[columns->lemma]);
    rt.token.upos = std::string(fields[columns->upos]);
    rt.token.ner = std::string(fields[columns->ner]);
    rt.token.deprel = std::string(fields[columns->deprel]);
    rt.token.is_punct = rt.token.upos == "PUNCT";
    rt.head_field = std::string(fields[columns->head]);
    rt.part = part;
    rt.sentence_start = sentence_start;
    rt.line = line_no;
    std::size_t expected_id = block->tokens.size() - sentence_start + 1;
    if (id != std::to_string(expected_id)) {
      throw DataError("line " + std::to_string(line_no) + ": token ID '" + std::string(id) +
                      "' out of sequence (expected " + std::to_string(expected_id) + ")");
    }
    block->tokens.push_back(std::move(rt));
  }
  flush();

  AttachResult result;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    auto it = done.find(i);
    if (it == done.end()) {
      result.missing_ids.push_back(samples[i].id);
    } else {
      result.annotated.push_back(std::move(it->second));
    }
  }
  return result;
}

AttachResult attach_annotations(std::span<const Sample> samples,
                                const std::filesystem::path& path) {
  auto in = open_input(path);
  return attach_annotations(samples, in);
}

void write_annotations(std::ostream& out, std::span<const AnnotatedSample> corpus) {
  out << "# global.columns = ID FORM LEMMA UPOS XPOS FEATS HEAD DEPREL DEPS MISC NER\n";
  for (const AnnotatedSample& s : corpus) {
    out << "# sample_id = " << s.sample.id << "\n";
    const std::size_t n = s.tokens.size();
    const std::size_t parts[3] = {0, s.n_question_tokens, n};
    for (int p = 0; p < 2; ++p) {
      const std::size_t begin = parts[p], end = parts[p + 1];
      if (begin == end) continue;
      out << "# part = " << (p == 0 ? "question" : "answer") << "\n";
      for (std::size_t i = begin; i < end; ++i) {
        const AnnotatedToken& t = s.tokens[i];
        std::string head = "_";
        if (s.has_syntax) {
          if (t.head == i) {
            head = "0";
          } else if (t.head >= begin && t.head < end) {
            head = std::to_string(t.head - begin + 1);
          } else {
            throw InvalidArgument("sample '" + s.sample.id + "': token " + std::to_string(i) +
                                  " has a head outside its question/answer part");
          }
        }
        out << (i - begin + 1) << '\t' << t.form << '\t' << t.lemma << '\t' << t.upos
            << "\t_\t_\t" << head << '\t' << (s.has_syntax ? t.deprel : "_") << "\t_\t_\t"
            << (s.has_ner ? t.ner : "_") << '\n';
      }
      out << '\n';
    }
  }
}

std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s) {
    if ((c & 0xC0) != 0x80) ++n;
  }
  return n;
}

CorpusStats corpus_stats(std::span<const AnnotatedSample> corpus) {
  if (corpus.empty()) throw DataError("corpus_stats: corpus is empty");
  CorpusStats st;
  std::unordered_set<std::string_view> forms;
  double q_chars = 0, q_words = 0, a_chars = 0, a_words = 0;
  double h_chars = 0, h_words = 0, n_chars = 0, n_words = 0;
  for (const AnnotatedSample& s : corpus) {
    ++st.n_samples;
    (s.sample.label == 1 ? st.n_harmful : st.n_nonharmful) += 1;
    st.n_tokens += s.tokens.size();
    for (const AnnotatedToken& t : s.tokens) forms.insert(t.form);

    const double qc = static_cast<double>(utf8_length(s.sample.question));
    const double ac = static_cast<double>(utf8_length(s.sample.answer));
    const double qw = static_cast<double>(s.n_question_tokens);
    const double aw = static_cast<double>(s.tokens.size() - s.n_question_tokens);
    q_chars += qc;
    a_chars += ac;
    q_words += qw;
    a_words += aw;
    if (s.sample.label == 1) {
      h_chars += qc + ac;
      h_words += qw + aw;
    } else {
      n_chars += qc + ac;
      n_words += qw + aw;
    }
  }
  st.n_unique_tokens = forms.size();
  const double n = static_cast<double>(st.n_samples);
  st.avg_question_chars = q_chars / n;
  st.avg_question_words = q_words / n;
  st.avg_answer_chars = a_chars / n;
  st.avg_answer_words = a_words / n;
  st.avg_post_chars = (q_chars + a_chars) / n;
  st.avg_post_words = (q_words + a_words) / n;
  if (st.n_harmful) {
    st.avg_harmful_post_chars = h_chars / static_cast<double>(st.n_harmful);
    st.avg_harmful_post_words = h_words / static_cast<double>(st.n_harmful);
  }
  if (st.n_nonharmful) {
    st.avg_nonharmful_post_chars = n_chars / static_cast<double>(st.n_nonharmful);
    st.avg_nonharmful_post_words = n_words / static_cast<double>(st.n_nonharmful);
  }
  return st;
}

std::vector<int> labels_of(std::span<const AnnotatedSample> corpus) {
  std::vector<int> y;
  y.reserve(corpus.size());
  for (const AnnotatedSample& s : corpus) y.push_back(s.sample.label);
  return y;
}

}  // namespace fdbench
