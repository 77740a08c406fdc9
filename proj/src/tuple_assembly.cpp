#include "m2oie/tuple_assembly.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace m2oie {

std::array<std::vector<Span>, kNumArgSlots> decode_bio_all(const std::vector<ArgTag>& tags) {
  std::array<std::vector<Span>, kNumArgSlots> runs;
  std::optional<std::size_t> open;  // slot of the run ending at i-1
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const ArgTag t = tags[i];
    if (t == ArgTag::kO) {
      open.reset();
      continue;
    }
    const std::size_t slot = arg_slot(t);
    if (!is_begin(t) && open == slot) {
      runs[slot].back().push_back(i);
    } else {
      runs[slot].push_back({i});
      open = slot;
    }
  }
  return runs;
}

ArgSpans decode_bio(const ArgTagSequence& seq) {
  if (!seq.probs.empty() && seq.probs.size() != seq.tags.size()) {
    throw ValidationError("decode_bio: probabilities and tags differ in length");
  }
  auto runs = decode_bio_all(seq.tags);
  ArgSpans out;
  for (std::size_t slot = 0; slot < kNumArgSlots; ++slot) {
    const auto& r = runs[slot];
    if (r.empty()) continue;
    std::size_t best = 0;
    if (!seq.probs.empty()) {
      const auto b = static_cast<std::size_t>(arg_begin_tag(slot));
      for (std::size_t k = 1; k < r.size(); ++k) {
        if (seq.probs[r[k].front()][b] > seq.probs[r[best].front()][b]) best = k;
      }
    }
    out[slot] = r[best];
  }
  return out;
}

std::vector<ArgTag> arg_spans_to_tags(const ArgSpans& spans, std::size_t length) {
  std::vector<ArgTag> tags(length, ArgTag::kO);
  for (std::size_t slot = 0; slot < kNumArgSlots; ++slot) {
    if (!spans[slot]) continue;
    const auto& s = *spans[slot];
    if (s.empty()) throw ValidationError("argument slot " + std::to_string(slot) + " is empty");
    for (std::size_t k = 0; k < s.size(); ++k) {
      if (s[k] >= length) {
        throw ValidationError("argument index " + std::to_string(s[k]) + " outside sentence of length " +
                              std::to_string(length));
      }
      if (tags[s[k]] != ArgTag::kO) {
        throw ValidationError("argument spans overlap at token " + std::to_string(s[k]));
      }
      tags[s[k]] = k == 0 ? arg_begin_tag(slot) : arg_inside_tag(slot);
    }
  }
  return tags;
}

double confidence(const PredTagSequence& pred, const ArgTagSequence& args,
                  const PredicateSpan& predicate, const ArgSpans& spans) {
  if (predicate.empty()) throw ValidationError("confidence: empty predicate span");
  double cs = pred.probs.at(predicate.front())[static_cast<std::size_t>(PredTag::kB)];
  for (std::size_t slot = 0; slot < kNumArgSlots; ++slot) {
    if (!spans[slot] || spans[slot]->empty()) continue;
    cs += args.probs.at(spans[slot]->front())[static_cast<std::size_t>(arg_begin_tag(slot))];
  }
  return cs;
}

std::string span_text(const std::vector<std::string>& tokens, const Span& span) {
  std::string out;
  for (std::size_t k = 0; k < span.size(); ++k) {
    if (k) out += ' ';
    out += tokens.at(span[k]);
  }
  return out;
}

namespace {

template <class T>
std::vector<Extraction> assemble(Graph<T>& g, const Model<T>& model, const Sentence& sentence,
                                 const std::string& id) {
  const std::size_t len = sentence.length();
  auto fwd = forward_sentence(g, model, sentence);
  auto pred = decode_predicate_logits(fwd.predicate_logits, len);
  auto hidden = fwd.hidden;
  if (sentence.padded_length() != len) {
    std::vector<std::size_t> real(len);
    for (std::size_t i = 0; i < len; ++i) real[i] = i;
    hidden = ops::gather_rows(hidden, std::span<const std::size_t>(real));
  }

  std::vector<Extraction> out;
  for (const auto& span : group_predicates(pred)) {
    auto logits = argument_logits(g, model.argument(), model.config().argument, hidden, span);
    auto arg_seq = decode_argument_logits(logits);
    auto spans = decode_bio(arg_seq);

    Extraction e;
    e.sentence_id = id;
    e.predicate = span;
    e.predicate_text = span_text(sentence.tokens, span);
    e.predicate_score = pred.probs[span.front()][static_cast<std::size_t>(PredTag::kB)];
    e.confidence = e.predicate_score;
    for (std::size_t slot = 0; slot < kNumArgSlots; ++slot) {
      if (!spans[slot]) continue;
      Span kept;
      for (auto i : *spans[slot]) {
        if (std::find(span.begin(), span.end(), i) == span.end()) kept.push_back(i);
      }
      if (kept.empty()) continue;
      // Score is read where the decoded B tag sits, even if trimming moved
      // the first kept token.
      const double score = arg_seq.probs[spans[slot]->front()][static_cast<std::size_t>(arg_begin_tag(slot))];
      e.arg_scores[slot] = score;
      e.confidence += score;
      e.arg_text[slot] = span_text(sentence.tokens, kept);
      e.args[slot] = std::move(kept);
    }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace

template <class T>
std::vector<Extraction> extract_sentence(const Model<T>& model, const Sentence& sentence,
                                         const std::string& sentence_id) {
  Graph<T> g(Mode::kEval);
  return assemble(g, model, sentence, sentence_id);
}

template <class T>
std::vector<std::vector<Extraction>> extract_batch(const Model<T>& model,
                                                   const std::vector<Sentence>& sentences,
                                                   const std::vector<std::string>& ids) {
  if (ids.size() != sentences.size()) throw ValidationError("extract_batch: ids/sentences size mismatch");
  std::size_t longest = 0;
  for (const auto& s : sentences) longest = std::max(longest, s.padded_length());
  std::vector<std::vector<Extraction>> out;
  out.reserve(sentences.size());
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    Graph<T> g(Mode::kEval);
    out.push_back(assemble(g, model, sentences[i].padded_to(longest), ids[i]));
  }
  return out;
}

namespace {

std::string format_indices(const Span& s) {
  std::string out;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (k) out += ',';
    out += std::to_string(s[k]);
  }
  return out;
}

Span parse_indices(const std::string& field, std::size_t line) {
  Span s;
  std::size_t pos = 0;
  while (pos <= field.size()) {
    auto comma = field.find(',', pos);
    if (comma == std::string::npos) comma = field.size();
    const auto part = field.substr(pos, comma - pos);
    if (part.empty() || part.find_first_not_of("0123456789") != std::string::npos) {
      throw ParseError(line, "bad index list '" + field + "'");
    }
    s.push_back(std::stoull(part));
    pos = comma + 1;
  }
  return s;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t pos = 0;
  while (true) {
    auto tab = line.find('\t', pos);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(pos));
      break;
    }
    fields.push_back(line.substr(pos, tab - pos));
    pos = tab + 1;
  }
  return fields;
}

}  // namespace

std::string format_extraction(const Extraction& e) {
  std::string out = e.sentence_id;
  out += '\t' + e.predicate_text + '\t' + format_indices(e.predicate);
  for (std::size_t slot = 0; slot < kNumArgSlots; ++slot) {
    if (e.args[slot]) {
      out += '\t' + e.arg_text[slot] + '\t' + format_indices(*e.args[slot]);
    } else {
      out += "\t\t-";
    }
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", e.confidence);
  out += '\t';
  out += buf;
  return out;
}

Extraction parse_extraction(const std::string& line, std::size_t line_number) {
  auto f = split_tabs(line);
  constexpr std::size_t kFields = 3 + 2 * kNumArgSlots + 1;
  if (f.size() != kFields) {
    throw ParseError(line_number, "expected " + std::to_string(kFields) + " tab-separated fields, got " +
                                      std::to_string(f.size()));
  }
  Extraction e;
  e.sentence_id = f[0];
  e.predicate_text = f[1];
  e.predicate = parse_indices(f[2], line_number);
  for (std::size_t slot = 0; slot < kNumArgSlots; ++slot) {
    const auto& text = f[3 + 2 * slot];
    const auto& idx = f[4 + 2 * slot];
    if (idx == "-") continue;
    e.arg_text[slot] = text;
    e.args[slot] = parse_indices(idx, line_number);
  }
  try {
    std::size_t used = 0;
    e.confidence = std::stod(f.back(), &used);
    if (used != f.back().size()) throw std::invalid_argument("trailing characters");
  } catch (const std::exception&) {
    throw ParseError(line_number, "bad confidence '" + f.back() + "'");
  }
  return e;
}

void write_extractions(std::ostream& os, const std::vector<Extraction>& extractions) {
  for (const auto& e : extractions) os << format_extraction(e) << '\n';
}

std::vector<Extraction> read_extractions(std::istream& is) {
  std::vector<Extraction> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    out.push_back(parse_extraction(line, n));
  }
  return out;
}

void sort_for_output(std::vector<Extraction>& extractions) {
  std::unordered_map<std::string, std::size_t> first_seen;
  for (const auto& e : extractions) first_seen.emplace(e.sentence_id, first_seen.size());
  std::stable_sort(extractions.begin(), extractions.end(), [&](const Extraction& a, const Extraction& b) {
    const auto sa = first_seen.at(a.sentence_id), sb = first_seen.at(b.sentence_id);
    if (sa != sb) return sa < sb;
    return a.confidence > b.confidence;
  });
}

template std::vector<Extraction> extract_sentence(const Model<float>&, const Sentence&, const std::string&);
template std::vector<Extraction> extract_sentence(const Model<double>&, const Sentence&, const std::string&);
template std::vector<std::vector<Extraction>> extract_batch(const Model<float>&, const std::vector<Sentence>&,
                                                            const std::vector<std::string>&);
template std::vector<std::vector<Extraction>> extract_batch(const Model<double>&, const std::vector<Sentence>&,
                                                            const std::vector<std::string>&);

}  // namespace m2oie
