#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "m2oie/model.hpp"
#include "m2oie/tags.hpp"

namespace m2oie {

// One n-ary tuple produced for a sentence.
struct Extraction {
  std::string sentence_id;
  Span predicate;
  std::string predicate_text;
  ArgSpans args;
  std::array<std::string, kNumArgSlots> arg_text;
  double confidence = 0.0;
  // Components of the confidence: p(P-B) and p(Ai-B) per present slot
  // (0 for absent slots). In-memory only.
  double predicate_score = 0.0;
  std::array<double, kNumArgSlots> arg_scores{};
};

// Every maximal B(+I) run per slot; an orphan I opens a run.
std::array<std::vector<Span>, kNumArgSlots> decode_bio_all(const std::vector<ArgTag>& tags);

// One span per slot: when a slot has several runs, the run whose first token
// has the highest p(Ai-B) wins (first on ties).
ArgSpans decode_bio(const ArgTagSequence& seq);

// Gold argument tags for per-slot spans over `length` tokens. Throws
// ValidationError on overlap or out-of-range indices.
std::vector<ArgTag> arg_spans_to_tags(const ArgSpans& spans, std::size_t length);

// p(P-B) at the predicate's first token plus p(Ai-B) at the first token of
// each present slot; absent slots add 0.
double confidence(const PredTagSequence& pred, const ArgTagSequence& args,
                  const PredicateSpan& predicate, const ArgSpans& spans);

std::string span_text(const std::vector<std::string>& tokens, const Span& span);

// Predicate tagging -> grouping -> per-predicate argument tagging -> decode.
// Argument tokens falling inside the predicate are trimmed; slots left empty
// become absent. Runs in eval mode; deterministic.
template <class T>
std::vector<Extraction> extract_sentence(const Model<T>& model, const Sentence& sentence,
                                         const std::string& sentence_id = "0");

// Extracts a batch: sentences are padded to the longest member and encoded
// with masking, so results equal per-sentence extraction.
template <class T>
std::vector<std::vector<Extraction>> extract_batch(const Model<T>& model,
                                                   const std::vector<Sentence>& sentences,
                                                   const std::vector<std::string>& ids);

// Tab-separated record:
//   id, predicate text, predicate indices, then text + indices for ARG0..ARG3,
//   confidence with 6 decimals. Indices are comma-separated; absent slots
//   have empty text and "-" indices.
std::string format_extraction(const Extraction& e);
Extraction parse_extraction(const std::string& line, std::size_t line_number = 0);

void write_extractions(std::ostream& os, const std::vector<Extraction>& extractions);
std::vector<Extraction> read_extractions(std::istream& is);

// Sentence order preserved; within a sentence by descending confidence.
void sort_for_output(std::vector<Extraction>& extractions);

}  // namespace m2oie
