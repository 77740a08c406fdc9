#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "m2oie/tags.hpp"
#include "m2oie/text.hpp"

namespace m2oie {

// Gold tuple as token indices: a contiguous predicate and up to four
// contiguous argument spans (absent slots are nullopt, never empty).
struct TupleAnnotation {
  Span predicate;
  ArgSpans args;

  bool operator==(const TupleAnnotation&) const = default;
};

struct AnnotatedSentence {
  std::string id;
  std::vector<std::string> tokens;
  std::vector<TupleAnnotation> tuples;

  // Throws ValidationError when an index is out of range, a span is empty or
  // non-contiguous, or spans inside one tuple overlap.
  void validate() const;
  bool operator==(const AnnotatedSentence&) const = default;
};

struct CorpusSplit {
  std::vector<AnnotatedSentence> train;
  std::vector<AnnotatedSentence> dev;
  std::vector<AnnotatedSentence> test;
};

// One JSON record per line:
//   {"id":"..","tokens":[..],"tuples":[{"args":[[..]|null x4],"pred":[..]}]}
// Keys are emitted sorted and compact; that is the canonical form.
std::string corpus_line(const AnnotatedSentence& s);
AnnotatedSentence parse_corpus_line(const std::string& line, std::size_t line_number);

std::vector<AnnotatedSentence> read_corpus(std::istream& is);
void write_corpus(std::ostream& os, const std::vector<AnnotatedSentence>& corpus);
std::vector<AnnotatedSentence> load_corpus(const std::filesystem::path& path);
void save_corpus(const std::filesystem::path& path, const std::vector<AnnotatedSentence>& corpus);

struct GoldTags {
  std::vector<PredTag> predicate;
  std::vector<ArgTag> arguments;
};

// Predicate first index -> P-B, rest P-I; slot i first index -> Ai-B, rest
// Ai-I; everything else O.
GoldTags tuples_to_tags(const AnnotatedSentence& sentence, const TupleAnnotation& tuple);

// Union of every tuple's predicate as sentence-level gold predicate tags.
// Identical predicate spans are merged; partially overlapping ones are rejected.
std::vector<PredTag> sentence_predicate_tags(const AnnotatedSentence& sentence);

// Vocabulary in order of first appearance.
Vocabulary build_vocabulary(const std::vector<AnnotatedSentence>& corpus);

// Template-grammar corpus with gold tuples by construction. Deterministic per seed.
std::vector<AnnotatedSentence> synth_corpus(std::uint64_t seed, std::size_t n_sentences);

// Number of distinct words the synthetic grammar can emit.
std::size_t synth_lexicon_size();

// The worked example: two tuples, "helped" (with a locative ARG2) and "debut".
AnnotatedSentence showcase_sentence();

}  // namespace m2oie
