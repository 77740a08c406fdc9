#include "m2oie/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "m2oie/error.hpp"
#include "m2oie/predicate_tagger.hpp"
#include "m2oie/tuple_assembly.hpp"

namespace m2oie {
namespace {

using json = nlohmann::json;

void check_span(const Span& s, std::size_t len, const std::string& what) {
  if (s.empty()) throw ValidationError(what + ": empty span");
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (s[k] >= len) {
      throw ValidationError(what + ": index " + std::to_string(s[k]) + " >= token count " +
                            std::to_string(len));
    }
    if (k > 0 && s[k] != s[k - 1] + 1) {
      throw ValidationError(what + ": indices must be contiguous and ascending");
    }
  }
}

Span span_from_json(const json& j, std::size_t line, const std::string& what) {
  if (!j.is_array()) throw ParseError(line, what + " must be an array of indices");
  Span s;
  for (const auto& v : j) {
    if (!v.is_number_unsigned()) throw ParseError(line, what + " must hold non-negative integers");
    s.push_back(v.get<std::size_t>());
  }
  return s;
}

}  // namespace

void AnnotatedSentence::validate() const {
  if (tokens.empty()) throw ValidationError("sentence '" + id + "' has no tokens");
  const std::size_t len = tokens.size();
  for (std::size_t t = 0; t < tuples.size(); ++t) {
    const auto& tup = tuples[t];
    const std::string where = "sentence '" + id + "' tuple " + std::to_string(t);
    check_span(tup.predicate, len, where + " predicate");
    std::vector<int> owner(len, -1);
    for (auto i : tup.predicate) owner[i] = 0;
    for (std::size_t slot = 0; slot < kNumArgSlots; ++slot) {
      if (!tup.args[slot]) continue;
      check_span(*tup.args[slot], len, where + " ARG" + std::to_string(slot));
      for (auto i : *tup.args[slot]) {
        if (owner[i] != -1) {
          throw ValidationError(where + ": ARG" + std::to_string(slot) + " overlaps another span at token " +
                                std::to_string(i));
        }
        owner[i] = static_cast<int>(slot) + 1;
      }
    }
  }
}

std::string corpus_line(const AnnotatedSentence& s) {
  json tuples = json::array();
  for (const auto& t : s.tuples) {
    json args = json::array();
    for (const auto& a : t.args) args.push_back(a ? json(*a) : json(nullptr));
    tuples.push_back(json{{"pred", t.predicate}, {"args", args}});
  }
  json rec{{"id", s.id}, {"tokens", s.tokens}, {"tuples", tuples}};
  return rec.dump();
}

AnnotatedSentence parse_corpus_line(const std::string& line, std::size_t n) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(n, std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError(n, "record must be a JSON object");
  for (const char* key : {"id", "tokens", "tuples"}) {
    if (!j.contains(key)) throw ParseError(n, std::string("missing field '") + key + "'");
  }
  AnnotatedSentence s;
  if (j["id"].is_string()) {
    s.id = j["id"].get<std::string>();
  } else if (j["id"].is_number_integer()) {
    s.id = std::to_string(j["id"].get<long long>());
  } else {
    throw ParseError(n, "id must be a string or integer");
  }
  if (!j["tokens"].is_array()) throw ParseError(n, "tokens must be an array");
  for (const auto& t : j["tokens"]) {
    if (!t.is_string()) throw ParseError(n, "tokens must be strings");
    s.tokens.push_back(t.get<std::string>());
  }
  if (!j["tuples"].is_array()) throw ParseError(n, "tuples must be an array");
  for (const auto& t : j["tuples"]) {
    if (!t.is_object() || !t.contains("pred") || !t.contains("args")) {
      throw ParseError(n, "tuple needs 'pred' and 'args'");
    }
    TupleAnnotation tup;
    tup.predicate = span_from_json(t["pred"], n, "pred");
    const auto& args = t["args"];
    if (!args.is_array() || args.size() != kNumArgSlots) {
      throw ParseError(n, "args must be an array of exactly 4 entries");
    }
    for (std::size_t slot = 0; slot < kNumArgSlots; ++slot) {
      if (args[slot].is_null()) continue;
      tup.args[slot] = span_from_json(args[slot], n, "ARG" + std::to_string(slot));
    }
    s.tuples.push_back(std::move(tup));
  }
  try {
    s.validate();
  } catch (const ValidationError& e) {
    throw ValidationError("line " + std::to_string(n) + ": " + e.what());
  }
  return s;
}

std::vector<AnnotatedSentence> read_corpus(std::istream& is) {
  std::vector<AnnotatedSentence> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    out.push_back(parse_corpus_line(line, n));
  }
  return out;
}

void write_corpus(std::ostream& os, const std::vector<AnnotatedSentence>& corpus) {
  for (const auto& s : corpus) os << corpus_line(s) << '\n';
}

std::vector<AnnotatedSentence> load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus '" + path.string() + "'");
  return read_corpus(in);
}

void save_corpus(const std::filesystem::path& path, const std::vector<AnnotatedSentence>& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write corpus '" + path.string() + "'");
  write_corpus(out, corpus);
}

GoldTags tuples_to_tags(const AnnotatedSentence& sentence, const TupleAnnotation& tuple) {
  AnnotatedSentence single{sentence.id, sentence.tokens, {tuple}};
  single.validate();
  GoldTags tags;
  tags.predicate = predicate_spans_to_tags({tuple.predicate}, sentence.tokens.size());
  tags.arguments = arg_spans_to_tags(tuple.args, sentence.tokens.size());
  return tags;
}

std::vector<PredTag> sentence_predicate_tags(const AnnotatedSentence& sentence) {
  std::vector<PredicateSpan> spans;
  for (const auto& t : sentence.tuples) {
    if (std::find(spans.begin(), spans.end(), t.predicate) == spans.end()) spans.push_back(t.predicate);
  }
  return predicate_spans_to_tags(spans, sentence.tokens.size());
}

Vocabulary build_vocabulary(const std::vector<AnnotatedSentence>& corpus) {
  Vocabulary v;
  for (const auto& s : corpus)
    for (const auto& t : s.tokens) v.add(t);
  return v;
}

AnnotatedSentence showcase_sentence() {
  AnnotatedSentence s;
  s.id = "showcase";
  s.tokens = split_whitespace(
      "At a presentation in the Toronto Pearson International Airport hangar , Celine Dion helped "
      "the newly solvent airline debut its new image .");
  // 0 At 1 a 2 presentation 3 in 4 the 5 Toronto 6 Pearson 7 International 8 Airport
  // 9 hangar 10 , 11 Celine 12 Dion 13 helped 14 the 15 newly 16 solvent 17 airline
  // 18 debut 19 its 20 new 21 image 22 .
  TupleAnnotation helped;
  helped.predicate = {13};
  helped.args[0] = Span{11, 12};
  helped.args[1] = Span{14, 15, 16, 17, 18, 19, 20, 21};
  helped.args[2] = Span{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  TupleAnnotation debut;
  debut.predicate = {18};
  debut.args[0] = Span{14, 15, 16, 17};
  debut.args[1] = Span{19, 20, 21};
  s.tuples = {helped, debut};
  return s;
}

}  // namespace m2oie
