#include <doctest.h>

#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "m2oie/tuple_assembly.hpp"

using namespace m2oie;

namespace {

std::string canonical(const std::vector<AnnotatedSentence>& c) {
  std::ostringstream os;
  write_corpus(os, c);
  return os.str();
}

}  // namespace

TEST_CASE("corpus line format") {
  AnnotatedSentence s;
  s.id = "x1";
  s.tokens = {"Dion", "sang", "songs"};
  TupleAnnotation t;
  t.predicate = {1};
  t.args[0] = Span{0};
  t.args[1] = Span{2};
  s.tuples = {t};
  CHECK(corpus_line(s) == R"({"id":"x1","tokens":["Dion","sang","songs"],"tuples":[{"args":[[0],[2],null,null],"pred":[1]}]})");
  CHECK(parse_corpus_line(corpus_line(s), 1) == s);
}

TEST_CASE("load: empty file, malformed lines and bounds") {
  std::istringstream empty("");
  CHECK(read_corpus(empty).empty());

  std::istringstream bad("{\"id\":\"a\",\"tokens\":[\"x\"],\"tuples\":[]}\n{not json}\n");
  try {
    read_corpus(bad);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }

  CHECK_THROWS_AS(parse_corpus_line(R"({"id":"a","tokens":["x","y"],"tuples":[{"pred":[2],"args":[null,null,null,null]}]})", 1),
                  ValidationError);
  CHECK_THROWS_AS(parse_corpus_line(R"({"id":"a","tokens":["x","y"],"tuples":[{"pred":[0],"args":[[],null,null,null]}]})", 1),
                  ValidationError);
  CHECK_THROWS_AS(parse_corpus_line(R"({"id":"a","tokens":["x","y","z"],"tuples":[{"pred":[0],"args":[[1],[1,2],null,null]}]})", 1),
                  ValidationError);
  CHECK_THROWS_AS(parse_corpus_line(R"({"id":"a","tokens":["x","y","z","w"],"tuples":[{"pred":[0],"args":[[1,3],null,null,null]}]})", 1),
                  ValidationError);
  CHECK_THROWS_AS(parse_corpus_line(R"({"id":"a","tokens":["x"],"tuples":[{"pred":[0],"args":[null,null,null]}]})", 1),
                  ParseError);
}

TEST_CASE("save(load(x)) is byte-identical for canonical files") {
  testing::TempDir dir;
  auto corpus = synth_corpus(7, 50);
  corpus.push_back(showcase_sentence());
  const auto path = dir / "c.jsonl";
  save_corpus(path, corpus);
  std::ifstream in(path, std::ios::binary);
  const std::string original((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  auto loaded = load_corpus(path);
  CHECK(loaded == corpus);
  const auto again = dir / "d.jsonl";
  save_corpus(again, loaded);
  std::ifstream in2(again, std::ios::binary);
  const std::string copy((std::istreambuf_iterator<char>(in2)), std::istreambuf_iterator<char>());
  CHECK(copy == original);
  CHECK(canonical(loaded) == original);
}

TEST_CASE("tuples_to_tags") {
  AnnotatedSentence s;
  s.id = "t";
  s.tokens = {"a", "b", "c", "d"};
  TupleAnnotation t;
  t.predicate = {2};
  t.args[0] = Span{0, 1};
  s.tuples = {t};
  auto tags = tuples_to_tags(s, t);
  CHECK(tags.predicate == std::vector<PredTag>{PredTag::kO, PredTag::kO, PredTag::kB, PredTag::kO});
  CHECK(tags.arguments == std::vector<ArgTag>{ArgTag::kA0B, ArgTag::kA0I, ArgTag::kO, ArgTag::kO});

  AnnotatedSentence full;
  full.id = "f";
  full.tokens = {"a", "b", "c", "d", "e", "f"};
  TupleAnnotation ft;
  ft.predicate = {1};
  ft.args = {Span{0}, Span{2, 3}, Span{4}, Span{5}};
  full.tuples = {ft};
  auto ftags = tuples_to_tags(full, ft);
  std::size_t begins = 0;
  for (auto a : ftags.arguments) begins += is_begin(a);
  CHECK(begins == 4);
}

TEST_CASE("BIO round trip on every tuple of a synthetic corpus") {
  for (const auto& s : synth_corpus(7, 300)) {
    for (const auto& t : s.tuples) {
      ArgTagSequence seq;
      seq.tags = tuples_to_tags(s, t).arguments;
      CHECK(decode_bio(seq) == t.args);
      CHECK(group_predicates(tuples_to_tags(s, t).predicate) == std::vector<PredicateSpan>{t.predicate});
    }
  }
}

TEST_CASE("synthetic corpus properties") {
  auto a = synth_corpus(7, 1000);
  auto b = synth_corpus(7, 1000);
  CHECK(a == b);
  CHECK(synth_corpus(8, 20) != synth_corpus(7, 20));
  std::size_t multi = 0, verbs_max = 0;
  for (const auto& s : a) {
    CHECK_NOTHROW(parse_corpus_line(corpus_line(s), 1));
    multi += s.tuples.size() > 1;
    verbs_max = std::max(verbs_max, s.tuples.size());
    CHECK(!s.tuples.empty());
  }
  const double frac = static_cast<double>(multi) / 1000.0;
  CHECK(frac >= 0.3);
  CHECK(frac <= 0.7);
  CHECK(verbs_max == 3);
  CHECK(synth_lexicon_size() >= 150);
  CHECK(synth_lexicon_size() <= 260);

  // A longer corpus extends a shorter one with the same seed.
  auto prefix = synth_corpus(7, 200);
  auto longer = synth_corpus(7, 250);
  CHECK(std::equal(prefix.begin(), prefix.end(), longer.begin()));
}

TEST_CASE("sentence-level predicate tags merge identical spans and reject partial overlap") {
  auto s = showcase_sentence();
  auto tags = sentence_predicate_tags(s);
  CHECK(tags[13] == PredTag::kB);
  CHECK(tags[18] == PredTag::kB);
  s.tuples.push_back(s.tuples[0]);
  CHECK(sentence_predicate_tags(s) == tags);

  AnnotatedSentence bad;
  bad.id = "b";
  bad.tokens = {"a", "b", "c"};
  TupleAnnotation t1, t2;
  t1.predicate = {0, 1};
  t2.predicate = {1, 2};
  bad.tuples = {t1, t2};
  CHECK_THROWS_AS(sentence_predicate_tags(bad), ValidationError);
}
