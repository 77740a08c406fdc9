#include <doctest.h>

#include <sstream>

#include "fixtures.hpp"
#include "m2oie/tuple_assembly.hpp"

using namespace m2oie;
using A = ArgTag;

namespace {

ArgTagSequence seq_of(std::vector<ArgTag> tags) {
  ArgTagSequence s;
  s.tags = std::move(tags);
  return s;
}

PredTagSequence pred_probs(std::size_t l, std::size_t at, double pb) {
  PredTagSequence p;
  p.tags.assign(l, PredTag::kO);
  p.probs.assign(l, {1.0, 0.0, 0.0});
  p.tags[at] = PredTag::kB;
  p.probs[at] = {1.0 - pb, pb, 0.0};
  return p;
}

}  // namespace

TEST_CASE("decode_bio examples") {
  auto a = decode_bio(seq_of({A::kO, A::kA0B, A::kA0I, A::kO, A::kA1B}));
  CHECK(a[0] == Span{1, 2});
  CHECK(a[1] == Span{4});
  CHECK(!a[2]);
  CHECK(!a[3]);

  auto none = decode_bio(seq_of({A::kO, A::kO, A::kO}));
  for (const auto& s : none) CHECK(!s);

  auto b = decode_bio(seq_of({A::kA0B, A::kA2B}));
  CHECK(b[0] == Span{0});
  CHECK(b[2] == Span{1});
  CHECK(!b[1]);
  CHECK(!b[3]);

  auto orphan = decode_bio(seq_of({A::kO, A::kA1I, A::kA1I}));
  CHECK(orphan[1] == Span{1, 2});
}

TEST_CASE("decode_bio keeps the run with the highest B probability") {
  ArgTagSequence s = seq_of({A::kA0B, A::kO, A::kA0B, A::kA0I});
  s.probs.assign(4, {});
  s.probs[0][1] = 0.6;
  s.probs[2][1] = 0.9;
  CHECK(decode_bio(s)[0] == Span{2, 3});
  s.probs[0][1] = 0.9;
  CHECK(decode_bio(s)[0] == Span{0});
}

TEST_CASE("arg spans -> tags -> spans round trip") {
  Rng rng(23);
  for (int it = 0; it < 500; ++it) {
    const std::size_t l = 1 + rng.below(14);
    ArgSpans spans;
    std::vector<bool> used(l, false);
    for (std::size_t slot = 0; slot < kNumArgSlots; ++slot) {
      if (rng.bernoulli(0.4)) continue;
      const std::size_t start = rng.below(l), len = 1 + rng.below(4);
      Span s;
      for (std::size_t i = start; i < std::min(l, start + len) && !used[i]; ++i) s.push_back(i);
      if (s.empty()) continue;
      for (auto i : s) used[i] = true;
      spans[slot] = s;
    }
    CHECK(decode_bio(seq_of(arg_spans_to_tags(spans, l))) == spans);
  }
  ArgSpans overlap;
  overlap[0] = Span{0, 1};
  overlap[1] = Span{1};
  CHECK_THROWS_AS(arg_spans_to_tags(overlap, 3), ValidationError);
}

TEST_CASE("confidence is p(P-B) plus present-slot p(Ai-B)") {
  ArgTagSequence args = seq_of({A::kA0B, A::kO, A::kA1B, A::kA2B, A::kA3B});
  args.probs.assign(5, {});
  args.probs[0][1] = 1.0;
  args.probs[2][3] = 1.0;
  args.probs[3][5] = 1.0;
  args.probs[4][7] = 1.0;
  CHECK(confidence(pred_probs(5, 1, 1.0), args, {1}, decode_bio(args)) == 5.0);

  ArgTagSequence two = seq_of({A::kA0B, A::kO, A::kA1B});
  two.probs.assign(3, {});
  two.probs[0][1] = 0.8;
  two.probs[2][3] = 0.7;
  CHECK(confidence(pred_probs(3, 1, 0.9), two, {1}, decode_bio(two)) == doctest::Approx(2.4).epsilon(1e-15));

  ArgTagSequence empty = seq_of({A::kO, A::kO, A::kO});
  empty.probs.assign(3, {});
  CHECK(confidence(pred_probs(3, 1, 0.9), empty, {1}, decode_bio(empty)) == 0.9);

  // Non-decreasing in each component.
  double last = 0.0;
  for (double p = 0.0; p <= 1.0; p += 0.1) {
    two.probs[2][3] = p;
    const double cs = confidence(pred_probs(3, 1, 0.9), two, {1}, decode_bio(two));
    CHECK(cs >= last);
    last = cs;
  }
}

TEST_CASE("overfit worked example extracts both tuples") {
  auto model = model_from_checkpoint(testing::showcase_checkpoint());
  auto s = showcase_sentence();
  auto sent = make_sentence(s.tokens, model.vocab());
  auto out = extract_sentence(model, sent, s.id);
  REQUIRE(out.size() == 2);
  bool debut = false, helped = false;
  for (const auto& e : out) {
    CHECK(e.confidence > 0.0);
    CHECK(e.confidence <= 5.0);
    double sum = e.predicate_score;
    for (std::size_t k = 0; k < kNumArgSlots; ++k) sum += e.args[k] ? e.arg_scores[k] : 0.0;
    CHECK(e.confidence == sum);
    if (e.predicate_text == "debut") {
      debut = e.arg_text[0] == "the newly solvent airline" && e.arg_text[1] == "its new image" && !e.args[2] &&
              !e.args[3];
    }
    if (e.predicate_text == "helped") {
      helped = e.arg_text[0] == "Celine Dion" && e.arg_text[1] == "the newly solvent airline debut its new image";
    }
  }
  CHECK(debut);
  CHECK(helped);

  auto again = extract_sentence(model, sent, s.id);
  REQUIRE(again.size() == out.size());
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(format_extraction(again[i]) == format_extraction(out[i]));
}

TEST_CASE("no predicate tagged -> no extraction") {
  auto s = showcase_sentence();
  auto model = testing::fresh_model({s});
  for (auto& p : model.params()) {
    if (p.name == "predicate.head.w2") std::fill(p.value.begin(), p.value.end(), 0.0f);
    if (p.name == "predicate.head.b2") p.value = {5.0f, 0.0f, 0.0f};
  }
  CHECK(extract_sentence(model, make_sentence(s.tokens, model.vocab())).empty());
}

TEST_CASE("batched extraction equals per-sentence extraction") {
  auto corpus = synth_corpus(12, 6);
  auto model = testing::fresh_model(corpus);
  std::vector<Sentence> sents;
  std::vector<std::string> ids;
  for (const auto& s : corpus) {
    sents.push_back(make_sentence(s.tokens, model.vocab()));
    ids.push_back(s.id);
  }
  auto batch = extract_batch(model, sents, ids);
  REQUIRE(batch.size() == sents.size());
  for (std::size_t i = 0; i < sents.size(); ++i) {
    auto single = extract_sentence(model, sents[i], ids[i]);
    REQUIRE(single.size() == batch[i].size());
    for (std::size_t k = 0; k < single.size(); ++k)
      CHECK(format_extraction(single[k]) == format_extraction(batch[i][k]));
  }
}

TEST_CASE("extraction record format round trip and ordering") {
  Extraction e;
  e.sentence_id = "s1";
  e.predicate = {2};
  e.predicate_text = "helped";
  e.args[0] = Span{0, 1};
  e.arg_text[0] = "Celine Dion";
  e.args[2] = Span{4};
  e.arg_text[2] = "there";
  e.confidence = 2.5;
  const auto line = format_extraction(e);
  CHECK(line == "s1\thelped\t2\tCeline Dion\t0,1\t\t-\tthere\t4\t\t-\t2.500000");
  auto back = parse_extraction(line);
  CHECK(back.sentence_id == "s1");
  CHECK(back.predicate == Span{2});
  CHECK(back.args == e.args);
  CHECK(back.arg_text == e.arg_text);
  CHECK(back.confidence == 2.5);
  CHECK_THROWS_AS(parse_extraction("s1\thelped\tx\t\t-\t\t-\t\t-\t\t-\t1.0", 4), ParseError);

  std::vector<Extraction> v(3, e);
  v[0].sentence_id = "b";
  v[0].confidence = 1.0;
  v[1].sentence_id = "a";
  v[1].confidence = 1.0;
  v[2].sentence_id = "b";
  v[2].confidence = 3.0;
  sort_for_output(v);
  CHECK(v[0].sentence_id == "b");
  CHECK(v[0].confidence == 3.0);
  CHECK(v[1].sentence_id == "b");
  CHECK(v[2].sentence_id == "a");

  std::stringstream ss;
  write_extractions(ss, v);
  auto read = read_extractions(ss);
  REQUIRE(read.size() == 3);
  CHECK(format_extraction(read[1]) == format_extraction(v[1]));
}
