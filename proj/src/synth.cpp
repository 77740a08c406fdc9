#include <array>
#include <set>
#include <string>
#include <vector>

#include "m2oie/corpus.hpp"
#include "m2oie/error.hpp"
#include "m2oie/rng.hpp"

namespace m2oie {
namespace {

using Words = std::vector<std::string>;

const Words kDeterminers = {"the", "a", "this", "that", "every", "its", "their", "our"};

const Words kAdjectives = {"small",  "large",   "new",    "old",    "red",    "quiet",
                           "famous", "local",   "young",  "bright", "ancient", "modern",
                           "rural",  "urban",   "wealthy", "popular", "careful", "strange",
                           "silent", "brave",   "swift",  "gentle", "clever", "proud",
                           "humble", "honest",  "eager",  "calm",   "bold",   "rare"};

const Words kNouns = {"company", "teacher",  "farmer",    "doctor",   "student",  "council",
                      "museum",  "river",    "village",   "city",     "engineer", "artist",
                      "team",    "committee", "writer",   "pilot",    "nurse",    "bank",
                      "school",  "factory",  "garden",    "library",  "airline",  "singer",
                      "captain", "merchant", "scientist", "mayor",    "judge",    "soldier",
                      "report",  "letter",   "bridge",    "road",     "contract", "budget",
                      "plan",    "song",     "book",      "painting", "machine",  "house",
                      "ship",    "car",      "field",     "market",   "festival", "building",
                      "program", "treaty",   "map",       "statue",   "film",     "policy",
                      "project", "device",   "theory",    "prize",    "concert",  "station"};

const Words kFirstNames = {"Maria", "John", "Celine", "Ahmed", "Yuki",
                           "Elena", "Pedro", "Grace",  "Omar",  "Lena"};
const Words kLastNames = {"Lopez", "Smith", "Dion", "Khan",  "Tanaka",
                          "Petrov", "Silva", "Moore", "Haddad", "Berg"};

// Past-tense transitive verbs and their bare forms (same index).
const Words kVerbsPast = {"built",    "signed",   "painted",   "visited",  "wrote",
                          "sold",     "repaired", "designed",  "announced", "approved",
                          "launched", "funded",   "opened",    "closed",   "bought",
                          "praised",  "studied",  "described", "delivered", "carried",
                          "found",    "lost",     "won",       "organized", "hosted"};
const Words kVerbsBare = {"build",  "sign",   "paint",    "visit",    "write",
                          "sell",   "repair", "design",   "announce", "approve",
                          "launch", "fund",   "open",     "close",    "buy",
                          "praise", "study",  "describe", "deliver",  "carry",
                          "find",   "lose",   "win",      "organize", "host"};

// Verbs taking an object plus a bare-infinitive clause.
const Words kCausatives = {"helped", "let", "made", "watched", "saw"};

const Words kPrepositions = {"in", "at", "near", "for", "to", "with"};

const Words kDays = {"monday", "tuesday", "friday", "sunday"};
const Words kPeriods = {"week", "month", "year", "winter", "summer"};
const Words kSubordinators = {"while", "because", "after"};

class Builder {
 public:
  explicit Builder(Rng& rng) : rng_(rng) {}

  const std::string& pick(const Words& w) { return w[rng_.below(w.size())]; }

  Span push(const std::string& w) {
    tokens_.push_back(w);
    return {tokens_.size() - 1};
  }

  Span push_all(const Words& ws) {
    Span s;
    for (const auto& w : ws) {
      tokens_.push_back(w);
      s.push_back(tokens_.size() - 1);
    }
    return s;
  }

  // Noun phrase of 1-5 tokens: a proper name, or [det] [adj]* noun [of det noun].
  Span noun_phrase() {
    if (rng_.bernoulli(0.2)) {
      Words ws;
      ws.push_back(pick(kFirstNames));
      ws.push_back(pick(kLastNames));
      return push_all(ws);
    }
    Words ws;
    if (rng_.bernoulli(0.85)) ws.push_back(pick(kDeterminers));
    const auto adjs = rng_.below(3);
    for (std::uint64_t i = 0; i < adjs; ++i) ws.push_back(pick(kAdjectives));
    ws.push_back(pick(kNouns));
    if (rng_.bernoulli(0.15)) {
      ws.push_back("of");
      ws.push_back("the");
      ws.push_back(pick(kNouns));
    }
    return push_all(ws);
  }

  // ARG2: preposition + noun phrase.
  Span prep_phrase() {
    Span s = push(pick(kPrepositions));
    auto np = noun_phrase();
    s.insert(s.end(), np.begin(), np.end());
    return s;
  }

  // ARG3: temporal adjunct.
  Span temporal() {
    switch (rng_.below(3)) {
      case 0: return push_all({"on", pick(kDays)});
      case 1: return push_all({"last", pick(kPeriods)});
      default: return push_all({"in", "the", rng_.bernoulli(0.5) ? "morning" : "evening"});
    }
  }

  std::vector<std::string> take() { return std::move(tokens_); }

 private:
  Rng& rng_;
  std::vector<std::string> tokens_;
};

TupleAnnotation tuple(Span pred, std::optional<Span> a0, std::optional<Span> a1,
                      std::optional<Span> a2 = std::nullopt, std::optional<Span> a3 = std::nullopt) {
  TupleAnnotation t;
  t.predicate = std::move(pred);
  t.args = {std::move(a0), std::move(a1), std::move(a2), std::move(a3)};
  return t;
}

Span join(const Span& a, const Span& b) {
  Span s = a;
  s.insert(s.end(), b.begin(), b.end());
  return s;
}

AnnotatedSentence generate(Rng& rng, std::size_t index) {
  Builder b(rng);
  AnnotatedSentence s;
  s.id = std::to_string(index);
  const double r = rng.uniform();
  if (r < 0.5) {
    // [ARG3 ,] ARG0 V ARG1 [ARG2] [ARG3] .
    std::optional<Span> temp;
    const bool front = rng.bernoulli(0.15);
    if (front) {
      temp = b.temporal();
      b.push(",");
    }
    auto a0 = b.noun_phrase();
    auto v = b.push(b.pick(kVerbsPast));
    auto a1 = b.noun_phrase();
    std::optional<Span> a2;
    if (rng.bernoulli(0.4)) a2 = b.prep_phrase();
    if (!front && rng.bernoulli(0.2)) temp = b.temporal();
    b.push(".");
    s.tuples.push_back(tuple(v, a0, a1, a2, temp));
  } else if (r < 0.65) {
    // ARG0 V1 ARG1 and V2 ARG1' [ARG2] .
    auto a0 = b.noun_phrase();
    auto v1 = b.push(b.pick(kVerbsPast));
    auto a1 = b.noun_phrase();
    b.push("and");
    auto v2 = b.push(b.pick(kVerbsPast));
    auto a1b = b.noun_phrase();
    std::optional<Span> a2;
    if (rng.bernoulli(0.3)) a2 = b.prep_phrase();
    b.push(".");
    s.tuples.push_back(tuple(v1, a0, a1));
    s.tuples.push_back(tuple(v2, a0, a1b, a2));
  } else if (r < 0.8) {
    // ARG0 V1 ARG1 [ARG2] , SUB ARG0' V2 ARG1' .
    auto a0 = b.noun_phrase();
    auto v1 = b.push(b.pick(kVerbsPast));
    auto a1 = b.noun_phrase();
    std::optional<Span> a2;
    if (rng.bernoulli(0.3)) a2 = b.prep_phrase();
    b.push(",");
    b.push(b.pick(kSubordinators));
    auto c0 = b.noun_phrase();
    auto v2 = b.push(b.pick(kVerbsPast));
    auto c1 = b.noun_phrase();
    b.push(".");
    s.tuples.push_back(tuple(v1, a0, a1, a2));
    s.tuples.push_back(tuple(v2, c0, c1));
  } else if (r < 0.9) {
    // ARG0 CAUS X Vbare Y .  ->  (CAUS; ARG0; X Vbare Y), (Vbare; X; Y)
    auto a0 = b.noun_phrase();
    auto cv = b.push(b.pick(kCausatives));
    auto x = b.noun_phrase();
    auto vb = b.push(b.pick(kVerbsBare));
    auto y = b.noun_phrase();
    std::optional<Span> a2;
    if (rng.bernoulli(0.25)) a2 = b.prep_phrase();
    b.push(".");
    s.tuples.push_back(tuple(cv, a0, join(join(x, vb), y)));
    s.tuples.push_back(tuple(vb, x, y, a2));
  } else {
    // ARG0 V1 ARG1 , V2 ARG1' and V3 ARG1'' .
    auto a0 = b.noun_phrase();
    auto v1 = b.push(b.pick(kVerbsPast));
    auto a1 = b.noun_phrase();
    b.push(",");
    auto v2 = b.push(b.pick(kVerbsPast));
    auto a1b = b.noun_phrase();
    b.push("and");
    auto v3 = b.push(b.pick(kVerbsPast));
    auto a1c = b.noun_phrase();
    b.push(".");
    s.tuples.push_back(tuple(v1, a0, a1));
    s.tuples.push_back(tuple(v2, a0, a1b));
    s.tuples.push_back(tuple(v3, a0, a1c));
  }
  s.tokens = b.take();
  return s;
}

}  // namespace

std::vector<AnnotatedSentence> synth_corpus(std::uint64_t seed, std::size_t n_sentences) {
  if (n_sentences == 0) throw ValidationError("synth_corpus: need at least one sentence");
  Rng rng(seed);
  std::vector<AnnotatedSentence> out;
  out.reserve(n_sentences);
  for (std::size_t i = 0; i < n_sentences; ++i) out.push_back(generate(rng, i));
  return out;
}

std::size_t synth_lexicon_size() {
  std::set<std::string> all;
  for (const Words* ws : {&kDeterminers, &kAdjectives, &kNouns, &kFirstNames, &kLastNames, &kVerbsPast,
                          &kVerbsBare, &kCausatives, &kPrepositions, &kDays, &kPeriods, &kSubordinators}) {
    all.insert(ws->begin(), ws->end());
  }
  for (const char* w : {".", ",", "and", "of", "on", "last", "morning", "evening", "the", "in"}) all.insert(w);
  return all.size();
}

}  // namespace m2oie
