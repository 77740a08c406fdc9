// One PASS/FAIL line per acceptance criterion; exit code 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "evaluator_fixture.hpp"
#include "fixtures.hpp"
#include "m2oie/commands.hpp"
#include "m2oie/tuple_assembly.hpp"
#include "oracle.hpp"

using namespace m2oie;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(bool ok, const std::string& name, const std::string& detail) {
  std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
  if (!ok) ++failures;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "m2oie");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  if (code != 0) std::cerr << out.str() << err.str();
  return code;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<Extraction> extract_corpus(const Model<float>& model, const std::vector<AnnotatedSentence>& corpus) {
  std::vector<Sentence> sents;
  std::vector<std::string> ids;
  for (const auto& s : corpus) {
    sents.push_back(make_sentence(s.tokens, model.vocab()));
    ids.push_back(s.id);
  }
  std::vector<Extraction> all;
  for (auto& per : extract_batch(model, sents, ids)) all.insert(all.end(), per.begin(), per.end());
  return all;
}

void gradcheck() {
  const auto t0 = Clock::now();
  GradCheckOptions opts;
  opts.max_entries_per_tensor = 4;
  opts.sample_seed = 7;
  const auto r = grad_check_joint_loss(ModelConfig{}, synth_corpus(7, 2), 7, opts);
  const double secs = seconds_since(t0);
  report(r.max_rel_error < 1e-4 && secs < 60.0, "gradcheck",
         "max rel error " + fmt("%.2e", r.max_rel_error) + " at " + r.worst_tensor + " over " +
             std::to_string(r.entries_checked) + " entries / " + std::to_string(r.per_tensor.size()) +
             " tensors in " + fmt("%.1f", secs) + "s");
}

void block_oracle() {
  const auto t0 = Clock::now();
  const auto r = testing::run_block_oracle(100, 2024);
  const double secs = seconds_since(t0);
  report(r.instances == 100 && r.max_abs_diff <= 1e-6 && secs < 10.0, "mh_block oracle",
         "max |diff| " + fmt("%.2e", r.max_abs_diff) + " over " + std::to_string(r.instances) + " instances in " +
             fmt("%.2f", secs) + "s");
}

void scorer(const std::vector<Extraction>& heldout_preds, const std::vector<AnnotatedSentence>& heldout) {
  testing::ScorerFixture f;
  const auto tuple = evaluate(f.predictions, f.golds, Matcher::kTuple);
  const auto lexical = evaluate(f.predictions, f.golds, Matcher::kLexical);
  const double err = std::max({std::abs(tuple.auc - testing::ScorerFixture::kTupleAuc),
                               std::abs(tuple.f1 - testing::ScorerFixture::kTupleF1),
                               std::abs(lexical.auc - testing::ScorerFixture::kLexicalAuc),
                               std::abs(lexical.f1 - testing::ScorerFixture::kLexicalF1)});

  // Over-long extractions: every gold argument padded with the following tokens.
  std::vector<Extraction> longer;
  for (const auto& s : heldout) {
    for (const auto& t : s.tuples) {
      ArgSpans args = t.args;
      for (auto& a : args)
        if (a)
          for (std::size_t extra = 0; extra < 3 && a->back() + 1 < s.tokens.size(); ++extra) a->push_back(a->back() + 1);
      longer.push_back(testing::make_extraction(s.id, t.predicate, args, 1.0));
    }
  }
  const auto golds = gold_tuples(heldout);
  const double lex_long = evaluate(longer, golds, Matcher::kLexical).f1;
  const double tup_long = evaluate(longer, golds, Matcher::kTuple).f1;
  const double lex_model = evaluate(heldout_preds, golds, Matcher::kLexical).f1;
  const double tup_model = evaluate(heldout_preds, golds, Matcher::kTuple).f1;
  report(err <= 1e-9 && lex_long >= tup_long, "scorer",
         "fixture max error " + fmt("%.1e", err) + "; long extractions lexical F1 " + fmt("%.4f", lex_long) +
             " >= tuple F1 " + fmt("%.4f", tup_long) + " (model output: lexical " + fmt("%.4f", lex_model) + ", tuple " +
             fmt("%.4f", tup_model) + ")");
}

void round_trips(const ModelCheckpoint& ckpt, const std::vector<AnnotatedSentence>& heldout,
                 const testing::TempDir& dir) {
  save_checkpoint(ckpt, dir / "rt.ckpt");
  const auto loaded = load_checkpoint(dir / "rt.ckpt");
  const bool bytes_equal = serialize_checkpoint(loaded) == serialize_checkpoint(ckpt);
  const auto a = extract_corpus(model_from_checkpoint(ckpt), heldout);
  const auto b = extract_corpus(model_from_checkpoint(loaded), heldout);
  bool outputs_equal = a.size() == b.size();
  for (std::size_t i = 0; outputs_equal && i < a.size(); ++i) {
    outputs_equal = format_extraction(a[i]) == format_extraction(b[i]) && a[i].confidence == b[i].confidence;
  }

  std::size_t tuples = 0, bio_bad = 0;
  const auto corpus = synth_corpus(7, 1000);
  for (const auto& s : corpus) {
    for (const auto& t : s.tuples) {
      ++tuples;
      ArgTagSequence seq;
      seq.tags = tuples_to_tags(s, t).arguments;
      if (decode_bio(seq) != t.args) ++bio_bad;
    }
  }

  save_corpus(dir / "rt.jsonl", corpus);
  const auto first = read_file(dir / "rt.jsonl");
  save_corpus(dir / "rt2.jsonl", load_corpus(dir / "rt.jsonl"));
  const bool corpus_equal = read_file(dir / "rt2.jsonl") == first;

  report(bytes_equal && outputs_equal && bio_bad == 0 && corpus_equal, "round trips",
         std::string("checkpoint bytes ") + (bytes_equal ? "equal" : "differ") + ", eval outputs " +
             (outputs_equal ? "bit-identical" : "differ") + " (" + std::to_string(a.size()) + " extractions); BIO " +
             std::to_string(tuples - bio_bad) + "/" + std::to_string(tuples) + " tuples; corpus " +
             (corpus_equal ? "byte-identical" : "differs"));
}

void determinism(const std::filesystem::path& ckpt_path, const std::filesystem::path& input,
                 const testing::TempDir& dir) {
  RunConfig cfg;
  cfg.train.epochs = 2;
  const auto corpus = synth_corpus(11, 40);
  const auto a = serialize_checkpoint(train(corpus, cfg).checkpoint);
  const auto b = serialize_checkpoint(train(corpus, cfg).checkpoint);

  const bool e1 = cli({"extract", "--model", ckpt_path.string(), "--input", input.string(), "--out",
                       (dir / "b1.tsv").string(), "--batch", "1"}) == 0;
  const bool e32 = cli({"extract", "--model", ckpt_path.string(), "--input", input.string(), "--out",
                        (dir / "b32.tsv").string(), "--batch", "32"}) == 0;
  const auto out1 = read_file(dir / "b1.tsv"), out32 = read_file(dir / "b32.tsv");
  const bool same = e1 && e32 && out1 == out32 && !out1.empty();
  report(a == b && same, "determinism",
         std::string("two seeded trainings ") + (a == b ? "bit-identical" : "differ") + " (" +
             std::to_string(a.size()) + " bytes); extract batch 1 vs 32 " + (same ? "identical" : "differ") + " (" +
             std::to_string(std::count(out1.begin(), out1.end(), '\n')) + " lines)");
}

void confidence_check(const std::vector<Extraction>& extractions) {
  std::size_t bad_range = 0, bad_sum = 0;
  double lo = 5.0, hi = 0.0;
  for (const auto& e : extractions) {
    if (!(e.confidence > 0.0 && e.confidence <= 5.0)) ++bad_range;
    double sum = e.predicate_score;
    for (std::size_t k = 0; k < kNumArgSlots; ++k) sum += e.args[k] ? e.arg_scores[k] : 0.0;
    if (sum != e.confidence) ++bad_sum;
    lo = std::min(lo, e.confidence);
    hi = std::max(hi, e.confidence);
  }
  report(!extractions.empty() && bad_range == 0 && bad_sum == 0, "confidence",
         std::to_string(extractions.size()) + " extractions in [" + fmt("%.4f", lo) + ", " + fmt("%.4f", hi) +
             "], out of range " + std::to_string(bad_range) + ", sum mismatches " + std::to_string(bad_sum));
}

void bench(const std::filesystem::path& ckpt_path, const testing::TempDir& dir) {
  const auto input = dir / "bench.txt";
  {
    std::ofstream f(input);
    for (const auto& s : synth_corpus(641, 641)) {
      for (std::size_t i = 0; i < s.tokens.size(); ++i) f << (i ? " " : "") << s.tokens[i];
      f << '\n';
    }
  }
  const auto rep_path = dir / "bench.json";
  const bool ran = cli({"bench", "--model", ckpt_path.string(), "--input", input.string(), "--repeat", "3",
                        "--report", rep_path.string()}) == 0;
  if (!ran) {
    report(false, "bench", "bench command failed");
    return;
  }
  std::ifstream in(rep_path);
  const auto rep = nlohmann::json::parse(in);
  const auto n = rep["metrics"]["sentences"].get<std::size_t>();
  const auto samples = rep["timings"]["samples_seconds"].get<std::vector<double>>();
  const double spread = rep["metrics"]["spread"].get<double>();
  report(n == 641 && samples.size() == 3 && spread < 0.20, "bench",
         std::to_string(n) + " sentences, median " + fmt("%.3f", rep["timings"]["median_seconds"].get<double>()) +
             "s, " + fmt("%.5f", rep["metrics"]["seconds_per_sentence"].get<double>()) + " s/sent, spread " +
             fmt("%.1f", 100.0 * spread) + "%");
}

}  // namespace

int main() {
  testing::TempDir dir;

  gradcheck();
  block_oracle();

  const auto all = synth_corpus(7, 250);
  const std::vector<AnnotatedSentence> train_set(all.begin(), all.begin() + 200);
  const std::vector<AnnotatedSentence> heldout(all.begin() + 200, all.end());
  RunConfig cfg;
  cfg.train.seed = 7;
  const auto result = train(train_set, cfg);
  const auto model = model_from_checkpoint(result.checkpoint);
  const auto train_eval = evaluate_model(model, train_set, Matcher::kTuple);
  report(train_eval.f1 >= 0.95 && result.seconds < 600.0, "memorization",
         "training tuple F1 " + fmt("%.4f", train_eval.f1) + " after " + std::to_string(result.history.size()) +
             " epochs in " + fmt("%.1f", result.seconds) + "s");
  const auto heldout_eval = evaluate_model(model, heldout, Matcher::kTuple);
  report(heldout_eval.f1 >= 0.80, "held-out", "tuple F1 " + fmt("%.4f", heldout_eval.f1) + " on " +
                                                  std::to_string(heldout.size()) + " held-out sentences");

  const auto heldout_preds = extract_corpus(model, heldout);
  scorer(heldout_preds, heldout);
  round_trips(result.checkpoint, heldout, dir);

  const auto ckpt_path = dir / "desk.ckpt";
  save_checkpoint(result.checkpoint, ckpt_path);
  const auto input = dir / "heldout.jsonl";
  save_corpus(input, heldout);
  determinism(ckpt_path, input, dir);

  auto everything = extract_corpus(model, train_set);
  everything.insert(everything.end(), heldout_preds.begin(), heldout_preds.end());
  confidence_check(everything);

  bench(ckpt_path, dir);
  return failures ? 1 : 0;
}
