#include <doctest.h>

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "evaluator_fixture.hpp"
#include "fixtures.hpp"
#include "m2oie/commands.hpp"
#include "m2oie/tuple_assembly.hpp"

using namespace m2oie;
using json = nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "m2oie");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

json read_json(const std::filesystem::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  f << text;
}

// Small model so the command paths run in a second or two.
const char* kTinyConfig = R"({
  "model": {"encoder": {"hidden": 16, "layers": 1, "heads": 2, "ffn_dim": 32, "max_length": 64},
            "argument": {"blocks": 1, "heads": 2, "pos_dim": 8, "ffn_dim": 48}},
  "train": {"epochs": 3, "batch_size": 8}
})";

void write_extraction_file(const std::filesystem::path& p, const std::vector<Extraction>& v) {
  std::ofstream f(p);
  write_extractions(f, v);
}

}  // namespace

TEST_CASE("cli: usage errors exit 2") {
  CHECK(cli({}).code == 2);
  CHECK(cli({"frobnicate"}).code == 2);
  testing::TempDir dir;
  auto r = cli({"train", "--out", (dir / "m.ckpt").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("--corpus") != std::string::npos);
}

TEST_CASE("cli: synth, train with dev, same seed gives the same dev F1") {
  testing::TempDir dir;
  const auto corpus = dir / "train.jsonl", dev = dir / "dev.jsonl", cfg = dir / "tiny.json";
  write_file(cfg, kTinyConfig);
  REQUIRE(cli({"synth", "--seed", "7", "--size", "200", "--out", corpus.string()}).code == 0);
  CHECK(load_corpus(corpus).size() == 200);
  CHECK(read_json(corpus.string() + ".report.json")["metrics"]["sentences"] == 200);
  REQUIRE(cli({"synth", "--seed", "9", "--size", "20", "--out", dev.string()}).code == 0);

  std::vector<double> f1s;
  for (const char* name : {"a.ckpt", "b.ckpt"}) {
    const auto ckpt = dir / name;
    auto r = cli({"train", "--corpus", corpus.string(), "--dev", dev.string(), "--config", cfg.string(), "--out",
                  ckpt.string(), "--seed", "5"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("epoch 3/3") != std::string::npos);
    auto rep = read_json(ckpt.string() + ".report.json");
    CHECK(rep["command"] == "train");
    CHECK(rep["metrics"]["epochs"].size() == 3);
    CHECK(rep["timings"]["total_seconds"].get<double>() >= rep["timings"]["training_seconds"].get<double>());
    CHECK(rep["config"]["train"]["seed"] == 5);
    f1s.push_back(rep["metrics"]["dev_f1"].get<double>());
  }
  CHECK(f1s[0] == f1s[1]);
  CHECK(read_file(dir / "a.ckpt") == read_file(dir / "b.ckpt"));
}

TEST_CASE("cli: eval on perfect, empty and fixture predictions") {
  testing::TempDir dir;
  const auto gold = dir / "gold.jsonl";
  auto corpus = synth_corpus(4, 10);
  save_corpus(gold, corpus);

  std::vector<Extraction> perfect;
  for (const auto& g : gold_tuples(corpus)) perfect.push_back(testing::make_extraction(g.sentence_id, g.predicate, g.args, 1.0));
  write_extraction_file(dir / "perfect.tsv", perfect);
  REQUIRE(cli({"eval", "--gold", gold.string(), "--pred", (dir / "perfect.tsv").string()}).code == 0);
  auto rep = read_json((dir / "perfect.tsv").string() + ".eval.json");
  CHECK(rep["metrics"]["auc"] == 1.0);
  CHECK(rep["metrics"]["f1"] == 1.0);

  write_file(dir / "empty.tsv", "");
  REQUIRE(cli({"eval", "--gold", gold.string(), "--pred", (dir / "empty.tsv").string(), "--matcher", "lexical"}).code == 0);
  CHECK(read_json((dir / "empty.tsv").string() + ".eval.json")["metrics"]["f1"] == 0.0);

  CHECK(cli({"eval", "--gold", gold.string(), "--pred", (dir / "empty.tsv").string(), "--matcher", "fuzzy"}).code == 2);

  testing::ScorerFixture f;
  AnnotatedSentence s;
  s.id = "s";
  s.tokens = {"t0", "t1", "t2", "t3", "t4", "t5", "t6", "t7", "t8", "t9"};
  for (const auto& g : f.golds) {
    TupleAnnotation t;
    t.predicate = g.predicate;
    t.args = g.args;
    s.tuples.push_back(t);
  }
  save_corpus(dir / "fixture.jsonl", {s});
  write_extraction_file(dir / "fixture.tsv", f.predictions);
  REQUIRE(cli({"eval", "--gold", (dir / "fixture.jsonl").string(), "--pred", (dir / "fixture.tsv").string(),
               "--report", (dir / "fx.json").string()})
              .code == 0);
  auto fx = read_json(dir / "fx.json");
  CHECK(std::abs(fx["metrics"]["auc"].get<double>() - testing::ScorerFixture::kTupleAuc) <= 1e-9);
  CHECK(std::abs(fx["metrics"]["f1"].get<double>() - testing::ScorerFixture::kTupleF1) <= 1e-9);
}

TEST_CASE("cli: extract and bench") {
  testing::TempDir dir;
  const auto corpus = dir / "c.jsonl", ckpt = dir / "m.ckpt", cfg = dir / "tiny.json";
  write_file(cfg, kTinyConfig);
  save_corpus(corpus, synth_corpus(3, 40));
  REQUIRE(cli({"train", "--corpus", corpus.string(), "--config", cfg.string(), "--out", ckpt.string()}).code == 0);

  write_file(dir / "empty.txt", "");
  REQUIRE(cli({"extract", "--model", ckpt.string(), "--input", (dir / "empty.txt").string(), "--out",
               (dir / "empty.tsv").string()})
              .code == 0);
  CHECK(read_file(dir / "empty.tsv").empty());

  std::string text;
  for (const auto& s : synth_corpus(21, 40)) {
    for (const auto& t : s.tokens) text += t + " ";
    text += "\n";
  }
  text += "zzqx qqzx xxqz\n";
  write_file(dir / "in.txt", text);
  for (const char* b : {"1", "32"}) {
    REQUIRE(cli({"extract", "--model", ckpt.string(), "--input", (dir / "in.txt").string(), "--out",
                 (dir / (std::string("b") + b + ".tsv")).string(), "--batch", b})
                .code == 0);
  }
  CHECK(read_file(dir / "b1.tsv") == read_file(dir / "b32.tsv"));
  auto rep = read_json((dir / "b1.tsv").string() + ".report.json");
  CHECK(rep["metrics"]["sentences"] == 41);
  std::ifstream f(dir / "b1.tsv");
  for (const auto& e : read_extractions(f)) {
    CHECK(e.confidence > 0.0);
    CHECK(e.confidence <= 5.0);
  }

  REQUIRE(cli({"bench", "--model", ckpt.string(), "--input", (dir / "in.txt").string(), "--repeat", "3"}).code == 0);
  auto bench = read_json((dir / "in.txt").string() + ".bench.json");
  const auto samples = bench["timings"]["samples_seconds"].get<std::vector<double>>();
  REQUIRE(samples.size() == 3);
  auto sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  const double median = bench["timings"]["median_seconds"].get<double>();
  CHECK(median == sorted[1]);
  CHECK(bench["metrics"]["seconds_per_sentence"].get<double>() * 41 == doctest::Approx(median).epsilon(0.05));
  CHECK(bench["metrics"]["sentences_per_second"].get<double>() > 0.0);

  write_file(dir / "missing_model.txt", "a b\n");
  CHECK(cli({"extract", "--model", (dir / "nope.ckpt").string(), "--input", (dir / "missing_model.txt").string(),
             "--out", (dir / "x.tsv").string()})
            .code == 2);
}

TEST_CASE("cli: gradcheck reports failure against an impossible tolerance") {
  testing::TempDir dir;
  const auto cfg = dir / "tiny.json";
  write_file(cfg, kTinyConfig);
  auto r = cli({"gradcheck", "--config", cfg.string(), "--entries", "2", "--tolerance", "1e-30", "--report",
                (dir / "g.json").string()});
  CHECK(r.code == 1);
  CHECK(r.out.find("FAIL") != std::string::npos);
  auto rep = read_json(dir / "g.json");
  CHECK(rep["metrics"]["passed"] == false);
  CHECK(rep["metrics"]["max_rel_error"].get<double>() < 1e-4);
}
