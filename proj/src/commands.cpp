#include "m2oie/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "m2oie/checkpoint.hpp"
#include "m2oie/corpus.hpp"
#include "m2oie/error.hpp"
#include "m2oie/evaluator.hpp"
#include "m2oie/trainer.hpp"
#include "m2oie/tuple_assembly.hpp"
#include "m2oie/worker_pool.hpp"

namespace m2oie {
namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void write_report(const std::string& path, const json& report, std::ostream& out) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write report '" + path + "'");
  f << report.dump(2) << '\n';
  out << "report: " << path << '\n';
}

json run_report(const std::string& command) {
  return json{{"command", command}, {"config", json::object()}, {"timings", json::object()},
              {"metrics", json::object()}, {"artifacts", json::object()}};
}

struct InputSentence {
  std::string id;
  std::vector<std::string> tokens;
};

// Raw text (one sentence per line, id = 0-based line number) or corpus
// records (lines starting with '{'). Blank lines are skipped.
std::vector<InputSentence> read_inputs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open input '" + path + "'");
  std::vector<InputSentence> out;
  std::string line;
  for (std::size_t n = 0; std::getline(in, line); ++n) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    if (line[first] == '{') {
      auto s = parse_corpus_line(line, n + 1);
      out.push_back({s.id, s.tokens});
    } else {
      out.push_back({std::to_string(n), split_whitespace(line)});
    }
  }
  return out;
}

std::vector<Extraction> extract_all(const Model<float>& model, const std::vector<InputSentence>& inputs,
                                    std::size_t batch, std::size_t workers) {
  const std::size_t max_len = model.config().encoder.max_length;
  for (const auto& s : inputs) {
    if (s.tokens.size() > max_len) {
      throw ValidationError("sentence '" + s.id + "' has " + std::to_string(s.tokens.size()) +
                            " tokens, model limit is " + std::to_string(max_len));
    }
  }
  const std::size_t chunks = (inputs.size() + batch - 1) / batch;
  std::vector<std::vector<std::vector<Extraction>>> results(chunks);
  parallel_for(chunks, workers, [&](std::size_t c) {
    std::vector<Sentence> sentences;
    std::vector<std::string> ids;
    for (std::size_t i = c * batch; i < std::min(inputs.size(), (c + 1) * batch); ++i) {
      sentences.push_back(make_sentence(inputs[i].tokens, model.vocab()));
      ids.push_back(inputs[i].id);
    }
    results[c] = extract_batch(model, sentences, ids);
  });
  std::vector<Extraction> all;
  for (auto& chunk : results)
    for (auto& per_sentence : chunk) all.insert(all.end(), per_sentence.begin(), per_sentence.end());
  sort_for_output(all);
  return all;
}

int cmd_train(const std::string& corpus_path, const std::string& dev_path, const std::string& config_path,
              const std::string& out_path, std::string report_path, const std::optional<std::uint64_t>& seed,
              const std::optional<std::size_t>& epochs, const std::optional<double>& lr,
              const std::optional<std::size_t>& batch, std::ostream& out) {
  const auto t0 = Clock::now();
  RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
  if (seed) cfg.train.seed = *seed;
  if (epochs) cfg.train.epochs = *epochs;
  if (lr) cfg.train.learning_rate = *lr;
  if (batch) cfg.train.batch_size = *batch;
  cfg.train.validate();

  const auto corpus = load_corpus(corpus_path);
  std::vector<AnnotatedSentence> dev;
  if (!dev_path.empty()) dev = load_corpus(dev_path);
  out << "training on " << corpus.size() << " sentences"
      << (dev.empty() ? std::string() : ", dev " + std::to_string(dev.size())) << '\n';

  TrainOptions opts;
  if (!dev.empty()) opts.dev = &dev;
  opts.on_epoch = [&](const EpochStats& e) {
    out << "epoch " << e.epoch << "/" << cfg.train.epochs << "  L_pred " << fmt("%.4f", e.losses.pred)
        << "  L_arg " << fmt("%.4f", e.losses.arg) << "  total " << fmt("%.4f", e.losses.total);
    if (e.dev_f1) out << "  dev_f1 " << fmt("%.4f", *e.dev_f1);
    out << "  (" << fmt("%.1f", e.seconds) << "s)\n";
  };
  auto result = train(corpus, cfg, opts);
  save_checkpoint(result.checkpoint, out_path);
  out << "checkpoint: " << out_path << " (epoch " << result.selected_epoch << ")\n";

  json report = run_report("train");
  report["config"] = result.checkpoint.config;
  report["timings"]["training_seconds"] = result.seconds;
  report["timings"]["total_seconds"] = seconds_since(t0);
  json epochs_json = json::array();
  for (const auto& e : result.history) {
    json je{{"epoch", e.epoch},
            {"pred_loss", e.losses.pred},
            {"arg_loss", e.losses.arg},
            {"total_loss", e.losses.total},
            {"max_grad_norm", e.max_grad_norm},
            {"seconds", e.seconds}};
    if (e.dev_f1) je["dev_f1"] = *e.dev_f1;
    epochs_json.push_back(je);
  }
  report["metrics"]["epochs"] = epochs_json;
  report["metrics"]["final_total_loss"] = result.history.back().losses.total;
  report["metrics"]["selected_epoch"] = result.selected_epoch;
  if (result.selected_dev_f1) report["metrics"]["dev_f1"] = *result.selected_dev_f1;
  report["artifacts"]["checkpoint"] = out_path;
  report["artifacts"]["corpus"] = corpus_path;
  if (!dev_path.empty()) report["artifacts"]["dev"] = dev_path;
  if (report_path.empty()) report_path = out_path + ".report.json";
  write_report(report_path, report, out);
  return 0;
}

int cmd_extract(const std::string& model_path, const std::string& input_path, const std::string& out_path,
                std::size_t batch, std::string report_path, std::ostream& out) {
  const auto t0 = Clock::now();
  const auto model = model_from_checkpoint(load_checkpoint(model_path));
  const auto inputs = read_inputs(input_path);
  const std::size_t workers = worker_count();
  const auto t1 = Clock::now();
  const auto extractions = extract_all(model, inputs, batch, workers);
  const double inference = seconds_since(t1);
  {
    std::ofstream f(out_path);
    if (!f) throw Error("cannot write extractions '" + out_path + "'");
    write_extractions(f, extractions);
  }
  out << inputs.size() << " sentences -> " << extractions.size() << " extractions: " << out_path << '\n';

  json report = run_report("extract");
  report["config"] = json{{"batch", batch}, {"workers", workers}};
  report["timings"]["inference_seconds"] = inference;
  report["timings"]["total_seconds"] = seconds_since(t0);
  report["metrics"]["sentences"] = inputs.size();
  report["metrics"]["extractions"] = extractions.size();
  report["artifacts"] = json{{"model", model_path}, {"input", input_path}, {"output", out_path}};
  if (report_path.empty()) report_path = out_path + ".report.json";
  write_report(report_path, report, out);
  return 0;
}

int cmd_eval(const std::string& gold_path, const std::string& pred_path, const std::string& matcher_name_arg,
             std::string report_path, std::ostream& out) {
  const auto t0 = Clock::now();
  const Matcher matcher = parse_matcher(matcher_name_arg);
  const auto gold = load_corpus(gold_path);
  std::ifstream f(pred_path);
  if (!f) throw Error("cannot open predictions '" + pred_path + "'");
  const auto preds = read_extractions(f);
  const auto r = evaluate(preds, gold_tuples(gold), matcher);
  out << "matcher " << matcher_name(matcher) << "  AUC " << fmt("%.4f", r.auc) << "  F1 " << fmt("%.4f", r.f1)
      << "  P " << fmt("%.4f", r.precision) << "  R " << fmt("%.4f", r.recall) << "  (threshold "
      << fmt("%.6f", r.threshold) << ")\n";

  json report = run_report("eval");
  report["config"] = json{{"matcher", matcher_name(matcher)}};
  report["timings"]["total_seconds"] = seconds_since(t0);
  report["metrics"] = r;
  report["artifacts"] = json{{"gold", gold_path}, {"pred", pred_path}};
  if (report_path.empty()) report_path = pred_path + ".eval.json";
  write_report(report_path, report, out);
  return 0;
}

int cmd_bench(const std::string& model_path, const std::string& input_path, std::size_t repeat, std::size_t batch,
              std::string report_path, std::ostream& out) {
  const auto model = model_from_checkpoint(load_checkpoint(model_path));
  const auto inputs = read_inputs(input_path);
  if (inputs.empty()) throw ValidationError("bench: no sentences in '" + input_path + "'");
  const std::size_t workers = worker_count();
  std::vector<double> samples;
  // Untimed warm-up pass so allocator and cache state match across timed passes.
  std::size_t extractions = extract_all(model, inputs, batch, workers).size();
  for (std::size_t r = 0; r < repeat; ++r) {
    const auto t0 = Clock::now();
    extractions = extract_all(model, inputs, batch, workers).size();
    samples.push_back(seconds_since(t0));
    out << "pass " << r + 1 << ": " << fmt("%.3f", samples.back()) << "s\n";
  }
  auto sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  const double median = sorted.size() % 2 ? sorted[sorted.size() / 2]
                                          : 0.5 * (sorted[sorted.size() / 2 - 1] + sorted[sorted.size() / 2]);
  const double n = static_cast<double>(inputs.size());
  const double spread = (sorted.back() - sorted.front()) / median;
  out << inputs.size() << " sentences, median " << fmt("%.3f", median) << "s, " << fmt("%.1f", n / median)
      << " sent/s, " << fmt("%.5f", median / n) << " s/sent, spread " << fmt("%.1f", 100.0 * spread) << "%\n";
  out << "note: CPU timings of this small from-scratch model are not comparable to GPU timings of large "
         "pretrained encoders.\n";

  json report = run_report("bench");
  report["config"] = json{{"repeat", repeat}, {"warmup", 1}, {"batch", batch}, {"workers", workers}};
  report["timings"] = json{{"samples_seconds", samples}, {"median_seconds", median}};
  report["metrics"] = json{{"sentences", inputs.size()},
                           {"extractions", extractions},
                           {"sentences_per_second", n / median},
                           {"seconds_per_sentence", median / n},
                           {"spread", spread}};
  report["artifacts"] = json{{"model", model_path}, {"input", input_path}};
  if (report_path.empty()) report_path = input_path + ".bench.json";
  write_report(report_path, report, out);
  return 0;
}

int cmd_synth(std::uint64_t seed, std::size_t size, const std::string& out_path, std::string report_path,
              std::ostream& out) {
  const auto t0 = Clock::now();
  const auto corpus = synth_corpus(seed, size);
  save_corpus(out_path, corpus);
  std::size_t tuples = 0, multi = 0;
  for (const auto& s : corpus) {
    tuples += s.tuples.size();
    std::vector<Span> preds;
    for (const auto& t : s.tuples)
      if (std::find(preds.begin(), preds.end(), t.predicate) == preds.end()) preds.push_back(t.predicate);
    if (preds.size() > 1) ++multi;
  }
  out << corpus.size() << " sentences, " << tuples << " tuples: " << out_path << '\n';

  json report = run_report("synth");
  report["config"] = json{{"seed", seed}, {"size", size}};
  report["timings"]["total_seconds"] = seconds_since(t0);
  report["metrics"] = json{{"sentences", corpus.size()},
                           {"tuples", tuples},
                           {"multi_predicate_fraction", static_cast<double>(multi) / static_cast<double>(size)}};
  report["artifacts"]["output"] = out_path;
  if (report_path.empty()) report_path = out_path + ".report.json";
  write_report(report_path, report, out);
  return 0;
}

int cmd_gradcheck(const std::string& config_path, std::uint64_t seed, std::size_t sentences, std::size_t entries,
                  double tolerance, std::string report_path, std::ostream& out) {
  const auto t0 = Clock::now();
  RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
  const auto batch = synth_corpus(seed, sentences);
  GradCheckOptions opts;
  opts.max_entries_per_tensor = entries;
  opts.sample_seed = seed;
  const auto r = grad_check_joint_loss(cfg.model, batch, seed, opts);
  const bool ok = r.max_rel_error < tolerance;
  out << "checked " << r.entries_checked << " entries over " << r.per_tensor.size() << " tensors ("
      << r.entries_skipped << " skipped at ReLU kinks)\n"
      << "max relative error " << fmt("%.3e", r.max_rel_error) << " at " << r.worst_tensor << "[" << r.worst_index
      << "] (analytic " << fmt("%.6e", r.worst_analytic) << ", numeric " << fmt("%.6e", r.worst_numeric) << ")\n"
      << (ok ? "PASS" : "FAIL") << " (tolerance " << fmt("%.0e", tolerance) << ")\n";

  json report = run_report("gradcheck");
  report["config"] = json{{"model", cfg.model}, {"seed", seed}, {"sentences", sentences},
                          {"entries_per_tensor", entries}, {"tolerance", tolerance}};
  report["timings"]["total_seconds"] = seconds_since(t0);
  json per = json::array();
  for (const auto& t : r.per_tensor) {
    per.push_back({{"name", t.name}, {"checked", t.checked}, {"skipped", t.skipped}, {"max_rel_error", t.max_rel_error}});
  }
  report["metrics"] = json{{"max_rel_error", r.max_rel_error},
                           {"worst_tensor", r.worst_tensor},
                           {"entries_checked", r.entries_checked},
                           {"entries_skipped", r.entries_skipped},
                           {"passed", ok},
                           {"per_tensor", per}};
  if (report_path.empty()) report_path = "gradcheck_report.json";
  write_report(report_path, report, out);
  return ok ? 0 : 1;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-head attention n-ary open information extraction"};
  app.require_subcommand(1);

  std::string corpus, dev, config, out_path, report, model, input, gold, pred, matcher = "tuple";
  std::optional<std::uint64_t> seed_opt;
  std::optional<std::size_t> epochs, batch_opt;
  std::optional<double> lr;
  std::uint64_t seed = 7;
  std::size_t batch = 32, repeat = 3, size = 200, sentences = 2, entries = 4;
  double tolerance = 1e-4;

  auto* train = app.add_subcommand("train", "train a model on an annotated corpus");
  train->add_option("--corpus", corpus, "training corpus (JSON lines)")->required()->check(CLI::ExistingFile);
  train->add_option("--dev", dev, "dev corpus for model selection")->check(CLI::ExistingFile);
  train->add_option("--config", config, "JSON run config")->check(CLI::ExistingFile);
  train->add_option("--out", out_path, "checkpoint path")->required();
  train->add_option("--seed", seed_opt, "random seed");
  train->add_option("--epochs", epochs, "epochs");
  train->add_option("--lr", lr, "peak learning rate");
  train->add_option("--batch-size", batch_opt, "sentences per step");
  train->add_option("--report", report, "report path");

  auto* extract = app.add_subcommand("extract", "extract tuples from sentences");
  extract->add_option("--model", model, "checkpoint")->required()->check(CLI::ExistingFile);
  extract->add_option("--input", input, "one sentence per line, or corpus records")->required()->check(CLI::ExistingFile);
  extract->add_option("--out", out_path, "extraction file")->required();
  extract->add_option("--batch", batch, "sentences per batch")->check(CLI::PositiveNumber);
  extract->add_option("--report", report, "report path");

  auto* eval = app.add_subcommand("eval", "score extractions against gold tuples");
  eval->add_option("--gold", gold, "gold corpus")->required()->check(CLI::ExistingFile);
  eval->add_option("--pred", pred, "extraction file")->required()->check(CLI::ExistingFile);
  eval->add_option("--matcher", matcher, "lexical or tuple")->check(CLI::IsMember({"lexical", "tuple"}));
  eval->add_option("--report", report, "report path");

  auto* bench = app.add_subcommand("bench", "time extraction over an input file");
  bench->add_option("--model", model, "checkpoint")->required()->check(CLI::ExistingFile);
  bench->add_option("--input", input, "sentences")->required()->check(CLI::ExistingFile);
  bench->add_option("--repeat", repeat, "timed passes")->check(CLI::PositiveNumber);
  bench->add_option("--batch", batch, "sentences per batch")->check(CLI::PositiveNumber);
  bench->add_option("--report", report, "report path");

  auto* synth = app.add_subcommand("synth", "write a synthetic annotated corpus");
  synth->add_option("--seed", seed, "random seed");
  synth->add_option("--size", size, "number of sentences")->check(CLI::PositiveNumber);
  synth->add_option("--out", out_path, "corpus path")->required();
  synth->add_option("--report", report, "report path");

  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of the joint loss");
  gradcheck->add_option("--config", config, "JSON run config")->check(CLI::ExistingFile);
  gradcheck->add_option("--seed", seed, "random seed");
  gradcheck->add_option("--sentences", sentences, "synthetic sentences in the batch")->check(CLI::PositiveNumber);
  gradcheck->add_option("--entries", entries, "sampled entries per tensor (0 = all)");
  gradcheck->add_option("--tolerance", tolerance, "maximum relative error");
  gradcheck->add_option("--report", report, "report path");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    if (*train) return cmd_train(corpus, dev, config, out_path, report, seed_opt, epochs, lr, batch_opt, out);
    if (*extract) return cmd_extract(model, input, out_path, batch, report, out);
    if (*eval) return cmd_eval(gold, pred, matcher, report, out);
    if (*bench) return cmd_bench(model, input, repeat, batch, report, out);
    if (*synth) return cmd_synth(seed, size, out_path, report, out);
    if (*gradcheck) return cmd_gradcheck(config, seed, sentences, entries, tolerance, report, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace m2oie
