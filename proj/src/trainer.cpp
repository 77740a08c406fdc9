#include "m2oie/trainer.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include "m2oie/error.hpp"
#include "m2oie/evaluator.hpp"

namespace m2oie {

TrainingExample make_example(const AnnotatedSentence& s, const Vocabulary& vocab) {
  s.validate();
  TrainingExample ex;
  ex.sentence = make_sentence(s.tokens, vocab);
  ex.predicate_tags = sentence_predicate_tags(s);
  for (const auto& t : s.tuples) {
    auto tags = tuples_to_tags(s, t);
    ex.targets.push_back({t.predicate, std::move(tags.arguments)});
  }
  return ex;
}

template <class T>
JointLoss<T> joint_loss(Graph<T>& g, const Model<T>& model, const std::vector<const TrainingExample*>& batch,
                        const ArgInputObserver<T>& observer) {
  if (batch.empty()) throw ValidationError("joint_loss: empty batch");
  std::size_t tokens = 0, instances = 0;
  for (const auto* ex : batch) {
    tokens += ex->sentence.length();
    instances += ex->targets.size();
  }

  std::vector<Tensor<T>> pred_terms, arg_terms;
  std::vector<T> pred_weights, arg_weights;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& ex = *batch[i];
    if (ex.sentence.padded_length() != ex.sentence.length()) {
      throw ValidationError("joint_loss: training sentences must be unpadded");
    }
    const std::vector<std::uint8_t> keep(ex.sentence.length(), 1);
    auto fwd = forward_sentence(g, model, ex.sentence);
    pred_terms.push_back(predicate_loss(fwd.predicate_logits, ex.predicate_tags, keep));
    pred_weights.push_back(static_cast<T>(static_cast<double>(ex.sentence.length()) / static_cast<double>(tokens)));

    for (std::size_t k = 0; k < ex.targets.size(); ++k) {
      const auto& target = ex.targets[k];
      ArgumentProbe<T> probe;
      auto logits = argument_logits(g, model.argument(), model.config().argument, fwd.hidden, target.predicate,
                                    observer ? &probe : nullptr);
      if (observer) observer(i, k, probe.inputs);
      arg_terms.push_back(argument_loss(logits, target.argument_tags, keep));
      arg_weights.push_back(static_cast<T>(1.0 / static_cast<double>(instances)));
    }
  }

  JointLoss<T> out;
  out.pred = ops::weighted_sum(std::span<const Tensor<T>>(pred_terms), std::span<const T>(pred_weights));
  if (instances > 0) {
    out.arg = ops::weighted_sum(std::span<const Tensor<T>>(arg_terms), std::span<const T>(arg_weights));
    out.total = ops::add(out.pred, out.arg);
  } else {
    out.total = out.pred;
  }
  return out;
}

template <class T>
AdamW<T>::AdamW(ParameterStore<T>& store, double beta1, double beta2, double eps)
    : store_(&store), beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (const auto& p : store) {
    m_.emplace_back(p.size(), 0.0);
    v_.emplace_back(p.size(), 0.0);
  }
}

template <class T>
void AdamW<T>::step(double lr, double weight_decay) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < store_->size(); ++i) {
    auto& p = (*store_)[i];
    auto& m = m_[i];
    auto& v = v_[i];
    const double shrink = p.decay ? 1.0 - lr * weight_decay : 1.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double g = p.grad[k];
      m[k] = beta1_ * m[k] + (1.0 - beta1_) * g;
      v[k] = beta2_ * v[k] + (1.0 - beta2_) * g * g;
      const double update = (m[k] / c1) / (std::sqrt(v[k] / c2) + eps_);
      p.value[k] = static_cast<T>(static_cast<double>(p.value[k]) * shrink - lr * update);
    }
  }
}

LinearSchedule::LinearSchedule(double peak, std::size_t total_steps, double warmup_fraction)
    : peak_(peak), total_(total_steps) {
  if (total_steps == 0) throw ConfigError("schedule needs at least one step");
  if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0)) throw ConfigError("warmup fraction must be in [0, 1)");
  warmup_ = static_cast<std::size_t>(std::llround(warmup_fraction * static_cast<double>(total_steps)));
  if (warmup_fraction > 0.0 && warmup_ == 0) warmup_ = 1;
  if (warmup_ >= total_) warmup_ = total_ - 1;
}

double LinearSchedule::at(std::size_t step) const {
  if (step == 0 || step > total_) throw ConfigError("schedule step " + std::to_string(step) + " out of range");
  if (step <= warmup_) return peak_ * static_cast<double>(step) / static_cast<double>(warmup_);
  return peak_ * static_cast<double>(total_ - step) / static_cast<double>(total_ - warmup_);
}

template <class T>
double global_grad_norm(const ParameterStore<T>& store) {
  double sq = 0.0;
  for (const auto& p : store)
    for (T g : p.grad) sq += static_cast<double>(g) * static_cast<double>(g);
  return std::sqrt(sq);
}

template <class T>
double clip_grad_norm(ParameterStore<T>& store, double max_norm) {
  const double norm = global_grad_norm(store);
  if (std::isfinite(norm) && norm > max_norm) {
    const double s = max_norm / norm;
    for (auto& p : store)
      for (T& g : p.grad) g = static_cast<T>(static_cast<double>(g) * s);
  }
  return norm;
}

StepStats joint_step(Model<float>& model, AdamW<float>& opt, const std::vector<const TrainingExample*>& batch,
                     const TrainConfig& cfg, double lr, std::uint64_t dropout_seed) {
  auto& store = model.params();
  store.zero_grad();
  Graph<float> g(Mode::kTrain, dropout_seed);
  auto loss = joint_loss(g, model, batch);

  StepStats st;
  st.lr = lr;
  st.losses.pred = loss.pred.item();
  st.losses.arg = loss.arg.valid() ? loss.arg.item() : 0.0;
  st.losses.total = loss.total.item();
  if (!std::isfinite(st.losses.total)) {
    throw DivergenceError("loss became non-finite (pred " + std::to_string(st.losses.pred) + ", arg " +
                          std::to_string(st.losses.arg) + ") at optimizer step " +
                          std::to_string(opt.steps() + 1));
  }
  g.backward(loss.total);
  st.grad_norm = clip_grad_norm(store, cfg.clip_norm);
  if (!std::isfinite(st.grad_norm)) {
    throw DivergenceError("gradient norm became non-finite at optimizer step " + std::to_string(opt.steps() + 1));
  }
  st.clipped_norm = global_grad_norm(store);
  opt.step(lr, cfg.weight_decay);
  return st;
}

TrainResult train(const std::vector<AnnotatedSentence>& corpus, const RunConfig& cfg, const TrainOptions& options) {
  if (corpus.empty()) throw ValidationError("train: empty corpus");
  cfg.train.validate();
  const auto t0 = std::chrono::steady_clock::now();

  const Vocabulary vocab = build_vocabulary(corpus);
  ModelConfig mc = cfg.model;
  mc.encoder.vocab_size = vocab.size();
  Model<float> model(mc, vocab);
  model.initialize(cfg.train.seed);
  model.set_dropout(mc.encoder.dropout, cfg.train.dropout);

  std::vector<TrainingExample> examples;
  examples.reserve(corpus.size());
  for (const auto& s : corpus) examples.push_back(make_example(s, vocab));

  const std::size_t bs = cfg.train.batch_size;
  const std::size_t steps_per_epoch = (examples.size() + bs - 1) / bs;
  const LinearSchedule schedule(cfg.train.learning_rate, steps_per_epoch * cfg.train.epochs,
                                cfg.train.warmup_fraction);
  AdamW<float> opt(model.params());
  Rng order_rng(cfg.train.seed ^ 0x5eedf00dULL);
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  std::vector<std::vector<float>> best_weights;
  std::optional<double> best_f1;
  std::size_t step = 0;
  for (std::size_t epoch = 1; epoch <= cfg.train.epochs; ++epoch) {
    const auto e0 = std::chrono::steady_clock::now();
    order_rng.shuffle(order);
    EpochStats es;
    es.epoch = epoch;
    for (std::size_t start = 0; start < order.size(); start += bs) {
      std::vector<const TrainingExample*> batch;
      for (std::size_t k = start; k < std::min(order.size(), start + bs); ++k) batch.push_back(&examples[order[k]]);
      ++step;
      const auto st = joint_step(model, opt, batch, cfg.train, schedule.at(step),
                                 cfg.train.seed * 1000003ULL + step);
      es.losses.pred += st.losses.pred;
      es.losses.arg += st.losses.arg;
      es.losses.total += st.losses.total;
      es.max_grad_norm = std::max(es.max_grad_norm, st.grad_norm);
      es.max_clipped_norm = std::max(es.max_clipped_norm, st.clipped_norm);
      if (options.on_step) options.on_step(st);
    }
    const double n = static_cast<double>(steps_per_epoch);
    es.losses.pred /= n;
    es.losses.arg /= n;
    es.losses.total /= n;
    if (options.dev && !options.dev->empty()) {
      es.dev_f1 = evaluate_model(model, *options.dev, Matcher::kTuple).f1;
      if (!best_f1 || *es.dev_f1 >= *best_f1) {
        best_f1 = es.dev_f1;
        result.selected_epoch = epoch;
        best_weights.clear();
        for (const auto& p : model.params()) best_weights.push_back(p.value);
      }
    }
    es.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - e0).count();
    result.history.push_back(es);
    if (options.on_epoch) options.on_epoch(es);
  }

  if (best_f1) {
    for (std::size_t i = 0; i < best_weights.size(); ++i) model.params()[i].value = best_weights[i];
    result.selected_dev_f1 = best_f1;
  } else {
    result.selected_epoch = cfg.train.epochs;
  }
  result.checkpoint = make_checkpoint(model, cfg.train);
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

GradCheckResult grad_check_joint_loss(const ModelConfig& config, const std::vector<AnnotatedSentence>& batch,
                                      std::uint64_t seed, const GradCheckOptions& options) {
  if (batch.empty()) throw ValidationError("grad_check_joint_loss: empty batch");
  const Vocabulary vocab = build_vocabulary(batch);
  ModelConfig mc = config;
  mc.encoder.vocab_size = vocab.size();
  Model<double> model(mc, vocab);
  model.initialize(seed);
  std::vector<TrainingExample> examples;
  for (const auto& s : batch) examples.push_back(make_example(s, vocab));
  std::vector<const TrainingExample*> ptrs;
  for (const auto& e : examples) ptrs.push_back(&e);
  auto params = model.params().pointers();
  return grad_check([&](Graph<double>& g) { return joint_loss(g, model, ptrs).total; },
                    std::span<Parameter<double>* const>(params), options);
}

template JointLoss<float> joint_loss(Graph<float>&, const Model<float>&, const std::vector<const TrainingExample*>&,
                                     const ArgInputObserver<float>&);
template JointLoss<double> joint_loss(Graph<double>&, const Model<double>&,
                                      const std::vector<const TrainingExample*>&, const ArgInputObserver<double>&);
template class AdamW<float>;
template class AdamW<double>;
template double global_grad_norm(const ParameterStore<float>&);
template double global_grad_norm(const ParameterStore<double>&);
template double clip_grad_norm(ParameterStore<float>&, double);
template double clip_grad_norm(ParameterStore<double>&, double);

}  // namespace m2oie
