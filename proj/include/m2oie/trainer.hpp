#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "m2oie/checkpoint.hpp"
#include "m2oie/config.hpp"
#include "m2oie/corpus.hpp"
#include "m2oie/grad_check.hpp"
#include "m2oie/model.hpp"

namespace m2oie {

struct Losses {
  double pred = 0.0;
  double arg = 0.0;
  double total = 0.0;
};

// A sentence with its gold tags precomputed.
struct TrainingExample {
  Sentence sentence;
  std::vector<PredTag> predicate_tags;
  struct Target {
    PredicateSpan predicate;
    std::vector<ArgTag> argument_tags;
  };
  std::vector<Target> targets;  // one per gold tuple
};

TrainingExample make_example(const AnnotatedSentence& s, const Vocabulary& vocab);

template <class T>
struct JointLoss {
  Tensor<T> pred;
  Tensor<T> arg;  // undefined when the batch has no gold tuple
  Tensor<T> total;
};

// Sees the argument inputs built for (example index, target index).
template <class T>
using ArgInputObserver = std::function<void(std::size_t, std::size_t, const ArgInputs<T>&)>;

// L_pred: token-weighted mean predicate cross-entropy over the batch.
// L_arg: mean over (sentence, gold tuple) instances of the argument
// cross-entropy, with inputs built from the gold predicate span.
// total = L_pred + L_arg.
template <class T>
JointLoss<T> joint_loss(Graph<T>& g, const Model<T>& model, const std::vector<const TrainingExample*>& batch,
                        const ArgInputObserver<T>& observer = nullptr);

// Decoupled weight decay Adam over a parameter store. Moments are kept in
// double; the update is applied in double and rounded to T.
template <class T>
class AdamW {
 public:
  explicit AdamW(ParameterStore<T>& store, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  void step(double lr, double weight_decay);
  std::size_t steps() const { return t_; }

 private:
  ParameterStore<T>* store_;
  double beta1_, beta2_, eps_;
  std::size_t t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

// Linear warmup to the peak at step `warmup`, then linear decay to 0 at step
// `total`. Steps are 1-based.
class LinearSchedule {
 public:
  LinearSchedule(double peak, std::size_t total_steps, double warmup_fraction);
  double at(std::size_t step) const;
  std::size_t warmup_steps() const { return warmup_; }
  std::size_t total_steps() const { return total_; }

 private:
  double peak_;
  std::size_t total_;
  std::size_t warmup_;
};

template <class T>
double global_grad_norm(const ParameterStore<T>& store);

// Scales every gradient by max_norm / norm when norm exceeds max_norm.
// Returns the norm before clipping.
template <class T>
double clip_grad_norm(ParameterStore<T>& store, double max_norm);

struct StepStats {
  Losses losses;
  double grad_norm = 0.0;
  double clipped_norm = 0.0;
  double lr = 0.0;
};

// Forward, backward, clip and one optimizer update on a batch.
StepStats joint_step(Model<float>& model, AdamW<float>& opt, const std::vector<const TrainingExample*>& batch,
                     const TrainConfig& cfg, double lr, std::uint64_t dropout_seed);

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  Losses losses;          // means over the epoch's steps
  double max_grad_norm = 0.0;
  double max_clipped_norm = 0.0;
  std::optional<double> dev_f1;
  double seconds = 0.0;
};

struct TrainOptions {
  const std::vector<AnnotatedSentence>* dev = nullptr;
  std::function<void(const EpochStats&)> on_epoch;
  std::function<void(const StepStats&)> on_step;
};

struct TrainResult {
  ModelCheckpoint checkpoint;
  std::vector<EpochStats> history;
  std::size_t selected_epoch = 0;
  std::optional<double> selected_dev_f1;
  double seconds = 0.0;
};

// Builds the vocabulary from the corpus, initializes from cfg.train.seed and
// runs cfg.train.epochs epochs. With a dev set, the epoch with the best dev
// tuple-match F1 is kept (later epoch on ties); otherwise the last one.
// Throws DivergenceError when a loss or gradient norm becomes non-finite.
TrainResult train(const std::vector<AnnotatedSentence>& corpus, const RunConfig& cfg,
                  const TrainOptions& options = {});

// Finite-difference check of the full joint loss in double precision, eval
// mode (dropout off), on a model initialized from `seed` with a vocabulary
// built from `batch`.
GradCheckResult grad_check_joint_loss(const ModelConfig& config, const std::vector<AnnotatedSentence>& batch,
                                      std::uint64_t seed, const GradCheckOptions& options = {});

}  // namespace m2oie
