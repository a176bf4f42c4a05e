#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "longcode/adam.hpp"
#include "longcode/labels.hpp"
#include "longcode/metrics.hpp"
#include "longcode/model.hpp"

namespace longcode {

struct TrainConfig {
  double lr = 2e-4;
  std::size_t batch_size = 4;
  std::size_t max_steps = 200;
  std::size_t eval_every = 50;
  std::size_t max_seq_len = 512;  // documents are cut to their first max_seq_len tokens
  std::uint64_t seed = 42;

  void validate() const;
};

// Token ids of one note (untruncated) and its labels.
struct Example {
  std::vector<TokenId> ids;
  SparseLabels labels;
};

// Binary cross-entropy summed over the K classes.
template <typename T>
Tensor<T> example_loss(const Tensor<T>& probs, const SparseLabels& labels);

// Model probabilities for the first `max_len` ids of `ids`.
template <typename T>
Tensor<T> forward_truncated(const Classifier<T>& model, std::span<const TokenId> ids,
                            std::size_t max_len);

// Owns the optimizer state for one model.
class Trainer {
 public:
  Trainer(Classifier<float>& model, const TrainConfig& config);

  // One Adam update on the mean example loss of `batch`; returns that mean.
  double train_step(std::span<const Example* const> batch);

  const AdamState<float>& optimizer() const { return state_; }
  const TrainConfig& config() const { return config_; }

 private:
  Classifier<float>& model_;
  TrainConfig config_;
  std::vector<Tensor<float>> params_;
  AdamState<float> state_;
};

// Epoch-wise reshuffled batches of example indices, fixed by the seed.
class BatchSampler {
 public:
  BatchSampler(std::size_t num_examples, std::size_t batch_size, std::uint64_t seed);
  std::vector<std::size_t> next();

 private:
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  std::size_t batch_size_;
  std::mt19937_64 rng_;
};

struct MetricsRow {
  std::size_t step = 0;
  double train_loss = 0.0;  // mean step loss since the previous evaluation; NaN at step 0
  double val_micro_f1 = 0.0;
  std::optional<double> val_pr_auc;
  std::optional<double> val_roc_auc;
  double threshold = 0.0;  // grid threshold that produced val_micro_f1
};

inline constexpr std::string_view kMetricsHeader =
    "step,train_loss,val_micro_f1,val_pr_auc,val_roc_auc";
std::string format_metrics_row(const MetricsRow& row);

// Keeps the step with the strictly highest validation micro F1 (earliest
// wins ties).
class BestTracker {
 public:
  bool offer(std::size_t step, double f1);
  std::optional<std::size_t> best_step() const { return best_step_; }
  double best_f1() const { return best_f1_; }

 private:
  std::optional<std::size_t> best_step_;
  double best_f1_ = 0.0;
};

PredictionSet predict_all(const Classifier<float>& model, std::span<const Example> examples,
                          std::size_t max_len);

// Validation row for the current weights: grid-searched threshold, F1 at
// that threshold and both AUCs.
MetricsRow evaluate_validation(const Classifier<float>& model, std::span<const Example> val,
                               std::size_t max_len);

struct TrainLoopHooks {
  std::function<void(const MetricsRow&)> on_eval;
  // Called with "best" when a new best is found and "latest" after every
  // evaluation; the model holds the weights in question during the call.
  std::function<void(std::string_view tag, const MetricsRow&)> on_checkpoint;
};

struct TrainLoopResult {
  MetricsRow best;
  std::vector<MetricsRow> log;
};

// Runs max_steps updates, evaluating every eval_every steps and after the
// final one. With max_steps == 0 the initial weights are evaluated once.
// On return the model holds the best weights.
TrainLoopResult train_loop(Classifier<float>& model, std::span<const Example> train,
                           std::span<const Example> val, const TrainConfig& config,
                           const TrainLoopHooks& hooks = {});

}  // namespace longcode
