#include "longcode/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "longcode/error.hpp"

namespace longcode {

void TrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (eval_every == 0) throw ConfigError("eval_every must be >= 1");
  if (max_steps > 0 && eval_every > max_steps) {
    throw ConfigError("eval_every (" + std::to_string(eval_every) + ") exceeds max_steps (" +
                      std::to_string(max_steps) + ")");
  }
  if (max_seq_len == 0) throw ConfigError("max_seq_len must be >= 1");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("lr must be positive");
}

template <typename T>
Tensor<T> example_loss(const Tensor<T>& probs, const SparseLabels& labels) {
  check_sparse_labels(labels, probs.numel());
  return binary_cross_entropy(probs, labels);
}

template <typename T>
Tensor<T> forward_truncated(const Classifier<T>& model, std::span<const TokenId> ids,
                            std::size_t max_len) {
  return model.forward(ids.first(std::min(ids.size(), max_len)));
}

Trainer::Trainer(Classifier<float>& model, const TrainConfig& config)
    : model_(model), config_(config) {
  config_.validate();
  for (auto& p : model_.parameters()) params_.push_back(p.tensor);
  state_.options.lr = config_.lr;
}

double Trainer::train_step(std::span<const Example* const> batch) {
  if (batch.empty()) throw ConfigError("train_step: empty batch");
  for (auto& p : params_) p.zero_grad();
  const float weight = 1.0f / static_cast<float>(batch.size());
  double total = 0.0;
  // Each example gets its own graph; backward with weight 1/B accumulates
  // the mean-loss gradient into the parameters.
  for (const Example* ex : batch) {
    const Tensor<float> probs = forward_truncated(model_, ex->ids, config_.max_seq_len);
    const Tensor<float> loss = example_loss(probs, ex->labels);
    loss.backward(weight);
    total += loss.item();
  }
  adam_step<float>(params_, state_);
  return total / static_cast<double>(batch.size());
}

BatchSampler::BatchSampler(std::size_t num_examples, std::size_t batch_size, std::uint64_t seed)
    : order_(num_examples), batch_size_(batch_size), rng_(seed) {
  if (num_examples == 0) throw ConfigError("cannot sample batches from an empty training set");
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  std::shuffle(order_.begin(), order_.end(), rng_);
}

std::vector<std::size_t> BatchSampler::next() {
  std::vector<std::size_t> batch;
  while (batch.size() < batch_size_) {
    if (cursor_ == order_.size()) {
      std::shuffle(order_.begin(), order_.end(), rng_);
      cursor_ = 0;
    }
    batch.push_back(order_[cursor_++]);
  }
  return batch;
}

std::string format_metrics_row(const MetricsRow& row) {
  auto num = [](std::optional<double> v) {
    if (!v || std::isnan(*v)) return std::string("nan");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", *v);
    return std::string(buf);
  };
  return std::to_string(row.step) + "," + num(row.train_loss) + "," + num(row.val_micro_f1) + "," +
         num(row.val_pr_auc) + "," + num(row.val_roc_auc);
}

bool BestTracker::offer(std::size_t step, double f1) {
  if (best_step_ && !(f1 > best_f1_)) return false;
  best_step_ = step;
  best_f1_ = f1;
  return true;
}

PredictionSet predict_all(const Classifier<float>& model, std::span<const Example> examples,
                          std::size_t max_len) {
  PredictionSet preds(model.num_classes());
  for (const auto& ex : examples) {
    const Tensor<float> probs = forward_truncated(model, ex.ids, max_len);
    preds.add(probs.values(), ex.labels);
  }
  return preds;
}

MetricsRow evaluate_validation(const Classifier<float>& model, std::span<const Example> val,
                               std::size_t max_len) {
  if (val.empty()) throw ConfigError("validation set is empty");
  const PredictionSet preds = predict_all(model, val, max_len);
  const auto grid = default_threshold_grid();
  const ThresholdChoice choice = best_threshold(preds, grid);
  MetricsRow row;
  row.val_micro_f1 = choice.f1;
  row.threshold = choice.threshold;
  row.val_pr_auc = pr_auc(preds);
  row.val_roc_auc = roc_auc(preds);
  return row;
}

TrainLoopResult train_loop(Classifier<float>& model, std::span<const Example> train,
                           std::span<const Example> val, const TrainConfig& config,
                           const TrainLoopHooks& hooks) {
  config.validate();
  if (train.empty()) throw ConfigError("training corpus is empty");
  if (val.empty()) throw ConfigError("validation corpus is empty");

  auto params = model.parameters();
  std::vector<std::vector<float>> best_weights;
  auto snapshot = [&] {
    best_weights.clear();
    for (const auto& p : params) {
      best_weights.emplace_back(p.tensor.values().begin(), p.tensor.values().end());
    }
  };

  TrainLoopResult result;
  BestTracker tracker;
  auto evaluate = [&](std::size_t step, double train_loss) {
    MetricsRow row = evaluate_validation(model, val, config.max_seq_len);
    row.step = step;
    row.train_loss = train_loss;
    result.log.push_back(row);
    if (hooks.on_eval) hooks.on_eval(row);
    if (tracker.offer(step, row.val_micro_f1)) {
      result.best = row;
      snapshot();
      if (hooks.on_checkpoint) hooks.on_checkpoint("best", row);
    }
    if (hooks.on_checkpoint) hooks.on_checkpoint("latest", row);
  };

  if (config.max_steps == 0) {
    evaluate(0, std::numeric_limits<double>::quiet_NaN());
    return result;
  }

  Trainer trainer(model, config);
  BatchSampler sampler(train.size(), config.batch_size, config.seed);
  double loss_sum = 0.0;
  std::size_t loss_count = 0;
  std::vector<const Example*> batch;
  for (std::size_t step = 1; step <= config.max_steps; ++step) {
    batch.clear();
    for (const std::size_t i : sampler.next()) batch.push_back(&train[i]);
    loss_sum += trainer.train_step(batch);
    ++loss_count;
    if (step % config.eval_every == 0 || step == config.max_steps) {
      evaluate(step, loss_sum / static_cast<double>(loss_count));
      loss_sum = 0.0;
      loss_count = 0;
    }
  }

  for (std::size_t i = 0; i < params.size(); ++i) {
    auto values = params[i].tensor.mutable_values();
    std::copy(best_weights[i].begin(), best_weights[i].end(), values.begin());
  }
  return result;
}

template Tensor<float> example_loss(const Tensor<float>&, const SparseLabels&);
template Tensor<double> example_loss(const Tensor<double>&, const SparseLabels&);
template Tensor<float> forward_truncated(const Classifier<float>&, std::span<const TokenId>,
                                         std::size_t);
template Tensor<double> forward_truncated(const Classifier<double>&, std::span<const TokenId>,
                                          std::size_t);

}  // namespace longcode
