#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "longcode/corpus.hpp"
#include "longcode/metrics.hpp"
#include "longcode/run_config.hpp"
#include "longcode/tokenizer.hpp"

namespace longcode::app {

// Files inside a checkpoint directory.
inline constexpr std::string_view kConfigFile = "config.txt";
inline constexpr std::string_view kLabelsFile = "labels.txt";
inline constexpr std::string_view kVocabFile = "vocab.txt";
inline constexpr std::string_view kBestInfoFile = "best_info.txt";
inline constexpr std::string_view kMetricsFile = "metrics.csv";

// Writes the synthetic corpus described by the synth_* keys into `out_dir`.
SyntheticCorpus generate_corpus(const RunConfig& config, const std::filesystem::path& out_dir);

// Raw text -> model input ids, for either encoder.
class Featurizer {
 public:
  Featurizer(EncoderKind kind, Vocab vocab);

  std::vector<TokenId> ids(std::string_view text) const;
  const Vocab& vocab() const { return vocab_; }

 private:
  EncoderKind kind_;
  Vocab vocab_;
  std::optional<WordPieceTokenizer> tokenizer_;
};

// Fresh model for the configuration, initialised from its seed.
std::unique_ptr<Classifier<float>> build_model(const RunConfig& config, const Vocab& vocab,
                                               std::size_t num_classes);

std::vector<Example> make_examples(std::span<const Note> notes, const Featurizer& featurizer,
                                   const LabelSet& labels, std::uint64_t* unknown = nullptr);

struct TrainSummary {
  std::size_t num_train = 0;
  std::size_t num_val = 0;
  std::size_t num_classes = 0;
  std::uint64_t num_parameters = 0;
  std::size_t best_step = 0;
  double best_val_f1 = 0.0;
  double best_threshold = 0.0;
  std::vector<MetricsRow> log;
};

// Trains per the configuration and fills checkpoint_dir with the resolved
// config, labels, vocabulary, best/latest weights and the metrics log.
// Progress lines go to `progress` when given.
TrainSummary train(const RunConfig& config, std::ostream* progress = nullptr);

struct BestInfo {
  std::size_t step = 0;
  double val_micro_f1 = 0.0;
  double threshold = 0.5;
};

class LoadedModel {
 public:
  // `tag` selects best.* or latest.* weights.
  static LoadedModel load(const std::filesystem::path& dir, std::string_view tag = "best");

  const RunConfig& config() const { return config_; }
  const LabelSet& labels() const { return labels_; }
  const Featurizer& featurizer() const { return *featurizer_; }
  const Classifier<float>& model() const { return *model_; }
  const BestInfo& best() const { return best_; }
  std::size_t max_len() const { return max_len_; }

 private:
  RunConfig config_;
  LabelSet labels_;
  std::unique_ptr<Featurizer> featurizer_;
  std::unique_ptr<Classifier<float>> model_;
  BestInfo best_;
  std::size_t max_len_ = 0;
};

struct EvalOptions {
  std::filesystem::path test_corpus;
  std::optional<std::filesystem::path> val_corpus;
  std::optional<std::filesystem::path> codes;  // must list exactly the checkpoint's K codes
  std::optional<double> threshold;             // bypasses the grid search
};

enum class ThresholdSource { kGiven, kValidationGrid, kCheckpoint };

struct EvalResult {
  EvalReport report;
  ThresholdSource source = ThresholdSource::kGiven;
};

// Test metrics at the given threshold, or at the grid threshold maximising
// validation micro F1; with neither, the threshold stored at selection time.
EvalResult evaluate(const LoadedModel& model, const EvalOptions& options);

// All K codes ranked by probability (descending, ties by index), first top_n.
std::vector<std::pair<std::string, double>> predict(const LoadedModel& model,
                                                    std::string_view text, std::size_t top_n);

// Token-length CDF of `corpus` under the configured (or derived) vocabulary.
std::vector<CdfPoint> corpus_cdf(const RunConfig& config, const std::filesystem::path& corpus);

}  // namespace longcode::app
