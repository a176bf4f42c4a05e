#include "longcode/app.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include "longcode/checkpoint.hpp"
#include "longcode/encoder_cnn.hpp"
#include "longcode/error.hpp"
#include "longcode/long_context.hpp"

namespace longcode::app {
namespace fs = std::filesystem;
namespace {

std::optional<fs::path> optional_path(const RunConfig& config, std::string_view key) {
  if (!config.has_value(key)) return std::nullopt;
  fs::path path = config.get(key);
  if (!fs::exists(path)) {
    throw ConfigError(describe_key(key) + ": no such file '" + path.string() + "'");
  }
  return path;
}

fs::path required_path(const RunConfig& config, std::string_view key) {
  if (!config.has_value(key)) throw ConfigError(describe_key(key) + " is required");
  return *optional_path(config, key);
}

std::vector<std::string> texts_of(std::span<const Note> notes) {
  std::vector<std::string> texts;
  texts.reserve(notes.size());
  for (const auto& note : notes) texts.push_back(note.text);
  return texts;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

std::string format_best_info(const BestInfo& info) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "step = %zu\nval_micro_f1 = %.9g\nthreshold = %.9g\n", info.step,
                info.val_micro_f1, info.threshold);
  return buf;
}

BestInfo read_best_info(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  BestInfo info;
  std::string key, eq, value;
  while (in >> key >> eq >> value) {
    if (eq != "=") throw FormatError(path.string() + ": expected key = value");
    if (key == "step") info.step = std::stoul(value);
    else if (key == "val_micro_f1") info.val_micro_f1 = std::stod(value);
    else if (key == "threshold") info.threshold = std::stod(value);
    else throw FormatError(path.string() + ": unknown key '" + key + "'");
  }
  return info;
}

void check_disjoint(std::span<const Note> train, std::span<const Note> val) {
  std::unordered_set<std::string_view> ids;
  for (const auto& note : train) ids.insert(note.note_id);
  for (const auto& note : val) {
    if (ids.contains(note.note_id)) {
      throw ConfigError("note '" + note.note_id + "' is in both the training and validation corpus");
    }
  }
}

}  // namespace

SyntheticCorpus generate_corpus(const RunConfig& config, const fs::path& out_dir) {
  const SyntheticCorpus corpus = generate_synthetic(synthetic_spec(config));
  write_synthetic(corpus, out_dir);
  return corpus;
}

Featurizer::Featurizer(EncoderKind kind, Vocab vocab) : kind_(kind), vocab_(std::move(vocab)) {
  if (kind_ == EncoderKind::kTransformer) tokenizer_.emplace(vocab_);
}

std::vector<TokenId> Featurizer::ids(std::string_view text) const {
  if (tokenizer_) return tokenizer_->tokenize(text).ids;
  return word_ids(vocab_, text);
}

std::unique_ptr<Classifier<float>> build_model(const RunConfig& config, const Vocab& vocab,
                                               std::size_t num_classes) {
  if (num_classes == 0) throw ConfigError("the label set is empty (K = 0)");
  ParamInit init(config.get_u64("seed"));
  std::unique_ptr<TokenEncoder<float>> encoder;
  if (encoder_kind(config) == EncoderKind::kCnn) {
    encoder = std::make_unique<CnnEncoder<float>>(cnn_config(config, vocab.size()), init);
  } else {
    const EncoderConfig enc = encoder_config(config, vocab.size());
    std::optional<SpecialTokens> special;
    if (config.get_bool("segment_special_tokens")) {
      const auto cls = vocab.find(kClsToken);
      const auto sep = vocab.find(kSepToken);
      if (!cls || !sep) {
        throw ConfigError(describe_key("segment_special_tokens") +
                          ": the vocabulary has no [CLS]/[SEP] tokens");
      }
      special = SpecialTokens{*cls, *sep};
    }
    encoder = std::make_unique<SegmentedTransformer<float>>(
        TransformerEncoder<float>(enc, init), config.get_size("seg_stride"), special);
  }
  const std::size_t width = encoder->output_dim();
  return std::make_unique<Classifier<float>>(std::move(encoder),
                                             LabelHead<float>(num_classes, width, init));
}

std::vector<Example> make_examples(std::span<const Note> notes, const Featurizer& featurizer,
                                   const LabelSet& labels, std::uint64_t* unknown) {
  std::vector<Example> examples;
  examples.reserve(notes.size());
  for (const auto& note : notes) {
    examples.push_back({featurizer.ids(note.text), labels.encode(note.codes, unknown)});
  }
  return examples;
}

TrainSummary train(const RunConfig& config, std::ostream* progress) {
  // Validate everything up front so no work starts on a bad configuration.
  const EncoderKind kind = encoder_kind(config);
  const TrainConfig tc = train_config(config);
  const fs::path corpus_path = required_path(config, "corpus");
  const auto val_path = optional_path(config, "val_corpus");
  const auto codes_path = optional_path(config, "codes");
  const auto vocab_path = optional_path(config, "vocab");
  const double val_fraction = config.get_double("val_fraction");
  if (!val_path && !(val_fraction > 0.0 && val_fraction < 1.0)) {
    throw ConfigError(describe_key("val_fraction") + " must lie in (0, 1)");
  }
  const fs::path dir = config.get("checkpoint_dir");
  if (dir.empty()) throw ConfigError(describe_key("checkpoint_dir") + " is required");

  std::vector<Note> train_notes = load_corpus(corpus_path);
  if (train_notes.empty()) throw ConfigError("training corpus " + corpus_path.string() + " is empty");
  std::vector<Note> val_notes;
  if (val_path) {
    val_notes = load_corpus(*val_path);
  } else {
    std::tie(train_notes, val_notes) = split_holdout(std::move(train_notes), val_fraction, tc.seed);
  }
  if (val_notes.empty()) throw ConfigError("validation corpus is empty");
  check_disjoint(train_notes, val_notes);

  const LabelSet labels = codes_path ? LabelSet::from_file(*codes_path)
                                     : LabelSet::from_notes(train_notes);
  const auto texts = texts_of(train_notes);
  Vocab vocab = kind == EncoderKind::kCnn
                    ? build_word_vocab(texts, config.get_size("cnn_min_word_freq"))
                : vocab_path ? Vocab::from_file(*vocab_path)
                             : derive_wordpiece_vocab(texts);
  const Featurizer featurizer(kind, vocab);
  auto model = build_model(config, vocab, labels.size());

  const auto train_examples = make_examples(train_notes, featurizer, labels);
  const auto val_examples = make_examples(val_notes, featurizer, labels);

  fs::create_directories(dir);
  write_text(dir / kConfigFile, config.dump());
  labels.save(dir / kLabelsFile);
  vocab.save(dir / kVocabFile);
  const fs::path metrics_path =
      config.has_value("metrics_log") ? fs::path(config.get("metrics_log")) : dir / kMetricsFile;
  std::ofstream metrics(metrics_path, std::ios::binary);
  if (!metrics) throw IoError("cannot write " + metrics_path.string());
  metrics << kMetricsHeader << '\n';

  TrainSummary summary;
  summary.num_train = train_examples.size();
  summary.num_val = val_examples.size();
  summary.num_classes = labels.size();
  summary.num_parameters = total_size(model->parameters());

  TrainLoopHooks hooks;
  hooks.on_eval = [&](const MetricsRow& row) {
    metrics << format_metrics_row(row) << '\n';
    metrics.flush();
    if (progress) {
      *progress << "step " << row.step << " train_loss " << row.train_loss << " val_micro_f1 "
                << row.val_micro_f1 << " threshold " << row.threshold << '\n';
    }
  };
  hooks.on_checkpoint = [&](std::string_view tag, const MetricsRow&) {
    const std::string name(tag);
    save_tensors(dir / (name + ".manifest"), dir / (name + ".bin"), model->parameters());
  };
  const TrainLoopResult result = train_loop(*model, train_examples, val_examples, tc, hooks);

  summary.best_step = result.best.step;
  summary.best_val_f1 = result.best.val_micro_f1;
  summary.best_threshold = result.best.threshold;
  summary.log = result.log;
  write_text(dir / kBestInfoFile,
             format_best_info({result.best.step, result.best.val_micro_f1, result.best.threshold}));
  return summary;
}

LoadedModel LoadedModel::load(const fs::path& dir, std::string_view tag) {
  if (!fs::is_directory(dir)) throw IoError("no checkpoint directory " + dir.string());
  LoadedModel loaded;
  loaded.config_ = RunConfig::from_file(dir / kConfigFile);
  loaded.labels_ = LabelSet::from_file(dir / kLabelsFile);
  const EncoderKind kind = encoder_kind(loaded.config_);
  Vocab vocab = Vocab::from_file(dir / kVocabFile);
  loaded.model_ = build_model(loaded.config_, vocab, loaded.labels_.size());
  loaded.featurizer_ = std::make_unique<Featurizer>(kind, std::move(vocab));
  const std::string name(tag);
  load_into(dir / (name + ".manifest"), dir / (name + ".bin"), loaded.model_->parameters());
  if (fs::exists(dir / kBestInfoFile)) loaded.best_ = read_best_info(dir / kBestInfoFile);
  loaded.max_len_ = train_config(loaded.config_).max_seq_len;
  return loaded;
}

EvalResult evaluate(const LoadedModel& loaded, const EvalOptions& options) {
  const std::size_t k = loaded.labels().size();
  if (options.codes) {
    const LabelSet given = LabelSet::from_file(*options.codes);
    if (given.size() != k) {
      throw ConfigError("code list " + options.codes->string() + " has K = " +
                        std::to_string(given.size()) + " codes but the checkpoint has K = " +
                        std::to_string(k));
    }
    if (given.codes() != loaded.labels().codes()) {
      throw ConfigError("code list " + options.codes->string() +
                        " differs from the checkpoint's label set");
    }
  }
  if (options.threshold && !(*options.threshold >= 0.0 && *options.threshold <= 1.0)) {
    throw ConfigError("threshold must lie in [0, 1]");
  }
  const std::vector<Note> test_notes = load_corpus(options.test_corpus);
  if (test_notes.empty()) throw ConfigError("test corpus " + options.test_corpus.string() + " is empty");

  EvalResult result;
  double threshold = loaded.best().threshold;
  result.source = ThresholdSource::kCheckpoint;
  if (options.threshold) {
    threshold = *options.threshold;
    result.source = ThresholdSource::kGiven;
  } else if (options.val_corpus) {
    const std::vector<Note> val_notes = load_corpus(*options.val_corpus);
    if (val_notes.empty()) throw ConfigError("validation corpus is empty");
    const auto val = make_examples(val_notes, loaded.featurizer(), loaded.labels());
    threshold = evaluate_validation(loaded.model(), val, loaded.max_len()).threshold;
    result.source = ThresholdSource::kValidationGrid;
  }

  std::uint64_t unknown = 0;
  const auto test = make_examples(test_notes, loaded.featurizer(), loaded.labels(), &unknown);
  result.report = evaluate_at(predict_all(loaded.model(), test, loaded.max_len()), threshold);
  result.report.unknown_codes = unknown;
  return result;
}

std::vector<std::pair<std::string, double>> predict(const LoadedModel& loaded,
                                                    std::string_view text, std::size_t top_n) {
  const auto ids = loaded.featurizer().ids(text);
  if (ids.empty()) throw ConfigError("note text is empty");
  const Tensor<float> probs = forward_truncated(loaded.model(), ids, loaded.max_len());
  std::vector<std::size_t> order(probs.numel());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto values = probs.values();
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  order.resize(std::min(top_n, order.size()));
  std::vector<std::pair<std::string, double>> ranked;
  for (const std::size_t c : order) ranked.emplace_back(loaded.labels().code(c), values[c]);
  return ranked;
}

std::vector<CdfPoint> corpus_cdf(const RunConfig& config, const fs::path& corpus) {
  if (!fs::exists(corpus)) throw ConfigError("no such corpus '" + corpus.string() + "'");
  const std::vector<Note> notes = load_corpus(corpus);
  if (notes.empty()) throw ConfigError("corpus " + corpus.string() + " is empty");
  const auto vocab_path = optional_path(config, "vocab");
  const WordPieceTokenizer tokenizer(vocab_path ? Vocab::from_file(*vocab_path)
                                                : derive_wordpiece_vocab(texts_of(notes)));
  return token_length_cdf(notes, tokenizer);
}

}  // namespace longcode::app
