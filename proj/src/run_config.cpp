#include "longcode/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "longcode/error.hpp"

namespace longcode {
namespace {

constexpr ConfigKey kKeys[] = {
    {"encoder", "transformer", "token encoder: transformer or cnn"},
    {"num_blocks", "2", "transformer blocks"},
    {"hidden", "256", "transformer hidden width d"},
    {"heads", "4", "attention heads"},
    {"intermediate", "1024", "feed-forward width"},
    {"vocab_size", "0", "embedding rows; 0 takes the vocabulary size"},
    {"max_positions", "512", "position embedding rows"},
    {"type_vocab", "2", "token type embedding rows"},
    {"include_pooler", "true", "allocate the (unused) pooler dense layer"},
    {"seg_len", "512", "segment length"},
    {"seg_stride", "0", "overlap between consecutive segments; 0 = disjoint"},
    {"segment_special_tokens", "false", "wrap every segment in [CLS] ... [SEP]"},
    {"max_seq_len", "512", "transformer input is cut to this many tokens"},
    {"cnn_embed", "100", "CNN word embedding width"},
    {"cnn_filters", "50", "CNN filters (output width d)"},
    {"cnn_kernel", "9", "CNN kernel width (odd)"},
    {"cnn_max_words", "2500", "CNN input is cut to this many words"},
    {"cnn_min_word_freq", "3", "minimum training count for a CNN vocabulary word"},
    {"lr", "2e-4", "Adam learning rate"},
    {"batch_size", "4", "examples per update"},
    {"max_steps", "200", "training updates"},
    {"eval_every", "50", "updates between validation passes"},
    {"seed", "42", "initialisation and batching seed"},
    {"val_fraction", "0.2", "share of the training corpus held out when no val_corpus is given"},
    {"corpus", "", "training corpus (JSON lines)"},
    {"val_corpus", "", "validation corpus (JSON lines)"},
    {"test_corpus", "", "test corpus (JSON lines)"},
    {"codes", "", "code list, one per line; default: codes of the training corpus"},
    {"vocab", "", "WordPiece vocabulary, one token per line; default: derived from the corpus"},
    {"checkpoint_dir", "checkpoints", "output directory for checkpoints and logs"},
    {"metrics_log", "", "metrics CSV; default: <checkpoint_dir>/metrics.csv"},
    {"synth_codes", "20", "synthetic corpus: number of codes"},
    {"synth_background", "500", "synthetic corpus: background vocabulary size"},
    {"synth_doc_min", "256", "synthetic corpus: minimum document length"},
    {"synth_doc_max", "256", "synthetic corpus: maximum document length"},
    {"synth_phrases_per_code", "1", "synthetic corpus: evidence phrases per code"},
    {"synth_phrase_len", "2", "synthetic corpus: words per evidence phrase"},
    {"synth_place_lo", "0", "synthetic corpus: first evidence position"},
    {"synth_place_hi", "256", "synthetic corpus: last evidence position"},
    {"synth_codes_min", "1", "synthetic corpus: minimum codes per note"},
    {"synth_codes_max", "3", "synthetic corpus: maximum codes per note"},
    {"synth_train", "2000", "synthetic corpus: training notes"},
    {"synth_val", "200", "synthetic corpus: validation notes"},
    {"synth_test", "200", "synthetic corpus: test notes"},
    {"synth_seed", "7", "synthetic corpus: seed"},
};

std::string trim(std::string_view s) {
  const auto not_space = [](char c) { return c != ' ' && c != '\t' && c != '\r' && c != '\n'; };
  const auto b = std::find_if(s.begin(), s.end(), not_space);
  const auto e = std::find_if(s.rbegin(), s.rend(), not_space).base();
  return b < e ? std::string(b, e) : std::string();
}

}  // namespace

std::span<const ConfigKey> config_keys() { return kKeys; }

std::string flag_name(std::string_view key) {
  std::string flag = "--";
  for (const char c : key) flag.push_back(c == '_' ? '-' : c);
  return flag;
}

std::string describe_key(std::string_view key) {
  return std::string(key) + " (" + flag_name(key) + ")";
}

RunConfig::RunConfig() {
  for (const auto& key : kKeys) values_.emplace(key.name, key.default_value);
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  RunConfig config;
  config.merge_file(path);
  return config;
}

void RunConfig::merge_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + " line " + std::to_string(line_no) +
                        ": expected key = value");
    }
    try {
      set(trim(std::string_view(body).substr(0, eq)), trim(std::string_view(body).substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void RunConfig::set(std::string_view key, std::string_view value) {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + std::string(key) + "'");
  it->second = std::string(value);
}

const std::string& RunConfig::get(std::string_view key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + std::string(key) + "'");
  return it->second;
}

std::uint64_t RunConfig::get_u64(std::string_view key) const {
  const std::string& text = get(key);
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError(describe_key(key) + ": expected a non-negative integer, got '" + text + "'");
  }
  return value;
}

std::size_t RunConfig::get_size(std::string_view key) const {
  return static_cast<std::size_t>(get_u64(key));
}

double RunConfig::get_double(std::string_view key) const {
  const std::string& text = get(key);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError(describe_key(key) + ": expected a number, got '" + text + "'");
  }
  return value;
}

bool RunConfig::get_bool(std::string_view key) const {
  const std::string& text = get(key);
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError(describe_key(key) + ": expected true or false, got '" + text + "'");
}

std::string RunConfig::dump() const {
  std::ostringstream out;
  for (const auto& key : kKeys) out << key.name << " = " << get(key.name) << '\n';
  return out.str();
}

EncoderKind encoder_kind(const RunConfig& config) {
  try {
    return parse_encoder_kind(config.get("encoder"));
  } catch (const ConfigError& e) {
    throw ConfigError(describe_key("encoder") + ": " + e.what());
  }
}

EncoderConfig encoder_config(const RunConfig& config, std::size_t vocab_size) {
  EncoderConfig enc;
  enc.num_blocks = config.get_size("num_blocks");
  enc.hidden = config.get_size("hidden");
  enc.heads = config.get_size("heads");
  enc.intermediate = config.get_size("intermediate");
  const std::size_t configured = config.get_size("vocab_size");
  if (configured != 0 && configured < vocab_size) {
    throw ConfigError(describe_key("vocab_size") + " is " + std::to_string(configured) +
                      " but the vocabulary has " + std::to_string(vocab_size) + " tokens");
  }
  enc.vocab_size = configured != 0 ? configured : vocab_size;
  enc.max_positions = config.get_size("max_positions");
  enc.type_vocab = config.get_size("type_vocab");
  enc.seg_len = config.get_size("seg_len");
  enc.include_pooler = config.get_bool("include_pooler");
  enc.validate();
  return enc;
}

CnnConfig cnn_config(const RunConfig& config, std::size_t vocab_size) {
  CnnConfig cnn;
  cnn.embed = config.get_size("cnn_embed");
  cnn.filters = config.get_size("cnn_filters");
  cnn.kernel = config.get_size("cnn_kernel");
  cnn.max_words = config.get_size("cnn_max_words");
  cnn.vocab_size = vocab_size;
  cnn.validate();
  return cnn;
}

TrainConfig train_config(const RunConfig& config) {
  TrainConfig train;
  train.lr = config.get_double("lr");
  train.batch_size = config.get_size("batch_size");
  train.max_steps = config.get_size("max_steps");
  train.eval_every = config.get_size("eval_every");
  train.max_seq_len = encoder_kind(config) == EncoderKind::kCnn ? config.get_size("cnn_max_words")
                                                                 : config.get_size("max_seq_len");
  train.seed = config.get_u64("seed");
  train.validate();
  return train;
}

SyntheticSpec synthetic_spec(const RunConfig& config) {
  SyntheticSpec spec;
  spec.num_codes = config.get_size("synth_codes");
  spec.background_vocab = config.get_size("synth_background");
  spec.doc_len_min = config.get_size("synth_doc_min");
  spec.doc_len_max = config.get_size("synth_doc_max");
  spec.phrases_per_code = config.get_size("synth_phrases_per_code");
  spec.phrase_len = config.get_size("synth_phrase_len");
  spec.place_lo = config.get_size("synth_place_lo");
  spec.place_hi = config.get_size("synth_place_hi");
  spec.codes_per_note_min = config.get_size("synth_codes_min");
  spec.codes_per_note_max = config.get_size("synth_codes_max");
  spec.train_notes = config.get_size("synth_train");
  spec.val_notes = config.get_size("synth_val");
  spec.test_notes = config.get_size("synth_test");
  spec.seed = config.get_u64("synth_seed");
  spec.validate();
  return spec;
}

}  // namespace longcode
