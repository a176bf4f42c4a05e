#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>

#include "longcode/corpus.hpp"
#include "longcode/encoder_cnn.hpp"
#include "longcode/encoder_transformer.hpp"
#include "longcode/model.hpp"
#include "longcode/training.hpp"

namespace longcode {

struct ConfigKey {
  std::string_view name;
  std::string_view default_value;
  std::string_view help;
};

// Every recognised key, in dump order.
std::span<const ConfigKey> config_keys();

// `corpus` -> `--corpus`, `seg_len` -> `--seg-len`.
std::string flag_name(std::string_view key);

// Flat key/value run configuration. Every key always has a value (its
// default until set), so dump() is the fully resolved configuration.
class RunConfig {
 public:
  RunConfig();

  // Plain text: `key = value` per line, `#` starts a comment.
  static RunConfig from_file(const std::filesystem::path& path);
  void merge_file(const std::filesystem::path& path);

  void set(std::string_view key, std::string_view value);
  const std::string& get(std::string_view key) const;
  bool has_value(std::string_view key) const { return !get(key).empty(); }

  std::size_t get_size(std::string_view key) const;
  std::uint64_t get_u64(std::string_view key) const;
  double get_double(std::string_view key) const;
  bool get_bool(std::string_view key) const;

  std::string dump() const;

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

// "key (--flag)", used in every error message about a key.
std::string describe_key(std::string_view key);

EncoderKind encoder_kind(const RunConfig& config);
EncoderConfig encoder_config(const RunConfig& config, std::size_t vocab_size);
CnnConfig cnn_config(const RunConfig& config, std::size_t vocab_size);
// max_seq_len becomes cnn_max_words for the convolutional encoder.
TrainConfig train_config(const RunConfig& config);
SyntheticSpec synthetic_spec(const RunConfig& config);

}  // namespace longcode
