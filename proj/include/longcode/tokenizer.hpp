#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "longcode/ops.hpp"

namespace longcode {

inline constexpr std::string_view kPadToken = "[PAD]";
inline constexpr std::string_view kUnkToken = "[UNK]";
inline constexpr std::string_view kClsToken = "[CLS]";
inline constexpr std::string_view kSepToken = "[SEP]";

// Token <-> id map. The token on line/index 0 must be [PAD]; [UNK] must be
// present somewhere.
class Vocab {
 public:
  explicit Vocab(std::vector<std::string> tokens);

  // One token per line, line number = id.
  static Vocab from_file(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  std::size_t size() const { return tokens_.size(); }
  std::optional<TokenId> find(std::string_view token) const;
  const std::string& token(TokenId id) const;
  const std::vector<std::string>& tokens() const { return tokens_; }

  TokenId pad_id() const { return 0; }
  TokenId unk_id() const { return unk_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> ids_;
  TokenId unk_ = 0;
};

// Token ids plus the real length s; ids[s:] are padding.
struct TokenSequence {
  std::vector<TokenId> ids;
  std::size_t length = 0;
};

// Lowercase, split on whitespace, split ASCII punctuation into separate
// tokens, drop control characters.
std::vector<std::string> basic_split(std::string_view text);

class WordPieceTokenizer {
 public:
  static constexpr std::size_t kMaxCharsPerWord = 100;

  explicit WordPieceTokenizer(Vocab vocab) : vocab_(std::move(vocab)) {}

  TokenSequence tokenize(std::string_view text) const;
  // Greedy longest-match-first pieces of one pre-split word.
  std::vector<TokenId> wordpiece(std::string_view word) const;
  // Joins pieces, gluing "##" continuations onto the previous piece.
  std::string detokenize(std::span<const TokenId> ids) const;

  const Vocab& vocab() const { return vocab_; }

 private:
  Vocab vocab_;
};

// Number of seg_len windows covering s tokens; 1 for an empty sequence.
std::size_t segment_count(std::size_t length, std::size_t seg_len);

// Pads with [PAD] (id 0) to segment_count(s) * seg_len, keeping the first s
// ids untouched.
TokenSequence pad_to_multiple(TokenSequence seq, std::size_t seg_len);

// Vocabulary derived from raw texts when no WordPiece vocabulary file is
// supplied: special tokens, every word seen at least `min_count` times
// (by descending count, then lexicographic), then each single character as
// a word-initial and "##" piece so nothing degrades past the character level.
Vocab derive_wordpiece_vocab(std::span<const std::string> texts, std::size_t min_count = 1);

// Whole-word vocabulary ([PAD], [UNK], then words seen >= min_count times,
// lexicographic) for the convolutional encoder.
Vocab build_word_vocab(std::span<const std::string> texts, std::size_t min_count);

// Word ids of `text` under a whole-word vocabulary (unknown -> [UNK]).
std::vector<TokenId> word_ids(const Vocab& vocab, std::string_view text);

}  // namespace longcode
