#include "longcode/tokenizer.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "longcode/error.hpp"

namespace longcode {
namespace {

bool is_ascii_punct(unsigned char c) {
  return (c >= 33 && c <= 47) || (c >= 58 && c <= 64) || (c >= 91 && c <= 96) ||
         (c >= 123 && c <= 126);
}

bool is_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

bool is_control(unsigned char c) { return c < 32 || c == 127; }

// Byte offsets of UTF-8 code point starts, plus a final end offset.
std::vector<std::size_t> codepoint_offsets(std::string_view word) {
  std::vector<std::size_t> offsets;
  for (std::size_t i = 0; i < word.size(); ++i) {
    const auto c = static_cast<unsigned char>(word[i]);
    if ((c & 0xC0u) != 0x80u) offsets.push_back(i);
  }
  offsets.push_back(word.size());
  return offsets;
}

}  // namespace

Vocab::Vocab(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  if (tokens_.empty() || tokens_[0] != kPadToken) {
    throw FormatError("vocabulary must start with " + std::string(kPadToken) + " at id 0");
  }
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!ids_.emplace(tokens_[i], static_cast<TokenId>(i)).second) {
      throw FormatError("vocabulary lists '" + tokens_[i] + "' twice (id " + std::to_string(i) +
                        ")");
    }
  }
  const auto unk = ids_.find(std::string(kUnkToken));
  if (unk == ids_.end()) {
    throw FormatError("vocabulary has no " + std::string(kUnkToken) + " token");
  }
  unk_ = unk->second;
}

Vocab Vocab::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open vocabulary " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  return Vocab(std::move(tokens));
}

void Vocab::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write vocabulary " + path.string());
  for (const auto& t : tokens_) out << t << '\n';
}

std::optional<TokenId> Vocab::find(std::string_view token) const {
  const auto it = ids_.find(std::string(token));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

const std::string& Vocab::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw IndexError("token id " + std::to_string(id) + " out of range for vocabulary of " +
                     std::to_string(tokens_.size()));
  }
  return tokens_[static_cast<std::size_t>(id)];
}

std::vector<std::string> basic_split(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) words.push_back(std::move(current));
    current.clear();
  };
  for (const char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_space(c)) {
      flush();
    } else if (is_control(c)) {
      continue;
    } else if (is_ascii_punct(c)) {
      flush();
      words.emplace_back(1, ch);
    } else if (c < 128) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else {
      current.push_back(ch);
    }
  }
  flush();
  return words;
}

std::vector<TokenId> WordPieceTokenizer::wordpiece(std::string_view word) const {
  const auto offsets = codepoint_offsets(word);
  const std::size_t chars = offsets.size() - 1;
  if (chars > kMaxCharsPerWord) return {vocab_.unk_id()};

  std::vector<TokenId> pieces;
  std::size_t start = 0;
  std::string candidate;
  while (start < chars) {
    std::size_t end = chars;
    std::optional<TokenId> match;
    while (end > start) {
      candidate.assign(start > 0 ? "##" : "");
      candidate.append(word.substr(offsets[start], offsets[end] - offsets[start]));
      match = vocab_.find(candidate);
      if (match) break;
      --end;
    }
    if (!match) return {vocab_.unk_id()};
    pieces.push_back(*match);
    start = end;
  }
  return pieces;
}

TokenSequence WordPieceTokenizer::tokenize(std::string_view text) const {
  TokenSequence seq;
  for (const auto& word : basic_split(text)) {
    const auto pieces = wordpiece(word);
    seq.ids.insert(seq.ids.end(), pieces.begin(), pieces.end());
  }
  seq.length = seq.ids.size();
  return seq;
}

std::string WordPieceTokenizer::detokenize(std::span<const TokenId> ids) const {
  std::string out;
  for (const TokenId id : ids) {
    const std::string& tok = vocab_.token(id);
    if (tok.starts_with("##")) {
      out.append(tok, 2);
    } else {
      if (!out.empty()) out.push_back(' ');
      out.append(tok);
    }
  }
  return out;
}

std::size_t segment_count(std::size_t length, std::size_t seg_len) {
  if (seg_len == 0) throw ConfigError("segment length must be >= 1");
  if (length == 0) return 1;
  return (length + seg_len - 1) / seg_len;
}

TokenSequence pad_to_multiple(TokenSequence seq, std::size_t seg_len) {
  const std::size_t padded = segment_count(seq.length, seg_len) * seg_len;
  seq.ids.resize(seq.length);
  seq.ids.resize(padded, 0);
  return seq;
}

Vocab derive_wordpiece_vocab(std::span<const std::string> texts, std::size_t min_count) {
  std::map<std::string, std::size_t> counts;
  std::set<std::string> chars;
  for (const auto& text : texts) {
    for (auto& word : basic_split(text)) {
      const auto offsets = codepoint_offsets(word);
      for (std::size_t i = 0; i + 1 < offsets.size(); ++i) {
        chars.insert(word.substr(offsets[i], offsets[i + 1] - offsets[i]));
      }
      ++counts[std::move(word)];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> words(counts.begin(), counts.end());
  std::stable_sort(words.begin(), words.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  std::vector<std::string> tokens{std::string(kPadToken), std::string(kUnkToken),
                                  std::string(kClsToken), std::string(kSepToken)};
  std::set<std::string> seen(tokens.begin(), tokens.end());
  auto push = [&](std::string t) {
    if (seen.insert(t).second) tokens.push_back(std::move(t));
  };
  for (auto& [word, count] : words) {
    if (count >= min_count) push(word);
  }
  for (const auto& c : chars) push(c);
  for (const auto& c : chars) push("##" + c);
  return Vocab(std::move(tokens));
}

Vocab build_word_vocab(std::span<const std::string> texts, std::size_t min_count) {
  std::map<std::string, std::size_t> counts;
  for (const auto& text : texts) {
    for (auto& word : basic_split(text)) ++counts[std::move(word)];
  }
  std::vector<std::string> tokens{std::string(kPadToken), std::string(kUnkToken)};
  for (const auto& [word, count] : counts) {
    if (count >= min_count && word != kPadToken && word != kUnkToken) tokens.push_back(word);
  }
  return Vocab(std::move(tokens));
}

std::vector<TokenId> word_ids(const Vocab& vocab, std::string_view text) {
  std::vector<TokenId> ids;
  for (const auto& word : basic_split(text)) ids.push_back(vocab.find(word).value_or(vocab.unk_id()));
  return ids;
}

}  // namespace longcode
