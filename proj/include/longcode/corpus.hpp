#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "longcode/labels.hpp"
#include "longcode/tokenizer.hpp"

namespace longcode {

struct Note {
  std::string note_id;
  std::string text;
  std::vector<std::string> codes;

  friend bool operator==(const Note&, const Note&) = default;
};

// Ordered code vocabulary; index order is lexicographic over code strings.
class LabelSet {
 public:
  LabelSet() = default;
  explicit LabelSet(std::vector<std::string> codes);

  static LabelSet from_notes(std::span<const Note> notes);
  // One code per line.
  static LabelSet from_file(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  std::size_t size() const { return codes_.size(); }
  const std::vector<std::string>& codes() const { return codes_; }
  const std::string& code(std::size_t index) const { return codes_.at(index); }
  std::optional<std::uint32_t> find(std::string_view code) const;

  // Sparse label vector for `codes`; codes outside the set are skipped and
  // added to `*unknown` when given.
  SparseLabels encode(std::span<const std::string> codes, std::uint64_t* unknown = nullptr) const;

 private:
  std::vector<std::string> codes_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

// Line-delimited JSON, one {"note_id", "text", "codes"} object per line.
// Blank lines are skipped; malformed lines raise FormatError naming the
// 1-based line number; duplicate note ids are rejected.
std::vector<Note> load_corpus(const std::filesystem::path& path);
void write_corpus(const std::filesystem::path& path, std::span<const Note> notes);

// Deterministically moves roughly `fraction` of the notes (at least one) to
// the second half of the returned pair.
std::pair<std::vector<Note>, std::vector<Note>> split_holdout(std::vector<Note> notes,
                                                              double fraction,
                                                              std::uint64_t seed);

struct CdfPoint {
  std::size_t length = 0;
  double fraction = 0.0;
};

// Empirical CDF of WordPiece token counts per note, one point per distinct
// length.
std::vector<CdfPoint> token_length_cdf(std::span<const Note> notes,
                                       const WordPieceTokenizer& tokenizer);
// Two tab-separated columns: length, cumulative fraction.
std::string format_cdf(std::span<const CdfPoint> cdf);

struct SyntheticSpec {
  std::size_t num_codes = 20;
  std::size_t background_vocab = 500;
  std::size_t doc_len_min = 256;
  std::size_t doc_len_max = 256;
  std::size_t phrases_per_code = 1;
  std::size_t phrase_len = 2;
  std::size_t place_lo = 0;
  std::size_t place_hi = 256;
  std::size_t codes_per_note_min = 1;
  std::size_t codes_per_note_max = 3;
  std::size_t train_notes = 2000;
  std::size_t val_notes = 200;
  std::size_t test_notes = 200;
  std::uint64_t seed = 7;

  void validate() const;
};

struct SyntheticCorpus {
  std::vector<Note> train, val, test;
  std::vector<std::string> codes;                          // sorted
  std::map<std::string, std::vector<std::string>> evidence;  // code -> phrases
  std::vector<std::string> vocab_tokens;                   // WordPiece vocab, [PAD] first
};

// Filler words drawn uniformly from a background vocabulary; for each
// assigned code, one of its phrases overwrites the document starting at a
// position uniform in [place_lo, min(place_hi, length - phrase_len)]
// (phrases never overlap). Evidence words never occur as filler.
SyntheticCorpus generate_synthetic(const SyntheticSpec& spec);

// Writes train.jsonl, val.jsonl, test.jsonl, codes.txt, vocab.txt and
// evidence.tsv (code<TAB>phrase) into `dir`.
void write_synthetic(const SyntheticCorpus& corpus, const std::filesystem::path& dir);

// Exact-match classifier over the evidence phrases; recovers synthetic
// labels perfectly.
std::vector<std::string> oracle_codes(const SyntheticCorpus& corpus, std::string_view text);

}  // namespace longcode
