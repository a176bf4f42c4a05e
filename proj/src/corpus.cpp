#include "longcode/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "longcode/error.hpp"

namespace longcode {
namespace {

using ordered_json = nlohmann::ordered_json;

std::string field_error(const std::filesystem::path& path, std::size_t line_no,
                        const std::string& what) {
  return path.string() + " line " + std::to_string(line_no) + ": " + what;
}

Note parse_note(const std::string& line, const std::filesystem::path& path, std::size_t line_no) {
  ordered_json obj;
  try {
    obj = ordered_json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(field_error(path, line_no, std::string("invalid JSON: ") + e.what()));
  }
  if (!obj.is_object()) throw FormatError(field_error(path, line_no, "expected a JSON object"));
  Note note;
  const auto id = obj.find("note_id");
  if (id == obj.end() || !id->is_string()) {
    throw FormatError(field_error(path, line_no, "missing string field 'note_id'"));
  }
  const auto text = obj.find("text");
  if (text == obj.end() || !text->is_string()) {
    throw FormatError(field_error(path, line_no, "missing string field 'text'"));
  }
  const auto codes = obj.find("codes");
  if (codes == obj.end() || !codes->is_array()) {
    throw FormatError(field_error(path, line_no, "missing array field 'codes'"));
  }
  note.note_id = id->get<std::string>();
  note.text = text->get<std::string>();
  for (const auto& c : *codes) {
    if (!c.is_string()) throw FormatError(field_error(path, line_no, "codes must be strings"));
    note.codes.push_back(c.get<std::string>());
  }
  return note;
}

// Pronounceable pseudo-words: 2-3 consonant-vowel syllables.
std::string pseudo_word(std::mt19937_64& rng) {
  static constexpr std::string_view kConsonants = "bdfgklmnprstvz";
  static constexpr std::string_view kVowels = "aeiou";
  std::uniform_int_distribution<std::size_t> syllables(2, 3);
  std::uniform_int_distribution<std::size_t> cons(0, kConsonants.size() - 1);
  std::uniform_int_distribution<std::size_t> vow(0, kVowels.size() - 1);
  std::string word;
  const std::size_t n = syllables(rng);
  for (std::size_t i = 0; i < n; ++i) {
    word.push_back(kConsonants[cons(rng)]);
    word.push_back(kVowels[vow(rng)]);
  }
  return word;
}

std::string padded_number(std::size_t value, std::size_t width) {
  std::string s = std::to_string(value);
  if (s.size() < width) s.insert(0, width - s.size(), '0');
  return s;
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::istringstream in{std::string(text)};
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

}  // namespace

LabelSet::LabelSet(std::vector<std::string> codes) : codes_(std::move(codes)) {
  std::sort(codes_.begin(), codes_.end());
  codes_.erase(std::unique(codes_.begin(), codes_.end()), codes_.end());
  for (std::size_t i = 0; i < codes_.size(); ++i) {
    index_.emplace(codes_[i], static_cast<std::uint32_t>(i));
  }
}

LabelSet LabelSet::from_notes(std::span<const Note> notes) {
  std::vector<std::string> codes;
  for (const auto& n : notes) codes.insert(codes.end(), n.codes.begin(), n.codes.end());
  return LabelSet(std::move(codes));
}

LabelSet LabelSet::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open code list " + path.string());
  std::vector<std::string> codes;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) codes.push_back(line);
  }
  return LabelSet(std::move(codes));
}

void LabelSet::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write code list " + path.string());
  for (const auto& c : codes_) out << c << '\n';
}

std::optional<std::uint32_t> LabelSet::find(std::string_view code) const {
  const auto it = index_.find(std::string(code));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

SparseLabels LabelSet::encode(std::span<const std::string> codes, std::uint64_t* unknown) const {
  std::vector<std::uint32_t> out;
  for (const auto& c : codes) {
    if (const auto idx = find(c)) {
      out.push_back(*idx);
    } else if (unknown) {
      ++*unknown;
    }
  }
  return make_sparse_labels(std::move(out), size());
}

std::vector<Note> load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus " + path.string());
  std::vector<Note> notes;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Note note = parse_note(line, path, line_no);
    if (!ids.insert(note.note_id).second) {
      throw FormatError(field_error(path, line_no, "duplicate note_id '" + note.note_id + "'"));
    }
    notes.push_back(std::move(note));
  }
  return notes;
}

void write_corpus(const std::filesystem::path& path, std::span<const Note> notes) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw IoError("cannot write corpus " + path.string());
  for (const auto& n : notes) {
    ordered_json obj;
    obj["note_id"] = n.note_id;
    obj["text"] = n.text;
    obj["codes"] = n.codes;
    out << obj.dump() << '\n';
  }
  if (!out) throw IoError("short write to " + path.string());
}

std::pair<std::vector<Note>, std::vector<Note>> split_holdout(std::vector<Note> notes,
                                                              double fraction,
                                                              std::uint64_t seed) {
  if (notes.size() < 2) {
    throw ConfigError("need at least 2 notes to carve out a validation split, got " +
                      std::to_string(notes.size()));
  }
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ConfigError("val_fraction must be in (0, 1)");
  }
  const std::size_t n = notes.size();
  std::size_t n_val = static_cast<std::size_t>(fraction * static_cast<double>(n) + 0.5);
  n_val = std::clamp<std::size_t>(n_val, 1, n - 1);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<bool> is_val(n, false);
  for (std::size_t i = 0; i < n_val; ++i) is_val[order[i]] = true;
  std::pair<std::vector<Note>, std::vector<Note>> out;
  for (std::size_t i = 0; i < n; ++i) {
    (is_val[i] ? out.second : out.first).push_back(std::move(notes[i]));
  }
  return out;
}

std::vector<CdfPoint> token_length_cdf(std::span<const Note> notes,
                                       const WordPieceTokenizer& tokenizer) {
  if (notes.empty()) throw ConfigError("token length CDF of an empty corpus");
  std::vector<std::size_t> lengths;
  lengths.reserve(notes.size());
  for (const auto& n : notes) lengths.push_back(tokenizer.tokenize(n.text).length);
  std::sort(lengths.begin(), lengths.end());
  std::vector<CdfPoint> cdf;
  const double total = static_cast<double>(lengths.size());
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    if (i + 1 < lengths.size() && lengths[i + 1] == lengths[i]) continue;
    cdf.push_back({lengths[i], static_cast<double>(i + 1) / total});
  }
  return cdf;
}

std::string format_cdf(std::span<const CdfPoint> cdf) {
  std::string out = "length\tcdf\n";
  char buf[64];
  for (const auto& p : cdf) {
    std::snprintf(buf, sizeof buf, "%zu\t%.6f\n", p.length, p.fraction);
    out += buf;
  }
  return out;
}

void SyntheticSpec::validate() const {
  if (num_codes == 0) throw ConfigError("synth_codes must be >= 1");
  if (background_vocab == 0) throw ConfigError("synth_background must be >= 1");
  if (phrases_per_code == 0 || phrase_len == 0) {
    throw ConfigError("synth_phrases_per_code and synth_phrase_len must be >= 1");
  }
  if (doc_len_min > doc_len_max) throw ConfigError("synth_doc_min exceeds synth_doc_max");
  if (place_lo > place_hi) throw ConfigError("synth_place_lo exceeds synth_place_hi");
  if (place_hi > doc_len_max) {
    throw ConfigError("synth_place_hi (" + std::to_string(place_hi) +
                      ") exceeds the maximum document length (" + std::to_string(doc_len_max) + ")");
  }
  if (codes_per_note_min > codes_per_note_max || codes_per_note_max > num_codes) {
    throw ConfigError("codes per note range must satisfy min <= max <= synth_codes");
  }
  if (place_lo + codes_per_note_max * phrase_len > doc_len_min) {
    throw ConfigError("documents of length " + std::to_string(doc_len_min) + " cannot hold " +
                      std::to_string(codes_per_note_max) + " phrases starting at " +
                      std::to_string(place_lo));
  }
}

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);

  std::set<std::string> used;
  auto fresh_word = [&] {
    for (;;) {
      std::string w = pseudo_word(rng);
      if (used.insert(w).second) return w;
    }
  };
  std::vector<std::string> background(spec.background_vocab);
  for (auto& w : background) w = fresh_word();

  SyntheticCorpus corpus;
  const std::size_t width = std::max<std::size_t>(2, std::to_string(spec.num_codes - 1).size());
  std::vector<std::vector<std::vector<std::string>>> phrases(spec.num_codes);
  std::vector<std::string> evidence_words;
  for (std::size_t c = 0; c < spec.num_codes; ++c) {
    const std::string code = "C" + padded_number(c, width);
    corpus.codes.push_back(code);
    for (std::size_t p = 0; p < spec.phrases_per_code; ++p) {
      std::vector<std::string> phrase(spec.phrase_len);
      for (auto& w : phrase) {
        w = fresh_word();
        evidence_words.push_back(w);
      }
      std::string joined;
      for (const auto& w : phrase) joined += (joined.empty() ? "" : " ") + w;
      corpus.evidence[code].push_back(joined);
      phrases[c].push_back(std::move(phrase));
    }
  }

  std::uniform_int_distribution<std::size_t> pick_background(0, background.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_length(spec.doc_len_min, spec.doc_len_max);
  std::uniform_int_distribution<std::size_t> pick_count(spec.codes_per_note_min,
                                                        spec.codes_per_note_max);
  std::uniform_int_distribution<std::size_t> pick_phrase(0, spec.phrases_per_code - 1);

  auto make_note = [&](const std::string& id) {
    const std::size_t n = pick_length(rng);
    std::vector<std::string> words(n);
    for (auto& w : words) w = background[pick_background(rng)];

    std::vector<std::size_t> classes(spec.num_codes);
    std::iota(classes.begin(), classes.end(), std::size_t{0});
    const std::size_t m = pick_count(rng);
    for (std::size_t i = 0; i < m; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, classes.size() - 1);
      std::swap(classes[i], classes[pick(rng)]);
    }
    classes.resize(m);
    std::sort(classes.begin(), classes.end());

    std::vector<bool> occupied(n, false);
    const std::size_t last_start = n - spec.phrase_len;
    const std::size_t hi = std::min(spec.place_hi, last_start);
    Note note{id, {}, {}};
    for (const std::size_t c : classes) {
      const auto& phrase = phrases[c][pick_phrase(rng)];
      std::uniform_int_distribution<std::size_t> pick_pos(spec.place_lo, hi);
      const std::size_t want = pick_pos(rng);
      auto fits = [&](std::size_t pos) {
        for (std::size_t j = 0; j < spec.phrase_len; ++j)
          if (occupied[pos + j]) return false;
        return true;
      };
      // First free slot at or after the drawn position, else before it;
      // inside [place_lo, hi] when possible, otherwise just outside it.
      std::optional<std::size_t> pos;
      for (std::size_t p = want; p <= hi && !pos; ++p)
        if (fits(p)) pos = p;
      for (std::size_t p = want; p-- > spec.place_lo && !pos;)
        if (fits(p)) pos = p;
      for (std::size_t p = hi + 1; p <= last_start && !pos; ++p)
        if (fits(p)) pos = p;
      for (std::size_t p = spec.place_lo; p-- > 0 && !pos;)
        if (fits(p)) pos = p;
      if (!pos) throw ConfigError("no room to place evidence in note " + id);
      for (std::size_t j = 0; j < spec.phrase_len; ++j) {
        words[*pos + j] = phrase[j];
        occupied[*pos + j] = true;
      }
      note.codes.push_back(corpus.codes[c]);
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (i) note.text.push_back(' ');
      note.text += words[i];
    }
    return note;
  };

  auto make_split = [&](const char* prefix, std::size_t count, std::vector<Note>& out) {
    const std::size_t w = std::max<std::size_t>(5, std::to_string(count).size());
    for (std::size_t i = 0; i < count; ++i) {
      out.push_back(make_note(std::string(prefix) + "-" + padded_number(i, w)));
    }
  };
  make_split("train", spec.train_notes, corpus.train);
  make_split("val", spec.val_notes, corpus.val);
  make_split("test", spec.test_notes, corpus.test);

  corpus.vocab_tokens = {std::string(kPadToken), std::string(kUnkToken), std::string(kClsToken),
                         std::string(kSepToken), "[MASK]"};
  std::vector<std::string> sorted_background = background;
  std::sort(sorted_background.begin(), sorted_background.end());
  std::sort(evidence_words.begin(), evidence_words.end());
  corpus.vocab_tokens.insert(corpus.vocab_tokens.end(), sorted_background.begin(),
                             sorted_background.end());
  corpus.vocab_tokens.insert(corpus.vocab_tokens.end(), evidence_words.begin(),
                             evidence_words.end());
  return corpus;
}

void write_synthetic(const SyntheticCorpus& corpus, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  write_corpus(dir / "train.jsonl", corpus.train);
  write_corpus(dir / "val.jsonl", corpus.val);
  write_corpus(dir / "test.jsonl", corpus.test);
  LabelSet(corpus.codes).save(dir / "codes.txt");
  Vocab(corpus.vocab_tokens).save(dir / "vocab.txt");
  std::ofstream ev(dir / "evidence.tsv", std::ios::trunc);
  if (!ev) throw IoError("cannot write " + (dir / "evidence.tsv").string());
  for (const auto& [code, list] : corpus.evidence)
    for (const auto& phrase : list) ev << code << '\t' << phrase << '\n';
}

std::vector<std::string> oracle_codes(const SyntheticCorpus& corpus, std::string_view text) {
  const auto words = split_words(text);
  std::vector<std::string> found;
  for (const auto& [code, list] : corpus.evidence) {
    bool hit = false;
    for (const auto& phrase : list) {
      const auto needle = split_words(phrase);
      hit = std::search(words.begin(), words.end(), needle.begin(), needle.end()) != words.end();
      if (hit) break;
    }
    if (hit) found.push_back(code);
  }
  return found;
}

}  // namespace longcode
