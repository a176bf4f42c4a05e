#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "longcode/corpus.hpp"
#include "longcode/error.hpp"

namespace longcode {
namespace {
namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("longcode_corpus_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string repeat_word(std::size_t n) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) out += i ? " w" : "w";
  return out;
}

SyntheticSpec small_spec() {
  SyntheticSpec s;
  s.num_codes = 6;
  s.background_vocab = 40;
  s.doc_len_min = 30;
  s.doc_len_max = 50;
  s.place_lo = 5;
  s.place_hi = 25;
  s.train_notes = 40;
  s.val_notes = 10;
  s.test_notes = 10;
  return s;
}

TEST(LoadCorpus, EmptyFileGivesEmptyCorpus) {
  const auto dir = scratch("empty");
  write_file(dir / "e.jsonl", "");
  const auto notes = load_corpus(dir / "e.jsonl");
  EXPECT_TRUE(notes.empty());
  EXPECT_EQ(LabelSet::from_notes(notes).size(), 0u);
}

TEST(LoadCorpus, LabelsAreLexicographic) {
  const auto dir = scratch("two");
  write_file(dir / "t.jsonl",
             "{\"note_id\":\"n1\",\"text\":\"x\",\"codes\":[\"B\"]}\n"
             "{\"note_id\":\"n2\",\"text\":\"y\",\"codes\":[\"A\",\"B\"]}\n");
  const auto labels = LabelSet::from_notes(load_corpus(dir / "t.jsonl"));
  ASSERT_EQ(labels.size(), 2u);
  EXPECT_EQ(labels.find("A"), 0u);
  EXPECT_EQ(labels.find("B"), 1u);
}

TEST(LoadCorpus, MalformedLineNamesLineNumber) {
  const auto dir = scratch("bad");
  write_file(dir / "b.jsonl",
             "{\"note_id\":\"n1\",\"text\":\"x\",\"codes\":[]}\n"
             "\n"
             "{\"note_id\":\"n2\",\"text\":\"y\",\"codes\":[\"A\"\n");
  try {
    load_corpus(dir / "b.jsonl");
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(LoadCorpus, MissingFieldAndDuplicateIdRejected) {
  const auto dir = scratch("fields");
  write_file(dir / "m.jsonl", "{\"note_id\":\"n1\",\"codes\":[]}\n");
  EXPECT_THROW(load_corpus(dir / "m.jsonl"), FormatError);
  write_file(dir / "d.jsonl",
             "{\"note_id\":\"n1\",\"text\":\"a\",\"codes\":[]}\n"
             "{\"note_id\":\"n1\",\"text\":\"b\",\"codes\":[]}\n");
  EXPECT_THROW(load_corpus(dir / "d.jsonl"), FormatError);
  EXPECT_THROW(load_corpus(dir / "absent.jsonl"), IoError);
}

TEST(LoadCorpus, RoundTripIsByteExact) {
  const auto dir = scratch("roundtrip");
  const std::vector<Note> notes{
      {"a", "Fever \"quoted\" \\ and unicode: caf\xc3\xa9 \xe2\x9c\x93", {"Z1", "A.2"}},
      {"b", "", {}},
      {"c", "tab\there\nnewline", {"401.9"}}};
  write_corpus(dir / "r.jsonl", notes);
  const auto back = load_corpus(dir / "r.jsonl");
  EXPECT_EQ(back, notes);
  write_corpus(dir / "r2.jsonl", back);
  EXPECT_EQ(read_file(dir / "r.jsonl"), read_file(dir / "r2.jsonl"));
}

TEST(LoadCorpus, ToyFixture) {
  const auto notes = load_corpus(fs::path(LONGCODE_TEST_DATA) / "toy.jsonl");
  EXPECT_EQ(notes.size(), 20u);
  EXPECT_EQ(LabelSet::from_notes(notes).size(), 5u);
}

TEST(LabelSet, EncodeCountsUnknownCodes) {
  const LabelSet labels({"B", "A", "C", "A"});
  EXPECT_EQ(labels.codes(), (std::vector<std::string>{"A", "B", "C"}));
  std::uint64_t unknown = 0;
  const std::vector<std::string> codes{"C", "X", "A", "Y", "C"};
  EXPECT_EQ(labels.encode(codes, &unknown), (SparseLabels{0, 2}));
  EXPECT_EQ(unknown, 2u);
}

TEST(LabelSet, FileRoundTrip) {
  const auto dir = scratch("labels");
  const LabelSet labels({"10", "9", "A"});
  labels.save(dir / "codes.txt");
  EXPECT_EQ(LabelSet::from_file(dir / "codes.txt").codes(), labels.codes());
}

TEST(SplitHoldout, DisjointCompleteAndDeterministic) {
  std::vector<Note> notes;
  for (int i = 0; i < 30; ++i) notes.push_back({"n" + std::to_string(i), "t", {}});
  const auto [train, val] = split_holdout(notes, 0.2, 5);
  EXPECT_EQ(val.size(), 6u);
  EXPECT_EQ(train.size() + val.size(), 30u);
  std::set<std::string> ids;
  for (const auto& n : train) ids.insert(n.note_id);
  for (const auto& n : val) EXPECT_FALSE(ids.contains(n.note_id));
  EXPECT_EQ(split_holdout(notes, 0.2, 5), std::make_pair(train, val));
  EXPECT_THROW(split_holdout({notes[0]}, 0.5, 1), ConfigError);
}

TEST(TokenLengthCdf, SingleNote) {
  const std::vector<Note> notes{{"a", repeat_word(100), {}}};
  const WordPieceTokenizer tok(Vocab({"[PAD]", "[UNK]", "w"}));
  const auto cdf = token_length_cdf(notes, tok);
  ASSERT_EQ(cdf.size(), 1u);
  EXPECT_EQ(cdf[0].length, 100u);
  EXPECT_DOUBLE_EQ(cdf[0].fraction, 1.0);
}

TEST(TokenLengthCdf, HandCount) {
  const std::vector<Note> notes{{"a", repeat_word(10), {}},
                                {"b", repeat_word(20), {}},
                                {"c", repeat_word(20), {}},
                                {"d", repeat_word(40), {}}};
  const WordPieceTokenizer tok(Vocab({"[PAD]", "[UNK]", "w"}));
  const auto cdf = token_length_cdf(notes, tok);
  ASSERT_EQ(cdf.size(), 3u);
  EXPECT_EQ(cdf[1].length, 20u);
  EXPECT_DOUBLE_EQ(cdf[1].fraction, 0.75);
  EXPECT_EQ(format_cdf(cdf), "length\tcdf\n10\t0.250000\n20\t0.750000\n40\t1.000000\n");
}

TEST(TokenLengthCdf, MonotoneOnRandomCorpus) {
  const auto corpus = generate_synthetic(small_spec());
  const WordPieceTokenizer tok{Vocab(corpus.vocab_tokens)};
  const auto cdf = token_length_cdf(corpus.train, tok);
  for (std::size_t i = 1; i < cdf.size(); ++i) {
    EXPECT_LT(cdf[i - 1].length, cdf[i].length);
    EXPECT_LE(cdf[i - 1].fraction, cdf[i].fraction);
  }
  EXPECT_DOUBLE_EQ(cdf.back().fraction, 1.0);
  EXPECT_THROW(token_length_cdf({}, tok), ConfigError);
}

TEST(Synthetic, LabelsAreExactlyThePlantedCodes) {
  const auto spec = small_spec();
  const auto corpus = generate_synthetic(spec);
  EXPECT_EQ(corpus.train.size(), 40u);
  EXPECT_EQ(corpus.codes.size(), 6u);
  const WordPieceTokenizer tok{Vocab(corpus.vocab_tokens)};
  for (const auto* split : {&corpus.train, &corpus.val, &corpus.test}) {
    for (const auto& note : *split) {
      auto expected = note.codes;
      std::sort(expected.begin(), expected.end());
      EXPECT_EQ(oracle_codes(corpus, note.text), expected) << note.note_id;
      EXPECT_GE(note.codes.size(), spec.codes_per_note_min);
      EXPECT_LE(note.codes.size(), spec.codes_per_note_max);
      const auto n = tok.tokenize(note.text).ids.size();
      EXPECT_GE(n, spec.doc_len_min);
      EXPECT_LE(n, spec.doc_len_max);
      for (const auto id : tok.tokenize(note.text).ids) EXPECT_NE(id, tok.vocab().unk_id());
    }
  }
}

TEST(Synthetic, EvidenceStartsInsidePlacementRange) {
  const auto spec = small_spec();
  const auto corpus = generate_synthetic(spec);
  for (const auto& note : corpus.train) {
    std::vector<std::string> words;
    std::istringstream in(note.text);
    for (std::string w; in >> w;) words.push_back(w);
    for (const auto& code : note.codes) {
      bool found = false;
      for (const auto& phrase : corpus.evidence.at(code)) {
        std::vector<std::string> pw;
        std::istringstream pin(phrase);
        for (std::string w; pin >> w;) pw.push_back(w);
        for (std::size_t i = 0; i + pw.size() <= words.size(); ++i) {
          if (std::equal(pw.begin(), pw.end(), words.begin() + i)) {
            found = true;
            EXPECT_GE(i, spec.place_lo) << note.note_id;
            EXPECT_LE(i, spec.place_hi) << note.note_id;
          }
        }
      }
      EXPECT_TRUE(found) << note.note_id << " " << code;
    }
  }
}

TEST(Synthetic, PlacementAtZero) {
  auto spec = small_spec();
  spec.place_lo = spec.place_hi = 0;
  spec.codes_per_note_min = spec.codes_per_note_max = 1;
  const auto corpus = generate_synthetic(spec);
  for (const auto& note : corpus.train) {
    const auto& phrase = corpus.evidence.at(note.codes[0]).front();
    EXPECT_EQ(note.text.rfind(phrase, 0), 0u) << note.text;
  }
}

TEST(Synthetic, SplitsDisjointAndCodesKnown) {
  const auto corpus = generate_synthetic(small_spec());
  std::set<std::string> ids;
  for (const auto* split : {&corpus.train, &corpus.val, &corpus.test})
    for (const auto& n : *split) EXPECT_TRUE(ids.insert(n.note_id).second);
  const LabelSet labels(corpus.codes);
  std::uint64_t unknown = 0;
  for (const auto& n : corpus.test) labels.encode(n.codes, &unknown);
  EXPECT_EQ(unknown, 0u);
}

TEST(Synthetic, ByteIdenticalAcrossRuns) {
  const auto a = scratch("synth_a"), b = scratch("synth_b");
  SyntheticSpec spec = small_spec();
  spec.seed = 7;
  write_synthetic(generate_synthetic(spec), a);
  write_synthetic(generate_synthetic(spec), b);
  for (const char* f : {"train.jsonl", "val.jsonl", "test.jsonl", "codes.txt", "vocab.txt",
                        "evidence.tsv"}) {
    EXPECT_EQ(read_file(a / f), read_file(b / f)) << f;
    EXPECT_FALSE(read_file(a / f).empty()) << f;
  }
  spec.seed = 8;
  write_synthetic(generate_synthetic(spec), b);
  EXPECT_NE(read_file(a / "train.jsonl"), read_file(b / "train.jsonl"));
}

TEST(Synthetic, InconsistentSpecRejected) {
  auto spec = small_spec();
  spec.place_hi = 60;
  EXPECT_THROW(generate_synthetic(spec), ConfigError);
  spec = small_spec();
  spec.codes_per_note_max = 7;
  EXPECT_THROW(generate_synthetic(spec), ConfigError);
}

}  // namespace
}  // namespace longcode
