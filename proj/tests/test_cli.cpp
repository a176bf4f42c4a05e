#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "support/tempdir.hpp"

namespace {

using longcode::test::TempDir;

struct Run {
  int exit_code = -1;
  std::string out;  // stdout and stderr combined
};

Run run_cli(const std::string& args) {
  const std::string cmd = std::string("'") + LONGCODE_CLI + "' " + args + " 2>&1";
  Run r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) r.out.append(buf, n);
  const int status = ::pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

const std::string kToy = LONGCODE_TEST_DATA "/toy.jsonl";
const std::string kSmall =
    " --seg-len 16 --max-positions 16 --max-seq-len 64 --num-blocks 1 --hidden 16 --heads 2"
    " --intermediate 32 --max-steps 20 --eval-every 10";

double value_after(const std::string& text, const std::string& key) {
  const auto pos = text.find(key + "=");
  if (pos == std::string::npos) return -1.0;
  return std::stod(text.substr(pos + key.size() + 1));
}

TEST(Cli, TrainWritesBestCheckpoint) {
  TempDir dir;
  const auto ck = (dir / "ck").string();
  const auto r = run_cli("train --quiet --encoder transformer --corpus " + kToy +
                         " --checkpoint-dir " + ck + kSmall);
  ASSERT_EQ(r.exit_code, 0) << r.out;
  EXPECT_TRUE(std::filesystem::exists(dir / "ck" / "best.manifest"));
  EXPECT_TRUE(std::filesystem::exists(dir / "ck" / "best.bin"));
  std::ifstream cfg(dir / "ck" / "config.txt");
  const std::string dump{std::istreambuf_iterator<char>(cfg), {}};
  EXPECT_NE(dump.find("seg_len = 16"), std::string::npos);
  EXPECT_NE(dump.find("lr = 2e-4"), std::string::npos);  // untouched defaults are recorded too
}

TEST(Cli, MissingCorpusNamesTheFlag) {
  const auto r = run_cli("train");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.out.find("--corpus"), std::string::npos) << r.out;
}

TEST(Cli, UnknownFlagIsUsageError) {
  EXPECT_EQ(run_cli("train --no-such-flag 1").exit_code, 2);
  EXPECT_EQ(run_cli("--help").exit_code, 0);
}

TEST(Cli, ConfigFileThenFlags) {
  TempDir dir;
  std::ofstream(dir / "run.cfg") << "corpus = " << kToy << "\nseg_len = 8\nhidden = 16\n";
  const auto ck = (dir / "ck").string();
  const auto r = run_cli("train --quiet --config " + (dir / "run.cfg").string() +
                         " --checkpoint-dir " + ck + " --seg-len 16 --max-positions 16" +
                         " --max-seq-len 32 --num-blocks 1 --heads 2 --intermediate 32" +
                         " --max-steps 10 --eval-every 10");
  ASSERT_EQ(r.exit_code, 0) << r.out;
  std::ifstream cfg(dir / "ck" / "config.txt");
  const std::string dump{std::istreambuf_iterator<char>(cfg), {}};
  EXPECT_NE(dump.find("seg_len = 16\n"), std::string::npos);
  EXPECT_NE(dump.find("hidden = 16\n"), std::string::npos);
}

TEST(Cli, CnnEncoderTrainsAndEvaluates) {
  TempDir dir;
  const auto ck = (dir / "ck").string();
  auto r = run_cli("train --quiet --encoder cnn --corpus " + kToy + " --checkpoint-dir " + ck +
                   " --cnn-embed 8 --cnn-filters 6 --cnn-kernel 3 --cnn-min-word-freq 1" +
                   " --max-steps 20 --eval-every 10");
  ASSERT_EQ(r.exit_code, 0) << r.out;
  r = run_cli("eval --checkpoint " + ck + " --test-corpus " + kToy + " --threshold 0.5");
  ASSERT_EQ(r.exit_code, 0) << r.out;
  EXPECT_DOUBLE_EQ(value_after(r.out, "threshold"), 0.5);
  EXPECT_NE(r.out.find("| cnn "), std::string::npos) << r.out;
}

TEST(Cli, EvalPredictAndErrors) {
  TempDir dir;
  const auto ck = (dir / "ck").string();
  const auto train_path = (dir / "train.jsonl").string(), val_path = (dir / "val.jsonl").string();
  {
    std::ifstream toy(kToy);
    std::ofstream train(train_path), val(val_path);
    std::string line;
    for (int i = 0; std::getline(toy, line); ++i) (i < 14 ? train : val) << line << '\n';
  }
  auto r = run_cli("train --quiet --corpus " + train_path + " --val-corpus " + val_path +
                   " --checkpoint-dir " + ck + kSmall.substr(0, kSmall.find(" --max-steps")) +
                   " --max-steps 60 --eval-every 10 --lr 0.003");
  ASSERT_EQ(r.exit_code, 0) << r.out;
  const double logged = value_after(r.out, "best_val_micro_f1");
  ASSERT_GE(logged, 0.0) << r.out;

  r = run_cli("eval --checkpoint " + ck + " --test-corpus " + val_path + " --val-corpus " +
              val_path);
  ASSERT_EQ(r.exit_code, 0) << r.out;
  EXPECT_GE(value_after(r.out, "micro_f1"), logged - 1e-5) << r.out;

  r = run_cli("eval --checkpoint " + ck + " --test-corpus " + kToy + " --threshold 0.5");
  ASSERT_EQ(r.exit_code, 0) << r.out;
  EXPECT_DOUBLE_EQ(value_after(r.out, "threshold"), 0.5);

  std::ofstream(dir / "empty.jsonl").close();
  r = run_cli("eval --checkpoint " + ck + " --test-corpus " + (dir / "empty.jsonl").string());
  EXPECT_NE(r.exit_code, 0);

  std::ofstream(dir / "codes.txt") << "401.9\n";
  r = run_cli("eval --checkpoint " + ck + " --test-corpus " + kToy + " --codes " +
              (dir / "codes.txt").string());
  EXPECT_NE(r.exit_code, 0);

  r = run_cli("predict --checkpoint " + ck + " --text 'shortness of breath' --top-n 5");
  ASSERT_EQ(r.exit_code, 0) << r.out;
  std::istringstream lines(r.out);
  std::string code;
  double p = 0.0, prev = 1.0;
  int count = 0;
  while (lines >> code >> p) {
    EXPECT_GT(p, 0.0);
    EXPECT_LT(p, 1.0);
    EXPECT_LE(p, prev);
    prev = p;
    ++count;
  }
  EXPECT_EQ(count, 5);

  r = run_cli("predict --checkpoint " + ck + " --text ''");
  EXPECT_NE(r.exit_code, 0);
}

TEST(Cli, StatsParameterCounts) {
  const auto r = run_cli("stats --params --classes 50 --num-blocks 2 --hidden 256 --heads 4"
                         " --intermediate 1024");
  ASSERT_EQ(r.exit_code, 0) << r.out;
  EXPECT_NE(r.out.find("9591040"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("12850"), std::string::npos) << r.out;
}

TEST(Cli, GenCorpusIsDeterministic) {
  TempDir a, b;
  const std::string flags = " --synth-train 10 --synth-val 3 --synth-test 3";
  ASSERT_EQ(run_cli("gen-corpus --out-dir " + a.path().string() + flags).exit_code, 0);
  ASSERT_EQ(run_cli("gen-corpus --out-dir " + b.path().string() + flags).exit_code, 0);
  std::size_t files = 0;
  for (const auto& e : std::filesystem::directory_iterator(a.path())) {
    std::ifstream fa(e.path()), fb(b.path() / e.path().filename());
    EXPECT_EQ(std::string(std::istreambuf_iterator<char>(fa), {}),
              std::string(std::istreambuf_iterator<char>(fb), {}));
    ++files;
  }
  EXPECT_GE(files, 3u);
}

}  // namespace
