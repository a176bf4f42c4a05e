// longcode command-line tool: gen-corpus | train | eval | predict | stats.
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "longcode/longcode.h"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

int report_failure(lc_status status) {
  std::fprintf(stderr, "longcode: %s: %s\n", lc_status_string(status), lc_last_error());
  return status == LC_ERROR_CONFIG || status == LC_ERROR_INVALID_ARGUMENT ? kExitUsage
                                                                          : kExitRuntime;
}

struct ConfigDeleter {
  void operator()(lc_config* c) const { lc_config_destroy(c); }
};
struct ModelDeleter {
  void operator()(lc_model* m) const { lc_model_destroy(m); }
};
struct RankingDeleter {
  void operator()(lc_ranking* r) const { lc_ranking_destroy(r); }
};
struct StringDeleter {
  void operator()(char* s) const { lc_string_free(s); }
};
using ConfigPtr = std::unique_ptr<lc_config, ConfigDeleter>;
using StringPtr = std::unique_ptr<char, StringDeleter>;

// --config plus one flag per configuration key.
struct ConfigFlags {
  std::string config_file;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_file, "key = value configuration file")
        ->check(CLI::ExistingFile);
    for (size_t i = 0; i < lc_config_key_count(); ++i) {
      std::string key = lc_config_key_name(i);
      std::string flag = "--";
      for (char c : key) flag.push_back(c == '_' ? '-' : c);
      std::string help = lc_config_key_help(i);
      const std::string def = lc_config_key_default(i);
      if (!def.empty()) help += " [" + def + "]";
      options[key] = cmd->add_option(flag, values[key], help)->group("Configuration keys");
    }
  }

  // Defaults, then the file, then explicit flags.
  lc_status resolve(ConfigPtr& out) const {
    lc_config* raw = nullptr;
    if (lc_status s = lc_config_create(&raw); s != LC_OK) return s;
    out.reset(raw);
    if (!config_file.empty()) {
      if (lc_status s = lc_config_load_file(raw, config_file.c_str()); s != LC_OK) return s;
    }
    for (const auto& [key, option] : options) {
      if (option->count() == 0) continue;
      if (lc_status s = lc_config_set(raw, key.c_str(), values.at(key).c_str()); s != LC_OK) {
        return s;
      }
    }
    return LC_OK;
  }
};


}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Long-document multi-label text classifier with per-class label attention"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(lc_version()));

  ConfigFlags gen_flags, train_flags, stats_flags;

  auto* gen = app.add_subcommand("gen-corpus", "write a synthetic planted-evidence corpus");
  std::string out_dir;
  gen->add_option("--out-dir", out_dir, "output directory")->required();
  gen_flags.attach(gen);

  auto* train = app.add_subcommand("train", "train a model and write checkpoints");
  bool quiet = false;
  train->add_flag("--quiet", quiet, "no progress lines on stderr");
  train_flags.attach(train);

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a test corpus");
  std::string eval_checkpoint, eval_test, eval_val, eval_codes;
  std::optional<double> eval_threshold;
  eval->add_option("--checkpoint", eval_checkpoint, "checkpoint directory")->required();
  eval->add_option("--test-corpus", eval_test, "test corpus (JSON lines)")->required();
  eval->add_option("--val-corpus", eval_val, "validation corpus for the threshold grid search");
  eval->add_option("--codes", eval_codes, "code list that must match the checkpoint");
  eval->add_option("--threshold", eval_threshold, "fixed decision threshold (skips the grid search)")
      ->check(CLI::Range(0.0, 1.0));

  auto* predict = app.add_subcommand("predict", "rank codes for one note");
  std::string predict_checkpoint, predict_text;
  size_t top_n = 10;
  predict->add_option("--checkpoint", predict_checkpoint, "checkpoint directory")->required();
  predict->add_option("--text", predict_text, "note text")->required();
  predict->add_option("--top-n", top_n, "number of codes to print")->capture_default_str();

  auto* stats = app.add_subcommand("stats", "corpus token-length CDF or parameter counts");
  bool params = false;
  size_t classes = 0;
  stats->add_flag("--params", params, "print parameter counts instead of the CDF");
  stats->add_option("--classes", classes, "K for --params");
  stats_flags.attach(stats);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  ConfigPtr config;
  if (gen->parsed()) {
    if (lc_status s = gen_flags.resolve(config); s != LC_OK) return report_failure(s);
    if (lc_status s = lc_generate_corpus(config.get(), out_dir.c_str()); s != LC_OK) {
      return report_failure(s);
    }
    std::printf("wrote synthetic corpus to %s\n", out_dir.c_str());
    return 0;
  }

  if (train->parsed()) {
    if (lc_status s = train_flags.resolve(config); s != LC_OK) return report_failure(s);
    lc_train_summary summary{};
    if (lc_status s = lc_train(config.get(), quiet ? 0 : 1, &summary); s != LC_OK) {
      return report_failure(s);
    }
    char* dir = nullptr;
    lc_config_get(config.get(), "checkpoint_dir", &dir);
    StringPtr dir_owner(dir);
    std::printf("train_notes=%zu\nval_notes=%zu\nclasses=%zu\nparameters=%llu\n",
                summary.num_train, summary.num_val, summary.num_classes,
                static_cast<unsigned long long>(summary.num_parameters));
    std::printf("best_step=%zu\nbest_val_micro_f1=%.6f\nbest_threshold=%.2f\ncheckpoint_dir=%s\n",
                summary.best_step, summary.best_val_micro_f1, summary.best_threshold, dir);
    return 0;
  }

  if (eval->parsed()) {
    lc_model* raw = nullptr;
    if (lc_status s = lc_model_load(eval_checkpoint.c_str(), &raw); s != LC_OK) {
      return report_failure(s);
    }
    std::unique_ptr<lc_model, ModelDeleter> model(raw);
    lc_eval_report report{};
    const lc_status s = lc_evaluate(model.get(), eval_test.c_str(),
                                    eval_val.empty() ? nullptr : eval_val.c_str(),
                                    eval_codes.empty() ? nullptr : eval_codes.c_str(),
                                    eval_threshold.value_or(-1.0), &report);
    if (s != LC_OK) return report_failure(s);
    if (report.threshold_source == 2) {
      std::fprintf(stderr, "longcode: no --val-corpus; using the threshold stored with the checkpoint\n");
    }
    char* text = nullptr;
    if (lc_status f = lc_format_report(model.get(), &report, &text); f != LC_OK) {
      return report_failure(f);
    }
    StringPtr owner(text);
    std::fputs(text, stdout);
    return 0;
  }

  if (predict->parsed()) {
    lc_model* raw = nullptr;
    if (lc_status s = lc_model_load(predict_checkpoint.c_str(), &raw); s != LC_OK) {
      return report_failure(s);
    }
    std::unique_ptr<lc_model, ModelDeleter> model(raw);
    lc_ranking* ranking_raw = nullptr;
    if (lc_status s = lc_predict(model.get(), predict_text.c_str(), top_n, &ranking_raw);
        s != LC_OK) {
      return report_failure(s);
    }
    std::unique_ptr<lc_ranking, RankingDeleter> ranking(ranking_raw);
    for (size_t i = 0; i < lc_ranking_size(ranking.get()); ++i) {
      std::printf("%s\t%.6f\n", lc_ranking_code(ranking.get(), i),
                  lc_ranking_probability(ranking.get(), i));
    }
    return 0;
  }

  // stats
  if (lc_status s = stats_flags.resolve(config); s != LC_OK) return report_failure(s);
  if (params) {
    lc_param_counts counts{};
    if (lc_status s = lc_count_parameters(config.get(), classes, &counts); s != LC_OK) {
      return report_failure(s);
    }
    std::printf("encoder=%llu\nlabel_attention=%llu\nclassifier=%llu\n",
                static_cast<unsigned long long>(counts.encoder),
                static_cast<unsigned long long>(counts.label_attention),
                static_cast<unsigned long long>(counts.classifier));
    return 0;
  }
  char* corpus = nullptr;
  lc_config_get(config.get(), "corpus", &corpus);
  StringPtr corpus_owner(corpus);
  if (!corpus || !*corpus) {
    std::fprintf(stderr, "longcode: corpus (--corpus) is required for the CDF\n");
    return kExitUsage;
  }
  char* text = nullptr;
  if (lc_status s = lc_corpus_cdf(config.get(), corpus, &text); s != LC_OK) {
    return report_failure(s);
  }
  StringPtr owner(text);
  std::fputs(text, stdout);
  return 0;
}
