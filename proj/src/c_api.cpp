#include "longcode/longcode.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <iostream>
#include <limits>
#include <string>

#include "longcode/app.hpp"
#include "longcode/error.hpp"
#include "longcode/label_attention.hpp"

struct lc_config {
  longcode::RunConfig config;
};

struct lc_model {
  longcode::app::LoadedModel loaded;
};

struct lc_ranking {
  std::vector<std::pair<std::string, double>> entries;
};

namespace {

thread_local std::string g_last_error;

lc_status fail(lc_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

// Maps the library's exception hierarchy onto status codes.
template <typename F>
lc_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return LC_OK;
  } catch (const longcode::ConfigError& e) {
    return fail(LC_ERROR_CONFIG, e.what());
  } catch (const longcode::IoError& e) {
    return fail(LC_ERROR_IO, e.what());
  } catch (const longcode::FormatError& e) {
    return fail(LC_ERROR_FORMAT, e.what());
  } catch (const longcode::ShapeError& e) {
    return fail(LC_ERROR_SHAPE, e.what());
  } catch (const longcode::IndexError& e) {
    return fail(LC_ERROR_SHAPE, e.what());
  } catch (const std::exception& e) {
    return fail(LC_ERROR_RUNTIME, e.what());
  } catch (...) {
    return fail(LC_ERROR_RUNTIME, "unknown error");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

double or_nan(const std::optional<double>& v) {
  return v ? *v : std::numeric_limits<double>::quiet_NaN();
}

std::optional<double> from_nan(double v) {
  if (std::isnan(v)) return std::nullopt;
  return v;
}

longcode::EvalReport to_report(const lc_eval_report& r) {
  longcode::EvalReport report;
  report.threshold = r.threshold;
  report.micro_precision = r.micro_precision;
  report.micro_recall = r.micro_recall;
  report.micro_f1 = r.micro_f1;
  report.pr_auc = from_nan(r.pr_auc);
  report.roc_auc = from_nan(r.roc_auc);
  report.counts = {r.tp, r.fp, r.fn, r.tn};
  report.num_notes = r.num_notes;
  report.unknown_codes = r.unknown_codes;
  return report;
}

#define LC_REQUIRE(cond, what) \
  if (!(cond)) return fail(LC_ERROR_INVALID_ARGUMENT, what)

}  // namespace

extern "C" {

const char* lc_last_error(void) { return g_last_error.c_str(); }

const char* lc_status_string(lc_status status) {
  switch (status) {
    case LC_OK: return "ok";
    case LC_ERROR_INVALID_ARGUMENT: return "invalid argument";
    case LC_ERROR_CONFIG: return "configuration error";
    case LC_ERROR_IO: return "i/o error";
    case LC_ERROR_FORMAT: return "format error";
    case LC_ERROR_SHAPE: return "shape error";
    case LC_ERROR_RUNTIME: return "runtime error";
  }
  return "unknown status";
}

const char* lc_version(void) { return "0.1.0"; }

void lc_string_free(char* s) { std::free(s); }

lc_status lc_config_create(lc_config** out) {
  LC_REQUIRE(out, "lc_config_create: out is NULL");
  return guarded([&] { *out = new lc_config{}; });
}

void lc_config_destroy(lc_config* config) { delete config; }

lc_status lc_config_load_file(lc_config* config, const char* path) {
  LC_REQUIRE(config && path, "lc_config_load_file: NULL argument");
  return guarded([&] { config->config.merge_file(path); });
}

lc_status lc_config_set(lc_config* config, const char* key, const char* value) {
  LC_REQUIRE(config && key && value, "lc_config_set: NULL argument");
  return guarded([&] { config->config.set(key, value); });
}

lc_status lc_config_get(const lc_config* config, const char* key, char** value) {
  LC_REQUIRE(config && key && value, "lc_config_get: NULL argument");
  return guarded([&] { *value = dup_string(config->config.get(key)); });
}

lc_status lc_config_dump(const lc_config* config, char** text) {
  LC_REQUIRE(config && text, "lc_config_dump: NULL argument");
  return guarded([&] { *text = dup_string(config->config.dump()); });
}

size_t lc_config_key_count(void) { return longcode::config_keys().size(); }

const char* lc_config_key_name(size_t index) {
  const auto keys = longcode::config_keys();
  return index < keys.size() ? keys[index].name.data() : nullptr;
}

const char* lc_config_key_default(size_t index) {
  const auto keys = longcode::config_keys();
  return index < keys.size() ? keys[index].default_value.data() : nullptr;
}

const char* lc_config_key_help(size_t index) {
  const auto keys = longcode::config_keys();
  return index < keys.size() ? keys[index].help.data() : nullptr;
}

lc_status lc_generate_corpus(const lc_config* config, const char* out_dir) {
  LC_REQUIRE(config && out_dir, "lc_generate_corpus: NULL argument");
  return guarded([&] { longcode::app::generate_corpus(config->config, out_dir); });
}

lc_status lc_train(const lc_config* config, int verbose, lc_train_summary* summary) {
  LC_REQUIRE(config, "lc_train: config is NULL");
  return guarded([&] {
    const auto result = longcode::app::train(config->config, verbose ? &std::cerr : nullptr);
    if (summary) {
      *summary = {result.num_train,   result.num_val,     result.num_classes,
                  result.num_parameters, result.best_step, result.best_val_f1,
                  result.best_threshold};
    }
  });
}

lc_status lc_corpus_cdf(const lc_config* config, const char* corpus_path, char** text) {
  LC_REQUIRE(config && corpus_path && text, "lc_corpus_cdf: NULL argument");
  return guarded([&] {
    *text = dup_string(longcode::format_cdf(longcode::app::corpus_cdf(config->config, corpus_path)));
  });
}

lc_status lc_count_parameters(const lc_config* config, size_t num_classes,
                              lc_param_counts* counts) {
  LC_REQUIRE(config && counts, "lc_count_parameters: NULL argument");
  return guarded([&] {
    const auto& cfg = config->config;
    std::size_t width = 0;
    if (longcode::encoder_kind(cfg) == longcode::EncoderKind::kCnn) {
      const std::size_t vocab = cfg.get_size("vocab_size");
      if (vocab == 0) {
        throw longcode::ConfigError(longcode::describe_key("vocab_size") +
                                    " must be set to count CNN parameters");
      }
      const auto cnn = longcode::cnn_config(cfg, vocab);
      counts->encoder = longcode::count_parameters(cnn);
      width = cnn.filters;
    } else {
      const std::size_t vocab = cfg.get_size("vocab_size");
      const auto enc = longcode::encoder_config(cfg, vocab == 0 ? 30522 : vocab);
      counts->encoder = longcode::count_parameters(enc);
      width = enc.hidden;
    }
    counts->label_attention = longcode::attention_parameter_count(width, num_classes);
    counts->classifier = longcode::classifier_parameter_count(width, num_classes);
  });
}

lc_status lc_model_load(const char* checkpoint_dir, lc_model** out) {
  LC_REQUIRE(checkpoint_dir && out, "lc_model_load: NULL argument");
  return guarded([&] {
    *out = new lc_model{longcode::app::LoadedModel::load(checkpoint_dir)};
  });
}

void lc_model_destroy(lc_model* model) { delete model; }

size_t lc_model_num_classes(const lc_model* model) {
  return model ? model->loaded.labels().size() : 0;
}

double lc_model_threshold(const lc_model* model) {
  return model ? model->loaded.best().threshold : std::numeric_limits<double>::quiet_NaN();
}

lc_status lc_evaluate(const lc_model* model, const char* test_corpus, const char* val_corpus,
                      const char* codes, double threshold, lc_eval_report* report) {
  LC_REQUIRE(model && test_corpus && report, "lc_evaluate: NULL argument");
  return guarded([&] {
    longcode::app::EvalOptions options;
    options.test_corpus = test_corpus;
    if (val_corpus) options.val_corpus = val_corpus;
    if (codes) options.codes = codes;
    if (threshold >= 0.0) options.threshold = threshold;
    const auto result = longcode::app::evaluate(model->loaded, options);
    const auto& r = result.report;
    report->threshold = r.threshold;
    report->threshold_source = static_cast<int>(result.source);
    report->micro_precision = r.micro_precision;
    report->micro_recall = r.micro_recall;
    report->micro_f1 = r.micro_f1;
    report->pr_auc = or_nan(r.pr_auc);
    report->roc_auc = or_nan(r.roc_auc);
    report->tp = r.counts.tp;
    report->fp = r.counts.fp;
    report->fn = r.counts.fn;
    report->tn = r.counts.tn;
    report->num_notes = r.num_notes;
    report->unknown_codes = r.unknown_codes;
  });
}

lc_status lc_format_report(const lc_model* model, const lc_eval_report* report, char** text) {
  LC_REQUIRE(model && report && text, "lc_format_report: NULL argument");
  return guarded([&] {
    const longcode::EvalReport r = to_report(*report);
    const auto& cfg = model->loaded.config();
    const longcode::ComparisonRow row{std::string(longcode::encoder_kind_name(
                                          longcode::encoder_kind(cfg))),
                                      std::to_string(model->loaded.max_len()), r};
    *text = dup_string(longcode::format_report(r) + "\n" +
                       longcode::format_comparison_table(std::span(&row, 1)));
  });
}

lc_status lc_predict(const lc_model* model, const char* text, size_t top_n, lc_ranking** out) {
  LC_REQUIRE(model && text && out, "lc_predict: NULL argument");
  return guarded([&] {
    *out = new lc_ranking{longcode::app::predict(model->loaded, text, top_n)};
  });
}

size_t lc_ranking_size(const lc_ranking* ranking) { return ranking ? ranking->entries.size() : 0; }

const char* lc_ranking_code(const lc_ranking* ranking, size_t index) {
  if (!ranking || index >= ranking->entries.size()) return nullptr;
  return ranking->entries[index].first.c_str();
}

double lc_ranking_probability(const lc_ranking* ranking, size_t index) {
  if (!ranking || index >= ranking->entries.size()) return std::numeric_limits<double>::quiet_NaN();
  return ranking->entries[index].second;
}

void lc_ranking_destroy(lc_ranking* ranking) { delete ranking; }

}  // extern "C"
