/* C interface to the longcode library. All strings are UTF-8. Strings
 * returned through char** are owned by the caller and released with
 * lc_string_free. Functions returning lc_status leave a message for
 * lc_last_error on failure. */
#ifndef LONGCODE_LONGCODE_H
#define LONGCODE_LONGCODE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(LONGCODE_BUILDING)
#    define LC_API __declspec(dllexport)
#  else
#    define LC_API __declspec(dllimport)
#  endif
#else
#  define LC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lc_status {
  LC_OK = 0,
  LC_ERROR_INVALID_ARGUMENT = 1,
  LC_ERROR_CONFIG = 2,
  LC_ERROR_IO = 3,
  LC_ERROR_FORMAT = 4,
  LC_ERROR_SHAPE = 5,
  LC_ERROR_RUNTIME = 6
} lc_status;

typedef struct lc_config lc_config;
typedef struct lc_model lc_model;
typedef struct lc_ranking lc_ranking;

/* Message of the last failure on this thread; never NULL. */
LC_API const char* lc_last_error(void);
LC_API const char* lc_status_string(lc_status status);
LC_API const char* lc_version(void);
LC_API void lc_string_free(char* s);

/* Run configuration: every key starts at its default. */
LC_API lc_status lc_config_create(lc_config** out);
LC_API void lc_config_destroy(lc_config* config);
LC_API lc_status lc_config_load_file(lc_config* config, const char* path);
LC_API lc_status lc_config_set(lc_config* config, const char* key, const char* value);
LC_API lc_status lc_config_get(const lc_config* config, const char* key, char** value);
/* Resolved configuration, one "key = value" line per key. */
LC_API lc_status lc_config_dump(const lc_config* config, char** text);

LC_API size_t lc_config_key_count(void);
/* NULL when index is out of range. */
LC_API const char* lc_config_key_name(size_t index);
LC_API const char* lc_config_key_default(size_t index);
LC_API const char* lc_config_key_help(size_t index);

/* Synthetic corpus from the synth_* keys into out_dir. */
LC_API lc_status lc_generate_corpus(const lc_config* config, const char* out_dir);

typedef struct lc_train_summary {
  size_t num_train;
  size_t num_val;
  size_t num_classes;
  uint64_t num_parameters;
  size_t best_step;
  double best_val_micro_f1;
  double best_threshold;
} lc_train_summary;

/* Progress lines are written to stderr when verbose is nonzero. */
LC_API lc_status lc_train(const lc_config* config, int verbose, lc_train_summary* summary);

/* Two tab-separated columns: token length, cumulative fraction. */
LC_API lc_status lc_corpus_cdf(const lc_config* config, const char* corpus_path, char** text);

typedef struct lc_param_counts {
  uint64_t encoder;
  uint64_t label_attention;
  uint64_t classifier;
} lc_param_counts;

/* Transformer vocab_size 0 means 30522; the CNN needs an explicit vocab_size. */
LC_API lc_status lc_count_parameters(const lc_config* config, size_t num_classes,
                                     lc_param_counts* counts);

LC_API lc_status lc_model_load(const char* checkpoint_dir, lc_model** out);
LC_API void lc_model_destroy(lc_model* model);
LC_API size_t lc_model_num_classes(const lc_model* model);
LC_API double lc_model_threshold(const lc_model* model);

typedef struct lc_eval_report {
  double threshold;
  int threshold_source; /* 0 given, 1 validation grid, 2 stored at training time */
  double micro_precision;
  double micro_recall;
  double micro_f1;
  double pr_auc;  /* NaN when undefined */
  double roc_auc; /* NaN when undefined */
  uint64_t tp, fp, fn, tn;
  uint64_t num_notes;
  uint64_t unknown_codes;
} lc_eval_report;

/* val_corpus, codes may be NULL; threshold < 0 selects it by grid search. */
LC_API lc_status lc_evaluate(const lc_model* model, const char* test_corpus,
                             const char* val_corpus, const char* codes, double threshold,
                             lc_eval_report* report);
/* key=value lines followed by a one-row comparison table. */
LC_API lc_status lc_format_report(const lc_model* model, const lc_eval_report* report,
                                  char** text);

LC_API lc_status lc_predict(const lc_model* model, const char* text, size_t top_n,
                            lc_ranking** out);
LC_API size_t lc_ranking_size(const lc_ranking* ranking);
LC_API const char* lc_ranking_code(const lc_ranking* ranking, size_t index);
LC_API double lc_ranking_probability(const lc_ranking* ranking, size_t index);
LC_API void lc_ranking_destroy(lc_ranking* ranking);

#ifdef __cplusplus
}
#endif

#endif /* LONGCODE_LONGCODE_H */
