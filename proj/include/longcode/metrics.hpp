#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "longcode/labels.hpp"

namespace longcode {

// Per-note probability rows plus ground truth. Every (note, code) pair is
// one instance for the micro-averaged metrics.
class PredictionSet {
 public:
  explicit PredictionSet(std::size_t num_classes);

  void add(std::span<const float> probs, SparseLabels labels);
  void add(std::span<const double> probs, SparseLabels labels);

  std::size_t num_classes() const { return num_classes_; }
  std::size_t num_notes() const { return labels_.size(); }
  std::size_t num_instances() const { return scores_.size(); }

  std::span<const double> scores() const { return scores_; }
  // 1 where the (note, code) instance is a true label, row-major like scores().
  std::span<const std::uint8_t> truth() const { return truth_; }
  const std::vector<SparseLabels>& labels() const { return labels_; }

 private:
  std::size_t num_classes_;
  std::vector<double> scores_;
  std::vector<std::uint8_t> truth_;
  std::vector<SparseLabels> labels_;
};

struct Confusion {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  friend bool operator==(const Confusion&, const Confusion&) = default;
};

// Instance predicted positive iff score >= threshold.
Confusion confusion_at(const PredictionSet& preds, double threshold);

struct MicroScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Precision/recall are 0 when their denominator is 0; F1 is the harmonic mean
// of the two, 0 when both are 0.
MicroScores micro_scores(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn);
double micro_f1(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn);

struct ThresholdChoice {
  double threshold = 0.0;
  double f1 = 0.0;
};

// 0.01, 0.02, ..., 0.99.
std::vector<double> default_threshold_grid();

// Grid point with the highest micro F1; ties go to the smallest threshold.
ThresholdChoice best_threshold(const PredictionSet& preds, std::span<const double> grid);

// Trapezoidal areas over the curves traced by every distinct score used as a
// threshold. The PR curve starts at (recall 0, precision 1). Empty when the
// pooled instances lack positives or negatives.
std::optional<double> pr_auc(const PredictionSet& preds);
std::optional<double> roc_auc(const PredictionSet& preds);

struct EvalReport {
  double threshold = 0.0;
  double micro_precision = 0.0;
  double micro_recall = 0.0;
  double micro_f1 = 0.0;
  std::optional<double> pr_auc;
  std::optional<double> roc_auc;
  Confusion counts;
  std::uint64_t num_notes = 0;
  std::uint64_t unknown_codes = 0;
};

EvalReport evaluate_at(const PredictionSet& preds, double threshold);

// `key=value` lines; missing AUCs print as `nan`.
std::string format_report(const EvalReport& report);

struct ComparisonRow {
  std::string model;
  std::string sequence_length;
  EvalReport report;
};

// Plain-text table with columns model, sequence length, micro F1,
// precision, recall, PR-AUC, ROC-AUC.
std::string format_comparison_table(std::span<const ComparisonRow> rows);

}  // namespace longcode
