#include "longcode/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include "longcode/error.hpp"

namespace longcode {
namespace {

template <typename S>
void append_row(std::size_t k, std::span<const S> probs, SparseLabels labels,
                std::vector<double>& scores, std::vector<std::uint8_t>& truth,
                std::vector<SparseLabels>& all_labels) {
  if (probs.size() != k) {
    throw ShapeError("prediction row has " + std::to_string(probs.size()) + " scores, K is " +
                     std::to_string(k));
  }
  check_sparse_labels(labels, k);
  const std::size_t base = truth.size();
  scores.insert(scores.end(), probs.begin(), probs.end());
  truth.resize(base + k, 0);
  for (const auto c : labels) truth[base + c] = 1;
  all_labels.push_back(std::move(labels));
}

struct SortedInstances {
  std::vector<double> scores;        // ascending
  std::vector<std::uint64_t> pos_suffix;  // positives among scores[i:]
  std::uint64_t positives = 0;
};

SortedInstances sort_instances(const PredictionSet& preds) {
  const auto scores = preds.scores();
  const auto truth = preds.truth();
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  SortedInstances out;
  out.scores.resize(order.size());
  out.pos_suffix.assign(order.size() + 1, 0);
  for (std::size_t i = 0; i < order.size(); ++i) out.scores[i] = scores[order[i]];
  for (std::size_t i = order.size(); i-- > 0;) {
    out.pos_suffix[i] = out.pos_suffix[i + 1] + truth[order[i]];
  }
  out.positives = out.pos_suffix[0];
  return out;
}

// Distinct-score groups in descending order with cumulative (tp, fp) after
// each group is admitted.
struct CurvePoint {
  std::uint64_t tp;
  std::uint64_t fp;
};

std::vector<CurvePoint> sweep_descending(const PredictionSet& preds) {
  const auto scores = preds.scores();
  const auto truth = preds.truth();
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<CurvePoint> points;
  std::uint64_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      if (truth[order[i]]) ++tp; else ++fp;
      ++i;
    }
    points.push_back({tp, fp});
  }
  return points;
}

std::string format_optional(const std::optional<double>& v) {
  if (!v) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", *v);
  return buf;
}

std::string format_fixed(double v, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

PredictionSet::PredictionSet(std::size_t num_classes) : num_classes_(num_classes) {
  if (num_classes == 0) throw ConfigError("prediction set needs K >= 1");
}

void PredictionSet::add(std::span<const float> probs, SparseLabels labels) {
  append_row(num_classes_, probs, std::move(labels), scores_, truth_, labels_);
}

void PredictionSet::add(std::span<const double> probs, SparseLabels labels) {
  append_row(num_classes_, probs, std::move(labels), scores_, truth_, labels_);
}

Confusion confusion_at(const PredictionSet& preds, double threshold) {
  Confusion c;
  const auto scores = preds.scores();
  const auto truth = preds.truth();
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    if (predicted) {
      truth[i] ? ++c.tp : ++c.fp;
    } else {
      truth[i] ? ++c.fn : ++c.tn;
    }
  }
  return c;
}

MicroScores micro_scores(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) {
  MicroScores s;
  if (tp + fp > 0) s.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (tp + fn > 0) s.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  if (s.precision + s.recall > 0.0) {
    s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
  }
  return s;
}

double micro_f1(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) {
  return micro_scores(tp, fp, fn).f1;
}

std::vector<double> default_threshold_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 99; ++i) grid.push_back(i / 100.0);
  return grid;
}

ThresholdChoice best_threshold(const PredictionSet& preds, std::span<const double> grid) {
  if (grid.empty()) throw ConfigError("threshold grid is empty");
  const SortedInstances sorted = sort_instances(preds);
  const std::uint64_t n = sorted.scores.size();
  ThresholdChoice best{0.0, -1.0};
  for (const double t : grid) {
    // First index with score >= t; everything from there on is predicted positive.
    const std::size_t first = static_cast<std::size_t>(
        std::lower_bound(sorted.scores.begin(), sorted.scores.end(), t) - sorted.scores.begin());
    const std::uint64_t predicted = n - first;
    const std::uint64_t tp = sorted.pos_suffix[first];
    const double f1 = micro_f1(tp, predicted - tp, sorted.positives - tp);
    if (f1 > best.f1 || (f1 == best.f1 && t < best.threshold)) best = {t, f1};
  }
  return best;
}

std::optional<double> roc_auc(const PredictionSet& preds) {
  const auto points = sweep_descending(preds);
  if (points.empty()) return std::nullopt;
  const std::uint64_t pos = points.back().tp;
  const std::uint64_t neg = points.back().fp;
  if (pos == 0 || neg == 0) return std::nullopt;
  double area = 0.0;
  CurvePoint prev{0, 0};
  for (const auto& p : points) {
    area += static_cast<double>(p.fp - prev.fp) * static_cast<double>(p.tp + prev.tp) / 2.0;
    prev = p;
  }
  return area / (static_cast<double>(pos) * static_cast<double>(neg));
}

std::optional<double> pr_auc(const PredictionSet& preds) {
  const auto points = sweep_descending(preds);
  if (points.empty()) return std::nullopt;
  const std::uint64_t pos = points.back().tp;
  const std::uint64_t neg = points.back().fp;
  if (pos == 0 || neg == 0) return std::nullopt;
  double area = 0.0;
  double prev_recall = 0.0;
  double prev_precision = 1.0;
  for (const auto& p : points) {
    const double recall = static_cast<double>(p.tp) / static_cast<double>(pos);
    const double precision = static_cast<double>(p.tp) / static_cast<double>(p.tp + p.fp);
    area += (recall - prev_recall) * (precision + prev_precision) / 2.0;
    prev_recall = recall;
    prev_precision = precision;
  }
  return area;
}

EvalReport evaluate_at(const PredictionSet& preds, double threshold) {
  EvalReport r;
  r.threshold = threshold;
  r.counts = confusion_at(preds, threshold);
  const MicroScores s = micro_scores(r.counts.tp, r.counts.fp, r.counts.fn);
  r.micro_precision = s.precision;
  r.micro_recall = s.recall;
  r.micro_f1 = s.f1;
  r.pr_auc = pr_auc(preds);
  r.roc_auc = roc_auc(preds);
  r.num_notes = preds.num_notes();
  return r;
}

std::string format_report(const EvalReport& r) {
  std::string out;
  auto line = [&](const char* key, const std::string& value) {
    out += key;
    out += '=';
    out += value;
    out += '\n';
  };
  line("threshold", format_fixed(r.threshold, 6));
  line("micro_precision", format_fixed(r.micro_precision, 6));
  line("micro_recall", format_fixed(r.micro_recall, 6));
  line("micro_f1", format_fixed(r.micro_f1, 6));
  line("pr_auc", format_optional(r.pr_auc));
  line("roc_auc", format_optional(r.roc_auc));
  line("tp", std::to_string(r.counts.tp));
  line("fp", std::to_string(r.counts.fp));
  line("fn", std::to_string(r.counts.fn));
  line("tn", std::to_string(r.counts.tn));
  line("notes", std::to_string(r.num_notes));
  line("unknown_codes", std::to_string(r.unknown_codes));
  return out;
}

std::string format_comparison_table(std::span<const ComparisonRow> rows) {
  const std::vector<std::string> header{"Model", "Seq. length", "Micro F1", "Precision",
                                        "Recall", "PR-AUC", "ROC-AUC"};
  std::vector<std::vector<std::string>> cells{header};
  for (const auto& row : rows) {
    auto opt = [](const std::optional<double>& v) { return v ? format_fixed(*v) : "N/A"; };
    cells.push_back({row.model, row.sequence_length, format_fixed(row.report.micro_f1),
                     format_fixed(row.report.micro_precision), format_fixed(row.report.micro_recall),
                     opt(row.report.pr_auc), opt(row.report.roc_auc)});
  }
  std::vector<std::size_t> widths(header.size(), 0);
  for (const auto& r : cells)
    for (std::size_t c = 0; c < r.size(); ++c) widths[c] = std::max(widths[c], r[c].size());
  std::string out;
  for (std::size_t r = 0; r < cells.size(); ++r) {
    for (std::size_t c = 0; c < cells[r].size(); ++c) {
      out += c == 0 ? "| " : " | ";
      out += cells[r][c];
      out.append(widths[c] - cells[r][c].size(), ' ');
    }
    out += " |\n";
    if (r == 0) {
      for (std::size_t c = 0; c < widths.size(); ++c) {
        out += c == 0 ? "|-" : "-|-";
        out.append(widths[c], '-');
      }
      out += "-|\n";
    }
  }
  return out;
}

}  // namespace longcode
