#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <set>
#include <vector>

#include "longcode/metrics.hpp"

// Brute-force metric oracles, independent of the library's sweep algorithms.
namespace longcode::testing {

struct Counts {
  std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
};

inline Counts count_at(const PredictionSet& p, double t) {
  Counts c;
  for (std::size_t i = 0; i < p.num_instances(); ++i) {
    const bool predicted = p.scores()[i] >= t;
    const bool actual = p.truth()[i] != 0;
    if (predicted && actual) ++c.tp;
    else if (predicted) ++c.fp;
    else if (actual) ++c.fn;
    else ++c.tn;
  }
  return c;
}

inline double f1_of(const Counts& c) {
  const double p = c.tp + c.fp ? double(c.tp) / double(c.tp + c.fp) : 0.0;
  const double r = c.tp + c.fn ? double(c.tp) / double(c.tp + c.fn) : 0.0;
  return p + r > 0 ? 2 * p * r / (p + r) : 0.0;
}

inline double roc_oracle(const PredictionSet& p) {
  double good = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < p.num_instances(); ++i) {
    if (!p.truth()[i]) continue;
    for (std::size_t j = 0; j < p.num_instances(); ++j) {
      if (p.truth()[j]) continue;
      pairs += 1.0;
      if (p.scores()[i] > p.scores()[j]) good += 1.0;
      else if (p.scores()[i] == p.scores()[j]) good += 0.5;
    }
  }
  return good / pairs;
}

inline double pr_oracle(const PredictionSet& p) {
  std::set<double, std::greater<>> thresholds(p.scores().begin(), p.scores().end());
  double prev_r = 0.0, prev_p = 1.0, area = 0.0;
  for (const double t : thresholds) {
    const Counts c = count_at(p, t);
    const double r = double(c.tp) / double(c.tp + c.fn);
    const double pr = double(c.tp) / double(c.tp + c.fp);
    area += (r - prev_r) * (pr + prev_p) / 2.0;
    prev_r = r;
    prev_p = pr;
  }
  return area;
}

inline ThresholdChoice grid_oracle(const PredictionSet& p, const std::vector<double>& grid) {
  ThresholdChoice best{grid.front(), -1.0};
  for (const double t : grid) {
    const double f = f1_of(count_at(p, t));
    if (f > best.f1) best = {t, f};
  }
  return best;
}

inline PredictionSet random_set(std::mt19937_64& rng, bool coarse) {
  const std::size_t k = 1 + rng() % 10;
  const std::size_t notes = 1 + rng() % (500 / k);
  PredictionSet p(k);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t n = 0; n < notes; ++n) {
    std::vector<double> probs(k);
    SparseLabels labels;
    for (std::size_t c = 0; c < k; ++c) {
      const bool positive = u(rng) < 0.3;
      double s = std::clamp(u(rng) * 0.7 + (positive ? 0.3 : 0.0), 0.0, 1.0);
      if (coarse) s = std::round(s * 20.0) / 20.0;
      probs[c] = s;
      if (positive) labels.push_back(static_cast<std::uint32_t>(c));
    }
    p.add(std::span<const double>(probs), labels);
  }
  return p;
}

}  // namespace longcode::testing
