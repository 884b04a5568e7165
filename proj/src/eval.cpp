#include "ddi/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <spdlog/spdlog.h>

#include "ddi/error.hpp"
#include "ddi/parallel.hpp"
#include "ddi/random.hpp"

namespace ddi::eval {

namespace {

void check_inputs(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw ValidationError("scores and labels differ in length (" + std::to_string(scores.size()) +
                          " vs " + std::to_string(labels.size()) + ")");
  }
  for (double s : scores) {
    if (std::isnan(s)) throw ValidationError("NaN score");
  }
  for (int y : labels) {
    if (y != 0 && y != 1) throw ValidationError("labels must be 0 or 1");
  }
}

std::size_t count_positive(std::span<const int> labels) {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
}

// Indices sorted by descending score (stable on index).
std::vector<std::size_t> descending_order(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

}  // namespace

ConfusionMetrics confusion_metrics(std::span<const double> scores, std::span<const int> labels,
                                   double threshold) {
  check_inputs(scores, labels);
  if (scores.empty()) throw ValidationError("confusion_metrics needs at least one sample");
  ConfusionMetrics m;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    if (labels[i] == 1) {
      predicted ? ++m.tp : ++m.fn;
    } else {
      predicted ? ++m.fp : ++m.tn;
    }
  }
  const double n = static_cast<double>(scores.size());
  m.accuracy = static_cast<double>(m.tp + m.tn) / n;
  if (m.tp + m.fp == 0) {
    m.precision_undefined = true;
  } else {
    m.precision = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
  }
  if (m.tp + m.fn == 0) {
    m.recall_undefined = true;
  } else {
    m.recall = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
  }
  if (m.precision + m.recall == 0.0) {
    m.f1_undefined = true;
  } else {
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  }
  return m;
}

std::optional<double> try_roc_auc(std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels);
  const std::size_t n = scores.size();
  const std::size_t n_pos = count_positive(labels);
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Twice the midrank keeps every quantity an integer.
  long long rank_sum_x2 = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const long long midrank_x2 = static_cast<long long>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) rank_sum_x2 += midrank_x2;
    }
    i = j;
  }
  const long long p = static_cast<long long>(n_pos);
  const long long u_x2 = rank_sum_x2 - p * (p + 1);
  return static_cast<double>(u_x2) / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  auto auc = try_roc_auc(scores, labels);
  if (!auc) throw ValidationError("AUC undefined: both classes must be present");
  return *auc;
}

std::optional<double> try_pr_auc(std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels);
  const std::size_t n_pos = count_positive(labels);
  if (n_pos == 0) return std::nullopt;
  const auto order = descending_order(scores);
  double ap = 0.0;
  double prev_recall = 0.0;
  std::size_t tp = 0;
  std::size_t seen = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      tp += static_cast<std::size_t>(labels[order[j]]);
      ++j;
    }
    seen += j - i;
    const double recall = static_cast<double>(tp) / static_cast<double>(n_pos);
    const double precision = static_cast<double>(tp) / static_cast<double>(seen);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return ap;
}

double pr_auc(std::span<const double> scores, std::span<const int> labels) {
  auto ap = try_pr_auc(scores, labels);
  if (!ap) throw ValidationError("PR-AUC undefined: no positive samples");
  return *ap;
}

double ece(std::span<const double> scores, std::span<const int> labels, int n_bins) {
  check_inputs(scores, labels);
  if (n_bins < 2) throw ValidationError("ece needs at least 2 bins");
  if (scores.empty()) {
    spdlog::warn("ece: empty input, returning 0");
    return 0.0;
  }
  std::vector<double> conf_sum(n_bins, 0.0);
  std::vector<double> pos_sum(n_bins, 0.0);
  std::vector<std::size_t> count(n_bins, 0);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double s = std::clamp(scores[i], 0.0, 1.0);
    const int b = std::min(static_cast<int>(s * n_bins), n_bins - 1);
    conf_sum[b] += s;
    pos_sum[b] += labels[i];
    ++count[b];
  }
  const double n = static_cast<double>(scores.size());
  double total = 0.0;
  for (int b = 0; b < n_bins; ++b) {
    if (count[b] == 0) continue;
    const double c = static_cast<double>(count[b]);
    total += (c / n) * std::abs(conf_sum[b] / c - pos_sum[b] / c);
  }
  return total;
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw ValidationError("quantile of an empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

Interval bootstrap_ci(std::span<const double> scores, std::span<const int> labels,
                      const MetricFn& metric, std::size_t n_resamples, std::uint64_t seed,
                      double confidence, std::size_t workers) {
  check_inputs(scores, labels);
  if (n_resamples < 100) throw ValidationError("bootstrap needs at least 100 resamples");
  if (!(confidence > 0.0 && confidence < 1.0)) throw ValidationError("confidence must lie in (0, 1)");
  if (scores.empty()) throw ValidationError("bootstrap of an empty sample");

  const std::size_t n = scores.size();
  const std::size_t max_draws = 10 * n_resamples;
  std::vector<double> values;
  values.reserve(n_resamples);
  std::size_t draws = 0;
  while (values.size() < n_resamples && draws < max_draws) {
    const std::size_t block = std::min(n_resamples - values.size(), max_draws - draws);
    std::vector<std::optional<double>> results(block);
    parallel_for(block, workers, [&](std::size_t k) {
      Rng rng(derive_seed(seed, draws + k));
      std::vector<double> s(n);
      std::vector<int> y(n);
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t idx = static_cast<std::size_t>(rng.below(n));
        s[i] = scores[idx];
        y[i] = labels[idx];
      }
      results[k] = metric(s, y);
    });
    draws += block;
    for (const auto& r : results) {
      if (r && values.size() < n_resamples) values.push_back(*r);
    }
  }
  if (values.size() < n_resamples) {
    throw ValidationError("bootstrap: metric undefined on more than 90% of draws");
  }
  std::sort(values.begin(), values.end());
  const double alpha = (1.0 - confidence) / 2.0;
  return Interval{quantile_sorted(values, alpha), quantile_sorted(values, 1.0 - alpha)};
}

std::vector<RankedPair> rank_top_k(std::span<const double> probabilities,
                                   std::span<const corpus::PairInstance> pairs, std::size_t k) {
  if (k == 0) throw ValidationError("rank_top_k: k must be at least 1");
  if (probabilities.size() != pairs.size()) {
    throw ValidationError("rank_top_k: probabilities and pairs differ in length");
  }
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::string> keys(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) keys[i] = pairs[i].key();
  const std::size_t take = std::min(k, pairs.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (probabilities[a] != probabilities[b]) return probabilities[a] > probabilities[b];
                      return keys[a] < keys[b];
                    });
  std::vector<RankedPair> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    const auto& p = pairs[order[i]];
    out.push_back({p.drug_a, p.drug_b, probabilities[order[i]]});
  }
  return out;
}

std::vector<CurvePoint> roc_curve(std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels);
  const std::size_t n_pos = count_positive(labels);
  const std::size_t n_neg = labels.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw ValidationError("ROC curve undefined: both classes must be present");
  const auto order = descending_order(scores);
  std::vector<CurvePoint> points;
  points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  std::size_t tp = 0, fp = 0, i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      labels[order[j]] == 1 ? ++tp : ++fp;
      ++j;
    }
    points.push_back({scores[order[i]], static_cast<double>(fp) / static_cast<double>(n_neg),
                      static_cast<double>(tp) / static_cast<double>(n_pos)});
    i = j;
  }
  return points;
}

std::vector<CurvePoint> pr_curve(std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels);
  const std::size_t n_pos = count_positive(labels);
  if (n_pos == 0) throw ValidationError("PR curve undefined: no positive samples");
  const auto order = descending_order(scores);
  std::vector<CurvePoint> points;
  std::size_t tp = 0, seen = 0, i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      tp += static_cast<std::size_t>(labels[order[j]]);
      ++j;
    }
    seen += j - i;
    points.push_back({scores[order[i]], static_cast<double>(tp) / static_cast<double>(n_pos),
                      static_cast<double>(tp) / static_cast<double>(seen)});
    i = j;
  }
  return points;
}

std::string curve_csv(std::span<const CurvePoint> points) {
  std::ostringstream out;
  out.precision(17);
  out << "threshold,x,y\n";
  for (const auto& p : points) out << p.threshold << ',' << p.x << ',' << p.y << '\n';
  return out.str();
}

}  // namespace ddi::eval
