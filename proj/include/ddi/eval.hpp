#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ddi/corpus.hpp"
#include "json.hpp"

namespace ddi::eval {

inline constexpr double kDefaultThreshold = 0.5;
inline constexpr int kDefaultEceBins = 10;
inline constexpr std::size_t kDefaultResamples = 1000;

// Scores are probabilities (or any real score); labels are 0/1.

struct ConfusionMetrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  // Set when the metric's denominator was 0 and it was reported as 0.
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;
};

// A sample is predicted positive when score >= threshold.
ConfusionMetrics confusion_metrics(std::span<const double> scores, std::span<const int> labels,
                                   double threshold = kDefaultThreshold);

// Mann-Whitney AUC with ties counted 1/2, via midranks in O(n log n).
// Throws ValidationError("AUC undefined ...") unless both classes are present.
double roc_auc(std::span<const double> scores, std::span<const int> labels);
std::optional<double> try_roc_auc(std::span<const double> scores, std::span<const int> labels);

// Average precision, sum over descending thresholds of (R_k - R_{k-1}) * P_k,
// with tied scores entering as one step. Throws when there are no positives.
double pr_auc(std::span<const double> scores, std::span<const int> labels);
std::optional<double> try_pr_auc(std::span<const double> scores, std::span<const int> labels);

// Expected calibration error over n_bins equal-width bins on [0, 1].
// Empty input yields 0 and logs a warning.
double ece(std::span<const double> scores, std::span<const int> labels,
           int n_bins = kDefaultEceBins);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const Interval&) const = default;
};

// nullopt marks a resample on which the metric is undefined.
using MetricFn =
    std::function<std::optional<double>(std::span<const double>, std::span<const int>)>;

// Percentile bootstrap over pairs. Draw a uses seed derive_seed(seed, a), so
// the interval does not depend on `workers`. Undefined draws are replaced,
// up to 10x n_resamples draws in total; throws ValidationError when the
// metric is undefined on more than 90% of draws.
Interval bootstrap_ci(std::span<const double> scores, std::span<const int> labels,
                      const MetricFn& metric, std::size_t n_resamples = kDefaultResamples,
                      std::uint64_t seed = 13, double confidence = 0.95,
                      std::size_t workers = 1);

// Linear-interpolation quantile of sorted values, q in [0, 1].
double quantile_sorted(std::span<const double> sorted, double q);

struct RankedPair {
  std::string drug_a;
  std::string drug_b;
  double probability = 0.0;
};

// Descending probability; ties broken by the canonical pair key ascending.
// k > n returns every pair. Throws ValidationError when k == 0.
std::vector<RankedPair> rank_top_k(std::span<const double> probabilities,
                                   std::span<const corpus::PairInstance> pairs, std::size_t k);

struct CurvePoint {
  double threshold;
  double x;
  double y;
};

// ROC points (x = FPR, y = TPR) and PR points (x = recall, y = precision),
// one per distinct threshold in descending order.
std::vector<CurvePoint> roc_curve(std::span<const double> scores, std::span<const int> labels);
std::vector<CurvePoint> pr_curve(std::span<const double> scores, std::span<const int> labels);
std::string curve_csv(std::span<const CurvePoint> points);

struct MetricValue {
  double value = 0.0;
  Interval ci;
};

struct MetricReport {
  MetricValue accuracy, precision, recall, f1, roc_auc, pr_auc;
  double ece = 0.0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  double threshold = kDefaultThreshold;
  std::size_t resamples = 0;
  std::vector<std::string> flags;
};

struct ReportOptions {
  double threshold = kDefaultThreshold;
  std::size_t resamples = kDefaultResamples;
  std::uint64_t seed = 13;
  int ece_bins = kDefaultEceBins;
  std::size_t workers = 1;
};

// All six metrics with percentile CIs widened, if needed, to contain the
// point estimate; plus ECE and class counts.
MetricReport build_report(std::span<const double> scores, std::span<const int> labels,
                          const ReportOptions& options = {});

nlohmann::json to_json(const MetricReport& report);
// Aligned table: Acc, Prec, Rec, F1, ROC-AUC, PR-AUC, then CIs and ECE.
std::string to_table(const MetricReport& report);

}  // namespace ddi::eval
