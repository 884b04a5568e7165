#include <algorithm>
#include <cstdio>
#include <sstream>

#include "ddi/error.hpp"
#include "ddi/eval.hpp"

namespace ddi::eval {

namespace {

MetricValue with_ci(double point, Interval ci) {
  ci.lo = std::min(ci.lo, point);
  ci.hi = std::max(ci.hi, point);
  return {point, ci};
}

nlohmann::json metric_json(const MetricValue& m) {
  return {{"value", m.value}, {"ci95", {m.ci.lo, m.ci.hi}}};
}

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

MetricReport build_report(std::span<const double> scores, std::span<const int> labels,
                          const ReportOptions& options) {
  if (scores.size() != labels.size()) throw ValidationError("scores and labels differ in length");
  MetricReport r;
  r.threshold = options.threshold;
  r.resamples = options.resamples;
  r.n_pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  r.n_neg = labels.size() - r.n_pos;

  const ConfusionMetrics cm = confusion_metrics(scores, labels, options.threshold);
  if (cm.precision_undefined) r.flags.emplace_back("precision_undefined");
  if (cm.recall_undefined) r.flags.emplace_back("recall_undefined");
  if (cm.f1_undefined) r.flags.emplace_back("f1_undefined");

  const double threshold = options.threshold;
  auto boot = [&](const MetricFn& fn) {
    return bootstrap_ci(scores, labels, fn, options.resamples, options.seed, 0.95, options.workers);
  };
  auto confusion_fn = [threshold](double ConfusionMetrics::*field) {
    return MetricFn([threshold, field](std::span<const double> s, std::span<const int> y) {
      return std::optional<double>(confusion_metrics(s, y, threshold).*field);
    });
  };

  r.accuracy = with_ci(cm.accuracy, boot(confusion_fn(&ConfusionMetrics::accuracy)));
  r.precision = with_ci(cm.precision, boot(confusion_fn(&ConfusionMetrics::precision)));
  r.recall = with_ci(cm.recall, boot(confusion_fn(&ConfusionMetrics::recall)));
  r.f1 = with_ci(cm.f1, boot(confusion_fn(&ConfusionMetrics::f1)));
  r.roc_auc = with_ci(roc_auc(scores, labels), boot(try_roc_auc));
  r.pr_auc = with_ci(pr_auc(scores, labels), boot(try_pr_auc));
  r.ece = ece(scores, labels, options.ece_bins);
  return r;
}

nlohmann::json to_json(const MetricReport& r) {
  nlohmann::json j;
  j["n_pos"] = r.n_pos;
  j["n_neg"] = r.n_neg;
  j["threshold"] = r.threshold;
  j["bootstrap_resamples"] = r.resamples;
  j["accuracy"] = metric_json(r.accuracy);
  j["precision"] = metric_json(r.precision);
  j["recall"] = metric_json(r.recall);
  j["f1"] = metric_json(r.f1);
  j["roc_auc"] = metric_json(r.roc_auc);
  j["pr_auc"] = metric_json(r.pr_auc);
  j["ece"] = r.ece;
  j["flags"] = r.flags;
  j["significance_tests"] = "not computed (DeLong / McNemar are outside this tool)";
  return j;
}

std::string to_table(const MetricReport& r) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-8s %-8s %-8s %-8s %-8s %-8s\n", "Acc", "Prec", "Rec", "F1",
                "ROC-AUC", "PR-AUC");
  out << line;
  const MetricValue* cols[] = {&r.accuracy, &r.precision, &r.recall, &r.f1, &r.roc_auc, &r.pr_auc};
  std::string values;
  for (const auto* m : cols) {
    std::snprintf(line, sizeof line, "%-8s ", fixed(m->value).c_str());
    values += line;
  }
  values.pop_back();
  out << values << '\n';
  out << "95% bootstrap CIs (" << r.resamples << " resamples):\n";
  const char* names[] = {"Acc", "Prec", "Rec", "F1", "ROC-AUC", "PR-AUC"};
  for (std::size_t i = 0; i < 6; ++i) {
    std::snprintf(line, sizeof line, "  %-8s [%s, %s]\n", names[i], fixed(cols[i]->ci.lo).c_str(),
                  fixed(cols[i]->ci.hi).c_str());
    out << line;
  }
  out << "ECE " << fixed(r.ece) << "  n_pos " << r.n_pos << "  n_neg " << r.n_neg << "  threshold "
      << fixed(r.threshold) << '\n';
  return out.str();
}

}  // namespace ddi::eval
