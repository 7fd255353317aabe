#pragma once

#include <iomanip>
#include <span>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "copred/common.hpp"
#include "copred/labels.hpp"

namespace copred {

struct MetricReport {
  double strict_accuracy = 0.0;
  double macro_p = 0.0;
  double macro_r = 0.0;
  double macro_f1 = 0.0;
  double micro_p = 0.0;
  double micro_r = 0.0;
  double micro_f1 = 0.0;
  std::size_t n_examples = 0;
};

inline double f1_of(double p, double r) { return (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

// Strict accuracy plus example-averaged (macro) and corpus-aggregated
// (micro) precision/recall/F1. Macro here is the FET convention: averaged
// over examples, not over types. An empty predicted set scores precision 0
// unless the gold set is empty too (then 1); recall symmetrically.
inline MetricReport evaluate(std::span<const LabelSet> predictions, std::span<const LabelSet> gold) {
  if (predictions.size() != gold.size()) {
    fail_validation("evaluate: ", predictions.size(), " predictions vs ", gold.size(),
                    " gold label sets");
  }
  MetricReport report;
  report.n_examples = predictions.size();
  if (predictions.empty()) return report;

  std::size_t exact = 0;
  double p_sum = 0.0, r_sum = 0.0;
  std::size_t overlap_total = 0, pred_total = 0, gold_total = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const LabelSet& p = predictions[i];
    const LabelSet& g = gold[i];
    const std::size_t overlap = set_intersection(p, g).size();
    if (p == g) ++exact;
    p_sum += p.empty() ? (g.empty() ? 1.0 : 0.0)
                       : static_cast<double>(overlap) / static_cast<double>(p.size());
    r_sum += g.empty() ? (p.empty() ? 1.0 : 0.0)
                       : static_cast<double>(overlap) / static_cast<double>(g.size());
    overlap_total += overlap;
    pred_total += p.size();
    gold_total += g.size();
  }
  const double n = static_cast<double>(predictions.size());
  report.strict_accuracy = static_cast<double>(exact) / n;
  report.macro_p = p_sum / n;
  report.macro_r = r_sum / n;
  report.macro_f1 = f1_of(report.macro_p, report.macro_r);
  report.micro_p = pred_total > 0 ? static_cast<double>(overlap_total) / static_cast<double>(pred_total) : 0.0;
  report.micro_r = gold_total > 0 ? static_cast<double>(overlap_total) / static_cast<double>(gold_total) : 0.0;
  report.micro_f1 = f1_of(report.micro_p, report.micro_r);
  return report;
}

inline nlohmann::json metric_report_to_json(const MetricReport& r) {
  return nlohmann::json{{"strict_accuracy", r.strict_accuracy},
                        {"macro_p", r.macro_p},
                        {"macro_r", r.macro_r},
                        {"macro_f1", r.macro_f1},
                        {"micro_p", r.micro_p},
                        {"micro_r", r.micro_r},
                        {"micro_f1", r.micro_f1},
                        {"n_examples", r.n_examples}};
}

inline std::string format_metric_table(const MetricReport& r) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  auto row = [&](const char* name, double value) {
    os << std::left << std::setw(17) << name << std::right << std::setw(8) << value << '\n';
  };
  os << std::left << std::setw(17) << "metric" << std::right << std::setw(8) << "value" << '\n';
  row("strict_accuracy", r.strict_accuracy);
  row("macro_p", r.macro_p);
  row("macro_r", r.macro_r);
  row("macro_f1", r.macro_f1);
  row("micro_p", r.micro_p);
  row("micro_r", r.micro_r);
  row("micro_f1", r.micro_f1);
  os << std::left << std::setw(17) << "n_examples" << std::right << std::setw(8) << r.n_examples << '\n';
  return os.str();
}

}  // namespace copred
