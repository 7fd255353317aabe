#pragma once

#include <array>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "copred/loss.hpp"
#include "copred/model.hpp"

namespace copred {

enum class RecallRule { union_both_masks, pmask_only };

inline const char* to_string(RecallRule r) {
  return r == RecallRule::union_both_masks ? "union_both_masks" : "pmask_only";
}

struct CorrectionConfig {
  double epsilon = 0.2;            // divergence margin
  double positive_threshold = 0.5; // "predicted positive" cutoff
  RecallRule recall_rule = RecallRule::union_both_masks;
  bool protect_gold = true;        // gold labels enter the candidate set

  void validate() const {
    if (epsilon < 0.0 || epsilon > 1.0) fail_validation("epsilon must be in [0,1], got ", epsilon);
    if (positive_threshold <= 0.0 || positive_threshold >= 1.0) {
      fail_validation("positive_threshold must be in (0,1), got ", positive_threshold);
    }
  }

  nlohmann::json to_json() const {
    return {{"epsilon", epsilon},
            {"positive_threshold", positive_threshold},
            {"recall_rule", to_string(recall_rule)},
            {"protect_gold", protect_gold}};
  }
};

// Divergence score of a co-predicted label: how far the PMASK score sits
// from the complement of the NMASK score.
inline double divergence_score(double p_pos, double p_neg) {
  return std::abs(p_pos - (1.0 - p_neg));
}

// Candidate set for one example: gold labels (when protected) plus every
// label the PMASK asserts, plus every label the NMASK declines to reject
// (its negation reads "not y", so p_neg below threshold recalls y).
inline LabelSet recall_labels(const CoPredictionScores& scores, const LabelSet& gold,
                              const CorrectionConfig& cfg) {
  cfg.validate();
  LabelSet candidates = cfg.protect_gold ? gold : LabelSet{};
  for (Eigen::Index y = 0; y < scores.p_pos.size(); ++y) {
    if (scores.p_pos(y) >= cfg.positive_threshold) candidates.insert(static_cast<int>(y));
    if (cfg.recall_rule == RecallRule::union_both_masks &&
        scores.p_neg(y) < cfg.positive_threshold) {
      candidates.insert(static_cast<int>(y));
    }
  }
  return candidates;
}

// Labels whose divergence score exceeds epsilon are classified inaccurate
// and removed.
inline LabelSet eliminate_labels(const LabelSet& candidates, const CoPredictionScores& scores,
                                 const CorrectionConfig& cfg) {
  cfg.validate();
  LabelSet kept;
  for (int y : candidates) {
    if (divergence_score(scores.p_pos(y), scores.p_neg(y)) <= cfg.epsilon) kept.insert(y);
  }
  return kept;
}

struct ExampleCorrection {
  std::string example_id;
  LabelSet original;
  LabelSet corrected;
  LabelSet recalled;    // added vs original and surviving elimination
  LabelSet eliminated;  // candidates removed by the margin rule
  std::map<int, double> candidate_delta;
  bool floor_applied = false;        // empty final set, lowest-delta candidate kept
  bool hierarchy_inconsistent = false;  // child kept while its parent was removed
};

struct CorrectionReport {
  std::vector<ExampleCorrection> examples;
  std::size_t n_recalled = 0;
  std::size_t n_eliminated = 0;
  std::size_t n_changed_examples = 0;
  std::size_t n_floor_applied = 0;
  std::size_t n_hierarchy_inconsistent = 0;
  double mean_delta = 0.0;  // over all candidate deltas
  std::array<std::size_t, 20> delta_histogram{};  // uniform bins over [0,1]

  static constexpr std::size_t n_bins = 20;
};

inline std::size_t delta_bin(double delta) {
  auto bin = static_cast<std::size_t>(delta * CorrectionReport::n_bins);
  return std::min(bin, CorrectionReport::n_bins - 1);
}

// Recall then eliminate, per example. An example whose final set would be
// empty keeps its single lowest-delta candidate; datasets in this pipeline
// never carry unlabeled training examples.
inline std::pair<Dataset, CorrectionReport> correct_dataset(CoPredictionModel& model,
                                                            const Dataset& dataset,
                                                            const CorrectionConfig& cfg) {
  cfg.validate();
  if (model.baseline()) {
    fail_validation("correction requires a co-prediction checkpoint, not a baseline one");
  }
  if (!(dataset.vocabulary == model.vocab())) {
    fail_validation("dataset vocabulary does not match the checkpoint vocabulary");
  }

  Dataset corrected = dataset;
  corrected.split_name = dataset.split_name + "+corrected";
  CorrectionReport report;
  report.examples.reserve(dataset.size());
  double delta_sum = 0.0;
  std::size_t delta_count = 0;

  for (auto& ex : corrected.examples) {
    const CoPredictionScores scores = model.score(ex);
    const LabelSet candidates = recall_labels(scores, ex.labels, cfg);
    LabelSet final_set = eliminate_labels(candidates, scores, cfg);

    ExampleCorrection entry;
    entry.example_id = ex.id;
    entry.original = ex.labels;
    for (int y : candidates) {
      const double delta = divergence_score(scores.p_pos(y), scores.p_neg(y));
      entry.candidate_delta[y] = delta;
      delta_sum += delta;
      ++delta_count;
      ++report.delta_histogram[delta_bin(delta)];
    }
    if (final_set.empty() && !candidates.empty()) {
      int best = -1;
      double best_delta = 2.0;
      for (int y : candidates) {
        if (entry.candidate_delta[y] < best_delta) {
          best_delta = entry.candidate_delta[y];
          best = y;
        }
      }
      final_set.insert(best);
      entry.floor_applied = true;
      ++report.n_floor_applied;
    }
    entry.corrected = final_set;
    entry.recalled = set_difference(final_set, entry.original);
    entry.eliminated = set_difference(candidates, final_set);
    for (int y : final_set) {
      if (model.vocab().depth(y) > 1) {
        auto parent = model.vocab().parent_of(y);
        if (parent && !final_set.contains(*parent)) {
          entry.hierarchy_inconsistent = true;
        }
      }
    }
    if (entry.hierarchy_inconsistent) ++report.n_hierarchy_inconsistent;
    report.n_recalled += entry.recalled.size();
    report.n_eliminated += entry.eliminated.size();
    if (!(entry.corrected == entry.original)) ++report.n_changed_examples;
    ex.labels = final_set;
    report.examples.push_back(std::move(entry));
  }
  report.mean_delta = delta_count == 0 ? 0.0 : delta_sum / static_cast<double>(delta_count);
  return {std::move(corrected), std::move(report)};
}

inline nlohmann::json correction_report_to_json(const CorrectionReport& report,
                                                const TypeVocabulary& vocab,
                                                const CorrectionConfig& cfg) {
  nlohmann::json j;
  j["format"] = "copred.correction_report.v1";
  j["config"] = cfg.to_json();
  j["corpus"] = {{"n_examples", report.examples.size()},
                 {"n_recalled", report.n_recalled},
                 {"n_eliminated", report.n_eliminated},
                 {"n_changed_examples", report.n_changed_examples},
                 {"n_floor_applied", report.n_floor_applied},
                 {"n_hierarchy_inconsistent", report.n_hierarchy_inconsistent},
                 {"mean_delta", report.mean_delta}};
  nlohmann::json hist = nlohmann::json::array();
  for (std::size_t b = 0; b < CorrectionReport::n_bins; ++b) {
    const double width = 1.0 / CorrectionReport::n_bins;
    hist.push_back({{"bin_low", static_cast<double>(b) * width},
                    {"bin_high", static_cast<double>(b + 1) * width},
                    {"count", report.delta_histogram[b]}});
  }
  j["delta_histogram"] = std::move(hist);
  nlohmann::json examples = nlohmann::json::array();
  auto paths = [&](const LabelSet& s) {
    nlohmann::json arr = nlohmann::json::array();
    for (int y : s) arr.push_back(vocab.path_of(y));
    return arr;
  };
  for (const auto& e : report.examples) {
    nlohmann::json deltas = nlohmann::json::object();
    for (const auto& [y, d] : e.candidate_delta) deltas[vocab.path_of(y)] = d;
    examples.push_back({{"id", e.example_id},
                        {"original", paths(e.original)},
                        {"corrected", paths(e.corrected)},
                        {"recalled", paths(e.recalled)},
                        {"eliminated", paths(e.eliminated)},
                        {"delta", std::move(deltas)},
                        {"floor_applied", e.floor_applied},
                        {"hierarchy_inconsistent", e.hierarchy_inconsistent}});
  }
  j["examples"] = std::move(examples);
  return j;
}

inline std::string correction_summary(const CorrectionReport& report, const CorrectionConfig& cfg) {
  std::ostringstream os;
  os << "correction summary (epsilon " << cfg.epsilon << ", rule " << to_string(cfg.recall_rule)
     << ")\n"
     << "  examples:               " << report.examples.size() << '\n'
     << "  changed examples:       " << report.n_changed_examples << '\n'
     << "  labels recalled:        " << report.n_recalled << '\n'
     << "  labels eliminated:      " << report.n_eliminated << '\n'
     << "  floor rule applied:     " << report.n_floor_applied << '\n'
     << "  hierarchy flags:        " << report.n_hierarchy_inconsistent << '\n'
     << "  mean candidate delta:   " << report.mean_delta << '\n';
  return os.str();
}

inline void write_delta_histogram_csv(const CorrectionReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail_runtime("cannot write histogram file: ", path);
  out << "bin_low,bin_high,count\n";
  const double width = 1.0 / CorrectionReport::n_bins;
  for (std::size_t b = 0; b < CorrectionReport::n_bins; ++b) {
    out << b * width << ',' << (b + 1) * width << ',' << report.delta_histogram[b] << '\n';
  }
}

}  // namespace copred
