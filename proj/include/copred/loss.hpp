#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "copred/autograd.hpp"
#include "copred/labels.hpp"
#include "copred/model.hpp"

namespace copred {

// A label is a divergent co-prediction when the two masks agree numerically
// but disagree semantically: both scores >= 0.5 or both < 0.5. The boundary
// 0.5 belongs to the ">=" branch.
inline bool is_divergent(double p_pos, double p_neg) {
  return (p_pos >= 0.5 && p_neg >= 0.5) || (p_pos < 0.5 && p_neg < 0.5);
}

inline std::vector<bool> detect_divergent(const CoPredictionScores& scores) {
  if (scores.p_pos.size() != scores.p_neg.size()) {
    fail_validation("co-prediction score arrays differ in length");
  }
  std::vector<bool> flags(static_cast<std::size_t>(scores.p_pos.size()));
  for (Eigen::Index y = 0; y < scores.p_pos.size(); ++y) {
    flags[static_cast<std::size_t>(y)] = is_divergent(scores.p_pos(y), scores.p_neg(y));
  }
  return flags;
}

// Same criterion on logits; sigmoid is monotone with sigmoid(0) = 0.5.
inline bool is_divergent_logits(double z_pos, double z_neg) {
  return (z_pos >= 0.0 && z_neg >= 0.0) || (z_pos < 0.0 && z_neg < 0.0);
}

inline double prob_to_logit(double p) { return std::log(p) - std::log1p(-p); }

// BCE of a probability against a binary target; exact at the endpoints
// (-log 1 = 0, -log 0 = +inf).
inline double bce_prob(double p, bool positive) {
  return positive ? -std::log(p) : -std::log1p(-p);
}

// Per-label co-prediction loss: BCE against the gold bit on the PMASK score
// and against its complement on the NMASK score.
inline double coprediction_label_loss(double p_pos, double p_neg, bool gold) {
  return bce_prob(p_pos, gold) + bce_prob(p_neg, !gold);
}

// Divergence-weighted total over all t labels: gamma scales the divergent
// terms, consistent terms keep full weight. Divergence is decided from the
// scores as given; it gates the sum and is not differentiated through.
inline double coprediction_loss(const CoPredictionScores& scores, const LabelSet& gold,
                                double gamma) {
  if (gamma <= 0.0) fail_validation("gamma must be positive, got ", gamma);
  double total = 0.0;
  for (Eigen::Index y = 0; y < scores.p_pos.size(); ++y) {
    const double term =
        coprediction_label_loss(scores.p_pos(y), scores.p_neg(y), gold.contains(static_cast<int>(y)));
    total += is_divergent(scores.p_pos(y), scores.p_neg(y)) ? gamma * term : term;
  }
  return total;
}

// Graph version used in training: targets are 0/1 per label, weights are
// gamma for divergent labels and 1 otherwise (precomputed, detached).
inline ag::Var coprediction_loss_graph(const MaskLogits& logits, const Eigen::VectorXd& targets,
                                       double gamma) {
  if (gamma <= 0.0) fail_validation("gamma must be positive, got ", gamma);
  if (!logits.z_neg) {
    return ag::bce_loss_op(logits.z_pos, targets);
  }
  const Eigen::Index t = logits.z_pos->value.cols();
  Eigen::VectorXd weights(t);
  for (Eigen::Index y = 0; y < t; ++y) {
    weights(y) = is_divergent_logits(logits.z_pos->value(0, y), logits.z_neg->value(0, y)) ? gamma : 1.0;
  }
  return ag::coprediction_loss_op(logits.z_pos, logits.z_neg, targets, weights);
}

}  // namespace copred
