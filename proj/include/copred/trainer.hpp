#pragma once

#include <algorithm>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "copred/dataset.hpp"
#include "copred/loss.hpp"
#include "copred/metrics.hpp"
#include "copred/model.hpp"

namespace copred {

struct TrainConfig {
  int batch_size = 16;
  double learning_rate = 3e-6;
  double adam_epsilon = 1e-8;
  double warmup_ratio = 0.0;
  double embedding_dropout = 0.2;
  double weight_decay = 0.01;
  double grad_clip = 0.1;
  double gamma_min = 0.1;
  double gamma_decay = 0.7;  // per-epoch multiplicative factor
  int max_epochs = 50;
  int patience = 5;
  std::uint64_t seed = 42;
  bool baseline_mode = false;
  std::string dev_metric = "macro_f1";  // macro_f1 | micro_f1 | strict_accuracy
  bool quiet = false;

  void validate() const {
    if (batch_size < 1) fail_validation("batch_size must be >= 1");
    if (learning_rate <= 0.0) fail_validation("learning_rate must be positive");
    if (adam_epsilon <= 0.0) fail_validation("adam_epsilon must be positive");
    if (warmup_ratio < 0.0 || warmup_ratio > 1.0) fail_validation("warmup_ratio must be in [0,1]");
    if (embedding_dropout < 0.0 || embedding_dropout >= 1.0) {
      fail_validation("embedding_dropout must be in [0,1)");
    }
    if (weight_decay < 0.0) fail_validation("weight_decay must be >= 0");
    if (grad_clip <= 0.0) fail_validation("grad_clip must be positive");
    if (gamma_min <= 0.0 || gamma_min > 1.0) fail_validation("gamma_min must be in (0,1]");
    if (gamma_decay <= 0.0 || gamma_decay > 1.0) fail_validation("gamma_decay must be in (0,1]");
    if (max_epochs < 1) fail_validation("max_epochs must be >= 1");
    if (patience < 1) fail_validation("patience must be >= 1");
    if (dev_metric != "macro_f1" && dev_metric != "micro_f1" && dev_metric != "strict_accuracy") {
      fail_validation("dev_metric must be macro_f1, micro_f1 or strict_accuracy, got ", dev_metric);
    }
  }

  nlohmann::json to_json() const {
    return {{"batch_size", batch_size},
            {"learning_rate", learning_rate},
            {"adam_epsilon", adam_epsilon},
            {"warmup_ratio", warmup_ratio},
            {"embedding_dropout", embedding_dropout},
            {"weight_decay", weight_decay},
            {"grad_clip", grad_clip},
            {"gamma_min", gamma_min},
            {"gamma_decay", gamma_decay},
            {"max_epochs", max_epochs},
            {"patience", patience},
            {"seed", seed},
            {"baseline_mode", baseline_mode},
            {"dev_metric", dev_metric}};
  }

  static TrainConfig from_json(const nlohmann::json& j) {
    TrainConfig c;
    c.batch_size = j.at("batch_size").get<int>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.adam_epsilon = j.at("adam_epsilon").get<double>();
    c.warmup_ratio = j.at("warmup_ratio").get<double>();
    c.embedding_dropout = j.at("embedding_dropout").get<double>();
    c.weight_decay = j.at("weight_decay").get<double>();
    c.grad_clip = j.at("grad_clip").get<double>();
    c.gamma_min = j.at("gamma_min").get<double>();
    c.gamma_decay = j.at("gamma_decay").get<double>();
    c.max_epochs = j.at("max_epochs").get<int>();
    c.patience = j.at("patience").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.baseline_mode = j.at("baseline_mode").get<bool>();
    c.dev_metric = j.value("dev_metric", "macro_f1");
    return c;
  }
};

// gamma starts at 1, decays multiplicatively per epoch, and floors at
// gamma_min (the Table-8 "loss weight" value).
inline double gamma_schedule(int epoch, const TrainConfig& cfg) {
  if (epoch < 0) fail_validation("epoch must be >= 0");
  return std::max(cfg.gamma_min, std::pow(cfg.gamma_decay, static_cast<double>(epoch)));
}

struct EpochStats {
  int epoch = 0;
  double divergence_rate = 0.0;  // fraction of (example,label) pairs divergent on train
  double dev_macro_f1 = 0.0;
  double train_loss = 0.0;
  double gamma = 1.0;
};

using DivergenceTrace = std::vector<EpochStats>;

struct TrainResult {
  DivergenceTrace trace;
  int best_epoch = -1;
  double best_dev_macro_f1 = 0.0;
};

inline void write_trace_csv(const DivergenceTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail_runtime("cannot write trace file: ", path);
  out << "epoch,divergence_rate,dev_macro_f1\n";
  out.precision(17);
  for (const auto& row : trace) {
    out << row.epoch << ',' << row.divergence_rate << ',' << row.dev_macro_f1 << '\n';
  }
}

inline DivergenceTrace read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail_validation("cannot open trace file: ", path);
  DivergenceTrace trace;
  std::string line;
  if (!std::getline(in, line)) fail_validation("empty trace file: ", path);
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    EpochStats row;
    if (std::sscanf(line.c_str(), "%d,%lf,%lf", &row.epoch, &row.divergence_rate,
                    &row.dev_macro_f1) != 3) {
      fail_validation(path, ": malformed trace row \"", line, "\"");
    }
    trace.push_back(row);
  }
  return trace;
}

// Decoupled weight decay; decay applies only to parameters flagged for it
// (weight matrices and embeddings, not biases or layer norms).
class AdamW {
 public:
  AdamW(std::vector<ag::Var> params, const TrainConfig& cfg)
      : params_(std::move(params)), cfg_(cfg) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const auto& p : params_) {
      m_.push_back(Eigen::MatrixXd::Zero(p->value.rows(), p->value.cols()));
      v_.push_back(Eigen::MatrixXd::Zero(p->value.rows(), p->value.cols()));
    }
  }

  const std::vector<ag::Var>& params() const { return params_; }

  void clip_gradients(double max_norm) {
    double sq = 0.0;
    for (const auto& p : params_) sq += p->grad.squaredNorm();
    const double norm = std::sqrt(sq);
    if (norm > max_norm && norm > 0.0) {
      const double scale = max_norm / norm;
      for (const auto& p : params_) p->grad *= scale;
    }
  }

  void step(double lr) {
    ++t_;
    const double bias1 = 1.0 - std::pow(beta1_, t_);
    const double bias2 = 1.0 - std::pow(beta2_, t_);
    for (std::size_t i = 0; i < params_.size(); ++i) {
      auto& p = *params_[i];
      m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * p.grad;
      v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * p.grad.cwiseProduct(p.grad);
      const Eigen::MatrixXd m_hat = m_[i] / bias1;
      const Eigen::MatrixXd v_hat = v_[i] / bias2;
      p.value -= lr * (m_hat.array() / (v_hat.array().sqrt() + cfg_.adam_epsilon)).matrix();
      if (p.decay && cfg_.weight_decay > 0.0) {
        p.value -= lr * cfg_.weight_decay * p.value;
      }
    }
  }

 private:
  std::vector<ag::Var> params_;
  TrainConfig cfg_;
  std::vector<Eigen::MatrixXd> m_;
  std::vector<Eigen::MatrixXd> v_;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  long t_ = 0;
};

// Dev-set prediction rule: labels whose PMASK score clears 0.5, falling
// back to the top-scoring label so predictions are never empty.
inline LabelSet predict_labels(CoPredictionModel& model, const MentionExample& example,
                               double threshold = 0.5) {
  const Eigen::VectorXd p = model.score_positive(example);
  LabelSet out;
  for (Eigen::Index y = 0; y < p.size(); ++y) {
    if (p(y) >= threshold) out.insert(static_cast<int>(y));
  }
  if (out.empty()) {
    Eigen::Index best = 0;
    p.maxCoeff(&best);
    out.insert(static_cast<int>(best));
  }
  return out;
}

inline MetricReport dev_report(CoPredictionModel& model, const Dataset& dev) {
  std::vector<LabelSet> predictions, gold;
  predictions.reserve(dev.size());
  gold.reserve(dev.size());
  for (const auto& ex : dev.examples) {
    predictions.push_back(predict_labels(model, ex));
    gold.push_back(ex.labels);
  }
  return evaluate(predictions, gold);
}

inline double dev_macro_f1(CoPredictionModel& model, const Dataset& dev) {
  return dev_report(model, dev).macro_f1;
}

inline double metric_by_name(const MetricReport& report, const std::string& name) {
  if (name == "macro_f1") return report.macro_f1;
  if (name == "micro_f1") return report.micro_f1;
  if (name == "strict_accuracy") return report.strict_accuracy;
  fail_validation("unknown dev metric \"", name, "\"");
}

// Fraction of (example, label) pairs with divergent co-predictions; zero in
// baseline mode, which has a single mask.
inline double divergence_rate(CoPredictionModel& model, const Dataset& ds) {
  if (model.baseline()) return 0.0;
  std::size_t divergent = 0, total = 0;
  for (const auto& ex : ds.examples) {
    const CoPredictionScores scores = model.score(ex);
    for (bool flag : detect_divergent(scores)) {
      divergent += flag ? 1 : 0;
      ++total;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(divergent) / static_cast<double>(total);
}

// Fine-tunes the model in place. Early stopping keeps the parameter state
// from the epoch with the best dev macro F1 and restores it before
// returning; divergence on the training set is recorded every epoch.
inline TrainResult train(CoPredictionModel& model, const Dataset& train_set, const Dataset& dev_set,
                         const TrainConfig& cfg) {
  cfg.validate();
  if (train_set.examples.empty()) fail_validation("train split is empty");
  if (dev_set.examples.empty()) fail_validation("dev split is empty");
  require_labeled(train_set, "train split");
  require_labeled(dev_set, "dev split");
  if (!(train_set.vocabulary == model.vocab()) || !(dev_set.vocabulary == model.vocab())) {
    fail_validation("dataset vocabulary does not match the model vocabulary");
  }
  if (cfg.baseline_mode != model.baseline()) {
    fail_validation("baseline_mode does not match the model's prompt mode");
  }

  // Freeze the embedding table (and with it the parameter registry) now so
  // the optimizer state and best-epoch snapshots stay aligned.
  model.register_tokens(train_set);
  model.register_tokens(dev_set);

  const Eigen::Index t = static_cast<Eigen::Index>(model.vocab().size());
  std::vector<Eigen::VectorXd> targets;
  targets.reserve(train_set.size());
  for (const auto& ex : train_set.examples) {
    Eigen::VectorXd target = Eigen::VectorXd::Zero(t);
    for (int y : ex.labels) target(y) = 1.0;
    targets.push_back(std::move(target));
  }

  AdamW optimizer(model.parameters(), cfg);
  Rng root(cfg.seed);
  Rng shuffle_rng = root.fork("shuffle");
  Rng dropout_rng = root.fork("dropout");

  const long steps_per_epoch =
      (static_cast<long>(train_set.size()) + cfg.batch_size - 1) / cfg.batch_size;
  const long total_steps = steps_per_epoch * cfg.max_epochs;
  const long warmup_steps = static_cast<long>(cfg.warmup_ratio * static_cast<double>(total_steps));

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult result;
  std::vector<Eigen::MatrixXd> best_state;
  int epochs_without_improvement = 0;
  long step = 0;

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    const double gamma = gamma_schedule(epoch, cfg);
    shuffle_rng.shuffle(order);

    double epoch_loss = 0.0;
    for (std::size_t batch_start = 0; batch_start < order.size();
         batch_start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t batch_end =
          std::min(order.size(), batch_start + static_cast<std::size_t>(cfg.batch_size));
      ag::zero_grad(optimizer.params());

      std::vector<ag::Var> losses;
      losses.reserve(batch_end - batch_start);
      for (std::size_t i = batch_start; i < batch_end; ++i) {
        const std::size_t idx = order[i];
        MaskLogits logits = model.forward_graph(train_set.examples[idx], true,
                                                cfg.embedding_dropout, &dropout_rng);
        losses.push_back(coprediction_loss_graph(logits, targets[idx], gamma));
      }
      ag::Var batch_loss =
          ag::scale(ag::sum_vars(losses), 1.0 / static_cast<double>(batch_end - batch_start));
      if (!std::isfinite(batch_loss->value(0, 0))) {
        fail_runtime("non-finite training loss at epoch ", epoch, "; check learning rate (",
                     cfg.learning_rate, ") and gradient clip (", cfg.grad_clip, ")");
      }
      epoch_loss += batch_loss->value(0, 0) * static_cast<double>(batch_end - batch_start);

      ag::backward(batch_loss);
      optimizer.clip_gradients(cfg.grad_clip);
      ++step;
      const double warm =
          (warmup_steps > 0 && step <= warmup_steps)
              ? static_cast<double>(step) / static_cast<double>(warmup_steps)
              : 1.0;
      optimizer.step(cfg.learning_rate * warm);
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.gamma = gamma;
    stats.train_loss = epoch_loss / static_cast<double>(train_set.size());
    stats.divergence_rate = divergence_rate(model, train_set);
    // holds the configured dev metric; macro F1 unless overridden
    stats.dev_macro_f1 = metric_by_name(dev_report(model, dev_set), cfg.dev_metric);
    result.trace.push_back(stats);

    if (!cfg.quiet) {
      std::cout << "epoch " << epoch << "  loss " << stats.train_loss << "  divergence "
                << stats.divergence_rate << "  dev_macro_f1 " << stats.dev_macro_f1 << "  gamma "
                << gamma << '\n';
    }

    if (result.best_epoch < 0 || stats.dev_macro_f1 > result.best_dev_macro_f1) {
      result.best_epoch = epoch;
      result.best_dev_macro_f1 = stats.dev_macro_f1;
      best_state.clear();
      for (const auto& p : optimizer.params()) best_state.push_back(p->value);
      epochs_without_improvement = 0;
    } else {
      ++epochs_without_improvement;
      if (epochs_without_improvement >= cfg.patience) break;
    }
  }

  const auto& params = optimizer.params();
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = best_state[i];
  return result;
}

}  // namespace copred
