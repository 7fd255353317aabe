#pragma once

#include <optional>
#include <string>

#include "copred/backbone.hpp"
#include "copred/corrector.hpp"
#include "copred/trainer.hpp"

namespace copred {

// Bundled defaults per dataset. The three published presets carry the
// reported hyperparameters for BERT-base fine-tuning; "tiny" is the
// desk-scale configuration for the bundled random-init backbone (fast,
// no downloads) and is also what the acceptance benchmark runs.
struct Preset {
  std::string name;
  TrainConfig train;
  ModelConfig model;
  double epsilon_distant = 0.2;                 // margin for distantly annotated data
  std::optional<double> epsilon_chatgpt;        // margin for LLM-annotated data
  std::optional<double> epsilon_crowd;          // margin for crowdsourced data
  std::size_t annotator_min_frequency = 0;
};

inline Preset preset_ontonotes() {
  Preset p;
  p.name = "ontonotes";
  p.train.batch_size = 16;
  p.train.learning_rate = 3e-6;
  p.train.adam_epsilon = 1e-8;
  p.train.warmup_ratio = 0.0;
  p.train.embedding_dropout = 0.2;
  p.train.weight_decay = 0.01;
  p.train.grad_clip = 0.1;
  p.train.gamma_min = 0.1;
  p.epsilon_distant = 0.2;
  p.epsilon_chatgpt = 0.3;
  p.annotator_min_frequency = 10;
  return p;
}

inline Preset preset_wiki() {
  Preset p = preset_ontonotes();
  p.name = "wiki";
  p.epsilon_distant = 0.05;
  p.epsilon_chatgpt = 0.5;
  p.annotator_min_frequency = 20;
  return p;
}

inline Preset preset_ultrafine() {
  Preset p = preset_ontonotes();
  p.name = "ultrafine";
  p.train.learning_rate = 2e-5;
  p.train.gamma_min = 0.005;
  p.epsilon_distant = 0.8;
  p.epsilon_chatgpt.reset();
  p.epsilon_crowd = 0.8;
  p.annotator_min_frequency = 0;
  return p;
}

// Desk-scale defaults for the tiny backbone on synthetic corpora,
// calibrated on the 8-type / 200-example benchmark.
inline Preset preset_tiny() {
  Preset p;
  p.name = "tiny";
  p.train.batch_size = 16;
  p.train.learning_rate = 5e-3;
  p.train.adam_epsilon = 1e-8;
  p.train.warmup_ratio = 0.0;
  p.train.embedding_dropout = 0.2;
  p.train.weight_decay = 0.01;
  p.train.grad_clip = 1.0;
  p.train.gamma_min = 0.005;
  p.train.gamma_decay = 0.7;
  p.train.max_epochs = 50;
  p.train.patience = 8;
  p.model.n_soft = 2;
  p.model.backbone.hidden_dim = 32;
  p.model.backbone.n_layers = 2;
  p.model.backbone.ffn_dim = 64;
  p.model.backbone.max_len = 48;
  p.model.backbone.init_std = 0.1;
  p.epsilon_distant = 0.8;
  p.epsilon_chatgpt = 0.8;
  p.epsilon_crowd = 0.8;
  return p;
}

inline Preset preset_by_name(const std::string& name) {
  if (name == "ontonotes") return preset_ontonotes();
  if (name == "wiki") return preset_wiki();
  if (name == "ultrafine") return preset_ultrafine();
  if (name == "tiny") return preset_tiny();
  fail_validation("unknown preset \"", name, "\" (expected ontonotes|wiki|ultrafine|tiny)");
}

// Margin threshold keyed by annotation source, following the published
// per-method values.
inline double epsilon_for_source(const Preset& preset, const std::string& source) {
  if (source == "distant") return preset.epsilon_distant;
  if (source == "chatgpt") {
    if (!preset.epsilon_chatgpt) {
      fail_validation("preset ", preset.name, " has no chatgpt margin; pass --epsilon explicitly");
    }
    return *preset.epsilon_chatgpt;
  }
  if (source == "crowd") {
    if (!preset.epsilon_crowd) {
      fail_validation("preset ", preset.name, " has no crowd margin; pass --epsilon explicitly");
    }
    return *preset.epsilon_crowd;
  }
  fail_validation("unknown annotation source \"", source, "\" (expected distant|chatgpt|crowd)");
}

}  // namespace copred
