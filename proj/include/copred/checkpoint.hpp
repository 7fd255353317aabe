#pragma once

#include <fstream>
#include <string>

#include "copred/model.hpp"
#include "copred/trainer.hpp"

namespace copred {

inline constexpr const char* k_checkpoint_format = "copred.checkpoint.v1";

struct Checkpoint {
  CoPredictionModel model;
  TrainConfig train_config;
};

// Single JSON archive: backbone weights, soft tokens, mask embeddings,
// verbalizer, vocabulary, and the config snapshot. Doubles are written with
// round-trip precision, so save/load is bit-exact.
inline void save_checkpoint(const CoPredictionModel& model, const TrainConfig& train_config,
                            const std::string& path) {
  nlohmann::json j;
  j["format"] = k_checkpoint_format;
  j["train_config"] = train_config.to_json();
  j["model"] = model.to_json();
  std::ofstream out(path);
  if (!out) fail_runtime("cannot write checkpoint file: ", path);
  out << j.dump();
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail_validation("cannot open checkpoint file: ", path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail_validation("checkpoint ", path, " is not valid JSON: ", e.what());
  }
  if (!j.contains("format") || j["format"] != k_checkpoint_format) {
    fail_validation("checkpoint ", path, " has unsupported format tag (expected ",
                    k_checkpoint_format, ")");
  }
  return Checkpoint{CoPredictionModel::from_json(j.at("model")),
                    TrainConfig::from_json(j.at("train_config"))};
}

}  // namespace copred
