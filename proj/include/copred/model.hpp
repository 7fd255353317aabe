#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "copred/backbone.hpp"
#include "copred/prompt.hpp"

namespace copred {

struct ModelConfig {
  int n_soft = 2;
  bool baseline = false;  // single-mask standard prompt
  TinyBackboneConfig backbone;

  void validate() const {
    if (n_soft < 0) fail_validation("n_soft must be >= 0");
    backbone.validate();
  }

  nlohmann::json to_json() const {
    return {{"n_soft", n_soft}, {"baseline", baseline}, {"backbone", backbone.to_json()}};
  }

  static ModelConfig from_json(const nlohmann::json& j) {
    ModelConfig c;
    c.n_soft = j.at("n_soft").get<int>();
    c.baseline = j.at("baseline").get<bool>();
    c.backbone = TinyBackboneConfig::from_json(j.at("backbone"));
    return c;
  }
};

// Per-label probabilities from the two mask slots.
struct CoPredictionScores {
  Eigen::VectorXd p_pos;
  Eigen::VectorXd p_neg;
};

struct MaskLogits {
  ag::Var z_pos;  // 1 x t
  ag::Var z_neg;  // null in baseline mode
};

// Backbone wrapper holding the trainable prompt pieces: soft tokens, the
// two mask embeddings, and the soft verbalizer. Scoring follows
// sigmoid(h_mask . v_y + b_y) per label, so labels are independent
// Bernoulli variables as the per-label BCE requires.
class CoPredictionModel {
 public:
  CoPredictionModel(TypeVocabulary vocab, ModelConfig cfg)
      : vocab_(std::move(vocab)), cfg_(cfg), backbone_(cfg.backbone), markers_(MarkerMap::standard(cfg.n_soft)) {
    cfg_.validate();
    if (vocab_.size() == 0) fail_validation("model requires a non-empty type vocabulary");
    init_special_tokens();
    init_verbalizer();
    freeze_template_literals();
  }

  const TypeVocabulary& vocab() const { return vocab_; }
  const ModelConfig& config() const { return cfg_; }
  TinyBackbone& backbone() { return backbone_; }
  const MarkerMap& markers() const { return markers_; }
  bool baseline() const { return cfg_.baseline; }

  const std::vector<ag::Var>& soft_vars() const { return soft_vars_; }
  const ag::Var& pmask_var() const { return pmask_var_; }
  const ag::Var& nmask_var() const { return nmask_var_; }
  const ag::Var& verbalizer_weight() const { return verb_weight_; }
  const ag::Var& verbalizer_bias() const { return verb_bias_; }

  // Trims context symmetrically around the mention until the rendered
  // prompt fits max_len; the mention itself is never trimmed.
  MentionExample truncate_to_fit(const MentionExample& example) const {
    const int mention_len = static_cast<int>(example.mention.size());
    const int template_cost = cfg_.n_soft + mention_len + 2 /*belongs to*/ + 1 /*PMASK*/ +
                              (cfg_.baseline ? 0 : 3 /*rather than NMASK*/);
    const int budget = backbone_.max_len() - template_cost - mention_len;
    if (budget < 0) {
      fail_runtime("mention of length ", mention_len,
                   " cannot be preserved within max_len ", backbone_.max_len());
    }
    const int left_len = static_cast<int>(example.left_context.size());
    const int right_len = static_cast<int>(example.right_context.size());
    if (left_len + right_len <= budget) return example;

    int keep_left = std::min(left_len, budget / 2 + budget % 2);
    int keep_right = std::min(right_len, budget - keep_left);
    keep_left = std::min(left_len, budget - keep_right);
    MentionExample trimmed = example;
    trimmed.left_context.assign(example.left_context.end() - keep_left, example.left_context.end());
    trimmed.right_context.assign(example.right_context.begin(),
                                 example.right_context.begin() + keep_right);
    return trimmed;
  }

  // Builds the full scoring graph for one example. Training mode applies
  // embedding dropout.
  MaskLogits forward_graph(const MentionExample& example, bool train_mode = false,
                           double emb_dropout = 0.0, Rng* dropout_rng = nullptr) {
    auto [hidden, rendered] = encode_prompt(example, train_mode, emb_dropout, dropout_rng);
    MaskLogits out;
    out.z_pos = logits_for(ag::row(hidden, rendered.pmask_pos));
    if (!cfg_.baseline) out.z_neg = logits_for(ag::row(hidden, rendered.nmask_pos));
    return out;
  }

  // Evaluation-mode co-prediction scores; requires the two-mask prompt.
  CoPredictionScores score(const MentionExample& example) {
    if (cfg_.baseline) {
      fail_runtime("co-prediction scores are unavailable for a baseline (single-mask) model");
    }
    MaskLogits logits = forward_graph(example);
    CoPredictionScores scores;
    scores.p_pos = to_probs(logits.z_pos);
    scores.p_neg = to_probs(logits.z_neg);
    return scores;
  }

  // PMASK-only probabilities; defined in both modes.
  Eigen::VectorXd score_positive(const MentionExample& example) {
    return to_probs(forward_graph(example).z_pos);
  }

  // Hidden vector at the PMASK position (embedding-export hook).
  Eigen::VectorXd pmask_hidden(const MentionExample& example) {
    auto [hidden, rendered] = encode_prompt(example, false, 0.0, nullptr);
    return hidden->value.row(rendered.pmask_pos).transpose();
  }

  // All trainable parameters: backbone registry (minus the frozen template
  // anchor words) plus the prompt pieces.
  std::vector<ag::Var> parameters() const {
    std::vector<ag::Var> params;
    params.reserve(backbone_.parameters().size() + soft_vars_.size() + 4);
    for (const auto& p : backbone_.parameters()) {
      if (p->trainable) params.push_back(p);
    }
    params.insert(params.end(), soft_vars_.begin(), soft_vars_.end());
    params.push_back(pmask_var_);
    params.push_back(nmask_var_);
    params.push_back(verb_weight_);
    params.push_back(verb_bias_);
    return params;
  }

  // Touches every token of a dataset so the embedding table (and with it
  // the parameter registry) is complete before training starts.
  void register_tokens(const Dataset& ds) {
    for (const auto& ex : ds.examples) {
      for (const auto& tok : ex.left_context) backbone_.token_var(tok);
      for (const auto& tok : ex.mention) backbone_.token_var(tok);
      for (const auto& tok : ex.right_context) backbone_.token_var(tok);
    }
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["model_config"] = cfg_.to_json();
    j["vocabulary"] = vocab_.types();
    j["backbone"] = backbone_.to_json();
    nlohmann::json soft = nlohmann::json::array();
    for (const auto& s : soft_vars_) soft.push_back(matrix_to_json(s->value));
    j["soft"] = std::move(soft);
    j["pmask"] = matrix_to_json(pmask_var_->value);
    j["nmask"] = matrix_to_json(nmask_var_->value);
    j["verbalizer"] = {{"weight", matrix_to_json(verb_weight_->value)},
                       {"bias", matrix_to_json(verb_bias_->value)}};
    return j;
  }

  static CoPredictionModel from_json(const nlohmann::json& j) {
    TypeVocabulary vocab = TypeVocabulary::from_paths(
        j.at("vocabulary").get<std::vector<std::string>>(), "<checkpoint>");
    CoPredictionModel model(std::move(vocab), ModelConfig::from_json(j.at("model_config")));
    model.backbone_ = TinyBackbone::from_json(j.at("backbone"));
    const auto& soft = j.at("soft");
    if (soft.size() != model.soft_vars_.size()) fail_validation("checkpoint soft token count mismatch");
    for (std::size_t i = 0; i < model.soft_vars_.size(); ++i) {
      model.soft_vars_[i]->value = matrix_from_json(soft[i]);
    }
    model.pmask_var_->value = matrix_from_json(j.at("pmask"));
    model.nmask_var_->value = matrix_from_json(j.at("nmask"));
    model.verb_weight_->value = matrix_from_json(j.at("verbalizer").at("weight"));
    model.verb_bias_->value = matrix_from_json(j.at("verbalizer").at("bias"));
    model.freeze_template_literals();
    return model;
  }

 private:
  // Soft words are randomly initialized trainable tokens; both mask
  // embeddings start as copies of the backbone's original mask token and
  // are trained independently afterwards.
  void init_special_tokens() {
    Rng rng = Rng(cfg_.backbone.seed).fork("soft-init");
    for (int i = 0; i < cfg_.n_soft; ++i) {
      Eigen::MatrixXd value(1, backbone_.hidden_dim());
      for (Eigen::Index c = 0; c < value.cols(); ++c) {
        value(0, c) = rng.normal(0.0, cfg_.backbone.init_std);
      }
      soft_vars_.push_back(ag::parameter(std::move(value), concat("soft", i), true));
    }
    const Eigen::RowVectorXd mask = backbone_.original_mask_embedding();
    pmask_var_ = ag::parameter(mask, "pmask", true);
    nmask_var_ = ag::parameter(mask, "nmask", true);
    for (int i = 0; i < cfg_.n_soft; ++i) special_.emplace(markers_.soft(i), soft_vars_[static_cast<std::size_t>(i)]);
    special_.emplace(markers_.pmask_marker, pmask_var_);
    special_.emplace(markers_.nmask_marker, nmask_var_);
  }

  // Soft verbalizer: v_y initialized to the mean embedding of the words in
  // the type path; per-label bias starts at zero.
  void init_verbalizer() {
    const Eigen::Index t = static_cast<Eigen::Index>(vocab_.size());
    Eigen::MatrixXd weight(t, backbone_.hidden_dim());
    for (Eigen::Index y = 0; y < t; ++y) {
      const std::string& path = vocab_.path_of(static_cast<int>(y));
      const std::vector<std::string> words = path_words(path);
      if (words.empty()) {
        fail_validation("type \"", path, "\" tokenizes to no words for verbalizer initialization");
      }
      Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(backbone_.hidden_dim());
      for (const auto& w : words) mean += backbone_.token_embedding(w);
      weight.row(y) = mean / static_cast<double>(words.size());
    }
    verb_weight_ = ag::parameter(std::move(weight), "verbalizer.weight", true);
    verb_bias_ = ag::parameter(Eigen::MatrixXd::Zero(1, t), "verbalizer.bias", false);
  }

  // The template's anchor words stay fixed: the trainable prompt capacity
  // lives in the soft tokens and the two mask embeddings, so the anchors
  // keep steering the masks toward their opposite roles.
  void freeze_template_literals() {
    for (const char* word : {"belongs", "to", "rather", "than"}) {
      backbone_.token_var(word)->trainable = false;
    }
  }

  std::pair<ag::Var, RenderedPrompt> encode_prompt(const MentionExample& example, bool train_mode,
                                                   double emb_dropout, Rng* dropout_rng) {
    const MentionExample trimmed = truncate_to_fit(example);
    const PromptInstance inst = build_prompt_instance(trimmed, cfg_.n_soft, cfg_.baseline);
    const RenderedPrompt rendered = render(inst, markers_);
    std::vector<ag::Var> rows;
    rows.reserve(rendered.tokens.size());
    for (const auto& tok : rendered.tokens) {
      auto special = special_.find(tok);
      rows.push_back(special != special_.end() ? special->second : backbone_.token_var(tok));
    }
    ag::Var hidden = backbone_.encode_graph(ag::concat_rows(rows), train_mode, emb_dropout, dropout_rng);
    return {hidden, rendered};
  }

  ag::Var logits_for(const ag::Var& hidden_row) {
    return ag::add_row_broadcast(ag::matmul(hidden_row, ag::transpose(verb_weight_)), verb_bias_);
  }

  static Eigen::VectorXd to_probs(const ag::Var& logits) {
    Eigen::VectorXd p(logits->value.cols());
    for (Eigen::Index y = 0; y < p.size(); ++y) p(y) = ag::sigmoid(logits->value(0, y));
    return p;
  }

  TypeVocabulary vocab_;
  ModelConfig cfg_;
  TinyBackbone backbone_;
  MarkerMap markers_;
  std::vector<ag::Var> soft_vars_;
  ag::Var pmask_var_;
  ag::Var nmask_var_;
  ag::Var verb_weight_;
  ag::Var verb_bias_;
  std::unordered_map<std::string, ag::Var> special_;
};

}  // namespace copred
