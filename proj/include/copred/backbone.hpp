#pragma once

#include <concepts>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "copred/autograd.hpp"
#include "copred/json_util.hpp"
#include "copred/rng.hpp"

namespace copred {

// Minimal contract a masked language model must satisfy: per-position
// encoding, a token embedding table, and fixed dimensions. Anything
// fulfilling it can sit behind the co-prediction model; the tiny
// random-init transformer below is the test/bench implementation.
template <class B>
concept MaskedLmBackbone = requires(B b, const B cb, std::span<const std::string> tokens,
                                    const std::string& token) {
  { cb.hidden_dim() } -> std::convertible_to<int>;
  { cb.max_len() } -> std::convertible_to<int>;
  { b.token_embedding(token) } -> std::convertible_to<Eigen::RowVectorXd>;
  { b.encode(tokens) } -> std::convertible_to<Eigen::MatrixXd>;
};

struct TinyBackboneConfig {
  int hidden_dim = 32;
  int n_layers = 2;
  int ffn_dim = 64;
  int max_len = 64;
  double init_std = 0.02;
  double ln_eps = 1e-5;
  std::uint64_t seed = 0;

  void validate() const {
    if (hidden_dim < 1 || n_layers < 0 || ffn_dim < 1 || max_len < 4) {
      fail_validation("tiny backbone config out of range");
    }
    if (init_std <= 0.0) fail_validation("init_std must be positive");
  }

  nlohmann::json to_json() const {
    return {{"hidden_dim", hidden_dim}, {"n_layers", n_layers}, {"ffn_dim", ffn_dim},
            {"max_len", max_len},       {"init_std", init_std}, {"ln_eps", ln_eps},
            {"seed", seed}};
  }

  static TinyBackboneConfig from_json(const nlohmann::json& j) {
    TinyBackboneConfig c;
    c.hidden_dim = j.at("hidden_dim").get<int>();
    c.n_layers = j.at("n_layers").get<int>();
    c.ffn_dim = j.at("ffn_dim").get<int>();
    c.max_len = j.at("max_len").get<int>();
    c.init_std = j.at("init_std").get<double>();
    c.ln_eps = j.at("ln_eps").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
  }
};

// Two-layer post-LN transformer encoder with single-head self-attention.
// Token embeddings are created on first sight, seeded from the token text
// so their initial values do not depend on encounter order. Everything is
// double precision and single-threaded: runs are bit-reproducible.
class TinyBackbone {
 public:
  static constexpr const char* k_mask_token = "[MASK]";

  explicit TinyBackbone(TinyBackboneConfig cfg) : cfg_(cfg) {
    cfg_.validate();
    Rng rng = Rng(cfg_.seed).fork("backbone-init");
    pos_emb_ = add_param(normal_matrix(cfg_.max_len, cfg_.hidden_dim, rng), "pos_emb", true);
    layers_.reserve(static_cast<std::size_t>(cfg_.n_layers));
    for (int l = 0; l < cfg_.n_layers; ++l) {
      Layer layer;
      const std::string p = concat("layer", l, ".");
      layer.wq = add_param(normal_matrix(cfg_.hidden_dim, cfg_.hidden_dim, rng), p + "wq", true);
      layer.bq = add_param(Eigen::MatrixXd::Zero(1, cfg_.hidden_dim), p + "bq", false);
      layer.wk = add_param(normal_matrix(cfg_.hidden_dim, cfg_.hidden_dim, rng), p + "wk", true);
      layer.bk = add_param(Eigen::MatrixXd::Zero(1, cfg_.hidden_dim), p + "bk", false);
      layer.wv = add_param(normal_matrix(cfg_.hidden_dim, cfg_.hidden_dim, rng), p + "wv", true);
      layer.bv = add_param(Eigen::MatrixXd::Zero(1, cfg_.hidden_dim), p + "bv", false);
      layer.wo = add_param(normal_matrix(cfg_.hidden_dim, cfg_.hidden_dim, rng), p + "wo", true);
      layer.bo = add_param(Eigen::MatrixXd::Zero(1, cfg_.hidden_dim), p + "bo", false);
      layer.ln1_g = add_param(Eigen::MatrixXd::Ones(1, cfg_.hidden_dim), p + "ln1_g", false);
      layer.ln1_b = add_param(Eigen::MatrixXd::Zero(1, cfg_.hidden_dim), p + "ln1_b", false);
      layer.w1 = add_param(normal_matrix(cfg_.hidden_dim, cfg_.ffn_dim, rng), p + "w1", true);
      layer.b1 = add_param(Eigen::MatrixXd::Zero(1, cfg_.ffn_dim), p + "b1", false);
      layer.w2 = add_param(normal_matrix(cfg_.ffn_dim, cfg_.hidden_dim, rng), p + "w2", true);
      layer.b2 = add_param(Eigen::MatrixXd::Zero(1, cfg_.hidden_dim), p + "b2", false);
      layer.ln2_g = add_param(Eigen::MatrixXd::Ones(1, cfg_.hidden_dim), p + "ln2_g", false);
      layer.ln2_b = add_param(Eigen::MatrixXd::Zero(1, cfg_.hidden_dim), p + "ln2_b", false);
      layers_.push_back(std::move(layer));
    }
  }

  int hidden_dim() const { return cfg_.hidden_dim; }
  int max_len() const { return cfg_.max_len; }
  const TinyBackboneConfig& config() const { return cfg_; }

  // Trainable embedding for a token, created on demand.
  ag::Var token_var(const std::string& token) {
    auto it = token_table_.find(token);
    if (it != token_table_.end()) return it->second;
    Rng token_rng(splitmix64(cfg_.seed ^ fnv1a64(token) ^ 0x7061726d5f746f6bull));
    ag::Var v = add_param(normal_matrix(1, cfg_.hidden_dim, token_rng), "tok:" + token, true);
    token_table_.emplace(token, v);
    token_order_.push_back(token);
    return v;
  }

  Eigen::RowVectorXd token_embedding(const std::string& token) {
    return token_var(token)->value.row(0);
  }

  Eigen::RowVectorXd original_mask_embedding() { return token_embedding(k_mask_token); }

  // Encoder over an already-embedded sequence (n x hidden). Dropout applies
  // to the summed token+position embedding, training mode only.
  ag::Var encode_graph(const ag::Var& input, bool train_mode = false, double emb_dropout = 0.0,
                       Rng* dropout_rng = nullptr) {
    const Eigen::Index n = input->value.rows();
    if (n > cfg_.max_len) {
      fail_runtime("sequence length ", n, " exceeds backbone max_len ", cfg_.max_len);
    }
    ag::Var x = ag::add(input, ag::slice_rows(pos_emb_, 0, n));
    if (train_mode && emb_dropout > 0.0) {
      if (!dropout_rng) fail_runtime("dropout requires an rng in training mode");
      x = ag::dropout(x, emb_dropout, *dropout_rng);
    }
    const double inv_sqrt_h = 1.0 / std::sqrt(static_cast<double>(cfg_.hidden_dim));
    for (const auto& layer : layers_) {
      ag::Var q = ag::add_row_broadcast(ag::matmul(x, layer.wq), layer.bq);
      ag::Var k = ag::add_row_broadcast(ag::matmul(x, layer.wk), layer.bk);
      ag::Var v = ag::add_row_broadcast(ag::matmul(x, layer.wv), layer.bv);
      ag::Var attn = ag::matmul(ag::softmax_rows(ag::scale(ag::matmul(q, ag::transpose(k)), inv_sqrt_h)), v);
      ag::Var attn_out = ag::add_row_broadcast(ag::matmul(attn, layer.wo), layer.bo);
      x = ag::layer_norm_rows(ag::add(x, attn_out), layer.ln1_g, layer.ln1_b, cfg_.ln_eps);
      ag::Var hidden = ag::gelu(ag::add_row_broadcast(ag::matmul(x, layer.w1), layer.b1));
      ag::Var ffn_out = ag::add_row_broadcast(ag::matmul(hidden, layer.w2), layer.b2);
      x = ag::layer_norm_rows(ag::add(x, ffn_out), layer.ln2_g, layer.ln2_b, cfg_.ln_eps);
    }
    return x;
  }

  // Evaluation-mode encoding of raw tokens (the plain contract surface).
  Eigen::MatrixXd encode(std::span<const std::string> tokens) {
    std::vector<ag::Var> rows;
    rows.reserve(tokens.size());
    for (const auto& tok : tokens) rows.push_back(token_var(tok));
    return encode_graph(ag::concat_rows(rows))->value;
  }

  const std::vector<ag::Var>& parameters() const { return registry_; }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["config"] = cfg_.to_json();
    nlohmann::json params = nlohmann::json::object();
    for (const auto& p : registry_) params[p->name] = matrix_to_json(p->value);
    j["params"] = std::move(params);
    nlohmann::json order = nlohmann::json::array();
    for (const auto& tok : token_order_) order.push_back(tok);
    j["token_order"] = std::move(order);
    return j;
  }

  static TinyBackbone from_json(const nlohmann::json& j) {
    TinyBackbone b(TinyBackboneConfig::from_json(j.at("config")));
    for (const auto& tok : j.at("token_order")) b.token_var(tok.get<std::string>());
    const auto& params = j.at("params");
    for (auto& p : b.registry_) {
      if (!params.contains(p->name)) fail_validation("checkpoint missing parameter ", p->name);
      Eigen::MatrixXd value = matrix_from_json(params.at(p->name));
      if (value.rows() != p->value.rows() || value.cols() != p->value.cols()) {
        fail_validation("checkpoint parameter ", p->name, " has wrong shape");
      }
      p->value = std::move(value);
    }
    return b;
  }

 private:
  struct Layer {
    ag::Var wq, bq, wk, bk, wv, bv, wo, bo, ln1_g, ln1_b, w1, b1, w2, b2, ln2_g, ln2_b;
  };

  Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) const {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.normal(0.0, cfg_.init_std);
    }
    return m;
  }

  ag::Var add_param(Eigen::MatrixXd value, const std::string& name, bool decay) {
    ag::Var v = ag::parameter(std::move(value), name, decay);
    registry_.push_back(v);
    return v;
  }

  TinyBackboneConfig cfg_;
  ag::Var pos_emb_;
  std::vector<Layer> layers_;
  std::unordered_map<std::string, ag::Var> token_table_;
  std::vector<std::string> token_order_;
  std::vector<ag::Var> registry_;
};

static_assert(MaskedLmBackbone<TinyBackbone>);

}  // namespace copred
