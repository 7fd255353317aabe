#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "copred/common.hpp"
#include "copred/rng.hpp"

// Minimal reverse-mode tape over Eigen matrices. Graphs are built per
// forward pass; parameters are long-lived nodes whose gradients accumulate
// until the optimizer clears them.
namespace copred::ag {

struct Node;
using Var = std::shared_ptr<Node>;

struct Node {
  Eigen::MatrixXd value;
  Eigen::MatrixXd grad;
  std::vector<Var> parents;
  std::function<void(Node&)> backprop;
  bool trainable = false;
  bool decay = false;  // include in weight decay (matrices yes, biases/LN no)
  std::string name;    // parameters only

  explicit Node(Eigen::MatrixXd v) : value(std::move(v)) {
    grad = Eigen::MatrixXd::Zero(value.rows(), value.cols());
  }
};

inline Var constant(Eigen::MatrixXd value) { return std::make_shared<Node>(std::move(value)); }

inline Var parameter(Eigen::MatrixXd value, std::string name, bool decay) {
  Var v = std::make_shared<Node>(std::move(value));
  v->trainable = true;
  v->decay = decay;
  v->name = std::move(name);
  return v;
}

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Numerically stable binary cross-entropy on a logit.
inline double bce_with_logits(double z, double target) {
  return std::max(z, 0.0) - z * target + std::log1p(std::exp(-std::abs(z)));
}

namespace detail {
inline Var make_op(Eigen::MatrixXd value, std::vector<Var> parents,
                   std::function<void(Node&)> backprop) {
  Var v = std::make_shared<Node>(std::move(value));
  v->parents = std::move(parents);
  v->backprop = std::move(backprop);
  return v;
}
}  // namespace detail

inline Var add(const Var& a, const Var& b) {
  return detail::make_op(a->value + b->value, {a, b}, [a, b](Node& out) {
    a->grad += out.grad;
    b->grad += out.grad;
  });
}

inline Var sub(const Var& a, const Var& b) {
  return detail::make_op(a->value - b->value, {a, b}, [a, b](Node& out) {
    a->grad += out.grad;
    b->grad -= out.grad;
  });
}

inline Var scale(const Var& a, double s) {
  return detail::make_op(a->value * s, {a}, [a, s](Node& out) { a->grad += out.grad * s; });
}

inline Var matmul(const Var& a, const Var& b) {
  return detail::make_op(a->value * b->value, {a, b}, [a, b](Node& out) {
    a->grad += out.grad * b->value.transpose();
    b->grad += a->value.transpose() * out.grad;
  });
}

inline Var transpose(const Var& a) {
  return detail::make_op(a->value.transpose(), {a},
                         [a](Node& out) { a->grad += out.grad.transpose(); });
}

// X (n x c) plus a bias row (1 x c).
inline Var add_row_broadcast(const Var& x, const Var& bias) {
  Eigen::MatrixXd v = x->value;
  v.rowwise() += bias->value.row(0);
  return detail::make_op(std::move(v), {x, bias}, [x, bias](Node& out) {
    x->grad += out.grad;
    bias->grad.row(0) += out.grad.colwise().sum();
  });
}

// Stacks 1 x c rows into an n x c matrix.
inline Var concat_rows(const std::vector<Var>& rows) {
  if (rows.empty()) fail_runtime("concat_rows: empty row list");
  const auto cols = rows[0]->value.cols();
  Eigen::MatrixXd v(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    v.row(static_cast<Eigen::Index>(i)) = rows[i]->value.row(0);
  }
  std::vector<Var> parents = rows;
  return detail::make_op(std::move(v), std::move(parents), [rows](Node& out) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      rows[i]->grad.row(0) += out.grad.row(static_cast<Eigen::Index>(i));
    }
  });
}

inline Var slice_rows(const Var& a, Eigen::Index start, Eigen::Index n) {
  return detail::make_op(a->value.middleRows(start, n), {a}, [a, start, n](Node& out) {
    a->grad.middleRows(start, n) += out.grad;
  });
}

inline Var row(const Var& a, Eigen::Index i) { return slice_rows(a, i, 1); }

inline Var gelu(const Var& a) {
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  const double inv_sqrt2pi = 1.0 / std::sqrt(2.0 * M_PI);
  Eigen::MatrixXd v = a->value.unaryExpr(
      [&](double x) { return 0.5 * x * (1.0 + std::erf(x * inv_sqrt2)); });
  return detail::make_op(std::move(v), {a}, [a, inv_sqrt2, inv_sqrt2pi](Node& out) {
    Eigen::MatrixXd d = a->value.unaryExpr([&](double x) {
      const double cdf = 0.5 * (1.0 + std::erf(x * inv_sqrt2));
      const double pdf = inv_sqrt2pi * std::exp(-0.5 * x * x);
      return cdf + x * pdf;
    });
    a->grad += out.grad.cwiseProduct(d);
  });
}

inline Var softmax_rows(const Var& a) {
  Eigen::MatrixXd v = a->value;
  for (Eigen::Index r = 0; r < v.rows(); ++r) {
    const double m = v.row(r).maxCoeff();
    v.row(r) = (v.row(r).array() - m).exp();
    v.row(r) /= v.row(r).sum();
  }
  return detail::make_op(std::move(v), {a}, [a](Node& out) {
    for (Eigen::Index r = 0; r < out.value.rows(); ++r) {
      const auto p = out.value.row(r);
      const auto g = out.grad.row(r);
      const double dot = (g.array() * p.array()).sum();
      a->grad.row(r) += (p.array() * (g.array() - dot)).matrix();
    }
  });
}

// Row-wise layer normalization with trainable gain/bias (1 x c each).
inline Var layer_norm_rows(const Var& x, const Var& gamma, const Var& beta, double eps = 1e-5) {
  const Eigen::Index c = x->value.cols();
  Eigen::MatrixXd normalized(x->value.rows(), c);
  Eigen::VectorXd inv_std(x->value.rows());
  for (Eigen::Index r = 0; r < x->value.rows(); ++r) {
    const double mu = x->value.row(r).mean();
    const double var = (x->value.row(r).array() - mu).square().sum() / static_cast<double>(c);
    inv_std(r) = 1.0 / std::sqrt(var + eps);
    normalized.row(r) = (x->value.row(r).array() - mu) * inv_std(r);
  }
  Eigen::MatrixXd v = normalized;
  for (Eigen::Index r = 0; r < v.rows(); ++r) {
    v.row(r) = v.row(r).cwiseProduct(gamma->value.row(0)) + beta->value.row(0);
  }
  return detail::make_op(
      std::move(v), {x, gamma, beta},
      [x, gamma, beta, normalized, inv_std](Node& out) {
        for (Eigen::Index r = 0; r < out.grad.rows(); ++r) {
          const auto g = out.grad.row(r);
          gamma->grad.row(0) += g.cwiseProduct(normalized.row(r));
          beta->grad.row(0) += g;
          // d/dx of (x - mu) * inv_std through mean and variance.
          Eigen::RowVectorXd dxhat = g.cwiseProduct(gamma->value.row(0));
          const double mean_dxhat = dxhat.mean();
          const double mean_dxhat_xhat = (dxhat.array() * normalized.row(r).array()).mean();
          x->grad.row(r) +=
              ((dxhat.array() - mean_dxhat - normalized.row(r).array() * mean_dxhat_xhat) *
               inv_std(r))
                  .matrix();
        }
      });
}

// Inverted dropout; mask drawn once at construction.
inline Var dropout(const Var& a, double rate, Rng& rng) {
  if (rate <= 0.0) return a;
  if (rate >= 1.0) fail_validation("dropout rate must be < 1, got ", rate);
  Eigen::MatrixXd mask(a->value.rows(), a->value.cols());
  const double keep_scale = 1.0 / (1.0 - rate);
  for (Eigen::Index r = 0; r < mask.rows(); ++r) {
    for (Eigen::Index c = 0; c < mask.cols(); ++c) {
      mask(r, c) = rng.bernoulli(rate) ? 0.0 : keep_scale;
    }
  }
  return detail::make_op(a->value.cwiseProduct(mask), {a}, [a, mask](Node& out) {
    a->grad += out.grad.cwiseProduct(mask);
  });
}

inline Var sum_vars(const std::vector<Var>& vars) {
  if (vars.empty()) fail_runtime("sum_vars: empty list");
  Eigen::MatrixXd v = vars[0]->value;
  for (std::size_t i = 1; i < vars.size(); ++i) v += vars[i]->value;
  std::vector<Var> parents = vars;
  return detail::make_op(std::move(v), std::move(parents), [vars](Node& out) {
    for (const auto& p : vars) p->grad += out.grad;
  });
}

// Weighted co-prediction loss over one example's logits (1 x t rows):
// sum_y w_y * [BCE(z_p up to target) + BCE(z_n up to inverted target)].
// Weights are fixed inputs; they gate the loss but carry no gradient.
inline Var coprediction_loss_op(const Var& z_p, const Var& z_n, const Eigen::VectorXd& targets,
                                const Eigen::VectorXd& weights) {
  const Eigen::Index t = z_p->value.cols();
  double total = 0.0;
  for (Eigen::Index y = 0; y < t; ++y) {
    total += weights(y) * (bce_with_logits(z_p->value(0, y), targets(y)) +
                           bce_with_logits(z_n->value(0, y), 1.0 - targets(y)));
  }
  Eigen::MatrixXd v(1, 1);
  v(0, 0) = total;
  return detail::make_op(std::move(v), {z_p, z_n}, [z_p, z_n, targets, weights](Node& out) {
    const double g = out.grad(0, 0);
    for (Eigen::Index y = 0; y < z_p->value.cols(); ++y) {
      z_p->grad(0, y) += g * weights(y) * (sigmoid(z_p->value(0, y)) - targets(y));
      z_n->grad(0, y) += g * weights(y) * (sigmoid(z_n->value(0, y)) - (1.0 - targets(y)));
    }
  });
}

// Single-mask loss for the baseline (standard prompt) mode.
inline Var bce_loss_op(const Var& z, const Eigen::VectorXd& targets) {
  double total = 0.0;
  for (Eigen::Index y = 0; y < z->value.cols(); ++y) {
    total += bce_with_logits(z->value(0, y), targets(y));
  }
  Eigen::MatrixXd v(1, 1);
  v(0, 0) = total;
  return detail::make_op(std::move(v), {z}, [z, targets](Node& out) {
    const double g = out.grad(0, 0);
    for (Eigen::Index y = 0; y < z->value.cols(); ++y) {
      z->grad(0, y) += g * (sigmoid(z->value(0, y)) - targets(y));
    }
  });
}

// Reverse sweep from a scalar loss. Parameter gradients accumulate across
// calls until cleared.
inline void backward(const Var& loss) {
  if (loss->value.rows() != 1 || loss->value.cols() != 1) {
    fail_runtime("backward: loss must be a 1x1 value");
  }
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack{{loss.get(), 0}};
  visited.insert(loss.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* parent = node->parents[next].get();
      ++next;
      if (visited.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  loss->grad(0, 0) = 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backprop) (*it)->backprop(**it);
  }
}

inline void zero_grad(const std::vector<Var>& params) {
  for (const auto& p : params) p->grad.setZero();
}

}  // namespace copred::ag
