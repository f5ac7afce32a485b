#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "balltraj/autograd/kernels.hpp"
#include "balltraj/autograd/ops.hpp"
#include "balltraj/nn/parameters.hpp"

namespace balltraj::nn {

using ag::Graph;
using ag::Var;

template <typename S>
class Linear {
 public:
  Linear() = default;
  Linear(ParameterStore<S>& store, const std::string& name, Eigen::Index in, Eigen::Index out) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    weight_ = &store.uniform(name + ".weight", in, out, bound);
    bias_ = &store.uniform(name + ".bias", 1, out, bound);
  }

  Var<S> operator()(Graph<S>& g, const Var<S>& x) const {
    return ag::add_row(ag::matmul(x, g.parameter(*weight_)), g.parameter(*bias_));
  }

  Eigen::Index in_features() const { return weight_->value.rows(); }
  Eigen::Index out_features() const { return weight_->value.cols(); }

 private:
  Parameter<S>* weight_ = nullptr;
  Parameter<S>* bias_ = nullptr;
};

template <typename S>
class LayerNorm {
 public:
  LayerNorm() = default;
  LayerNorm(ParameterStore<S>& store, const std::string& name, Eigen::Index width) {
    gain_ = &store.constant(name + ".gain", 1, width, S(1));
    bias_ = &store.constant(name + ".bias", 1, width, S(0));
  }

  Var<S> operator()(Graph<S>& g, const Var<S>& x) const {
    return ag::layer_norm(x, g.parameter(*gain_), g.parameter(*bias_));
  }

 private:
  Parameter<S>* gain_ = nullptr;
  Parameter<S>* bias_ = nullptr;
};

// Stacked bidirectional LSTM over time-major sequences. Output width is
// 2 * hidden: forward states in the left half, backward in the right.
template <typename S>
class BiLstm {
 public:
  BiLstm() = default;
  BiLstm(ParameterStore<S>& store, const std::string& name, Eigen::Index in, Eigen::Index hidden,
         int layers, double dropout)
      : hidden_(hidden), dropout_(dropout) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
    Eigen::Index width = in;
    for (int l = 0; l < layers; ++l) {
      for (const char* dir : {"fwd", "bwd"}) {
        const std::string base = name + ".l" + std::to_string(l) + "." + dir;
        Direction d;
        d.w_input = &store.uniform(base + ".w_input", width, 4 * hidden, bound);
        d.w_hidden = &store.uniform(base + ".w_hidden", hidden, 4 * hidden, bound);
        d.bias = &store.uniform(base + ".bias", 1, 4 * hidden, bound);
        // forget-gate bias starts at 1
        d.bias->value.middleCols(hidden, hidden).array() += S(1);
        directions_.push_back(d);
      }
      width = 2 * hidden;
    }
  }

  Eigen::Index output_width() const { return 2 * hidden_; }

  Var<S> operator()(Graph<S>& g, const Var<S>& x, Eigen::Index batch) const {
    Var<S> layer_in = x;
    const std::size_t layers = directions_.size() / 2;
    for (std::size_t l = 0; l < layers; ++l) {
      if (l > 0) layer_in = ag::dropout(layer_in, dropout_);
      const Direction& f = directions_[2 * l];
      const Direction& b = directions_[2 * l + 1];
      Var<S> hf = ag::lstm_layer(layer_in, g.parameter(*f.w_input), g.parameter(*f.w_hidden),
                                 g.parameter(*f.bias), batch, false);
      Var<S> hb = ag::lstm_layer(layer_in, g.parameter(*b.w_input), g.parameter(*b.w_hidden),
                                 g.parameter(*b.bias), batch, true);
      layer_in = ag::concat_cols<S>({hf, hb});
    }
    return layer_in;
  }

 private:
  struct Direction {
    Parameter<S>* w_input = nullptr;
    Parameter<S>* w_hidden = nullptr;
    Parameter<S>* bias = nullptr;
  };
  Eigen::Index hidden_ = 0;
  double dropout_ = 0.0;
  std::vector<Direction> directions_;
};

template <typename S>
class MultiheadAttention {
 public:
  MultiheadAttention() = default;
  MultiheadAttention(ParameterStore<S>& store, const std::string& name, Eigen::Index width, Eigen::Index heads)
      : heads_(heads),
        q_(store, name + ".q", width, width),
        k_(store, name + ".k", width, width),
        v_(store, name + ".v", width, width),
        o_(store, name + ".o", width, width) {
    if (heads <= 0 || width % heads != 0) {
      throw ConfigError("attention width " + std::to_string(width) + " not divisible by " +
                        std::to_string(heads) + " heads");
    }
  }

  Var<S> operator()(Graph<S>& g, const Var<S>& query, const Var<S>& context, Eigen::Index query_size,
                    Eigen::Index key_size) const {
    Var<S> att = ag::grouped_attention(q_(g, query), k_(g, context), v_(g, context), query_size,
                                       key_size, heads_);
    return o_(g, att);
  }

 private:
  Eigen::Index heads_ = 1;
  Linear<S> q_, k_, v_, o_;
};

// Attention block: H = LN(X + MHA(X, Y)); out = LN(H + relu(FF(H))).
template <typename S>
class AttentionBlock {
 public:
  AttentionBlock() = default;
  AttentionBlock(ParameterStore<S>& store, const std::string& name, Eigen::Index width, Eigen::Index heads)
      : attention_(store, name + ".attn", width, heads),
        norm1_(store, name + ".norm1", width),
        ff_(store, name + ".ff", width, width),
        norm2_(store, name + ".norm2", width) {}

  Var<S> operator()(Graph<S>& g, const Var<S>& x, const Var<S>& y, Eigen::Index query_size,
                    Eigen::Index key_size) const {
    Var<S> h = norm1_(g, ag::add(x, attention_(g, x, y, query_size, key_size)));
    return norm2_(g, ag::add(h, ag::relu(ff_(g, h))));
  }

 private:
  MultiheadAttention<S> attention_;
  LayerNorm<S> norm1_;
  Linear<S> ff_;
  LayerNorm<S> norm2_;
};

}  // namespace balltraj::nn
