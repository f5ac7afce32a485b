#pragma once

// Set-attention encoders. Inputs are stacks of equally sized sets: rows
// [g * set_size, (g + 1) * set_size) form set g. No positional information
// enters the computation, so every block is permutation-equivariant within a
// set and the pooled output is permutation-invariant.

#include <string>
#include <vector>

#include "balltraj/nn/layers.hpp"

namespace balltraj::encoders {

using ag::Graph;
using ag::Var;

struct SetEncoderConfig {
  Eigen::Index embed_dim = 16;
  Eigen::Index num_heads = 4;
  int num_blocks = 2;
  bool use_pma_decoder = true;

  void validate() const {
    if (embed_dim <= 0 || num_heads <= 0 || num_blocks <= 0) {
      throw ConfigError("set encoder dimensions must be positive");
    }
    if (embed_dim % num_heads != 0) {
      throw ConfigError("embed_dim " + std::to_string(embed_dim) + " is not divisible by num_heads " +
                        std::to_string(num_heads));
    }
  }
};

// Equivariant part: input projection followed by stacked self-attention blocks.
template <typename S>
class SetEncoder {
 public:
  SetEncoder() = default;
  SetEncoder(nn::ParameterStore<S>& store, const std::string& name, Eigen::Index in,
             const SetEncoderConfig& config)
      : input_(store, name + ".input", in, config.embed_dim) {
    config.validate();
    for (int b = 0; b < config.num_blocks; ++b) {
      blocks_.emplace_back(store, name + ".block" + std::to_string(b), config.embed_dim, config.num_heads);
    }
  }

  Var<S> operator()(Graph<S>& g, const Var<S>& elements, Eigen::Index set_size) const {
    if (set_size <= 0 || elements.rows() == 0) throw EmptySetError("set encoder received an empty set");
    if (elements.rows() % set_size != 0) throw ShapeError("set encoder: rows not divisible by set size");
    Var<S> h = input_(g, elements);
    for (const auto& block : blocks_) h = block(g, h, h, set_size, set_size);
    return h;
  }

 private:
  nn::Linear<S> input_;
  std::vector<nn::AttentionBlock<S>> blocks_;
};

// Encoder followed by attention pooling with one learned seed and one more
// self-attention block on the pooled element. Returns one row per set.
template <typename S>
class SetTransformer {
 public:
  SetTransformer() = default;
  SetTransformer(nn::ParameterStore<S>& store, const std::string& name, Eigen::Index in,
                 const SetEncoderConfig& config)
      : encoder_(store, name + ".enc", in, config),
        pool_(store, name + ".pool", config.embed_dim, config.num_heads),
        post_(store, name + ".post", config.embed_dim, config.num_heads) {
    seed_ = &store.uniform(name + ".seed", 1, config.embed_dim,
                           1.0 / std::sqrt(static_cast<double>(config.embed_dim)));
  }

  Var<S> operator()(Graph<S>& g, const Var<S>& elements, Eigen::Index set_size) const {
    Var<S> encoded = encoder_(g, elements, set_size);
    const Eigen::Index groups = elements.rows() / set_size;
    Var<S> seeds = ag::gather_rows(g.parameter(*seed_), std::vector<int>(static_cast<std::size_t>(groups), 0));
    Var<S> pooled = pool_(g, seeds, encoded, 1, set_size);
    return post_(g, pooled, pooled, 1, 1);
  }

 private:
  SetEncoder<S> encoder_;
  ag::Parameter<S>* seed_ = nullptr;
  nn::AttentionBlock<S> pool_;
  nn::AttentionBlock<S> post_;
};

}  // namespace balltraj::encoders
