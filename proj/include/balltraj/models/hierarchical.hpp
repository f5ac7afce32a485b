#pragma once

// Two-stage model: a possession classifier (PPC) over every agent, then a
// ball trajectory regressor (BTR) whose per-agent inputs are extended by the
// classifier's hidden states and probabilities.

#include "balltraj/models/model.hpp"

namespace balltraj::models {

template <typename S>
struct PossessionOutput {
  Var<S> logits;  // [F, A]
  Var<S> probs;   // [F, A]
  Var<S> hidden;  // [F * A, width]
};

template <typename S>
class HierarchicalModel : public BallModel<S> {
 public:
  explicit HierarchicalModel(const ModelConfig& config) : BallModel<S>(config) {
    if (!is_hierarchical(config.variant)) throw ConfigError("hierarchical model needs H_LSTM or H_TRANSFORMER");
    const bool attention = config.variant == Variant::kHTransformer;
    const Eigen::Index f = config.feature_count;
    auto& store = this->store_;
    context_ = encoders::ContextEncoders<S>(store, "ppc.context", f, this->set_config(config.d_g), config.embeddings.ppe,
                                            config.embeddings.fpe, config.embeddings.fpi);
    ppc_seq_ = SequenceModel<S>(store, "ppc.seq", f + context_.combined_width(), config, attention);
    ppc_out_ = nn::Linear<S>(store, "ppc.out", ppc_seq_.output_width(), 1);
    const Eigen::Index btr_in = f + ppc_seq_.output_width() + 1;
    ppi_ = encoders::PPIEncoder<S>(store, "btr.ppi", btr_in, this->set_config(config.d_btr));
    btr_seq_ = SequenceModel<S>(store, "btr.seq", config.d_btr + (config.imputation ? 3 : 0), config, attention);
    btr_out_ = nn::Linear<S>(store, "btr.out", btr_seq_.output_width(), 2);
  }

  bool predicts_possession() const override { return true; }

  PossessionOutput<S> possession(Graph<S>& g, const Batch<S>& b, const Var<S>& x) const {
    const auto lay = this->layout(b);
    Var<S> context = context_.combined(g, x, lay);
    PossessionOutput<S> out;
    // rows (t * B + b) * A + a are time-major over B * A agent sequences
    out.hidden = ppc_seq_(g, ag::concat_cols<S>({x, context}), b.batch * b.agents);
    Var<S> scores = ppc_out_(g, out.hidden);
    out.logits = ag::reshape(scores, b.frames(), b.agents);
    out.probs = ag::softmax_rows(out.logits);
    return out;
  }

  ForwardResult<S> forward(Graph<S>& g, const Batch<S>& b) const override {
    Var<S> x = this->inputs(g, b);
    PossessionOutput<S> p = possession(g, b, x);
    Var<S> g_col = ag::reshape(p.probs, b.frames() * b.agents, 1);
    Var<S> per_agent = ag::concat_cols<S>({x, p.hidden, g_col});
    Var<S> z = ppi_(g, per_agent, this->layout(b)).fused;
    if (this->config_.imputation) z = ag::concat_cols<S>({z, this->observation(g, b)});
    ForwardResult<S> out;
    out.hidden = btr_seq_(g, z, b.batch);
    out.ball = this->overwrite(this->to_metres(btr_out_(g, out.hidden)), b);
    out.logits = p.logits;
    out.probs = p.probs;
    out.hidden_g = p.hidden;
    return out;
  }

 private:
  encoders::ContextEncoders<S> context_;
  SequenceModel<S> ppc_seq_;
  nn::Linear<S> ppc_out_;
  encoders::PPIEncoder<S> ppi_;
  SequenceModel<S> btr_seq_;
  nn::Linear<S> btr_out_;
};

// LSTM and Transformer baselines: PPI embedding of raw inputs straight into
// one sequence model.
template <typename S>
class FlatModel : public BallModel<S> {
 public:
  explicit FlatModel(const ModelConfig& config) : BallModel<S>(config) {
    if (config.variant != Variant::kLstm && config.variant != Variant::kTransformer) {
      throw ConfigError("flat model needs LSTM or TRANSFORMER");
    }
    auto& store = this->store_;
    ppi_ = encoders::PPIEncoder<S>(store, "flat.ppi", config.feature_count, this->set_config(config.d_btr));
    seq_ = SequenceModel<S>(store, "flat.seq", config.d_btr + (config.imputation ? 3 : 0), config,
                            config.variant == Variant::kTransformer);
    out_ = nn::Linear<S>(store, "flat.out", seq_.output_width(), 2);
  }

  ForwardResult<S> forward(Graph<S>& g, const Batch<S>& b) const override {
    Var<S> x = this->inputs(g, b);
    Var<S> z = ppi_(g, x, this->layout(b)).fused;
    if (this->config_.imputation) z = ag::concat_cols<S>({z, this->observation(g, b)});
    ForwardResult<S> out;
    out.hidden = seq_(g, z, b.batch);
    out.ball = this->overwrite(this->to_metres(out_(g, out.hidden)), b);
    return out;
  }

 private:
  encoders::PPIEncoder<S> ppi_;
  SequenceModel<S> seq_;
  nn::Linear<S> out_;
};

}  // namespace balltraj::models
