#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "balltraj/encoders/context.hpp"
#include "balltraj/losses/losses.hpp"
#include "balltraj/models/batch.hpp"
#include "balltraj/nn/layers.hpp"

namespace balltraj::models {

using ag::Graph;
using ag::Var;

template <typename S>
struct ForwardResult {
  Var<S> ball;      // [F, 2] metres, after the observation overwrite
  Var<S> hidden;    // [F, width] final sequence states
  Var<S> logits;    // [F, A] possession scores (hierarchical variants)
  Var<S> probs;     // [F, A] softmax of logits
  Var<S> hidden_g;  // [F * A, width] per-agent possession states
  Var<S> kl;        // 1x1 mean KL per frame (VRNN)
  Var<S> nll;       // 1x1 mean Gaussian NLL per frame (VRNN)
  Var<S> sigma_min; // 1x1 smallest predicted standard deviation (VRNN)

  bool has_possession() const { return probs.valid(); }
};

template <typename S>
class BallModel {
 public:
  explicit BallModel(const ModelConfig& config) : config_(config), store_(config.seed) { config.validate(); }
  virtual ~BallModel() = default;

  BallModel(const BallModel&) = delete;
  BallModel& operator=(const BallModel&) = delete;

  virtual ForwardResult<S> forward(Graph<S>& g, const Batch<S>& batch) const = 0;
  virtual bool predicts_possession() const { return false; }

  const ModelConfig& config() const { return config_; }
  nn::ParameterStore<S>& parameters() { return store_; }
  const nn::ParameterStore<S>& parameters() const { return store_; }

 protected:
  encoders::SetEncoderConfig set_config(Eigen::Index width) const {
    encoders::SetEncoderConfig c;
    c.embed_dim = width;
    c.num_heads = config_.heads;
    return c;
  }

  encoders::AgentLayout layout(const Batch<S>& b) const { return encoders::AgentLayout{b.team_size}; }

  Var<S> inputs(Graph<S>& g, const Batch<S>& b) const {
    return g.constant(normalize_features<S>(b.features, config_));
  }

  Var<S> observation(Graph<S>& g, const Batch<S>& b) const {
    return g.constant(normalize_observation<S>(b.ball_observation, config_.pitch));
  }

  // Model-space output to metres.
  Var<S> to_metres(const Var<S>& y) const {
    Graph<S>& g = y.graph();
    Matrix<S> scale(1, 2), centre(1, 2);
    scale << static_cast<S>(config_.pitch.length / 2.0), static_cast<S>(config_.pitch.width / 2.0);
    centre = scale;
    Matrix<S> scale_rows = scale.replicate(y.rows(), 1);
    return ag::add_row(ag::mul(y, g.constant(std::move(scale_rows))), g.constant(std::move(centre)));
  }

  // Observed frames take the observation exactly.
  Var<S> overwrite(const Var<S>& y, const Batch<S>& b) const {
    if (!config_.imputation) return y;
    Graph<S>& g = y.graph();
    Matrix<S> keep(y.rows(), 1), fill = Matrix<S>::Zero(y.rows(), 2);
    for (Eigen::Index r = 0; r < y.rows(); ++r) {
      const bool seen = b.mask[static_cast<std::size_t>(r)] != 0;
      keep(r, 0) = seen ? S(0) : S(1);
      if (seen) fill.row(r) = b.ball_observation.row(r).leftCols(2);
    }
    return ag::add(ag::mul_col(y, g.constant(std::move(keep))), g.constant(std::move(fill)));
  }

  ModelConfig config_;
  nn::ParameterStore<S> store_;
};

// Sinusoidal positional table, [steps, width].
template <typename S>
Matrix<S> positional_encoding(Eigen::Index steps, Eigen::Index width) {
  Matrix<S> pe(steps, width);
  for (Eigen::Index t = 0; t < steps; ++t) {
    for (Eigen::Index i = 0; i < width; ++i) {
      const double rate = std::pow(10000.0, -static_cast<double>(2 * (i / 2)) / static_cast<double>(width));
      const double angle = static_cast<double>(t) * rate;
      pe(t, i) = static_cast<S>(i % 2 == 0 ? std::sin(angle) : std::cos(angle));
    }
  }
  return pe;
}

// Self-attention over time for a time-major stack of `n` sequences.
template <typename S>
class TemporalTransformer {
 public:
  TemporalTransformer() = default;
  TemporalTransformer(nn::ParameterStore<S>& store, const std::string& name, Eigen::Index in, Eigen::Index width,
                      Eigen::Index heads, int layers, double dropout)
      : input_(store, name + ".input", in, width), width_(width), dropout_(dropout) {
    for (int l = 0; l < layers; ++l) blocks_.emplace_back(store, name + ".block" + std::to_string(l), width, heads);
  }

  Eigen::Index output_width() const { return width_; }

  Var<S> operator()(Graph<S>& g, const Var<S>& x, Eigen::Index n) const {
    if (n <= 0 || x.rows() % n != 0) throw ShapeError("temporal transformer: rows not divisible by sequences");
    const Eigen::Index steps = x.rows() / n;
    const Matrix<S> table = positional_encoding<S>(steps, width_);
    Matrix<S> pe(x.rows(), width_);
    for (Eigen::Index t = 0; t < steps; ++t) pe.middleRows(t * n, n) = table.row(t).replicate(n, 1);
    Var<S> h = ag::add(input_(g, x), g.constant(std::move(pe)));
    h = ag::gather_rows(h, to_sequence_major(steps, n));
    for (const auto& block : blocks_) {
      Var<S> in = ag::dropout(h, dropout_);
      h = block(g, in, in, steps, steps);
    }
    return ag::gather_rows(h, to_time_major(steps, n));
  }

 private:
  nn::Linear<S> input_;
  std::vector<nn::AttentionBlock<S>> blocks_;
  Eigen::Index width_ = 0;
  double dropout_ = 0.0;
};

// Sequence model shared by the recurrent and attention variants.
template <typename S>
class SequenceModel {
 public:
  SequenceModel() = default;
  SequenceModel(nn::ParameterStore<S>& store, const std::string& name, Eigen::Index in, const ModelConfig& c,
                bool attention) {
    if (attention) {
      transformer_ = TemporalTransformer<S>(store, name, in, c.lstm_hidden, c.heads, c.transformer_layers, c.dropout);
      width_ = c.lstm_hidden;
      attention_ = true;
    } else {
      lstm_ = nn::BiLstm<S>(store, name, in, c.lstm_hidden, c.lstm_layers, c.dropout);
      width_ = 2 * c.lstm_hidden;
    }
  }

  Eigen::Index output_width() const { return width_; }

  Var<S> operator()(Graph<S>& g, const Var<S>& x, Eigen::Index n) const {
    return attention_ ? transformer_(g, x, n) : lstm_(g, x, n);
  }

 private:
  bool attention_ = false;
  nn::BiLstm<S> lstm_;
  TemporalTransformer<S> transformer_;
  Eigen::Index width_ = 0;
};

template <typename S>
struct LossTerms {
  Var<S> total;
  losses::LossParts parts;
  double kl = 0.0;
  double nll = 0.0;
};

// MSE + lambda_real * reality + lambda_ce * CE; VRNN adds its NLL and
// weighted KL. Terms with zero weight are reported but not differentiated.
template <typename S>
LossTerms<S> compute_loss(const ForwardResult<S>& f, const Batch<S>& b, const losses::LossWeights& w,
                          double kl_weight = 1.0) {
  w.validate();
  Graph<S>& g = f.ball.graph();
  LossTerms<S> out;
  Var<S> mse = losses::mse_loss(f.ball, g.constant(b.ball));
  out.parts.mse = static_cast<double>(mse.scalar());
  out.total = mse;
  if (f.nll.valid()) {
    // generative objective replaces the squared error
    out.nll = static_cast<double>(f.nll.scalar());
    out.kl = static_cast<double>(f.kl.scalar());
    out.total = ag::add(f.nll, ag::scale(f.kl, static_cast<S>(kl_weight)));
  }
  if (b.steps >= 3) {
    if (w.lambda_real > 0.0) {
      Var<S> real = losses::reality_loss(f.ball, b.players, b.batch, b.players_per_frame());
      out.parts.real = static_cast<double>(real.scalar());
      out.total = ag::add(out.total, ag::scale(real, static_cast<S>(w.lambda_real)));
    } else {
      Matrix<S> ball = f.ball.value();
      double total = 0.0;
      for (Eigen::Index s = 0; s < b.batch; ++s) {
        losses::MatrixD seq(b.steps, 2), players(b.steps * b.players_per_frame(), 2);
        for (Eigen::Index t = 0; t < b.steps; ++t) {
          seq.row(t) = ball.row(b.row(t, s)).template cast<double>();
          players.middleRows(t * b.players_per_frame(), b.players_per_frame()) =
              b.players.middleRows(b.row(t, s) * b.players_per_frame(), b.players_per_frame()).template cast<double>();
        }
        total += losses::reality_loss(seq, players, b.players_per_frame());
      }
      out.parts.real = total / static_cast<double>(b.batch);
    }
  }
  if (f.logits.valid()) {
    if (w.lambda_ce > 0.0) {
      Var<S> ce = losses::ce_loss_logits(f.logits, b.labels);
      out.parts.ce = static_cast<double>(ce.scalar());
      out.total = ag::add(out.total, ag::scale(ce, static_cast<S>(w.lambda_ce)));
    } else {
      out.parts.ce = losses::ce_loss(f.probs.value().template cast<double>(), b.labels);
    }
  }
  return out;
}

}  // namespace balltraj::models
