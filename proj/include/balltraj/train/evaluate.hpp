#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "balltraj/losses/metrics.hpp"
#include "balltraj/models/model.hpp"
#include "balltraj/postprocess/postprocess.hpp"

namespace balltraj::train {

using data::MatrixD;
using losses::MetricsReport;

struct Prediction {
  MatrixD ball;   // [T, 2]
  MatrixD probs;  // [T, A]; empty when the model has no possession stage
  bool has_possession() const { return probs.size() != 0; }
};

template <typename S>
Prediction predict(const models::BallModel<S>& model, const data::Window& w, std::uint64_t seed = 0) {
  ag::Graph<S> g(false, seed);
  const auto out = model.forward(g, models::make_batch<S>(w));
  Prediction p;
  p.ball = out.ball.value().template cast<double>();
  if (!p.ball.allFinite()) throw NumericError("model produced non-finite ball positions");
  if (out.has_possession()) p.probs = out.probs.value().template cast<double>();
  return p;
}

struct Postprocessed {
  postprocess::TouchAssignment assignment;
  MatrixD ball;
};

inline Postprocessed postprocess_prediction(const Prediction& p, const data::Window& w,
                                            const postprocess::PostprocessConfig& config = {}) {
  if (!p.has_possession()) throw ConfigError("postprocessing needs possession probabilities");
  const MatrixD positions = w.agent_positions();
  Postprocessed out;
  out.assignment = postprocess::assign_touches(postprocess::possession_scores(p.probs, p.ball, positions, config), config);
  out.ball = postprocess::rebuild_trajectory(out.assignment, positions, p.ball);
  return out;
}

// Frame-weighted metric accumulator. RL is weighted by interior frames.
class MetricsAccumulator {
 public:
  void add(const MatrixD& ball, const data::Window& w, const MatrixD& probs) {
    const double T = static_cast<double>(w.steps);
    pe_sum_ += losses::position_error(ball, w.ball) * T;
    frames_ += T;
    if (w.steps >= 3) {
      rl_sum_ += losses::reality_loss(ball, w.player_positions(), 2 * w.team_size()) * (T - 2.0);
      interior_ += T - 2.0;
    }
    if (probs.size() != 0) {
      std::vector<int> team_of(static_cast<std::size_t>(w.agents));
      for (int a = 0; a < w.agents; ++a) team_of[static_cast<std::size_t>(a)] = w.agent_set.team_of(a);
      const auto acc = losses::possession_accuracy(probs, w.labels, team_of);
      ppa_sum_ += acc.ppa * T;
      tpa_sum_ += acc.tpa * T;
      possession_frames_ += T;
    }
  }

  MetricsReport report() const {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    MetricsReport r;
    r.pe = frames_ > 0 ? pe_sum_ / frames_ : nan;
    r.rl = interior_ > 0 ? rl_sum_ / interior_ : nan;
    r.ppa = possession_frames_ > 0 ? ppa_sum_ / possession_frames_ : nan;
    r.tpa = possession_frames_ > 0 ? tpa_sum_ / possession_frames_ : nan;
    return r;
  }

 private:
  double pe_sum_ = 0, rl_sum_ = 0, ppa_sum_ = 0, tpa_sum_ = 0;
  double frames_ = 0, interior_ = 0, possession_frames_ = 0;
};

struct EvalOptions {
  bool postprocess = true;  // also report metrics after postprocessing when possible
  postprocess::PostprocessConfig postprocess_config;
  std::uint64_t seed = 0;
};

struct EvalResult {
  MetricsReport raw;
  MetricsReport post;
  bool has_post = false;
};

// Whole-window inference on each window (any length).
template <typename S>
EvalResult evaluate(const models::BallModel<S>& model, const std::vector<data::Window>& windows,
                    const EvalOptions& options = {}) {
  MetricsAccumulator raw, post;
  bool has_post = false;
  for (const auto& w : windows) {
    const Prediction p = predict(model, w, options.seed);
    raw.add(p.ball, w, p.probs);
    if (options.postprocess && p.has_possession()) {
      post.add(postprocess_prediction(p, w, options.postprocess_config).ball, w, p.probs);
      has_post = true;
    }
  }
  EvalResult r;
  r.raw = raw.report();
  r.has_post = has_post;
  if (has_post) r.post = post.report();
  return r;
}

}  // namespace balltraj::train
