#pragma once

// Stacks windows of equal length and roster size into time-major tensors.
// Frame rows are (t * batch + b); agent rows are ((t * batch + b) * agents + a).

#include <vector>

#include "balltraj/data/types.hpp"
#include "balltraj/models/config.hpp"

namespace balltraj::models {

template <typename S>
struct Batch {
  Eigen::Index steps = 0;
  Eigen::Index batch = 0;
  Eigen::Index team_size = 0;
  Eigen::Index agents = 0;
  Matrix<S> features;               // [T*B*A, 6] raw units
  Matrix<S> ball;                   // [T*B, 2] metres
  Matrix<S> ball_observation;       // [T*B, 3] (x, y, flag), zeros where masked
  Matrix<S> players;                // [T*B*2n, 2] player positions
  std::vector<int> labels;          // [T*B]
  std::vector<std::uint8_t> mask;   // [T*B] observed ball frames
  std::vector<int> team_of;         // [A] 1, 2 or 0

  Eigen::Index frames() const { return steps * batch; }
  Eigen::Index players_per_frame() const { return 2 * team_size; }

  // Frame row of (t, b) and the window-local view of a batch column.
  Eigen::Index row(Eigen::Index t, Eigen::Index b) const { return t * batch + b; }
};

template <typename S>
Batch<S> make_batch(const std::vector<const data::Window*>& windows) {
  if (windows.empty()) throw InsufficientDataError("cannot batch zero windows");
  const data::Window& first = *windows.front();
  Batch<S> out;
  out.steps = first.steps;
  out.batch = static_cast<Eigen::Index>(windows.size());
  out.team_size = first.team_size();
  out.agents = first.agents;
  if (out.steps < 1) throw InsufficientDataError("windows must contain at least one frame");
  if (!first.agent_set.balanced()) throw ShapeError("teams must have equal, nonzero size");
  for (const auto* w : windows) {
    if (w->steps != first.steps || w->agents != first.agents) {
      throw ShapeError("windows in one batch must share length and roster size");
    }
    if (w->features.rows() != static_cast<Eigen::Index>(w->steps) * w->agents || w->features.cols() != data::kFeatureCount) {
      throw ShapeError("window feature shape");
    }
    if (w->ball.rows() != w->steps || static_cast<int>(w->labels.size()) != w->steps ||
        static_cast<int>(w->ball_mask.size()) != w->steps) {
      throw ShapeError("window ball/label length");
    }
  }
  const Eigen::Index T = out.steps, B = out.batch, A = out.agents, P = 2 * out.team_size;
  out.features.resize(T * B * A, data::kFeatureCount);
  out.ball.resize(T * B, 2);
  out.ball_observation = Matrix<S>::Zero(T * B, 3);
  out.players.resize(T * B * P, 2);
  out.labels.resize(static_cast<std::size_t>(T * B));
  out.mask.resize(static_cast<std::size_t>(T * B));
  for (Eigen::Index b = 0; b < B; ++b) {
    const data::Window& w = *windows[static_cast<std::size_t>(b)];
    for (Eigen::Index t = 0; t < T; ++t) {
      const Eigen::Index r = t * B + b;
      out.features.middleRows(r * A, A) = w.features.middleRows(t * A, A).template cast<S>();
      out.players.middleRows(r * P, P) = w.features.block(t * A, 0, P, 2).template cast<S>();
      out.ball.row(r) = w.ball.row(t).template cast<S>();
      out.labels[static_cast<std::size_t>(r)] = w.labels[static_cast<std::size_t>(t)];
      const bool seen = w.ball_mask[static_cast<std::size_t>(t)] != 0;
      out.mask[static_cast<std::size_t>(r)] = seen ? 1 : 0;
      if (seen) {
        out.ball_observation(r, 0) = static_cast<S>(w.ball(t, 0));
        out.ball_observation(r, 1) = static_cast<S>(w.ball(t, 1));
        out.ball_observation(r, 2) = S(1);
      }
    }
  }
  out.team_of.resize(static_cast<std::size_t>(A));
  for (Eigen::Index a = 0; a < A; ++a) out.team_of[static_cast<std::size_t>(a)] = first.agent_set.team_of(static_cast<int>(a));
  return out;
}

template <typename S>
Batch<S> make_batch(const data::Window& window) {
  return make_batch<S>(std::vector<const data::Window*>{&window});
}

// Model-space inputs: positions centred and scaled to [-1, 1], kinematics
// divided by fixed scales. Only the first feature_count columns are kept.
template <typename S>
Matrix<S> normalize_features(const Matrix<S>& raw, const ModelConfig& config) {
  const S cx = static_cast<S>(config.pitch.length / 2.0), cy = static_cast<S>(config.pitch.width / 2.0);
  Matrix<S> out(raw.rows(), config.feature_count);
  out.col(0) = (raw.col(0).array() - cx) / cx;
  out.col(1) = (raw.col(1).array() - cy) / cy;
  if (config.feature_count >= 4) {
    out.col(2) = raw.col(2) / static_cast<S>(kVelocityScale);
    out.col(3) = raw.col(3) / static_cast<S>(kVelocityScale);
  }
  if (config.feature_count >= 6) {
    out.col(4) = raw.col(4) / static_cast<S>(kVelocityScale);
    out.col(5) = raw.col(5) / static_cast<S>(kAccelScale);
  }
  if (!out.allFinite()) throw NumericError("non-finite model input");
  return out;
}

template <typename S>
Matrix<S> normalize_positions(const Matrix<S>& xy, const data::PitchConfig& pitch) {
  const S cx = static_cast<S>(pitch.length / 2.0), cy = static_cast<S>(pitch.width / 2.0);
  Matrix<S> out(xy.rows(), 2);
  out.col(0) = (xy.col(0).array() - cx) / cx;
  out.col(1) = (xy.col(1).array() - cy) / cy;
  return out;
}

// Observation channel in model space; masked rows stay all-zero.
template <typename S>
Matrix<S> normalize_observation(const Matrix<S>& obs, const data::PitchConfig& pitch) {
  Matrix<S> out = Matrix<S>::Zero(obs.rows(), 3);
  out.leftCols(2) = normalize_positions<S>(obs.leftCols(2), pitch);
  out.col(2) = obs.col(2);
  for (Eigen::Index r = 0; r < obs.rows(); ++r) {
    if (obs(r, 2) == S(0)) out.row(r).setZero();
  }
  return out;
}

// Row index lists converting between time-major (t * n + s) and
// sequence-major (s * T + t) layouts of `n` sequences.
inline std::vector<int> to_sequence_major(Eigen::Index steps, Eigen::Index n) {
  std::vector<int> idx(static_cast<std::size_t>(steps * n));
  for (Eigen::Index s = 0; s < n; ++s) {
    for (Eigen::Index t = 0; t < steps; ++t) idx[static_cast<std::size_t>(s * steps + t)] = static_cast<int>(t * n + s);
  }
  return idx;
}

inline std::vector<int> to_time_major(Eigen::Index steps, Eigen::Index n) {
  std::vector<int> idx(static_cast<std::size_t>(steps * n));
  for (Eigen::Index s = 0; s < n; ++s) {
    for (Eigen::Index t = 0; t < steps; ++t) idx[static_cast<std::size_t>(t * n + s)] = static_cast<int>(s * steps + t);
  }
  return idx;
}

}  // namespace balltraj::models
