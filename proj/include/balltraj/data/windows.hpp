#pragma once

#include <random>
#include <string>
#include <vector>

#include "balltraj/data/ball_truth.hpp"

namespace balltraj::data {

inline constexpr int kWindowLength = 100;

// Whole episode as one variable-length window. Players missing from a frame
// get zero features and clear roster_ok for that frame.
inline Window to_window(const Episode& episode, const AgentSet& agents, const BallTruth* truth = nullptr) {
  Window w;
  w.steps = static_cast<int>(episode.frames.size());
  w.agents = agents.size();
  w.start_time = episode.start_time();
  w.agent_set = agents;
  w.features = MatrixD::Zero(static_cast<Eigen::Index>(w.steps) * w.agents, kFeatureCount);
  w.roster_ok.assign(static_cast<std::size_t>(w.steps), 1);
  const int players = 2 * agents.team_size();
  if (static_cast<int>(agents.team2.size()) != agents.team_size()) {
    throw ShapeError("teams must have equal size");
  }
  for (int t = 0; t < w.steps; ++t) {
    const auto& frame = episode.frames[static_cast<std::size_t>(t)];
    if (static_cast<int>(frame.players.size()) != players) w.roster_ok[static_cast<std::size_t>(t)] = 0;
    for (int a = 0; a < w.agents; ++a) {
      const Eigen::Index row = static_cast<Eigen::Index>(t) * w.agents + a;
      if (a >= players) {
        const Point& p = agents.ball_out[static_cast<std::size_t>(a - players)];
        w.features(row, 0) = p.x();
        w.features(row, 1) = p.y();
        continue;
      }
      const PlayerState* s = frame.find(agents.id_of(a));
      if (s == nullptr) {
        w.roster_ok[static_cast<std::size_t>(t)] = 0;
        continue;
      }
      w.features.row(row) << s->x, s->y, s->vx, s->vy, s->speed, s->accel;
    }
  }
  if (truth != nullptr) {
    if (truth->ball.rows() != w.steps) throw ShapeError("ball truth length does not match episode");
    w.ball = truth->ball;
    w.labels = truth->labels;
  } else {
    w.ball = MatrixD::Zero(w.steps, 2);
    for (int t = 0; t < w.steps; ++t) {
      const auto& b = episode.frames[static_cast<std::size_t>(t)].ball;
      if (b) w.ball.row(t) = b->transpose();
    }
    w.labels.assign(static_cast<std::size_t>(w.steps), 0);
  }
  w.ball_mask.assign(static_cast<std::size_t>(w.steps), 1);
  return w;
}

inline Window slice_window(const Window& w, int start, int steps) {
  if (start < 0 || steps < 0 || start + steps > w.steps) throw ShapeError("window slice out of range");
  Window out;
  out.steps = steps;
  out.agents = w.agents;
  out.start_time = w.start_time + start * kFramePeriod;
  out.agent_set = w.agent_set;
  out.features = w.features.middleRows(static_cast<Eigen::Index>(start) * w.agents,
                                       static_cast<Eigen::Index>(steps) * w.agents);
  out.ball = w.ball.middleRows(start, steps);
  auto sub = [&](const auto& v) { return std::decay_t<decltype(v)>(v.begin() + start, v.begin() + start + steps); };
  out.labels = sub(w.labels);
  out.ball_mask = sub(w.ball_mask);
  out.roster_ok = sub(w.roster_ok);
  return out;
}

// Contiguous slices of `length` frames every `stride` frames. Slices that
// contain a frame with an incomplete roster are dropped.
inline std::vector<Window> make_windows(const Window& full, int length = kWindowLength, int stride = 5) {
  if (stride < 1) throw ConfigError("stride must be at least 1 frame");
  if (length < 1) throw ConfigError("window length must be positive");
  std::vector<Window> out;
  for (int start = 0; start + length <= full.steps; start += stride) {
    bool ok = true;
    for (int t = start; t < start + length && ok; ++t) ok = full.roster_ok[static_cast<std::size_t>(t)] != 0;
    if (ok) out.push_back(slice_window(full, start, length));
  }
  return out;
}

enum class FlipMode { kH, kV, kHV };

inline FlipMode parse_flip_mode(const std::string& s) {
  if (s == "H") return FlipMode::kH;
  if (s == "V") return FlipMode::kV;
  if (s == "HV") return FlipMode::kHV;
  throw ConfigError("unknown flip mode: " + s);
}

// Reflects every position about the pitch mid-lines. Ball-out rows move with
// the pitch; labels are untouched.
inline Window flip_augment(const Window& w, FlipMode mode, const PitchConfig& pitch) {
  const bool h = mode == FlipMode::kH || mode == FlipMode::kHV;
  const bool v = mode == FlipMode::kV || mode == FlipMode::kHV;
  Window out = w;
  if (h) {
    out.features.col(0) = (pitch.length - w.features.col(0).array()).matrix();
    out.features.col(2) = -w.features.col(2);
    out.ball.col(0) = (pitch.length - w.ball.col(0).array()).matrix();
  }
  if (v) {
    out.features.col(1) = (pitch.width - w.features.col(1).array()).matrix();
    out.features.col(3) = -w.features.col(3);
    out.ball.col(1) = (pitch.width - w.ball.col(1).array()).matrix();
  }
  return out;
}

// Each frame stays observed with probability keep_probability.
inline Window mask_ball(const Window& w, double keep_probability, std::uint64_t seed) {
  if (!(keep_probability >= 0.0 && keep_probability <= 1.0)) {
    throw ConfigError("keep probability must lie in [0, 1]");
  }
  Window out = w;
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution keep(keep_probability);
  for (auto& m : out.ball_mask) m = keep(rng) ? 1 : 0;
  return out;
}

}  // namespace balltraj::data
