#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "balltraj/data/types.hpp"

namespace balltraj::data {

struct KinematicsOptions {
  double dt = kFramePeriod;
  int smoothing_window = 5;  // frames of the centred moving average on velocity; 1 disables

  void validate() const {
    if (!(dt > 0.0)) throw ConfigError("kinematics dt must be positive");
    if (smoothing_window < 1 || smoothing_window % 2 == 0) {
      throw ConfigError("smoothing window must be a positive odd frame count");
    }
  }
};

struct Kinematics {
  Eigen::VectorXd vx, vy, speed, accel;
};

// Central differences in the interior, one-sided at both ends.
inline Eigen::VectorXd central_difference(const Eigen::VectorXd& x, double dt) {
  const Eigen::Index n = x.size();
  if (n < 2) throw InsufficientDataError("differencing needs at least two samples");
  Eigen::VectorXd d(n);
  d(0) = (x(1) - x(0)) / dt;
  d(n - 1) = (x(n - 1) - x(n - 2)) / dt;
  for (Eigen::Index t = 1; t + 1 < n; ++t) d(t) = (x(t + 1) - x(t - 1)) / (2.0 * dt);
  return d;
}

// Centred moving average, truncated at the edges.
inline Eigen::VectorXd moving_average(const Eigen::VectorXd& x, int window) {
  if (window <= 1) return x;
  const Eigen::Index n = x.size(), half = window / 2;
  Eigen::VectorXd out(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    const Eigen::Index lo = std::max<Eigen::Index>(0, t - half);
    const Eigen::Index hi = std::min<Eigen::Index>(n - 1, t + half);
    out(t) = x.segment(lo, hi - lo + 1).mean();
  }
  return out;
}

// positions is [T, 2]. Velocity is smoothed before speed and acceleration
// are derived from it.
inline Kinematics derive_kinematics(const MatrixD& positions, const KinematicsOptions& options = {}) {
  options.validate();
  if (positions.rows() < 2) throw InsufficientDataError("kinematics need at least two frames");
  if (positions.cols() != 2) throw ShapeError("positions must be [T, 2]");
  if (!positions.allFinite()) throw NumericError("positions must be finite");
  Kinematics k;
  k.vx = moving_average(central_difference(positions.col(0), options.dt), options.smoothing_window);
  k.vy = moving_average(central_difference(positions.col(1), options.dt), options.smoothing_window);
  k.speed = (k.vx.array().square() + k.vy.array().square()).sqrt().matrix();
  k.accel = central_difference(k.speed, options.dt);
  return k;
}

// Fills vx, vy, speed and accel of every player in the episode. A player's
// track is the sequence of frames where the id appears.
inline void attach_kinematics(Episode& episode, const KinematicsOptions& options = {}) {
  std::map<std::string, std::vector<std::pair<std::size_t, std::size_t>>> tracks;
  for (std::size_t f = 0; f < episode.frames.size(); ++f) {
    const auto& players = episode.frames[f].players;
    for (std::size_t i = 0; i < players.size(); ++i) tracks[players[i].player_id].emplace_back(f, i);
  }
  for (auto& [id, refs] : tracks) {
    if (refs.size() < 2) {
      for (auto [f, i] : refs) {
        auto& p = episode.frames[f].players[i];
        p.vx = p.vy = p.speed = p.accel = 0.0;
      }
      continue;
    }
    MatrixD pos(static_cast<Eigen::Index>(refs.size()), 2);
    for (std::size_t r = 0; r < refs.size(); ++r) {
      const auto& p = episode.frames[refs[r].first].players[refs[r].second];
      pos(static_cast<Eigen::Index>(r), 0) = p.x;
      pos(static_cast<Eigen::Index>(r), 1) = p.y;
    }
    const Kinematics k = derive_kinematics(pos, options);
    for (std::size_t r = 0; r < refs.size(); ++r) {
      auto& p = episode.frames[refs[r].first].players[refs[r].second];
      const auto e = static_cast<Eigen::Index>(r);
      p.vx = k.vx(e);
      p.vy = k.vy(e);
      p.speed = k.speed(e);
      p.accel = k.accel(e);
    }
  }
}

}  // namespace balltraj::data
