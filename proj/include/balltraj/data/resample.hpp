#pragma once

#include <cmath>
#include <unordered_map>
#include <vector>

#include "balltraj/data/types.hpp"

namespace balltraj::data {

// Linear interpolation of frame positions onto a uniform 1/dst_hz grid.
// Grid points inside source gaps longer than two source periods are skipped.
// Kinematic fields are not interpolated; recompute them afterwards.
inline std::vector<TrackingFrame> resample(const std::vector<TrackingFrame>& frames, double src_hz,
                                           double dst_hz = kFrameRate) {
  if (!(src_hz > 0.0) || !(dst_hz > 0.0)) throw ConfigError("sampling rates must be positive");
  if (std::abs(src_hz - dst_hz) < 1e-12 || frames.size() < 2) return frames;

  const double period = 1.0 / dst_hz;
  const double max_gap = 2.0 / src_hz + 1e-9;
  std::vector<TrackingFrame> out;
  const double first = frames.front().time, last = frames.back().time;
  long k = static_cast<long>(std::ceil(first * dst_hz - 1e-6));
  std::size_t i = 0;
  for (;; ++k) {
    const double t = static_cast<double>(k) * period;
    if (t > last + 1e-9) break;
    while (i + 1 < frames.size() && frames[i + 1].time < t - 1e-9) ++i;
    const TrackingFrame& a = frames[i];
    if (std::abs(a.time - t) <= 1e-9 || i + 1 >= frames.size()) {
      if (std::abs(a.time - t) <= 1e-9) {
        TrackingFrame f = a;
        f.time = t;
        out.push_back(std::move(f));
      }
      continue;
    }
    const TrackingFrame& b = frames[i + 1];
    if (b.time - a.time > max_gap) continue;
    const double w = (t - a.time) / (b.time - a.time);
    TrackingFrame f;
    f.time = t;
    f.in_play = a.in_play && b.in_play;
    std::unordered_map<std::string, const PlayerState*> next;
    for (const auto& p : b.players) next.emplace(p.player_id, &p);
    for (const auto& p : a.players) {
      auto it = next.find(p.player_id);
      if (it == next.end()) continue;
      PlayerState s;
      s.player_id = p.player_id;
      s.team = p.team;
      s.x = (1.0 - w) * p.x + w * it->second->x;
      s.y = (1.0 - w) * p.y + w * it->second->y;
      f.players.push_back(std::move(s));
    }
    if (a.ball && b.ball) f.ball = (1.0 - w) * *a.ball + w * *b.ball;
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace balltraj::data
