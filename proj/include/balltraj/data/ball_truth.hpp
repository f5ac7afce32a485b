#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "balltraj/data/types.hpp"

namespace balltraj::data {

struct BallTruth {
  MatrixD ball;              // [T, 2]
  std::vector<int> labels;   // possession class per frame
  std::vector<int> toucher;  // agent in control at each frame, -1 in transition
};

// Index of the frame nearest to `time`, or -1 if outside the episode.
inline int frame_index(const Episode& episode, double time) {
  if (episode.frames.empty()) return -1;
  const double rel = (time - episode.frames.front().time) / kFramePeriod;
  const long k = std::lround(rel);
  if (std::abs(rel - static_cast<double>(k)) > 1e-3 || k < 0 ||
      k >= static_cast<long>(episode.frames.size())) {
    return -1;
  }
  return static_cast<int>(k);
}

inline Point agent_position(const TrackingFrame& frame, const AgentSet& agents, int index) {
  const int team = agents.team_of(index);
  if (team == 0) return agents.ball_out[static_cast<std::size_t>(index - 2 * agents.team_size())];
  const std::string id = agents.id_of(index);
  const PlayerState* p = frame.find(id);
  if (p == nullptr) throw LabelError("player " + id + " missing from frame at t=" + std::to_string(frame.time));
  return {p->x, p->y};
}

// Shared anchor interpolation: frames with an anchor keep it, frames between
// two anchors are interpolated linearly in frame index, frames before the
// first or after the last anchor take `fill` (or the nearest anchor when
// fill is empty).
inline MatrixD interpolate_anchors(const std::vector<int>& anchored, const MatrixD& anchor_pos,
                                   const MatrixD* fill) {
  const int steps = static_cast<int>(anchored.size());
  MatrixD out(steps, 2);
  int prev = -1;
  for (int t = 0; t < steps; ++t) {
    if (anchored[static_cast<std::size_t>(t)]) {
      out.row(t) = anchor_pos.row(t);
      if (prev >= 0 && t - prev > 1) {
        for (int u = prev + 1; u < t; ++u) {
          const double w = static_cast<double>(u - prev) / static_cast<double>(t - prev);
          out.row(u) = (1.0 - w) * anchor_pos.row(prev) + w * anchor_pos.row(t);
        }
      }
      prev = t;
    }
  }
  const int first = static_cast<int>(std::find(anchored.begin(), anchored.end(), 1) - anchored.begin());
  for (int t = 0; t < std::min(first, steps); ++t) {
    out.row(t) = fill ? fill->row(t) : anchor_pos.row(first);
  }
  for (int t = prev + 1; t < steps && prev >= 0; ++t) out.row(t) = fill ? fill->row(t) : anchor_pos.row(prev);
  if (prev < 0 && fill) out = *fill;
  return out;
}

// Ball path and possession labels from touch annotations.
//
// Touches (TOUCH with optional end_time for carries, OUT for ball-out agents)
// pin the ball to the toucher; the path is linear between touches. The label
// is the controller during control and the next controller in transition.
inline BallTruth reconstruct_ball_truth(const Episode& episode, const std::vector<EventRecord>& events,
                                        const AgentSet& agents) {
  const int steps = static_cast<int>(episode.frames.size());
  struct Touch {
    int start, end, agent;
  };
  std::vector<Touch> touches;
  for (const auto& e : events) {
    if (e.type != EventType::kTouch && e.type != EventType::kOut) continue;
    const auto agent = agents.index_of(e.player_id);
    if (!agent) throw LabelError("unknown player in touch event: " + e.player_id);
    const int start = frame_index(episode, e.time);
    const int end = e.end_time ? frame_index(episode, *e.end_time) : start;
    if (start < 0 || end < 0) {
      throw LabelError("touch by " + e.player_id + " at t=" + std::to_string(e.time) + " lies outside episode " +
                       episode.episode_id);
    }
    touches.push_back({start, std::max(start, end), *agent});
  }
  if (touches.empty()) throw LabelError("episode " + episode.episode_id + " has no touches");
  std::stable_sort(touches.begin(), touches.end(), [](const Touch& a, const Touch& b) { return a.start < b.start; });

  BallTruth truth;
  truth.toucher.assign(static_cast<std::size_t>(steps), -1);
  std::vector<int> anchored(static_cast<std::size_t>(steps), 0);
  MatrixD anchor_pos = MatrixD::Zero(steps, 2);
  for (const auto& touch : touches) {
    for (int t = touch.start; t <= touch.end; ++t) {
      anchored[static_cast<std::size_t>(t)] = 1;
      truth.toucher[static_cast<std::size_t>(t)] = touch.agent;
      anchor_pos.row(t) = agent_position(episode.frames[static_cast<std::size_t>(t)], agents, touch.agent).transpose();
    }
  }
  truth.ball = interpolate_anchors(anchored, anchor_pos, nullptr);

  // Possession: walk backwards so each frame takes the next controller.
  truth.labels.assign(static_cast<std::size_t>(steps), 0);
  int next = -1;
  for (int t = steps - 1; t >= 0; --t) {
    const int who = truth.toucher[static_cast<std::size_t>(t)];
    if (who >= 0) next = who;
    truth.labels[static_cast<std::size_t>(t)] = next;
  }
  int last = -1;
  for (int t = 0; t < steps; ++t) {
    if (truth.toucher[static_cast<std::size_t>(t)] >= 0) last = truth.toucher[static_cast<std::size_t>(t)];
    if (truth.labels[static_cast<std::size_t>(t)] < 0) truth.labels[static_cast<std::size_t>(t)] = last;
  }
  return truth;
}

}  // namespace balltraj::data
