#pragma once

// Rule-based touch assignment and piecewise-linear trajectory rebuild.
//
// Scores s[t, p] = g[t, p] / max(dist(ball_t, agent_p), d_min). A frame is
// touched by the argmax agent when its score exceeds touch_threshold, or when
// it lies in (peak_threshold, touch_threshold] at a local peak of the
// max-over-agents series. All other frames are transitions.

#include <algorithm>
#include <ostream>
#include <string>
#include <vector>

#include "balltraj/data/ball_truth.hpp"
#include "balltraj/data/kinematics.hpp"

namespace balltraj::postprocess {

using data::MatrixD;

struct PostprocessConfig {
  double d_min = 0.5;             // m
  double touch_threshold = 0.5;
  double peak_threshold = 0.2;
  int smoothing_frames = 5;       // moving average on the max-score series
  int peak_radius = 5;            // frames on each side

  void validate() const {
    if (!(d_min > 0.0)) throw ConfigError("d_min must be positive");
    if (!(peak_threshold >= 0.0 && peak_threshold <= touch_threshold)) {
      throw ConfigError("peak threshold must lie in [0, touch threshold]");
    }
    if (smoothing_frames < 1 || smoothing_frames % 2 == 0) throw ConfigError("smoothing frames must be odd");
    if (peak_radius < 0) throw ConfigError("peak radius must be nonnegative");
  }
};

enum class IntervalKind { kTouch, kCarry, kTransition };

inline const char* to_string(IntervalKind k) {
  switch (k) {
    case IntervalKind::kTouch: return "TOUCH";
    case IntervalKind::kCarry: return "CARRY";
    case IntervalKind::kTransition: return "TRANSITION";
  }
  return "TRANSITION";
}

struct Interval {
  int agent = -1;  // -1 for transitions
  int t_start = 0;
  int t_end = 0;   // inclusive
  IntervalKind kind = IntervalKind::kTransition;

  bool operator==(const Interval&) const = default;
};

struct TouchAssignment {
  std::vector<int> toucher;        // per frame, -1 in transition
  std::vector<Interval> intervals; // time-ordered, covering every frame

  int steps() const { return static_cast<int>(toucher.size()); }
  std::vector<Interval> touches() const {
    std::vector<Interval> out;
    for (const auto& i : intervals) {
      if (i.kind != IntervalKind::kTransition) out.push_back(i);
    }
    return out;
  }
};

// positions is [T * K, 2] with row t * K + k.
inline MatrixD possession_scores(const MatrixD& probs, const MatrixD& ball, const MatrixD& positions,
                                 const PostprocessConfig& config = {}) {
  config.validate();
  const Eigen::Index steps = probs.rows(), agents = probs.cols();
  if (ball.rows() != steps || ball.cols() != 2 || positions.rows() != steps * agents || positions.cols() != 2) {
    throw ShapeError("possession_scores: shape mismatch");
  }
  MatrixD s(steps, agents);
  for (Eigen::Index t = 0; t < steps; ++t) {
    for (Eigen::Index k = 0; k < agents; ++k) {
      const double d = (positions.row(t * agents + k) - ball.row(t)).norm();
      s(t, k) = probs(t, k) / std::max(d, config.d_min);
    }
  }
  return s;
}

// Frame-wise labels grouped into intervals.
inline std::vector<Interval> group_intervals(const std::vector<int>& toucher) {
  std::vector<Interval> out;
  const int steps = static_cast<int>(toucher.size());
  int start = 0;
  for (int t = 1; t <= steps; ++t) {
    if (t == steps || toucher[static_cast<std::size_t>(t)] != toucher[static_cast<std::size_t>(start)]) {
      Interval iv;
      iv.agent = toucher[static_cast<std::size_t>(start)];
      iv.t_start = start;
      iv.t_end = t - 1;
      iv.kind = iv.agent < 0 ? IntervalKind::kTransition
                             : (iv.t_end > iv.t_start ? IntervalKind::kCarry : IntervalKind::kTouch);
      out.push_back(iv);
      start = t;
    }
  }
  return out;
}

inline TouchAssignment assign_touches(const MatrixD& scores, const PostprocessConfig& config = {}) {
  config.validate();
  const Eigen::Index steps = scores.rows();
  TouchAssignment a;
  a.toucher.assign(static_cast<std::size_t>(steps), -1);
  if (steps == 0 || scores.cols() == 0) return a;
  Eigen::VectorXd best(steps);
  std::vector<int> who(static_cast<std::size_t>(steps));
  for (Eigen::Index t = 0; t < steps; ++t) {
    Eigen::Index k = 0;
    best(t) = scores.row(t).maxCoeff(&k);
    who[static_cast<std::size_t>(t)] = static_cast<int>(k);
  }
  const Eigen::VectorXd smooth = data::moving_average(best, config.smoothing_frames);
  for (Eigen::Index t = 0; t < steps; ++t) {
    const double s = best(t);
    bool touched = s > config.touch_threshold;
    if (!touched && s > config.peak_threshold) {
      const Eigen::Index lo = std::max<Eigen::Index>(0, t - config.peak_radius);
      const Eigen::Index hi = std::min<Eigen::Index>(steps - 1, t + config.peak_radius);
      const bool smooth_peak = smooth(t) >= smooth.segment(lo, hi - lo + 1).maxCoeff();
      const bool raw_peak = (t == 0 || s >= best(t - 1)) && (t == steps - 1 || s >= best(t + 1));
      touched = smooth_peak && raw_peak;
    }
    if (touched) a.toucher[static_cast<std::size_t>(t)] = who[static_cast<std::size_t>(t)];
  }
  a.intervals = group_intervals(a.toucher);
  return a;
}

// Touched frames take the toucher's position; frames between anchors are
// interpolated; frames before the first or after the last anchor keep pred.
inline MatrixD rebuild_trajectory(const TouchAssignment& assignment, const MatrixD& positions, const MatrixD& pred) {
  const int steps = assignment.steps();
  if (pred.rows() != steps || pred.cols() != 2 || steps == 0 || positions.rows() % steps != 0) {
    throw ShapeError("rebuild_trajectory: shape mismatch");
  }
  const Eigen::Index agents = positions.rows() / steps;
  std::vector<int> anchored(static_cast<std::size_t>(steps), 0);
  MatrixD anchor = MatrixD::Zero(steps, 2);
  for (int t = 0; t < steps; ++t) {
    const int k = assignment.toucher[static_cast<std::size_t>(t)];
    if (k < 0) continue;
    if (k >= agents) throw ShapeError("rebuild_trajectory: agent index out of range");
    anchored[static_cast<std::size_t>(t)] = 1;
    anchor.row(t) = positions.row(t * agents + k);
  }
  return data::interpolate_anchors(anchored, anchor, &pred);
}

inline void write_assignment_csv(std::ostream& out, const TouchAssignment& a) {
  out << "t_start,t_end,agent,kind\n";
  for (const auto& i : a.intervals) out << i.t_start << ',' << i.t_end << ',' << i.agent << ',' << to_string(i.kind) << '\n';
}

}  // namespace balltraj::postprocess
