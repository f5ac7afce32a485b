#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "balltraj/autograd/graph.hpp"
#include "balltraj/error.hpp"

namespace balltraj::data {

using Point = Eigen::Vector2d;
using MatrixD = Matrix<double>;

inline constexpr double kFrameRate = 10.0;
inline constexpr double kFramePeriod = 0.1;
inline constexpr double kTimeTolerance = 1e-6;
inline constexpr int kFeatureCount = 6;  // x, y, vx, vy, speed, accel
inline constexpr int kBallOutCount = 4;

struct PitchConfig {
  double length = 105.0;
  double width = 68.0;

  void validate() const {
    if (!(length > 0.0) || !(width > 0.0)) throw ConfigError("pitch dimensions must be positive");
  }
  Point center() const { return {length / 2.0, width / 2.0}; }
};

enum class Team : std::uint8_t { kTeam1 = 1, kTeam2 = 2 };

struct PlayerState {
  std::string player_id;
  Team team = Team::kTeam1;
  double x = 0.0, y = 0.0;
  double vx = 0.0, vy = 0.0;
  double speed = 0.0;
  double accel = 0.0;
};

struct TrackingFrame {
  double time = 0.0;
  std::vector<PlayerState> players;
  std::optional<Point> ball;
  bool in_play = true;

  const PlayerState* find(const std::string& id) const {
    for (const auto& p : players) {
      if (p.player_id == id) return &p;
    }
    return nullptr;
  }
};

struct Episode {
  std::string episode_id;
  std::vector<TrackingFrame> frames;

  std::size_t size() const { return frames.size(); }
  double start_time() const { return frames.empty() ? 0.0 : frames.front().time; }
};

enum class EventType : std::uint8_t { kTouch, kPass, kOut, kOther };

inline const char* to_string(EventType t) {
  switch (t) {
    case EventType::kTouch: return "TOUCH";
    case EventType::kPass: return "PASS";
    case EventType::kOut: return "OUT";
    case EventType::kOther: return "OTHER";
  }
  return "OTHER";
}

inline EventType parse_event_type(const std::string& s) {
  if (s == "TOUCH" || s == "RECEIVE" || s == "CARRY") return EventType::kTouch;
  if (s == "PASS") return EventType::kPass;
  if (s == "OUT") return EventType::kOut;
  return EventType::kOther;
}

// A touch covers [time, end_time] (a carry when end_time > time). A pass
// record marks the kick at `time` and the arrival at `end_time`. An OUT
// record names the ball-out pseudo-agent of the crossed line.
struct EventRecord {
  double time = 0.0;
  std::string player_id;
  EventType type = EventType::kOther;
  std::optional<double> end_time;
};

// Consecutive touches by distinct agents with only transition in between.
// passer / receiver are agent indices; t0 is the release, t1 the arrival.
struct PassEvent {
  int passer = -1;
  int receiver = -1;
  double t0 = 0.0;
  double t1 = 0.0;

  bool operator==(const PassEvent&) const = default;
};

// Ball-out pseudo-agent identifiers, in roster order.
inline const std::array<std::string, kBallOutCount>& ball_out_ids() {
  static const std::array<std::string, kBallOutCount> ids = {"OUT_LEFT", "OUT_RIGHT", "OUT_BOTTOM",
                                                             "OUT_TOP"};
  return ids;
}

// Class roster: team 1, team 2, then the four ball-out pseudo-agents.
struct AgentSet {
  std::vector<std::string> team1;
  std::vector<std::string> team2;
  std::array<Point, kBallOutCount> ball_out;

  static std::array<Point, kBallOutCount> line_midpoints(const PitchConfig& pitch) {
    return {Point{0.0, pitch.width / 2.0}, Point{pitch.length, pitch.width / 2.0},
            Point{pitch.length / 2.0, 0.0}, Point{pitch.length / 2.0, pitch.width}};
  }

  static AgentSet make(std::vector<std::string> team1, std::vector<std::string> team2,
                       const PitchConfig& pitch) {
    pitch.validate();
    AgentSet s;
    s.team1 = std::move(team1);
    s.team2 = std::move(team2);
    s.ball_out = line_midpoints(pitch);
    return s;
  }

  // Roster of a frame, players ordered by id within each team.
  static AgentSet from_frame(const TrackingFrame& frame, const PitchConfig& pitch);

  int team_size() const { return static_cast<int>(team1.size()); }
  int size() const { return static_cast<int>(team1.size() + team2.size()) + kBallOutCount; }
  bool balanced() const { return team1.size() == team2.size() && !team1.empty(); }

  // 1, 2 for players; 0 for ball-out agents.
  int team_of(int index) const {
    if (index < 0 || index >= size()) throw LabelError("agent index out of range");
    if (index < static_cast<int>(team1.size())) return 1;
    if (index < static_cast<int>(team1.size() + team2.size())) return 2;
    return 0;
  }

  std::optional<int> index_of(const std::string& id) const {
    for (std::size_t i = 0; i < team1.size(); ++i) {
      if (team1[i] == id) return static_cast<int>(i);
    }
    for (std::size_t i = 0; i < team2.size(); ++i) {
      if (team2[i] == id) return static_cast<int>(team1.size() + i);
    }
    for (std::size_t i = 0; i < kBallOutCount; ++i) {
      if (ball_out_ids()[i] == id) return static_cast<int>(team1.size() + team2.size() + i);
    }
    return std::nullopt;
  }

  std::string id_of(int index) const {
    const int t = team_of(index);
    if (t == 1) return team1[static_cast<std::size_t>(index)];
    if (t == 2) return team2[static_cast<std::size_t>(index) - team1.size()];
    return ball_out_ids()[static_cast<std::size_t>(index) - team1.size() - team2.size()];
  }

  bool operator==(const AgentSet& o) const { return team1 == o.team1 && team2 == o.team2; }
};

inline AgentSet AgentSet::from_frame(const TrackingFrame& frame, const PitchConfig& pitch) {
  std::vector<std::string> t1, t2;
  for (const auto& p : frame.players) (p.team == Team::kTeam1 ? t1 : t2).push_back(p.player_id);
  std::sort(t1.begin(), t1.end());
  std::sort(t2.begin(), t2.end());
  return make(std::move(t1), std::move(t2), pitch);
}

// A fixed-length training or inference example.
//
// features is [steps * agents, 6] with row (t * agents + a); ball-out agents
// carry their line midpoint and zero kinematics. ball_mask[t] is true when
// the ball position at t is observed (imputation input).
struct Window {
  int steps = 0;
  int agents = 0;
  double start_time = 0.0;
  AgentSet agent_set;
  MatrixD features;
  std::vector<int> labels;
  MatrixD ball;
  std::vector<std::uint8_t> ball_mask;
  std::vector<std::uint8_t> roster_ok;

  int team_size() const { return agent_set.team_size(); }

  double feature(int t, int agent, int k) const { return features(t * agents + agent, k); }

  // Ball observation channel (x, y, flag) with zeros at masked frames.
  MatrixD ball_observation() const {
    MatrixD obs = MatrixD::Zero(steps, 3);
    for (int t = 0; t < steps; ++t) {
      if (!ball_mask.empty() && ball_mask[static_cast<std::size_t>(t)]) {
        obs(t, 0) = ball(t, 0);
        obs(t, 1) = ball(t, 1);
        obs(t, 2) = 1.0;
      }
    }
    return obs;
  }

  // Player (x, y) positions, [steps * 2n, 2] with row (t * 2n + p).
  MatrixD player_positions() const {
    const int players = agents - kBallOutCount;
    MatrixD out(steps * players, 2);
    for (int t = 0; t < steps; ++t) {
      for (int p = 0; p < players; ++p) {
        out(t * players + p, 0) = features(t * agents + p, 0);
        out(t * players + p, 1) = features(t * agents + p, 1);
      }
    }
    return out;
  }

  // All agent (x, y) positions, [steps * agents, 2].
  MatrixD agent_positions() const { return features.leftCols(2); }
};

}  // namespace balltraj::data
