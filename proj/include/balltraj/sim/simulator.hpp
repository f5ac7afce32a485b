#pragma once

// Deterministic scripted-match generator.
//
// Players follow smoothstep paths between random waypoints around formation
// anchors; the nearest opponent of the agent in possession presses it. The
// ball sits on its controller during control and flies in a straight line at
// constant speed between release and arrival. Release and arrival frames are
// chosen so that the ball stays more than 2 m from the receiver while in
// flight, which keeps the score-based touch rules from firing early.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "balltraj/data/ball_truth.hpp"
#include "balltraj/data/kinematics.hpp"

namespace balltraj::sim {

using data::AgentSet;
using data::EventRecord;
using data::EventType;
using data::MatrixD;
using data::PassEvent;
using data::PitchConfig;
using data::Point;

struct PlannedPass {
  std::string passer;
  std::string receiver;          // player id or ball-out id
  double kick_time = 0.0;        // s from episode start
  double flight_duration = 0.0;  // s; 0 picks it from pass_speed
  double hold = -1.0;            // s after reception; overrides kick_time when >= 0
};

struct MatchScript {
  std::string name = "match";
  std::uint64_t seed = 0;
  int n_players = 11;
  double duration = 30.0;  // s; an OUT arrival ends the episode earlier
  double start_time = 0.0;
  PitchConfig pitch;
  double max_player_speed = 7.0;  // m/s
  double pass_speed = 30.0;       // m/s for automatic flight times
  double max_ball_speed = 45.0;   // m/s
  double waypoint_interval = 2.0; // s
  double wander_radius = 8.0;     // m
  bool pressing = true;
  std::string first_carrier;      // defaults to the first outfield player of team 1
  std::vector<PlannedPass> passes;

  // Automatic plan: random control times and receivers until `duration`.
  bool auto_passes = false;
  double min_control = 0.1;       // s
  double max_control = 2.5;       // s
  double turnover_rate = 0.15;
  double min_pass_length = 6.0;   // m
  double max_pass_length = 30.0;  // m
};

struct SimResult {
  data::Episode episode;
  std::vector<EventRecord> events;
  AgentSet agents;
  data::BallTruth truth;           // ball, labels, toucher
  std::vector<PassEvent> passes;   // player-to-player passes only
};

inline std::string player_id(int team, int index) {
  const char prefix = team == 1 ? 'H' : 'A';
  const std::string num = std::to_string(index + 1);
  return std::string(1, prefix) + (num.size() < 2 ? "0" : "") + num;
}

namespace detail {

inline double smoothstep(double u) { return u * u * (3.0 - 2.0 * u); }

inline Point clamp_to_pitch(const Point& p, const PitchConfig& pitch, double margin = 1.0) {
  return {std::clamp(p.x(), margin, pitch.length - margin), std::clamp(p.y(), margin, pitch.width - margin)};
}

// Formation anchors; player 0 of each team is the goalkeeper.
inline std::vector<Point> formation(int n, int team, const PitchConfig& pitch) {
  std::vector<Point> out;
  out.emplace_back(4.0, pitch.width / 2.0);
  const int outfield = n - 1;
  const int lines = outfield <= 3 ? 1 : (outfield <= 6 ? 2 : 3);
  int placed = 0;
  for (int l = 0; l < lines; ++l) {
    const int in_line = (outfield - placed) / (lines - l);
    const double x = pitch.length * (0.18 + 0.3 * (l + 1) / (lines + 1.0));
    for (int i = 0; i < in_line; ++i) out.emplace_back(x, pitch.width * (i + 1.0) / (in_line + 1.0));
    placed += in_line;
  }
  if (team == 2) {
    for (auto& p : out) p.x() = pitch.length - p.x();
  }
  return out;
}

struct PlayerPath {
  std::vector<Point> waypoints;
  int interval = 20;

  Point at(int t) const {
    const int j = std::min<int>(t / interval, static_cast<int>(waypoints.size()) - 2);
    const double u = std::clamp(static_cast<double>(t - j * interval) / interval, 0.0, 1.0);
    const Point& a = waypoints[static_cast<std::size_t>(j)];
    const Point& b = waypoints[static_cast<std::size_t>(j) + 1];
    return a + (b - a) * smoothstep(u);
  }
};

}  // namespace detail

class Simulator {
 public:
  explicit Simulator(const MatchScript& script) : s_(script), rng_(script.seed) {
    validate();
    std::vector<std::string> t1, t2;
    for (int i = 0; i < s_.n_players; ++i) {
      t1.push_back(player_id(1, i));
      t2.push_back(player_id(2, i));
    }
    agents_ = AgentSet::make(t1, t2, s_.pitch);
    players_ = 2 * s_.n_players;
    max_frames_ = static_cast<int>(std::lround(s_.duration * data::kFrameRate)) + 1;
    build_paths();
  }

  SimResult run() {
    // positions_[t][p] for simulated frames
    positions_.push_back(initial_positions());
    int controller = resolve(s_.first_carrier.empty() ? player_id(1, std::min(1, s_.n_players - 1)) : s_.first_carrier);
    if (controller >= players_) throw ScriptError("first carrier must be a player");
    int control_start = 0;
    std::size_t next_plan = 0;
    std::optional<int> out_agent;
    int last_frame = max_frames_ - 1;

    while (true) {
      // decide the release frame of the current controller
      std::optional<Release> release;
      if (s_.auto_passes) {
        release = auto_release(controller, control_start, last_frame);
      } else if (next_plan < s_.passes.size()) {
        release = planned_release(s_.passes[next_plan], controller, control_start);
        ++next_plan;
      }
      if (!release) {
        extend_to(last_frame, controller);
        add_control(controller, control_start, last_frame);
        break;
      }
      // control until kick, then flight
      extend_to(release->kick, controller);
      add_control(controller, control_start, release->kick);
      commit_flight(*release);
      if (release->receiver >= players_) {
        out_agent = release->receiver;
        last_frame = release->arrival;
        add_control(release->receiver, release->arrival, release->arrival);
        break;
      }
      controller = release->receiver;
      control_start = release->arrival;
      if (control_start >= last_frame) {
        add_control(controller, control_start, last_frame);
        break;
      }
    }
    return finish(last_frame, out_agent);
  }

 private:
  struct Release {
    int kick = 0;
    int arrival = 0;
    int receiver = -1;
    std::vector<std::vector<Point>> flight_positions;  // frames kick+1..arrival
    MatrixD ball;  // rows kick..arrival
  };

  void validate() const {
    s_.pitch.validate();
    if (s_.n_players < 2) throw ScriptError("need at least two players per team");
    if (!(s_.duration > 0.0)) throw ScriptError("duration must be positive");
    if (!(s_.max_player_speed > 0.0) || !(s_.pass_speed > 0.0) || s_.pass_speed > s_.max_ball_speed) {
      throw ScriptError("invalid speed limits");
    }
    for (std::size_t i = 1; i < s_.passes.size(); ++i) {
      if (s_.passes[i].hold < 0.0 && s_.passes[i].kick_time < s_.passes[i - 1].kick_time) throw ScriptError("pass plan must be time-ordered");
    }
  }

  int resolve(const std::string& id) const {
    const auto idx = agents_.index_of(id);
    if (!idx) throw ScriptError("unknown agent in script: " + id);
    return *idx;
  }

  double max_step() const { return s_.max_player_speed * data::kFramePeriod; }

  void build_paths() {
    const int interval = std::max(1, static_cast<int>(std::lround(s_.waypoint_interval * data::kFrameRate)));
    const int count = max_frames_ / interval + 3;
    // smoothstep peaks at 1.5x the mean speed
    const double reach = 0.9 * s_.max_player_speed * s_.waypoint_interval / 1.5;
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int team = 1; team <= 2; ++team) {
      const auto anchors = detail::formation(s_.n_players, team, s_.pitch);
      for (int i = 0; i < s_.n_players; ++i) {
        detail::PlayerPath path;
        path.interval = interval;
        const double radius = i == 0 ? 3.0 : s_.wander_radius;
        const Point anchor = anchors[static_cast<std::size_t>(i)];
        Point cur = detail::clamp_to_pitch(anchor + Point(u(rng_), u(rng_)) * radius, s_.pitch);
        path.waypoints.push_back(cur);
        for (int w = 1; w < count; ++w) {
          Point target = detail::clamp_to_pitch(anchor + Point(u(rng_), u(rng_)) * radius, s_.pitch);
          Point step = target - cur;
          if (step.norm() > reach) step *= reach / step.norm();
          cur = cur + step;
          path.waypoints.push_back(cur);
        }
        paths_.push_back(std::move(path));
      }
    }
  }

  std::vector<Point> initial_positions() const {
    std::vector<Point> out;
    for (const auto& p : paths_) out.push_back(p.at(0));
    return out;
  }

  // Position update for frame t given the agent in possession at t.
  std::vector<Point> step(const std::vector<Point>& prev, int t, int possessor) const {
    std::vector<Point> next(prev.size());
    int presser = -1;
    if (s_.pressing && possessor >= 0 && possessor < players_) {
      const int opp_team = agents_.team_of(possessor) == 1 ? 2 : 1;
      double best = 1e300;
      for (int p = 0; p < players_; ++p) {
        if (agents_.team_of(p) != opp_team || p % s_.n_players == 0) continue;  // keepers hold position
        const double d = (prev[static_cast<std::size_t>(p)] - prev[static_cast<std::size_t>(possessor)]).norm();
        if (d < best) {
          best = d;
          presser = p;
        }
      }
    }
    for (int p = 0; p < players_; ++p) {
      Point target = paths_[static_cast<std::size_t>(p)].at(t);
      if (p == presser) {
        const Point carrier = prev[static_cast<std::size_t>(possessor)];
        const Point from = prev[static_cast<std::size_t>(p)];
        const double d = (carrier - from).norm();
        target = d > 1.5 ? Point(carrier + (from - carrier) * (1.5 / d)) : from;
      }
      Point move = target - prev[static_cast<std::size_t>(p)];
      const double limit = (p == presser ? 0.9 : 1.0) * max_step();
      if (move.norm() > limit) move *= limit / move.norm();
      next[static_cast<std::size_t>(p)] = prev[static_cast<std::size_t>(p)] + move;
    }
    return next;
  }

  void extend_to(int frame, int possessor) {
    while (static_cast<int>(positions_.size()) <= frame) {
      const int t = static_cast<int>(positions_.size());
      positions_.push_back(step(positions_.back(), t, possessor));
    }
  }

  Point agent_at(const std::vector<Point>& pos, int agent) const {
    if (agent < players_) return pos[static_cast<std::size_t>(agent)];
    return agents_.ball_out[static_cast<std::size_t>(agent - players_)];
  }

  // Simulates the flight from `kick` to `arrival` without committing it and
  // checks the in-flight distance condition.
  std::optional<Release> try_flight(int kick, int arrival, int receiver, double max_speed) const {
    Release r;
    r.kick = kick;
    r.arrival = arrival;
    r.receiver = receiver;
    std::vector<Point> cur = positions_[static_cast<std::size_t>(kick)];
    for (int t = kick + 1; t <= arrival; ++t) {
      cur = step(cur, t, receiver);
      r.flight_positions.push_back(cur);
    }
    const Point from = agent_at(positions_[static_cast<std::size_t>(kick)], controller_at_kick_);
    const Point to = agent_at(r.flight_positions.back(), receiver);
    const int frames = arrival - kick;
    if ((to - from).norm() / (frames * data::kFramePeriod) > max_speed) return std::nullopt;
    r.ball.resize(frames + 1, 2);
    double prev_d = 1e300;
    for (int k = 0; k <= frames; ++k) {
      const Point b = from + (to - from) * (static_cast<double>(k) / frames);
      r.ball.row(k) = b.transpose();
      if (k == 0 || k == frames) continue;
      const double d = (b - agent_at(r.flight_positions[static_cast<std::size_t>(k - 1)], receiver)).norm();
      if (d <= 2.0 + 1e-6 || d >= prev_d) return std::nullopt;
      prev_d = d;
    }
    return r;
  }

  // Shortest admissible flight at or below the target speed, else the
  // fastest admissible one under the hard limit.
  std::optional<Release> choose_flight(int kick, int receiver, double flight_duration) const {
    const int forced = static_cast<int>(std::lround(flight_duration * data::kFrameRate));
    if (forced > 0) return try_flight(kick, kick + forced, receiver, s_.max_ball_speed);
    const Point from = agent_at(positions_[static_cast<std::size_t>(kick)], controller_at_kick_);
    const Point guess = agent_at(positions_[static_cast<std::size_t>(kick)], receiver);
    const int nominal = std::max(1, static_cast<int>(std::ceil((guess - from).norm() / (s_.pass_speed * data::kFramePeriod))));
    for (int frames = nominal; frames <= nominal + 10; ++frames) {
      if (auto r = try_flight(kick, kick + frames, receiver, s_.pass_speed * 1.2)) return r;
    }
    for (int frames = nominal - 1; frames >= 1; --frames) {
      if (auto r = try_flight(kick, kick + frames, receiver, s_.max_ball_speed)) return r;
    }
    return std::nullopt;
  }

  std::optional<Release> planned_release(const PlannedPass& pass, int controller, int control_start) {
    const int passer = resolve(pass.passer);
    const int receiver = resolve(pass.receiver);
    if (passer != controller) throw ScriptError("pass by " + pass.passer + " who does not hold the ball");
    if (receiver == passer) throw ScriptError("pass to self by " + pass.passer);
    const int kick = pass.hold >= 0.0 ? control_start + static_cast<int>(std::lround(pass.hold * data::kFrameRate))
                                      : static_cast<int>(std::lround(pass.kick_time * data::kFrameRate));
    if (kick < control_start) throw ScriptError("pass by " + pass.passer + " kicked before reception");
    if (kick >= max_frames_ - 1) return std::nullopt;
    extend_to(kick, controller);
    controller_at_kick_ = controller;
    auto r = choose_flight(kick, receiver, pass.flight_duration);
    if (!r) throw ScriptError("infeasible pass " + pass.passer + " -> " + pass.receiver + " at t=" + std::to_string(pass.kick_time));
    if (r->arrival >= max_frames_) throw ScriptError("pass arrives after the end of the episode");
    return r;
  }

  std::optional<Release> auto_release(int controller, int control_start, int last_frame) {
    std::uniform_int_distribution<int> hold(std::max(0, static_cast<int>(std::lround(s_.min_control * data::kFrameRate)) - 1),
                                            std::max(0, static_cast<int>(std::lround(s_.max_control * data::kFrameRate)) - 1));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int kick = control_start + hold(rng_);
    for (; kick < last_frame - 2; ++kick) {
      extend_to(kick, controller);
      const auto& pos = positions_[static_cast<std::size_t>(kick)];
      const int team = agents_.team_of(controller);
      const bool turnover = u(rng_) < s_.turnover_rate;
      const int target_team = turnover ? 3 - team : team;
      std::vector<int> candidates;
      for (int p = 0; p < players_; ++p) {
        if (p == controller || agents_.team_of(p) != target_team) continue;
        const double d = (pos[static_cast<std::size_t>(p)] - pos[static_cast<std::size_t>(controller)]).norm();
        if (d >= s_.min_pass_length && d <= s_.max_pass_length) candidates.push_back(p);
      }
      std::shuffle(candidates.begin(), candidates.end(), rng_);
      controller_at_kick_ = controller;
      for (int receiver : candidates) {
        auto r = choose_flight(kick, receiver, 0.0);
        if (r && r->arrival < last_frame) return r;
      }
    }
    return std::nullopt;
  }

  void commit_flight(const Release& r) {
    positions_.resize(static_cast<std::size_t>(r.kick) + 1);
    for (const auto& p : r.flight_positions) positions_.push_back(p);
    flights_.push_back(r);
  }

  void add_control(int agent, int start, int end) { controls_.push_back({agent, start, end}); }

  SimResult finish(int last_frame, std::optional<int> out_agent) {
    extend_to(last_frame, -1);
    positions_.resize(static_cast<std::size_t>(last_frame) + 1);
    const int steps = last_frame + 1;
    SimResult res;
    res.agents = agents_;
    res.episode.episode_id = s_.name;
    for (int t = 0; t < steps; ++t) {
      data::TrackingFrame f;
      f.time = s_.start_time + t * data::kFramePeriod;
      for (int p = 0; p < players_; ++p) {
        data::PlayerState ps;
        ps.player_id = agents_.id_of(p);
        ps.team = agents_.team_of(p) == 1 ? data::Team::kTeam1 : data::Team::kTeam2;
        ps.x = positions_[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)].x();
        ps.y = positions_[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)].y();
        f.players.push_back(std::move(ps));
      }
      res.episode.frames.push_back(std::move(f));
    }
    data::attach_kinematics(res.episode);

    // ball: controller positions during control, stored flight paths otherwise
    MatrixD ball(steps, 2);
    res.truth.toucher.assign(static_cast<std::size_t>(steps), -1);
    for (const auto& c : controls_) {
      for (int t = c.start; t <= c.end && t < steps; ++t) {
        ball.row(t) = agent_at(positions_[static_cast<std::size_t>(t)], c.agent).transpose();
        res.truth.toucher[static_cast<std::size_t>(t)] = c.agent;
      }
    }
    for (const auto& r : flights_) {
      for (int k = 1; k < r.arrival - r.kick; ++k) ball.row(r.kick + k) = r.ball.row(k);
    }
    res.truth.ball = ball;
    res.truth.labels.assign(static_cast<std::size_t>(steps), -1);
    int next = controls_.back().agent;
    for (int t = steps - 1; t >= 0; --t) {
      if (res.truth.toucher[static_cast<std::size_t>(t)] >= 0) next = res.truth.toucher[static_cast<std::size_t>(t)];
      res.truth.labels[static_cast<std::size_t>(t)] = next;
    }
    for (std::size_t t = 0; t < res.episode.frames.size(); ++t) res.episode.frames[t].ball = Point(ball(static_cast<Eigen::Index>(t), 0), ball(static_cast<Eigen::Index>(t), 1));

    auto time_of = [&](int frame) { return s_.start_time + frame * data::kFramePeriod; };
    for (const auto& c : controls_) {
      if (c.agent >= players_) continue;
      EventRecord e{time_of(c.start), agents_.id_of(c.agent), EventType::kTouch, std::nullopt};
      if (c.end > c.start) e.end_time = time_of(c.end);
      res.events.push_back(e);
    }
    for (const auto& r : flights_) {
      const int passer = res.truth.toucher[static_cast<std::size_t>(r.kick)];
      res.events.push_back({time_of(r.kick), agents_.id_of(passer), EventType::kPass, time_of(r.arrival)});
      if (r.receiver < players_) res.passes.push_back({passer, r.receiver, time_of(r.kick), time_of(r.arrival)});
    }
    if (out_agent) res.events.push_back({time_of(last_frame), agents_.id_of(*out_agent), EventType::kOut, std::nullopt});
    std::stable_sort(res.events.begin(), res.events.end(),
                     [](const EventRecord& a, const EventRecord& b) { return a.time < b.time; });
    return res;
  }

  struct Control {
    int agent, start, end;
  };

  MatchScript s_;
  mutable std::mt19937_64 rng_;
  AgentSet agents_;
  int players_ = 0;
  int max_frames_ = 0;
  std::vector<detail::PlayerPath> paths_;
  std::vector<std::vector<Point>> positions_;
  std::vector<Control> controls_;
  std::vector<Release> flights_;
  int controller_at_kick_ = -1;
};

inline SimResult generate_match(const MatchScript& script) { return Simulator(script).run(); }

}  // namespace balltraj::sim
