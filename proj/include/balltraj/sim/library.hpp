#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "balltraj/data/io.hpp"
#include "balltraj/sim/simulator.hpp"

namespace balltraj::sim {

// Named scenarios covering carries, wall passes, large-roster circulation,
// one-touch chains and out-of-bounds endings.
inline std::vector<MatchScript> script_library() {
  std::vector<MatchScript> out;

  MatchScript single;
  single.name = "single_carrier";
  single.seed = 101;
  single.n_players = 3;
  single.duration = 12.0;
  single.first_carrier = "H02";
  out.push_back(single);

  MatchScript wall;
  wall.name = "wall_passes";
  wall.seed = 202;
  wall.n_players = 3;
  wall.duration = 16.0;
  wall.first_carrier = "H02";
  wall.min_pass_length = 5.0;
  {
    const char* order[] = {"H02", "H03"};
    for (int i = 0; i < 8; ++i) {
      wall.passes.push_back({order[i % 2], order[(i + 1) % 2], 1.0 + 1.8 * i, 0.0});
    }
  }
  out.push_back(wall);

  MatchScript circulation;
  circulation.name = "circulation_11v11";
  circulation.seed = 303;
  circulation.n_players = 11;
  circulation.duration = 45.0;
  circulation.auto_passes = true;
  circulation.turnover_rate = 0.1;
  out.push_back(circulation);

  MatchScript chain;
  chain.name = "one_touch_chain";
  chain.seed = 404;
  chain.n_players = 4;
  chain.duration = 14.0;
  chain.first_carrier = "H02";
  {
    // receptions released after one or two frames
    const char* ids[] = {"H02", "H03", "H04", "H02", "H03", "H04", "H02"};
    chain.passes.push_back({ids[0], ids[1], 1.0, 0.0});
    for (int i = 1; i + 1 < 7; ++i) chain.passes.push_back({ids[i], ids[i + 1], 0.0, 0.0, (i % 3 == 0) ? 1.0 : 0.1 * (i % 2)});
  }
  out.push_back(chain);

  MatchScript outs;
  outs.name = "out_of_bounds";
  outs.seed = 505;
  outs.n_players = 3;
  outs.duration = 12.0;
  outs.first_carrier = "H02";
  outs.passes = {{"H02", "H03", 1.5, 0.0}, {"H03", "A02", 3.5, 0.0}, {"A02", "OUT_TOP", 6.0, 0.0}};
  out.push_back(outs);

  MatchScript turnovers;
  turnovers.name = "turnover_auto";
  turnovers.seed = 606;
  turnovers.n_players = 4;
  turnovers.duration = 30.0;
  turnovers.auto_passes = true;
  turnovers.turnover_rate = 0.4;
  out.push_back(turnovers);

  return out;
}

// Training-style scripts: automatic plans with varied seeds.
inline MatchScript auto_script(std::uint64_t seed, int n_players, double duration) {
  MatchScript s;
  s.name = "auto_" + std::to_string(seed);
  s.seed = seed;
  s.n_players = n_players;
  s.duration = duration;
  s.auto_passes = true;
  return s;
}

// Canonical tracking and event CSVs for a set of generated episodes. Each
// episode is shifted in time and followed by an out-of-play frame so the
// files segment back into the same episodes.
inline void write_matches(const std::vector<SimResult>& matches, const std::string& tracking_path,
                          const std::string& events_path) {
  std::vector<data::TrackingFrame> frames;
  std::vector<data::EventRecord> events;
  double offset = 0.0;
  for (const auto& m : matches) {
    const double shift = offset - m.episode.start_time();
    for (auto f : m.episode.frames) {
      f.time += shift;
      frames.push_back(std::move(f));
    }
    data::TrackingFrame pause = frames.back();
    pause.time += data::kFramePeriod;
    pause.in_play = false;
    pause.ball.reset();
    frames.push_back(pause);
    for (auto e : m.events) {
      e.time += shift;
      if (e.end_time) *e.end_time += shift;
      events.push_back(std::move(e));
    }
    offset = std::round((pause.time + 1.0) * 10.0) / 10.0;
  }
  data::save_tracking(tracking_path, frames);
  data::save_events(events_path, events);
}

}  // namespace balltraj::sim
