#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "balltraj/data/types.hpp"

namespace balltraj::data {

// Maximal runs of in-play frames spaced exactly one 10 Hz period apart. An
// OUT event closes the run at its time; the next in-play frame opens a new one.
inline std::vector<Episode> segment_episodes(const std::vector<TrackingFrame>& frames,
                                             const std::vector<EventRecord>& events = {},
                                             const std::string& id_prefix = "ep") {
  std::vector<double> out_times;
  for (const auto& e : events) {
    if (e.type == EventType::kOut) out_times.push_back(e.end_time.value_or(e.time));
  }
  std::sort(out_times.begin(), out_times.end());

  auto out_between = [&](double lo, double hi) {
    // an OUT at or after lo (the previous frame) and strictly before hi
    auto it = std::lower_bound(out_times.begin(), out_times.end(), lo - kTimeTolerance);
    return it != out_times.end() && *it < hi - kTimeTolerance;
  };

  std::vector<Episode> episodes;
  Episode current;
  auto flush = [&]() {
    if (!current.frames.empty()) {
      current.episode_id = id_prefix + std::to_string(episodes.size());
      episodes.push_back(std::move(current));
    }
    current = Episode{};
  };

  for (const auto& f : frames) {
    if (!f.in_play) {
      flush();
      continue;
    }
    if (!current.frames.empty()) {
      const double prev = current.frames.back().time;
      const bool gap = std::abs(f.time - prev - kFramePeriod) > kTimeTolerance;
      if (gap || out_between(prev, f.time)) flush();
    }
    current.frames.push_back(f);
  }
  flush();
  return episodes;
}

// Events whose time falls inside the episode span.
inline std::vector<EventRecord> events_in(const Episode& episode, const std::vector<EventRecord>& events) {
  std::vector<EventRecord> out;
  if (episode.frames.empty()) return out;
  const double lo = episode.frames.front().time - kTimeTolerance;
  const double hi = episode.frames.back().time + kTimeTolerance;
  for (const auto& e : events) {
    if (e.time >= lo && e.time <= hi) out.push_back(e);
  }
  return out;
}

}  // namespace balltraj::data
