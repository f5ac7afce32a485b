#pragma once

// Raw files to labelled full-episode windows.

#include <string>
#include <vector>

#include "balltraj/data/episodes.hpp"
#include "balltraj/data/io.hpp"
#include "balltraj/data/kinematics.hpp"
#include "balltraj/data/resample.hpp"
#include "balltraj/data/windows.hpp"
#include "balltraj/sim/simulator.hpp"

namespace balltraj::train {

struct PipelineOptions {
  data::PitchConfig pitch;
  data::KinematicsOptions kinematics;
  int min_frames = 3;
  bool require_truth = true;  // drop episodes whose ball truth cannot be rebuilt
};

struct Match {
  std::string name;
  std::vector<data::TrackingFrame> frames;  // 10 Hz
  std::vector<data::EventRecord> events;
};

struct EpisodeSet {
  std::vector<data::Window> episodes;
  std::vector<std::vector<data::EventRecord>> events;  // per episode
  std::vector<std::string> skipped;                    // "episode: reason"
};

inline Match load_match(const std::string& tracking_path, const std::string& events_path, const std::string& format,
                        const data::PitchConfig& pitch = {}) {
  Match m;
  m.name = tracking_path;
  const auto fmt = data::parse_tracking_format(format);
  m.frames = data::load_tracking(tracking_path, format, pitch);
  if (fmt == data::TrackingFormat::kMetrica) m.frames = data::resample(m.frames, data::kMetricaRate);
  if (!events_path.empty()) m.events = data::load_events(events_path, format, pitch);
  return m;
}

inline EpisodeSet build_episodes(const Match& match, const PipelineOptions& options = {}) {
  EpisodeSet out;
  auto episodes = data::segment_episodes(match.frames, match.events, match.name.empty() ? "ep" : match.name + "#");
  for (auto& ep : episodes) {
    if (static_cast<int>(ep.size()) < std::max(options.min_frames, 2)) {
      out.skipped.push_back(ep.episode_id + ": shorter than " + std::to_string(options.min_frames) + " frames");
      continue;
    }
    data::attach_kinematics(ep, options.kinematics);
    const auto agents = data::AgentSet::from_frame(ep.frames.front(), options.pitch);
    if (!agents.balanced()) {
      out.skipped.push_back(ep.episode_id + ": unequal team sizes");
      continue;
    }
    auto events = data::events_in(ep, match.events);
    try {
      const auto truth = data::reconstruct_ball_truth(ep, events, agents);
      out.episodes.push_back(data::to_window(ep, agents, &truth));
    } catch (const LabelError& e) {
      if (options.require_truth) {
        out.skipped.push_back(ep.episode_id + ": " + e.what());
        continue;
      }
      out.episodes.push_back(data::to_window(ep, agents));
    }
    out.events.push_back(std::move(events));
  }
  return out;
}

// Simulator output straight to a labelled window.
inline data::Window sim_window(const sim::SimResult& r) { return data::to_window(r.episode, r.agents, &r.truth); }

// Fixed-length training windows cut from full episodes.
inline std::vector<data::Window> cut_windows(const std::vector<data::Window>& episodes, int length = data::kWindowLength,
                                             int stride = 5) {
  std::vector<data::Window> out;
  for (const auto& e : episodes) {
    auto w = data::make_windows(e, length, stride);
    out.insert(out.end(), std::make_move_iterator(w.begin()), std::make_move_iterator(w.end()));
  }
  return out;
}

// Deterministic split of episodes by a seeded shuffle.
struct Split {
  std::vector<data::Window> train, validation, test;
};

inline Split split_episodes(std::vector<data::Window> episodes, double validation_fraction, double test_fraction,
                            std::uint64_t seed) {
  if (validation_fraction < 0 || test_fraction < 0 || validation_fraction + test_fraction >= 1.0) {
    throw ConfigError("split fractions must be non-negative and sum below 1");
  }
  std::mt19937_64 rng(seed);
  std::shuffle(episodes.begin(), episodes.end(), rng);
  const auto n = episodes.size();
  const auto n_test = static_cast<std::size_t>(std::floor(test_fraction * static_cast<double>(n)));
  const auto n_val = static_cast<std::size_t>(std::floor(validation_fraction * static_cast<double>(n)));
  Split s;
  for (std::size_t i = 0; i < n; ++i) {
    auto& dst = i < n_test ? s.test : (i < n_test + n_val ? s.validation : s.train);
    dst.push_back(std::move(episodes[i]));
  }
  return s;
}

}  // namespace balltraj::train
