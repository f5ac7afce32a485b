#pragma once

#include <random>
#include <string>

#include "balltraj/data/types.hpp"

namespace balltraj::tu {

// Window with random on-pitch players, random kinematics, a ball near the
// labelled agent and every frame observed.
inline data::Window random_window(int steps, int team_size, std::mt19937_64& rng,
                                  const data::PitchConfig& pitch = {}) {
  std::vector<std::string> t1, t2;
  for (int i = 0; i < team_size; ++i) {
    t1.push_back("H" + std::to_string(10 + i));
    t2.push_back("A" + std::to_string(10 + i));
  }
  data::Window w;
  w.steps = steps;
  w.agent_set = data::AgentSet::make(t1, t2, pitch);
  w.agents = w.agent_set.size();
  w.features = data::MatrixD::Zero(static_cast<Eigen::Index>(steps) * w.agents, data::kFeatureCount);
  std::uniform_real_distribution<double> ux(0.0, pitch.length), uy(0.0, pitch.width), uv(-6.0, 6.0);
  std::uniform_int_distribution<int> label(0, w.agents - 1);
  const auto mids = data::AgentSet::line_midpoints(pitch);
  w.ball.resize(steps, 2);
  for (int t = 0; t < steps; ++t) {
    for (int a = 0; a < w.agents; ++a) {
      auto row = w.features.row(static_cast<Eigen::Index>(t) * w.agents + a);
      if (a >= 2 * team_size) {
        const auto& p = mids[static_cast<std::size_t>(a - 2 * team_size)];
        row << p.x(), p.y(), 0, 0, 0, 0;
        continue;
      }
      const double vx = uv(rng), vy = uv(rng);
      row << ux(rng), uy(rng), vx, vy, std::hypot(vx, vy), uv(rng);
    }
    const int l = label(rng);
    w.labels.push_back(l);
    w.ball(t, 0) = w.feature(t, l, 0) + uv(rng) * 0.2;
    w.ball(t, 1) = w.feature(t, l, 1) + uv(rng) * 0.2;
  }
  w.ball_mask.assign(static_cast<std::size_t>(steps), 1);
  w.roster_ok.assign(static_cast<std::size_t>(steps), 1);
  return w;
}

// The agent-index map used by permute_window: new index a holds old src[a].
inline std::vector<int> permutation_sources(int n, int agents, const std::vector<int>& perm1,
                                            const std::vector<int>& perm2) {
  std::vector<int> src(static_cast<std::size_t>(agents));
  for (int a = 0; a < agents; ++a) src[static_cast<std::size_t>(a)] = a;
  for (int i = 0; i < n; ++i) {
    src[static_cast<std::size_t>(i)] = perm1[static_cast<std::size_t>(i)];
    src[static_cast<std::size_t>(n + i)] = n + perm2[static_cast<std::size_t>(i)];
  }
  return src;
}

// Applies a within-team permutation to the players of a window. perm1 and
// perm2 act on team 1 and team 2. Labels follow their agents.
inline data::Window permute_window(const data::Window& w, const std::vector<int>& perm1, const std::vector<int>& perm2) {
  const std::vector<int> src = permutation_sources(w.team_size(), w.agents, perm1, perm2);
  std::vector<int> inverse(src.size());
  for (std::size_t a = 0; a < src.size(); ++a) inverse[static_cast<std::size_t>(src[a])] = static_cast<int>(a);
  data::Window out = w;
  for (int t = 0; t < w.steps; ++t) {
    for (int a = 0; a < w.agents; ++a) {
      out.features.row(static_cast<Eigen::Index>(t) * w.agents + a) =
          w.features.row(static_cast<Eigen::Index>(t) * w.agents + src[static_cast<std::size_t>(a)]);
    }
  }
  for (auto& l : out.labels) l = inverse[static_cast<std::size_t>(l)];
  return out;
}

}  // namespace balltraj::tu
