#pragma once

// Possession-wise running performance: total and high-speed distance per
// player, split by whether the player's team was in possession.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "balltraj/data/types.hpp"

namespace balltraj::apps {

inline constexpr double kHsrThreshold = 20.0 / 3.6;  // m/s

struct PlayerRunning {
  double total_attacking = 0.0;
  double total_defending = 0.0;
  double hsr_attacking = 0.0;
  double hsr_defending = 0.0;

  double total() const { return total_attacking + total_defending; }
  double hsr() const { return hsr_attacking + hsr_defending; }
};

struct RPReport {
  std::vector<PlayerRunning> players;
};

// tracks: [T * P, 2]; team_of_player[p] in {1, 2}; possession[t] in {1, 2}
// or 0 (unknown: the last known team is kept, defending before any).
inline RPReport rp_metrics(const data::MatrixD& tracks, int players, const std::vector<int>& team_of_player,
                           const std::vector<int>& possession, double hsr_threshold = kHsrThreshold,
                           double dt = data::kFramePeriod) {
  if (players <= 0 || tracks.rows() % players != 0 || static_cast<int>(team_of_player.size()) != players) {
    throw ShapeError("rp_metrics: shapes");
  }
  const Eigen::Index steps = tracks.rows() / players;
  if (static_cast<Eigen::Index>(possession.size()) != steps) throw ShapeError("rp_metrics: possession length");
  RPReport r;
  r.players.resize(static_cast<std::size_t>(players));
  int team = 0;
  for (Eigen::Index t = 1; t < steps; ++t) {
    if (possession[static_cast<std::size_t>(t)] != 0) team = possession[static_cast<std::size_t>(t)];
    for (int p = 0; p < players; ++p) {
      const double d = (tracks.row(t * players + p) - tracks.row((t - 1) * players + p)).norm();
      auto& pr = r.players[static_cast<std::size_t>(p)];
      const bool attacking = team != 0 && team == team_of_player[static_cast<std::size_t>(p)];
      (attacking ? pr.total_attacking : pr.total_defending) += d;
      if (d / dt > hsr_threshold) (attacking ? pr.hsr_attacking : pr.hsr_defending) += d;
    }
  }
  return r;
}

struct ApeSummary {
  double max_ape = 0.0;
  double mean_ape = 0.0;
  int excluded = 0;  // players with a true value of zero
};

struct RPErrors {
  ApeSummary total_attacking, total_defending, hsr_attacking, hsr_defending;
};

inline ApeSummary ape(const std::vector<double>& estimate, const std::vector<double>& truth) {
  ApeSummary s;
  int used = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == 0.0) {
      ++s.excluded;
      continue;
    }
    const double e = std::abs(estimate[i] - truth[i]) / truth[i];
    s.max_ape = std::max(s.max_ape, e);
    s.mean_ape += e;
    ++used;
  }
  if (used > 0) s.mean_ape /= used;
  return s;
}

inline RPErrors rp_errors(const RPReport& estimate, const RPReport& truth) {
  if (estimate.players.size() != truth.players.size()) throw ShapeError("rp_errors: player count");
  auto column = [](const RPReport& r, double PlayerRunning::*field) {
    std::vector<double> v;
    for (const auto& p : r.players) v.push_back(p.*field);
    return v;
  };
  RPErrors e;
  e.total_attacking = ape(column(estimate, &PlayerRunning::total_attacking), column(truth, &PlayerRunning::total_attacking));
  e.total_defending = ape(column(estimate, &PlayerRunning::total_defending), column(truth, &PlayerRunning::total_defending));
  e.hsr_attacking = ape(column(estimate, &PlayerRunning::hsr_attacking), column(truth, &PlayerRunning::hsr_attacking));
  e.hsr_defending = ape(column(estimate, &PlayerRunning::hsr_defending), column(truth, &PlayerRunning::hsr_defending));
  return e;
}

// Team in possession per frame from class probabilities: the team whose
// players carry more probability mass (ball-out classes ignored).
inline std::vector<int> team_possession(const data::MatrixD& probs, const std::vector<int>& team_of_class) {
  std::vector<int> out;
  for (Eigen::Index t = 0; t < probs.rows(); ++t) {
    double m1 = 0.0, m2 = 0.0;
    for (Eigen::Index k = 0; k < probs.cols(); ++k) {
      const int team = team_of_class[static_cast<std::size_t>(k)];
      if (team == 1) m1 += probs(t, k);
      if (team == 2) m2 += probs(t, k);
    }
    out.push_back(m1 >= m2 ? 1 : 2);
  }
  return out;
}

inline std::vector<int> team_possession_from_labels(const std::vector<int>& labels, const std::vector<int>& team_of_class) {
  std::vector<int> out;
  for (int q : labels) out.push_back(team_of_class.at(static_cast<std::size_t>(q)));
  return out;
}

inline std::vector<int> random_possession(std::size_t steps, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> team(1, 2);
  std::vector<int> out(steps);
  for (auto& v : out) v = team(rng);
  return out;
}

}  // namespace balltraj::apps
