#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <vector>

#include "balltraj/postprocess/postprocess.hpp"

namespace balltraj::apps {

using data::MatrixD;
using data::PassEvent;

// Consecutive touch intervals of distinct players. Only transition frames
// can separate two consecutive touch intervals, so every such pair is a pass.
// Intervals of ball-out agents (index >= player_count) break the chain.
inline std::vector<PassEvent> detect_passes(const postprocess::TouchAssignment& a, int player_count,
                                            double start_time = 0.0, double dt = data::kFramePeriod) {
  std::vector<PassEvent> out;
  const auto touches = a.touches();
  for (std::size_t i = 1; i < touches.size(); ++i) {
    const auto& p = touches[i - 1];
    const auto& q = touches[i];
    if (p.agent == q.agent || p.agent >= player_count || q.agent >= player_count) continue;
    out.push_back({p.agent, q.agent, start_time + p.t_end * dt, start_time + q.t_start * dt});
  }
  return out;
}

struct PassMatchReport {
  double f1_pass = 0.0;
  double f1_passer = 0.0;
  double f1_receiver = 0.0;
  double r2_passes = 0.0;
  double r2_receives = 0.0;
  int detected = 0;
  int truth = 0;
};

inline double f1_score(int matched, int detected, int truth) {
  if (detected + truth == 0) return 1.0;
  return 2.0 * matched / static_cast<double>(detected + truth);
}

// Coefficient of determination of `estimate` against `truth`.
inline double r_squared(const std::vector<double>& truth, const std::vector<double>& estimate) {
  if (truth.empty()) return 1.0;
  double mean = 0.0;
  for (double v : truth) mean += v;
  mean /= static_cast<double>(truth.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ss_res += (truth[i] - estimate[i]) * (truth[i] - estimate[i]);
    ss_tot += (truth[i] - mean) * (truth[i] - mean);
  }
  if (ss_tot == 0.0) return ss_res == 0.0 ? 1.0 : 0.0;
  return 1.0 - ss_res / ss_tot;
}

namespace detail {

// Greedy earliest-first one-to-one matching; each true pass takes the
// earliest unmatched detection inside its tolerance window that satisfies
// `same`.
template <typename Same>
int greedy_match(const std::vector<PassEvent>& detected, const std::vector<PassEvent>& truth, double tolerance,
                 Same same) {
  std::vector<char> used(detected.size(), 0);
  int matched = 0;
  for (const auto& t : truth) {
    for (std::size_t i = 0; i < detected.size(); ++i) {
      const auto& d = detected[i];
      if (used[i] || !same(d, t)) continue;
      if (d.t0 > t.t0 - tolerance && d.t1 < t.t1 + tolerance) {
        used[i] = 1;
        ++matched;
        break;
      }
    }
  }
  return matched;
}

inline std::vector<PassEvent> by_time(std::vector<PassEvent> v) {
  std::stable_sort(v.begin(), v.end(), [](const PassEvent& a, const PassEvent& b) { return a.t0 < b.t0; });
  return v;
}

}  // namespace detail

inline PassMatchReport match_passes(const std::vector<PassEvent>& detected_in, const std::vector<PassEvent>& truth_in,
                                    int player_count, double tolerance = 2.0) {
  const auto detected = detail::by_time(detected_in), truth = detail::by_time(truth_in);
  PassMatchReport r;
  r.detected = static_cast<int>(detected.size());
  r.truth = static_cast<int>(truth.size());
  const int both = detail::greedy_match(detected, truth, tolerance, [](const PassEvent& a, const PassEvent& b) {
    return a.passer == b.passer && a.receiver == b.receiver;
  });
  const int passer = detail::greedy_match(detected, truth, tolerance,
                                          [](const PassEvent& a, const PassEvent& b) { return a.passer == b.passer; });
  const int receiver = detail::greedy_match(
      detected, truth, tolerance, [](const PassEvent& a, const PassEvent& b) { return a.receiver == b.receiver; });
  r.f1_pass = f1_score(both, r.detected, r.truth);
  r.f1_passer = f1_score(passer, r.detected, r.truth);
  r.f1_receiver = f1_score(receiver, r.detected, r.truth);
  std::vector<double> tp(static_cast<std::size_t>(player_count), 0.0), dp = tp, tr = tp, dr = tp;
  auto bump = [player_count](std::vector<double>& v, int who) {
    if (who >= 0 && who < player_count) v[static_cast<std::size_t>(who)] += 1.0;
  };
  for (const auto& p : truth) {
    bump(tp, p.passer);
    bump(tr, p.receiver);
  }
  for (const auto& p : detected) {
    bump(dp, p.passer);
    bump(dr, p.receiver);
  }
  r.r2_passes = r_squared(tp, dp);
  r.r2_receives = r_squared(tr, dr);
  return r;
}

inline void write_passes_csv(std::ostream& out, const std::vector<PassEvent>& passes, const data::AgentSet& agents) {
  out << "passer,receiver,t0,t1\n";
  for (const auto& p : passes) {
    out << agents.id_of(p.passer) << ',' << agents.id_of(p.receiver) << ',' << p.t0 << ',' << p.t1 << '\n';
  }
}

}  // namespace balltraj::apps
