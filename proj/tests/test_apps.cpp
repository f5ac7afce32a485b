#include <gtest/gtest.h>

#include <random>

#include "balltraj/apps/imputation.hpp"
#include "balltraj/apps/roi.hpp"
#include "balltraj/apps/running.hpp"
#include "balltraj/models/checkpoint.hpp"
#include "balltraj/sim/library.hpp"
#include "balltraj/train/pipeline.hpp"
#include "fixtures.hpp"

using namespace balltraj;
using data::MatrixD;
using data::PassEvent;

namespace {

MatrixD random_track(int rows, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> n(0.0, scale);
  MatrixD m(rows, 2);
  for (int r = 0; r < rows; ++r) m.row(r) << n(rng), n(rng);
  return m;
}

models::ModelConfig tiny(models::Variant v) {
  models::ModelConfig c;
  c.variant = v;
  c.d_g = 8;
  c.d_btr = 8;
  c.lstm_hidden = 8;
  c.lstm_layers = 1;
  c.heads = 2;
  c.seed = 3;
  return c;
}

}  // namespace

TEST(RoiTest, IdenticalTrajectoriesAndMonotoneInSize) {
  std::mt19937_64 rng(1);
  const MatrixD y = random_track(50, rng, 20.0);
  for (double a : apps::roi_accuracy(y, y, {0.1, 1.0, 300.0})) EXPECT_EQ(a, 1.0);
  const std::vector<double> sizes = {1, 2, 4, 8, 16, 32, 64};
  for (int trial = 0; trial < 100; ++trial) {
    const MatrixD p = y + random_track(50, rng, 10.0);
    const auto acc = apps::roi_accuracy(p, y, sizes);
    for (std::size_t i = 1; i < acc.size(); ++i) EXPECT_GE(acc[i], acc[i - 1]);
  }
  EXPECT_THROW(apps::roi_accuracy(y, y, {0.0}), ConfigError);
}

TEST(RoiTest, HomographyScalesBoxes) {
  MatrixD p(1, 2), y(1, 2);
  p << 0, 0;
  y << 1, 0;
  Eigen::Matrix3d h = Eigen::Matrix3d::Identity();
  h(0, 0) = h(1, 1) = 10.0;
  EXPECT_EQ(apps::roi_accuracy(p, y, {3.0})[0], 1.0);
  EXPECT_EQ(apps::roi_accuracy(p, y, {3.0}, h)[0], 0.0);
}

TEST(RunningTest, StationaryPlayerAndPartition) {
  std::mt19937_64 rng(2);
  const int T = 200, P = 6;
  MatrixD tracks(T * P, 2);
  std::normal_distribution<double> step(0.0, 0.5);
  for (int p = 0; p < P; ++p) tracks.row(p) << 10.0 * p, 5.0;
  for (int t = 1; t < T; ++t) {
    for (int p = 0; p < P; ++p) {
      tracks.row(t * P + p) = tracks.row((t - 1) * P + p);
      if (p > 0) tracks.row(t * P + p) += Eigen::RowVector2d(step(rng), step(rng));
    }
  }
  const std::vector<int> team = {1, 1, 1, 2, 2, 2};
  const auto possession = apps::random_possession(T, 5);
  const auto r = apps::rp_metrics(tracks, P, team, possession);
  EXPECT_EQ(r.players[0].total(), 0.0);
  EXPECT_EQ(r.players[0].hsr(), 0.0);
  for (int p = 1; p < P; ++p) {
    double whole = 0.0;
    for (int t = 1; t < T; ++t) whole += (tracks.row(t * P + p) - tracks.row((t - 1) * P + p)).norm();
    EXPECT_NEAR(r.players[static_cast<std::size_t>(p)].total(), whole, 1e-6);
    EXPECT_GT(r.players[static_cast<std::size_t>(p)].hsr(), 0.0);
  }
  const auto e = apps::rp_errors(r, r);
  EXPECT_EQ(e.total_attacking.max_ape, 0.0);
  EXPECT_EQ(e.hsr_defending.max_ape, 0.0);
  EXPECT_EQ(e.total_defending.excluded, 1);
}

TEST(RunningTest, MaxAndMeanApe) {
  const auto s = apps::ape({11.0, 9.5, 3.0}, {10.0, 10.0, 0.0});
  EXPECT_NEAR(s.max_ape, 0.1, 1e-12);
  EXPECT_NEAR(s.mean_ape, 0.075, 1e-12);
  EXPECT_EQ(s.excluded, 1);
}

TEST(PassMatchTest, IdentityAndPartialCredit) {
  const std::vector<PassEvent> truth = {{0, 1, 1.0, 2.0}, {1, 2, 3.0, 4.0}, {2, 3, 6.0, 7.5}};
  const auto same = apps::match_passes(truth, truth, 4);
  EXPECT_EQ(same.f1_pass, 1.0);
  EXPECT_EQ(same.f1_passer, 1.0);
  EXPECT_EQ(same.f1_receiver, 1.0);
  EXPECT_EQ(same.r2_passes, 1.0);
  EXPECT_EQ(same.r2_receives, 1.0);
  // wrong receiver on the last pass, one spurious detection
  const std::vector<PassEvent> detected = {{0, 1, 1.2, 2.1}, {1, 2, 3.0, 4.0}, {2, 0, 6.0, 7.5}, {3, 0, 20.0, 21.0}};
  const auto r = apps::match_passes(detected, truth, 4);
  EXPECT_NEAR(r.f1_pass, 2.0 * 2 / 7.0, 1e-12);
  EXPECT_NEAR(r.f1_passer, 2.0 * 3 / 7.0, 1e-12);
  EXPECT_NEAR(r.f1_receiver, 2.0 * 2 / 7.0, 1e-12);
  // outside the 2 s tolerance
  const auto late = apps::match_passes({{0, 1, 3.5, 4.0}}, {{0, 1, 1.0, 2.0}}, 2);
  EXPECT_EQ(late.f1_pass, 0.0);
  EXPECT_EQ(apps::match_passes({}, {}, 2).f1_pass, 1.0);
}

TEST(MaskTest, NestedAcrossRates) {
  std::mt19937_64 rng(3);
  const auto w = tu::random_window(200, 2, rng);
  const auto m80 = apps::mask_at_rate(w, 0.8, 11), m90 = apps::mask_at_rate(w, 0.9, 11);
  int observed = 0;
  for (int t = 0; t < w.steps; ++t) {
    if (m90.ball_mask[static_cast<std::size_t>(t)]) EXPECT_TRUE(m80.ball_mask[static_cast<std::size_t>(t)]);
    observed += m80.ball_mask[static_cast<std::size_t>(t)];
  }
  EXPECT_GT(observed, 20);
  EXPECT_LT(observed, 60);
  for (auto m : apps::mask_at_rate(w, 1.0, 11).ball_mask) EXPECT_EQ(m, 0);
  for (auto m : apps::mask_at_rate(w, 0.0, 11).ball_mask) EXPECT_EQ(m, 1);
  EXPECT_THROW(apps::mask_at_rate(w, 1.5, 0), ConfigError);
}

TEST(ImputationTest, ZeroMaskingGivesZeroError) {
  std::mt19937_64 rng(4);
  auto cfg = tiny(models::Variant::kHLstm);
  cfg.imputation = true;
  const auto model = models::make_model<double>(cfg);
  std::vector<data::Window> ws = {tu::random_window(12, 2, rng), tu::random_window(9, 2, rng)};
  const auto rows = apps::evaluate_imputation(*model, ws, {1.0, 0.0});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_GT(rows[0].result.raw.pe, 0.0);
  EXPECT_EQ(rows[1].result.raw.pe, 0.0);
  const auto plain = models::make_model<double>(tiny(models::Variant::kHLstm));
  EXPECT_THROW(apps::evaluate_imputation(*plain, ws), ConfigError);
}

TEST(PassesFromTruthTest, SimulatedEpisodeRecoversScript) {
  const auto m = sim::generate_match(sim::auto_script(21, 4, 20.0));
  const auto w = train::sim_window(m);
  const auto passes = apps::truth_passes(w);
  const auto r = apps::match_passes(passes, m.passes, 8);
  EXPECT_EQ(passes.size(), m.passes.size());
  EXPECT_EQ(r.f1_pass, 1.0);
}

TEST(EvaluateTest, PerfectPredictionMetrics) {
  const auto m = sim::generate_match(sim::auto_script(5, 3, 15.0));
  const auto w = train::sim_window(m);
  train::MetricsAccumulator acc;
  acc.add(w.ball, w, apps::one_hot(w.labels, w.agents));
  const auto r = acc.report();
  EXPECT_EQ(r.pe, 0.0);
  EXPECT_LT(r.rl, 1e-6);
  EXPECT_EQ(r.ppa, 1.0);
  EXPECT_EQ(r.tpa, 1.0);
  train::MetricsAccumulator no_probs;
  no_probs.add(w.ball, w, MatrixD());
  EXPECT_TRUE(std::isnan(no_probs.report().ppa));
}
