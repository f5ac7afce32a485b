#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>

#include "balltraj/models/checkpoint.hpp"
#include "fixtures.hpp"
#include "model_gradcheck.hpp"
#include "permute.hpp"

using namespace balltraj;
using namespace balltraj::models;
using balltraj::tu::random_permutation;
using balltraj::tu::parameter_gradient_error;
using balltraj::tu::random_window;

namespace {

ModelConfig tiny(Variant v, Eigen::Index d = 8) {
  ModelConfig c;
  c.variant = v;
  c.d_g = d;
  c.d_btr = d;
  c.lstm_hidden = d;
  c.heads = 4;
  c.vrnn_latent = 4;
  c.seed = 7;
  return c;
}

template <typename S>
ForwardResult<S> run(const BallModel<S>& m, ag::Graph<S>& g, const data::Window& w) {
  return m.forward(g, make_batch<S>(w));
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("balltraj_" + name)).string();
}


}  // namespace

TEST(ModelConfigTest, FpiAloneIsRejected) {
  ModelConfig c = tiny(Variant::kHLstm);
  c.embeddings = Embeddings::parse("FPI");
  EXPECT_THROW(c.validate(), ConfigError);
  c.embeddings = Embeddings::parse("NONE");
  EXPECT_THROW(c.validate(), ConfigError);
  c.variant = Variant::kLstm;
  EXPECT_NO_THROW(c.validate());
  c.variant = Variant::kHLstm;
  c.embeddings = Embeddings::parse("PPE+FPI");
  EXPECT_NO_THROW(c.validate());
}

TEST(ModelConfigTest, TextRoundTrip) {
  ModelConfig c = tiny(Variant::kHTransformer);
  c.embeddings = Embeddings::parse("ppe,fpe");
  c.imputation = true;
  c.dropout = 0.3;
  const ModelConfig back = ModelConfig::from_text(c.to_text());
  EXPECT_EQ(back, c);
  EXPECT_EQ(back.embeddings.to_string(), "PPE+FPE");
  EXPECT_THROW(ModelConfig::from_text("bogus=1\n"), ParseError);
  EXPECT_THROW(parse_variant("GRU"), ConfigError);
  EXPECT_EQ(parse_variant("h-lstm"), Variant::kHLstm);
}

TEST(BatchTest, TimeMajorLayout) {
  std::mt19937_64 rng(1);
  const auto w1 = random_window(4, 2, rng), w2 = random_window(4, 2, rng);
  const auto b = make_batch<double>({&w1, &w2});
  EXPECT_EQ(b.frames(), 8);
  EXPECT_EQ(b.agents, 8);
  for (int t = 0; t < 4; ++t) {
    EXPECT_EQ(b.features.row((t * 2 + 1) * 8 + 3), w2.features.row(t * 8 + 3));
    EXPECT_EQ(b.ball.row(t * 2), w1.ball.row(t));
    EXPECT_EQ(b.labels[static_cast<std::size_t>(t * 2 + 1)], w2.labels[static_cast<std::size_t>(t)]);
    EXPECT_EQ(b.players.row((t * 2) * 4 + 2).leftCols(2), w1.features.row(t * 8 + 2).leftCols(2));
  }
  const auto w3 = random_window(5, 2, rng);
  EXPECT_THROW((make_batch<double>({&w1, &w3})), ShapeError);
}

TEST(HierarchicalTest, PossessionRowsOnSimplex) {
  std::mt19937_64 rng(2);
  auto model = make_model<double>(tiny(Variant::kHLstm));
  const auto w = random_window(9, 3, rng);
  ag::Graph<double> g;
  const auto out = run(*model, g, w);
  ASSERT_TRUE(out.has_possession());
  EXPECT_EQ(out.probs.rows(), 9);
  EXPECT_EQ(out.probs.cols(), 10);
  EXPECT_EQ(out.ball.rows(), 9);
  EXPECT_EQ(out.hidden_g.rows(), 90);
  EXPECT_EQ(out.hidden_g.cols(), 16);
  for (Eigen::Index r = 0; r < 9; ++r) EXPECT_NEAR(out.probs.value().row(r).sum(), 1.0, 1e-5);
  EXPECT_TRUE(out.ball.value().allFinite());
  EXPECT_GE(out.probs.value().minCoeff(), 0.0);
}

TEST(HierarchicalTest, VariableLengthInference) {
  std::mt19937_64 rng(3);
  auto model = make_model<double>(tiny(Variant::kHLstm));
  for (int T : {1, 7, 23}) {
    ag::Graph<double> g;
    EXPECT_EQ(run(*model, g, random_window(T, 2, rng)).ball.rows(), T);
  }
}

class PermutationTest : public ::testing::TestWithParam<Variant> {};

TEST_P(PermutationTest, WithinTeamPermutation) {
  std::mt19937_64 rng(11);
  ModelConfig c = tiny(GetParam(), 16);
  auto model = make_model<float>(c);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 2 + trial % 3;
    const auto w = random_window(6, n, rng);
    const auto p1 = random_permutation(n, rng), p2 = random_permutation(n, rng);
    const auto wp = tu::permute_window(w, p1, p2);
    ag::Graph<float> g(false, 5), gp(false, 5);
    const auto out = run(*model, g, w);
    const auto outp = run(*model, gp, wp);
    EXPECT_LT((out.ball.value() - outp.ball.value()).cwiseAbs().maxCoeff(), 1e-5 * 105);
    if (out.has_possession()) {
      const auto src = tu::permutation_sources(n, w.agents, p1, p2);
      for (int a = 0; a < w.agents; ++a) {
        const float d = (outp.probs.value().col(a) - out.probs.value().col(src[static_cast<std::size_t>(a)])).cwiseAbs().maxCoeff();
        EXPECT_LT(d, 1e-5);
      }
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Variants, PermutationTest,
                         ::testing::Values(Variant::kHLstm, Variant::kLstm, Variant::kHTransformer,
                                           Variant::kTransformer, Variant::kVrnn),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(GradientTest, TinyHierarchicalEndToEnd) {
  std::mt19937_64 rng(4);
  auto model = make_model<double>(tiny(Variant::kHLstm));
  const auto w1 = random_window(5, 2, rng), w2 = random_window(5, 2, rng);
  const auto batch = make_batch<double>({&w1, &w2});
  losses::LossWeights weights{1.0, 20.0};
  EXPECT_LT(parameter_gradient_error(*model, batch, weights), 1e-4);
}

TEST(GradientTest, TinyBaselinesAndImputation) {
  std::mt19937_64 rng(5);
  for (Variant v : {Variant::kLstm, Variant::kTransformer, Variant::kHTransformer}) {
    ModelConfig c = tiny(v);
    c.imputation = true;
    auto model = make_model<double>(c);
    auto w = random_window(5, 2, rng);
    w.ball_mask = {1, 0, 0, 1, 0};
    const auto batch = make_batch<double>(w);
    EXPECT_LT(parameter_gradient_error(*model, batch, {1.0, 20.0}), 1e-4) << to_string(v);
  }
}

TEST(GradientTest, PossessionStageReceivesGradientWithoutCrossEntropy) {
  std::mt19937_64 rng(6);
  auto model = make_model<double>(tiny(Variant::kHLstm));
  const auto w = random_window(8, 2, rng);
  const auto batch = make_batch<double>(w);
  model->parameters().zero_grad();
  ag::Graph<double> g;
  auto terms = compute_loss(model->forward(g, batch), batch, {0.0, 0.0});
  g.backward(terms.total);
  double ppc = 0.0;
  for (const auto& p : model->parameters().all()) {
    if (p->name.rfind("ppc.", 0) == 0) ppc += p->grad.squaredNorm();
  }
  EXPECT_GT(ppc, 0.0);
}

TEST(ImputationTest, ObservedFramesAreOverwrittenExactly) {
  std::mt19937_64 rng(7);
  for (Variant v : {Variant::kHLstm, Variant::kLstm}) {
    ModelConfig c = tiny(v);
    c.imputation = true;
    auto model = make_model<double>(c);
    auto w = random_window(12, 2, rng);
    ag::Graph<double> g;
    EXPECT_EQ(run(*model, g, w).ball.value(), w.ball.cast<double>());
    w.ball_mask = {1, 0, 1, 1, 0, 0, 0, 1, 0, 1, 0, 0};
    ag::Graph<double> g2;
    const auto y = run(*model, g2, w).ball.value();
    for (int t = 0; t < 12; ++t) {
      if (w.ball_mask[static_cast<std::size_t>(t)]) {
        EXPECT_EQ(y(t, 0), w.ball(t, 0));
        EXPECT_EQ(y(t, 1), w.ball(t, 1));
      } else {
        EXPECT_NE(y(t, 0), w.ball(t, 0));
      }
    }
  }
}

TEST(ImputationTest, PredictionModelIgnoresMask) {
  std::mt19937_64 rng(8);
  auto model = make_model<double>(tiny(Variant::kHLstm));
  auto w = random_window(6, 2, rng);
  ag::Graph<double> g, g2;
  const auto y = run(*model, g, w).ball.value();
  w.ball_mask.assign(6, 0);
  EXPECT_EQ(run(*model, g2, w).ball.value(), y);
}

TEST(VrnnTest, KlNonNegativeAndSigmasPositive) {
  std::mt19937_64 rng(9);
  auto model = make_model<double>(tiny(Variant::kVrnn));
  auto& vrnn = dynamic_cast<VrnnModel<double>&>(*model);
  for (SampleSource src : {SampleSource::kPrior, SampleSource::kPosterior}) {
    vrnn.set_sample_source(src);
    const auto w = random_window(10, 2, rng);
    ag::Graph<double> g(false, 3);
    VrnnTrace<double> trace;
    const auto out = vrnn.run(g, make_batch<double>(w), trace);
    ASSERT_EQ(trace.prior.size(), 10u);
    for (std::size_t t = 0; t < trace.prior.size(); ++t) {
      EXPECT_GE(gaussian_kl(trace.encoder[t], trace.prior[t]).value().minCoeff(), -1e-12);
      EXPECT_GT(trace.prior[t].sigma.value().minCoeff(), 0.0);
      EXPECT_GT(trace.encoder[t].sigma.value().minCoeff(), 0.0);
      EXPECT_GT(trace.decoder[t].sigma.value().minCoeff(), 0.0);
    }
    EXPECT_GE(out.kl.scalar(), 0.0);
    EXPECT_GE(out.sigma_min.scalar(), kSigmaFloor);
    EXPECT_EQ(trace.context.rows(), 10);
  }
}

TEST(VrnnTest, KlMatchesClosedForm) {
  ag::Graph<double> g;
  Matrix<double> mq(1, 2), sq(1, 2), mp(1, 2), sp(1, 2);
  mq << 0.3, -1.0;
  sq << 0.5, 2.0;
  mp << -0.2, 0.4;
  sp << 1.5, 0.7;
  const double kl = gaussian_kl<double>({g.constant(mq), g.constant(sq)}, {g.constant(mp), g.constant(sp)}).scalar();
  double expect = 0.0;
  for (int i = 0; i < 2; ++i) {
    expect += std::log(sp(0, i) / sq(0, i)) + (sq(0, i) * sq(0, i) + std::pow(mq(0, i) - mp(0, i), 2)) / (2 * sp(0, i) * sp(0, i)) - 0.5;
  }
  EXPECT_NEAR(kl, expect, 1e-12);
  EXPECT_NEAR((gaussian_kl<double>({g.constant(mq), g.constant(sq)}, {g.constant(mq), g.constant(sq)}).scalar()), 0.0, 1e-12);
}

TEST(VrnnTest, GradientCheck) {
  std::mt19937_64 rng(10);
  auto model = make_model<double>(tiny(Variant::kVrnn));
  const auto w = random_window(4, 2, rng);
  const auto batch = make_batch<double>(w);
  // training graphs sample from the encoder; equal seeds make the noise repeat
  auto loss_value = [&] {
    ag::Graph<double> g(true, 42);
    return compute_loss(model->forward(g, batch), batch, {1.0, 0.0}).total.scalar();
  };
  model->parameters().zero_grad();
  ag::Graph<double> g(true, 42);
  g.backward(compute_loss(model->forward(g, batch), batch, {1.0, 0.0}).total);
  double worst = 0.0;
  for (const auto& p : model->parameters().all()) {
    for (Eigen::Index i = 0; i < p->value.size(); i += 3) {
      const double orig = p->value.data()[i];
      p->value.data()[i] = orig + 1e-6;
      const double up = loss_value();
      p->value.data()[i] = orig - 1e-6;
      const double down = loss_value();
      p->value.data()[i] = orig;
      const double numeric = (up - down) / 2e-6, a = p->grad.data()[i];
      worst = std::max(worst, std::abs(a - numeric) / std::max(1.0, std::abs(a) + std::abs(numeric)));
    }
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(DropoutTest, SeededTrainingGraphsAreDeterministic) {
  std::mt19937_64 rng(12);
  ModelConfig c = tiny(Variant::kHLstm);
  c.dropout = 0.5;
  auto model = make_model<double>(c);
  const auto batch = make_batch<double>(random_window(6, 2, rng));
  ag::Graph<double> g1(true, 99), g2(true, 99), g3(true, 100);
  const double a = compute_loss(model->forward(g1, batch), batch, {}).total.scalar();
  const double b = compute_loss(model->forward(g2, batch), batch, {}).total.scalar();
  const double d = compute_loss(model->forward(g3, batch), batch, {}).total.scalar();
  EXPECT_EQ(a, b);
  EXPECT_NE(a, d);
}

TEST(CheckpointTest, RoundTripIsExact) {
  std::mt19937_64 rng(13);
  const auto w = random_window(7, 2, rng);
  for (Variant v : {Variant::kHLstm, Variant::kLstm, Variant::kTransformer, Variant::kHTransformer, Variant::kVrnn}) {
    auto model = make_model<double>(tiny(v));
    for (auto& p : model->parameters().all()) p->value.array() += 0.01;
    const std::string path = temp_path("ckpt_" + std::string(to_string(v)));
    save_model(path, *model);
    auto back = load_model<double>(path);
    EXPECT_EQ(back->config(), model->config());
    ag::Graph<double> g1(false, 1), g2(false, 1);
    const Matrix<double> ref = run(*model, g1, w).ball.value();
    EXPECT_EQ(ref, run(*back, g2, w).ball.value()) << to_string(v);
    auto single = load_model<float>(path);
    ag::Graph<float> g3(false, 1);
    // metres; 1e-4 m is 1e-6 of the pitch length
    EXPECT_LT((run(*single, g3, w).ball.value().cast<double>() - ref).cwiseAbs().maxCoeff(), 1e-4) << to_string(v);
    std::remove(path.c_str());
  }
}

TEST(CheckpointTest, RejectsCorruptOrMismatchedFiles) {
  const std::string path = temp_path("bad_ckpt");
  {
    std::ofstream os(path, std::ios::binary);
    os << "NOTACKPT";
  }
  EXPECT_THROW(load_model<double>(path), ParseError);
  auto model = make_model<double>(tiny(Variant::kLstm));
  save_checkpoint(path, tiny(Variant::kLstm, 16).to_text(), model->parameters());
  EXPECT_THROW(load_model<double>(path), ConfigError);
  EXPECT_THROW(load_model<double>(temp_path("missing_ckpt")), Error);
  std::remove(path.c_str());
}

TEST(GoalkeeperTest, RemoveInsertRoundTrip) {
  std::mt19937_64 rng(14);
  auto w = random_window(20, 4, rng);
  // push player 2 of each team next to a goal
  for (int t = 0; t < w.steps; ++t) {
    w.features(t * w.agents + 2, 0) = 2.0;
    w.features(t * w.agents + 2, 1) = 34.0 + 0.1 * t;
    w.features(t * w.agents + 4 + 2, 0) = 103.0;
  }
  const auto keepers = find_goalkeepers(w, {});
  EXPECT_EQ(keepers[0], 2);
  EXPECT_EQ(keepers[1], 2);
  const auto ex = remove_goalkeepers(w, keepers);
  EXPECT_EQ(ex.outfield.team_size(), 3);
  EXPECT_EQ(ex.outfield.agents, 10);
  EXPECT_EQ(ex.ids[0], "H12");
  EXPECT_DOUBLE_EQ(ex.goalkeepers(5, 1), 34.5);
  for (int t = 0; t < w.steps; ++t) {
    const int team = w.agent_set.team_of(w.labels[static_cast<std::size_t>(t)]);
    if (team != 0) {
      EXPECT_EQ(ex.team[static_cast<std::size_t>(t)], team);
    }
  }
  const auto back = insert_goalkeepers(ex.outfield, ex.goalkeepers);
  EXPECT_EQ(back.agents, w.agents);
  EXPECT_EQ(back.agent_set.team1.front(), "GK1");
  for (int t = 0; t < w.steps; ++t) {
    EXPECT_EQ(back.feature(t, 0, 0), w.feature(t, 2, 0));
    EXPECT_EQ(back.feature(t, 1, 0), w.feature(t, 0, 0));
    EXPECT_EQ(back.feature(t, 4, 1), w.feature(t, 6, 1));
    EXPECT_EQ(back.feature(t, 9, 0), w.feature(t, 9, 0));
  }
}

TEST(GoalkeeperTest, TeamTargetsCarryThroughBallOut) {
  const auto agents = data::AgentSet::make({"a", "b"}, {"c", "d"}, {});
  EXPECT_EQ(team_targets({4, 0, 5, 3, 6}, agents), (std::vector<int>{1, 1, 1, 2, 2}));
}

TEST(GoalkeeperTest, OutputsAndPermutationInvariance) {
  std::mt19937_64 rng(15);
  GkConfig c;
  c.outfield_players = 3;
  c.d_context = 16;
  c.lstm_hidden = 8;
  GkModel<float> model(c);
  for (int trial = 0; trial < 5; ++trial) {
    const auto w = random_window(8, 3, rng);
    const auto wp = tu::permute_window(w, random_permutation(3, rng), random_permutation(3, rng));
    ag::Graph<float> g;
    const auto out = model.forward(g, make_batch<float>(w));
    const auto outp = model.forward(g, make_batch<float>(wp));
    for (Eigen::Index r = 0; r < 8; ++r) EXPECT_NEAR(out.team_probs.value().row(r).sum(), 1.0f, 1e-5);
    EXPECT_LT((out.positions.value() - outp.positions.value()).cwiseAbs().maxCoeff(), 1e-5 * 105);
    EXPECT_LT((out.team_probs.value() - outp.team_probs.value()).cwiseAbs().maxCoeff(), 1e-5);
  }
  ag::Graph<float> g;
  EXPECT_THROW(model.forward(g, make_batch<float>(random_window(8, 4, rng))), ConfigError);
}

TEST(GoalkeeperTest, CheckpointAndGradient) {
  std::mt19937_64 rng(16);
  GkConfig c;
  c.outfield_players = 2;
  c.d_context = 8;
  c.lstm_hidden = 4;
  c.lstm_layers = 1;
  GkModel<double> model(c);
  auto w = random_window(5, 3, rng);
  const auto ex = remove_goalkeepers(w, {0, 0});
  const auto batch = make_batch<double>(ex.outfield);
  const auto targets = make_gk_targets<double>({&ex});
  auto loss = [&] {
    ag::Graph<double> g;
    return gk_loss(model.forward(g, batch), targets, 5.0).scalar();
  };
  model.parameters().zero_grad();
  ag::Graph<double> g;
  g.backward(gk_loss(model.forward(g, batch), targets, 5.0));
  double worst = 0.0;
  for (const auto& p : model.parameters().all()) {
    for (Eigen::Index i = 0; i < p->value.size(); ++i) {
      const double orig = p->value.data()[i];
      p->value.data()[i] = orig + 1e-6;
      const double up = loss();
      p->value.data()[i] = orig - 1e-6;
      const double down = loss();
      p->value.data()[i] = orig;
      const double numeric = (up - down) / 2e-6, a = p->grad.data()[i];
      worst = std::max(worst, std::abs(a - numeric) / std::max(1.0, std::abs(a) + std::abs(numeric)));
    }
  }
  EXPECT_LT(worst, 1e-4);
  const std::string path = temp_path("gk_ckpt");
  save_gk_model(path, model);
  auto back = load_gk_model<double>(path);
  ag::Graph<double> g1, g2;
  EXPECT_EQ(model.forward(g1, batch).positions.value(), back->forward(g2, batch).positions.value());
  EXPECT_THROW(load_model<double>(path), ConfigError);
  std::remove(path.c_str());
}
