#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "balltraj/cli/commands.hpp"

using namespace balltraj;
using data::MatrixD;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "balltraj");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) rows.push_back(data::detail::split_csv(line));
  return rows;
}

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / "balltraj_cli_test";
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    ASSERT_EQ(run({"simulate", "--out-dir", (dir_ / "sim").string(), "--episodes", "3", "--players", "3",
                   "--duration", "6", "--seed", "4"}).code, 0);
    std::ofstream cfg(dir_ / "tiny.cfg");
    cfg << "# tiny model\nd_g=8\nd_btr=8\nlstm_hidden=8\nlstm_layers=1\nheads=2\nmax_epochs=5\nbatch_size=2\n"
        << "window_length=30\nstride=10\nlambda_real=0\n";
  }
  static void TearDownTestSuite() { fs::remove_all(dir_); }

  static std::vector<std::string> data_args() {
    return {"--tracking", (dir_ / "sim" / "tracking.csv").string(), "--events", (dir_ / "sim" / "events.csv").string()};
  }

  static Result train(const std::string& name, std::vector<std::string> extra) {
    std::vector<std::string> args = {"train", "--config", (dir_ / "tiny.cfg").string(), "--out",
                                     (dir_ / name).string(), "--val-fraction", "0"};
    for (auto& a : data_args()) args.push_back(a);
    for (auto& a : extra) args.push_back(a);
    return run(args);
  }

  static inline fs::path dir_;
};

}  // namespace

TEST_F(CliTest, SimulateIsDeterministic) {
  ASSERT_EQ(run({"simulate", "--out-dir", (dir_ / "sim2").string(), "--episodes", "3", "--players", "3", "--duration",
                 "6", "--seed", "4"}).code, 0);
  EXPECT_EQ(slurp(dir_ / "sim" / "tracking.csv"), slurp(dir_ / "sim2" / "tracking.csv"));
  EXPECT_EQ(slurp(dir_ / "sim" / "events.csv"), slurp(dir_ / "sim2" / "events.csv"));
  EXPECT_FALSE(read_csv(dir_ / "sim" / "passes.csv").empty());
}

TEST_F(CliTest, TrainTagsAndFlagsOverrideConfig) {
  const auto plain = train("plain.ckpt", {"--epochs", "1"});
  ASSERT_EQ(plain.code, 0) << plain.err;
  EXPECT_NE(plain.out.find("run H_LSTM:"), std::string::npos) << plain.out;
  EXPECT_EQ(plain.out.find("epoch 2"), std::string::npos);
  const auto rl = train("rl.ckpt", {"--epochs", "1", "--lambda-real", "1", "--variant", "lstm"});
  ASSERT_EQ(rl.code, 0) << rl.err;
  EXPECT_NE(rl.out.find("run LSTM-RL:"), std::string::npos) << rl.out;
  EXPECT_TRUE(fs::exists(dir_ / "rl.ckpt"));
}

TEST_F(CliTest, TrainIsDeterministicGivenSeed) {
  const auto a = train("a.ckpt", {"--epochs", "1", "--seed", "3"});
  const auto b = train("b.ckpt", {"--epochs", "1", "--seed", "3"});
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out.substr(0, a.out.find("saved")), b.out.substr(0, b.out.find("saved")));
}

TEST_F(CliTest, PredictEvaluateAnnotate) {
  ASSERT_EQ(train("h.ckpt", {"--epochs", "2"}).code, 0);
  std::vector<std::string> args = {"predict", "--checkpoint", (dir_ / "h.ckpt").string(), "--out-dir",
                                   (dir_ / "pred").string(), "--postprocess", "--plot"};
  for (auto& a : data_args()) args.push_back(a);
  const auto p = run(args);
  ASSERT_EQ(p.code, 0) << p.err;
  const auto set = cli::DataArgs{{(dir_ / "sim" / "tracking.csv").string()}, {(dir_ / "sim" / "events.csv").string()}}
                       .load(true, data::PitchConfig{});
  int frames = 0;
  for (const auto& w : set.episodes) frames += w.steps;
  const auto traj = read_csv(dir_ / "pred" / "trajectory.csv");
  EXPECT_EQ(static_cast<int>(traj.size()), frames);
  EXPECT_EQ(static_cast<int>(read_csv(dir_ / "pred" / "possession.csv").size()), frames);
  EXPECT_FALSE(read_csv(dir_ / "pred" / "touches.csv").empty());
  EXPECT_TRUE(fs::exists(dir_ / "pred" / "trajectory_0.svg"));
  EXPECT_TRUE(fs::exists(dir_ / "pred" / "scores_0.svg"));

  // emitted rows re-parse to the in-process prediction; the rebuilt path is no less realistic
  const auto model = models::load_model<double>((dir_ / "h.ckpt").string());
  std::size_t row = 0;
  for (const auto& w : set.episodes) {
    const auto pred = train::predict(*model, w);
    MatrixD raw(w.steps, 2), pp(w.steps, 2);
    for (int t = 0; t < w.steps; ++t, ++row) {
      raw.row(t) << std::stod(traj[row][3]), std::stod(traj[row][4]);
      pp.row(t) << std::stod(traj[row][5]), std::stod(traj[row][6]);
    }
    EXPECT_LT((raw - pred.ball).cwiseAbs().maxCoeff(), 1e-6);
    const auto players = w.player_positions();
    EXPECT_LE(losses::reality_loss(pp, players, 2 * w.team_size()),
              losses::reality_loss(raw, players, 2 * w.team_size()) + 1e-9);
  }

  std::vector<std::string> eval = {"evaluate", "--checkpoint", (dir_ / "h.ckpt").string(), "--postprocess"};
  for (auto& a : data_args()) eval.push_back(a);
  const auto e = run(eval);
  ASSERT_EQ(e.code, 0) << e.err;
  for (const char* key : {"pe=", "rl=", "ppa=", "tpa=", "H_LSTM,", "H_LSTM-PP,"}) {
    EXPECT_NE(e.out.find(key), std::string::npos) << key;
  }

  std::vector<std::string> ann = {"annotate", "--checkpoint", (dir_ / "h.ckpt").string(), "--out",
                                  (dir_ / "passes.csv").string()};
  for (auto& a : data_args()) ann.push_back(a);
  const auto an = run(ann);
  ASSERT_EQ(an.code, 0) << an.err;
  EXPECT_NE(an.out.find("f1_pass,f1_passer,f1_receiver,r2_passes,r2_receives"), std::string::npos);
}

TEST_F(CliTest, AnnotateEmptyMatch) {
  ASSERT_EQ(train("e.ckpt", {"--epochs", "1"}).code, 0);
  {
    std::ofstream t(dir_ / "empty.csv");
    t << "time,player_id,team,x,y,ball_x,ball_y,in_play\n";
  }
  const auto r = run({"annotate", "--checkpoint", (dir_ / "e.ckpt").string(), "--out", (dir_ / "none.csv").string(),
                      "--tracking", (dir_ / "empty.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(read_csv(dir_ / "none.csv").empty());
}

TEST_F(CliTest, ImputeRatesZeroAndOne) {
  ASSERT_EQ(train("imp.ckpt", {"--epochs", "1", "--masking", "0.8"}).code, 0);
  std::vector<std::string> args = {"impute", "--checkpoint", (dir_ / "imp.ckpt").string(), "--out",
                                   (dir_ / "imputed.csv").string(), "--masking", "0", "--masking", "1"};
  for (auto& a : data_args()) args.push_back(a);
  const auto r = run(args);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("\n0,0,"), std::string::npos) << r.out;  // rate 0 has PE 0
  std::vector<std::string> pargs = {"predict", "--checkpoint", (dir_ / "imp.ckpt").string(), "--out-dir",
                                    (dir_ / "imp_pred").string()};
  for (auto& a : data_args()) pargs.push_back(a);
  ASSERT_EQ(run(pargs).code, 0);
  const auto imputed = read_csv(dir_ / "imputed.csv");
  const auto predicted = read_csv(dir_ / "imp_pred" / "trajectory.csv");
  const auto set = cli::DataArgs{{(dir_ / "sim" / "tracking.csv").string()}, {(dir_ / "sim" / "events.csv").string()}}
                       .load(true, data::PitchConfig{});
  ASSERT_EQ(imputed.size(), 2 * predicted.size());
  std::size_t row = 0;
  for (const auto& w : set.episodes) {
    for (int t = 0; t < w.steps; ++t, ++row) {
      EXPECT_EQ(imputed[row][6], "1");
      EXPECT_NEAR(std::stod(imputed[row][4]), w.ball(t, 0), 1e-6);
      EXPECT_NEAR(std::stod(imputed[row][5]), w.ball(t, 1), 1e-6);
    }
  }
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const auto& a = imputed[predicted.size() + i];
    EXPECT_EQ(a[6], "0");
    EXPECT_EQ(a[4], predicted[i][3]);
    EXPECT_EQ(a[5], predicted[i][4]);
  }
}

TEST_F(CliTest, ErrorsAndDataRoot) {
  EXPECT_NE(run({}).code, 0);
  EXPECT_NE(run({"predict", "--out-dir", "x"}).code, 0);
  const auto missing = run({"evaluate", "--checkpoint", (dir_ / "nope.ckpt").string(), "--tracking", "a.csv",
                            "--events", "b.csv"});
  EXPECT_EQ(missing.code, 1);
  EXPECT_NE(missing.err.find("error:"), std::string::npos);
  const auto bad = train("bad.ckpt", {"--variant", "nonsense"});
  EXPECT_EQ(bad.code, 1);
  ::setenv(cli::kDataRootEnv, dir_.c_str(), 1);
  EXPECT_EQ(cli::resolve_data_path("sim/tracking.csv"), (dir_ / "sim" / "tracking.csv").string());
  ::unsetenv(cli::kDataRootEnv);
  EXPECT_EQ(cli::resolve_data_path("sim/tracking.csv"), "sim/tracking.csv");
}
