#pragma once

// Command-line front end: train, predict, evaluate, annotate, impute, simulate.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include "balltraj/apps/imputation.hpp"
#include "balltraj/cli/svg.hpp"
#include "balltraj/models/checkpoint.hpp"
#include "balltraj/sim/library.hpp"
#include "balltraj/train/config_file.hpp"
#include "balltraj/train/pipeline.hpp"
#include "balltraj/train/trainer.hpp"

namespace balltraj::cli {

namespace fs = std::filesystem;

inline constexpr const char* kDataRootEnv = "BALLTRAJ_DATA_ROOT";

// Relative paths that do not exist locally are looked up under the data root.
inline std::string resolve_data_path(const std::string& path) {
  if (path.empty() || fs::path(path).is_absolute() || fs::exists(path)) return path;
  if (const char* root = std::getenv(kDataRootEnv); root && *root) {
    const fs::path candidate = fs::path(root) / path;
    if (fs::exists(candidate)) return candidate.string();
  }
  return path;
}

struct DataArgs {
  std::vector<std::string> tracking;
  std::vector<std::string> events;
  std::string format = "canonical";

  void add_to(CLI::App& app, bool events_required) {
    app.add_option("--tracking", tracking, "tracking file(s); Metrica: the Home file")->required();
    auto* e = app.add_option("--events", events, "event file(s), one per tracking file");
    if (events_required) e->required();
    app.add_option("--format", format, "canonical or metrica")->check(CLI::IsMember({"canonical", "metrica"}));
  }

  // Full episodes of every match, in file order.
  train::EpisodeSet load(bool require_truth, const data::PitchConfig& pitch) const {
    if (!events.empty() && events.size() != tracking.size()) {
      throw ConfigError("give one --events file per --tracking file");
    }
    train::PipelineOptions opts;
    opts.pitch = pitch;
    opts.require_truth = require_truth;
    train::EpisodeSet all;
    for (std::size_t i = 0; i < tracking.size(); ++i) {
      const auto match = train::load_match(resolve_data_path(tracking[i]),
                                           events.empty() ? std::string() : resolve_data_path(events[i]), format, pitch);
      auto set = train::build_episodes(match, opts);
      for (auto& e : set.episodes) all.episodes.push_back(std::move(e));
      for (auto& e : set.events) all.events.push_back(std::move(e));
      for (auto& s : set.skipped) all.skipped.push_back(std::move(s));
    }
    return all;
  }
};

inline std::ofstream open_output(const std::string& path) {
  if (const auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << std::setprecision(10);
  return out;
}

inline std::string episode_label(const data::Window& w, std::size_t index) {
  std::ostringstream os;
  os << "ep" << index << "@" << std::fixed << std::setprecision(1) << w.start_time;
  return os.str();
}

// Imputation models see no observations outside the impute command.
inline data::Window unobserved(const data::Window& w, const models::ModelConfig& c) {
  if (!c.imputation) return w;
  data::Window out = w;
  out.ball_mask.assign(static_cast<std::size_t>(w.steps), 0);
  return out;
}

inline void report_skipped(const train::EpisodeSet& set, std::ostream& err) {
  for (const auto& s : set.skipped) err << "skipped " << s << "\n";
}

struct SplitArgs {
  double validation_fraction = 0.2;
  double test_fraction = 0.0;

  void add_to(CLI::App& app) {
    app.add_option("--val-fraction", validation_fraction, "fraction of episodes held out for validation");
    app.add_option("--test-fraction", test_fraction, "fraction of episodes held out for testing");
  }
};

// ---------------------------------------------------------------- train

struct TrainArgs {
  DataArgs data;
  SplitArgs split;
  std::string config_file, checkpoint, log_path, variant, embeddings;
  std::vector<std::string> ablate;
  double lambda_real = 1.0, lambda_ce = 20.0, masking = 0.8, lr = 5e-4, time_limit = 0.0;
  int epochs = 100, batch_size = 32, patience = 10, window_length = data::kWindowLength, stride = 5;
  std::uint64_t seed = 0;
  bool flip = false;
};

inline int cmd_train(const TrainArgs& a, const CLI::App& app, std::ostream& out, std::ostream& err) {
  train::RunConfig rc;
  if (!a.config_file.empty()) rc = train::load_config_file(resolve_data_path(a.config_file));
  auto given = [&app](const char* name) { return app.count(name) > 0; };
  auto& mc = rc.model;
  auto& tc = rc.train;
  if (given("--variant")) mc.variant = models::parse_variant(a.variant);
  if (given("--embeddings")) mc.embeddings = models::Embeddings::parse(a.embeddings);
  for (const auto& kv : a.ablate) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || !mc.set(kv.substr(0, eq), kv.substr(eq + 1))) {
      throw ConfigError("bad --ablate setting: " + kv);
    }
  }
  if (given("--masking")) {
    mc.imputation = true;
    tc.mask_rate = a.masking;
  }
  if (given("--lambda-real")) tc.weights.lambda_real = a.lambda_real;
  if (given("--lambda-ce")) tc.weights.lambda_ce = a.lambda_ce;
  if (given("--seed")) mc.seed = tc.seed = a.seed;
  if (given("--epochs")) tc.max_epochs = a.epochs;
  if (given("--batch-size")) tc.batch_size = a.batch_size;
  if (given("--lr")) tc.learning_rate = a.lr;
  if (given("--patience")) tc.patience = a.patience;
  if (given("--time-limit")) tc.time_limit_seconds = a.time_limit;
  if (given("--window-length")) tc.window_length = a.window_length;
  if (given("--stride")) tc.stride = a.stride;
  if (given("--flip")) tc.flip_augment = a.flip;
  mc.validate();
  tc.validate();

  const auto set = a.data.load(true, mc.pitch);
  report_skipped(set, err);
  if (set.episodes.empty()) throw InsufficientDataError("no usable episodes in the training data");
  const auto split = train::split_episodes(set.episodes, a.split.validation_fraction, a.split.test_fraction, tc.seed);
  if (split.train.empty()) throw InsufficientDataError("no training episodes after the split");
  auto windows = train::cut_windows(split.train, tc.window_length, tc.stride);
  if (windows.empty()) {
    err << "episodes shorter than " << tc.window_length << " frames; training on whole episodes\n";
    windows = split.train;
  }
  const std::string tag = train::run_tag(mc.variant, tc.weights);
  out << "run " << tag << ": " << windows.size() << " training windows, " << split.validation.size()
      << " validation episodes\n";
  auto model = models::make_model<float>(mc);
  std::ofstream log;
  if (!a.log_path.empty()) {
    log = open_output(a.log_path);
    log << "epoch,loss,mse,real,ce,kl,val_pe,val_rl,val_ppa,val_tpa,seconds\n";
  }
  const auto result = train::train_model(*model, windows, split.validation, tc, [&](const train::EpochLog& e) {
    out << "epoch " << e.epoch << " loss=" << e.train_total << " mse=" << e.train.mse << " real=" << e.train.real
        << " ce=" << e.train.ce;
    if (e.has_validation) out << " val_pe=" << e.validation.pe << " val_ppa=" << e.validation.ppa;
    out << "\n";
    if (log.is_open()) {
      log << e.epoch << ',' << e.train_total << ',' << e.train.mse << ',' << e.train.real << ',' << e.train.ce << ','
          << e.train_kl << ',' << (e.has_validation ? e.validation.csv_row() : "nan,nan,nan,nan") << ',' << e.seconds
          << '\n';
    }
  });
  models::save_model(a.checkpoint, *model);
  out << "best epoch " << result.best_epoch << " score " << result.best_score
      << (result.stopped_early ? " (early stop)" : "") << (result.timed_out ? " (time limit)" : "") << "\n";
  out << "saved " << a.checkpoint << "\n";
  return 0;
}

// ---------------------------------------------------------------- predict

struct PredictArgs {
  DataArgs data;
  std::string checkpoint, out_dir;
  bool postprocess = false, plot = false;
  std::uint64_t seed = 0;
};

inline int cmd_predict(const PredictArgs& a, std::ostream& out, std::ostream& err) {
  const auto model = models::load_model<double>(resolve_data_path(a.checkpoint));
  const auto& mc = model->config();
  const auto set = a.data.load(false, mc.pitch);
  report_skipped(set, err);
  const bool post = a.postprocess && model->predicts_possession();
  if (a.postprocess && !post) err << "model has no possession stage; --postprocess ignored\n";
  fs::create_directories(a.out_dir);
  auto traj = open_output((fs::path(a.out_dir) / "trajectory.csv").string());
  auto poss = open_output((fs::path(a.out_dir) / "possession.csv").string());
  auto touches = open_output((fs::path(a.out_dir) / "touches.csv").string());
  traj << "episode,frame,time,x,y" << (post ? ",pp_x,pp_y" : "") << "\n";
  poss << "episode,frame,time,agent,probability\n";
  touches << "episode,t_start,t_end,agent,kind\n";
  for (std::size_t i = 0; i < set.episodes.size(); ++i) {
    const auto w = unobserved(set.episodes[i], mc);
    const auto label = episode_label(w, i);
    const auto p = train::predict(*model, w, a.seed);
    train::Postprocessed pp;
    if (post) pp = train::postprocess_prediction(p, w);
    for (int t = 0; t < w.steps; ++t) {
      const double time = w.start_time + t * data::kFramePeriod;
      traj << label << ',' << t << ',' << time << ',' << p.ball(t, 0) << ',' << p.ball(t, 1);
      if (post) traj << ',' << pp.ball(t, 0) << ',' << pp.ball(t, 1);
      traj << '\n';
      if (p.has_possession()) {
        Eigen::Index best = 0;
        p.probs.row(t).maxCoeff(&best);
        poss << label << ',' << t << ',' << time << ',' << w.agent_set.id_of(static_cast<int>(best)) << ','
             << p.probs(t, best) << '\n';
      }
    }
    if (post) {
      for (const auto& in : pp.assignment.intervals) {
        touches << label << ',' << in.t_start << ',' << in.t_end << ','
                << (in.agent >= 0 ? w.agent_set.id_of(in.agent) : std::string()) << ',' << postprocess::to_string(in.kind)
                << '\n';
      }
    }
    if (a.plot) {
      std::vector<Series> series = {{"predicted", "#ffeb3b", p.ball}};
      if (post) series.push_back({"postprocessed", "#ff5252", pp.ball});
      if (set.episodes[i].ball.allFinite()) series.insert(series.begin(), {"true", "white", set.episodes[i].ball});
      save_svg((fs::path(a.out_dir) / ("trajectory_" + std::to_string(i) + ".svg")).string(),
               trajectory_svg(series, mc.pitch, label));
      if (p.has_possession()) {
        const auto scores = postprocess::possession_scores(p.probs, p.ball, w.agent_positions());
        std::vector<double> peak(static_cast<std::size_t>(w.steps));
        for (int t = 0; t < w.steps; ++t) peak[static_cast<std::size_t>(t)] = scores.row(t).maxCoeff();
        const postprocess::PostprocessConfig pc;
        save_svg((fs::path(a.out_dir) / ("scores_" + std::to_string(i) + ".svg")).string(),
                 score_svg(peak, data::kFramePeriod, {pc.peak_threshold, pc.touch_threshold}, label + " max score"));
      }
    }
  }
  out << "wrote " << set.episodes.size() << " episodes to " << a.out_dir << "\n";
  return 0;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
  DataArgs data;
  SplitArgs split;
  std::string checkpoint, which = "all", csv_path;
  bool postprocess = false;
  std::uint64_t seed = 0;
};

inline std::vector<data::Window> select_split(std::vector<data::Window> episodes, const std::string& which,
                                              const SplitArgs& s, std::uint64_t seed) {
  if (which == "all") return episodes;
  auto split = train::split_episodes(std::move(episodes), s.validation_fraction, s.test_fraction, seed);
  if (which == "train") return split.train;
  if (which == "validation") return split.validation;
  return split.test;
}

inline int cmd_evaluate(const EvaluateArgs& a, std::ostream& out, std::ostream& err) {
  const auto model = models::load_model<double>(resolve_data_path(a.checkpoint));
  const auto& mc = model->config();
  const auto set = a.data.load(true, mc.pitch);
  report_skipped(set, err);
  auto episodes = select_split(set.episodes, a.which, a.split, a.seed);
  if (episodes.empty()) throw InsufficientDataError("no episodes to evaluate");
  for (auto& w : episodes) w = unobserved(w, mc);
  train::EvalOptions eo;
  eo.postprocess = a.postprocess;
  eo.seed = a.seed;
  const auto r = train::evaluate(*model, episodes, eo);
  out << "episodes=" << episodes.size() << "\n" << r.raw.to_key_value();
  const std::string tag = models::to_string(mc.variant);
  std::ostringstream rows;
  rows << "model," << losses::MetricsReport::csv_header() << "\n" << tag << ',' << r.raw.csv_row() << "\n";
  if (r.has_post) {
    out << "postprocessed:\n" << r.post.to_key_value();
    rows << tag << "-PP," << r.post.csv_row() << "\n";
  }
  out << rows.str();
  if (!a.csv_path.empty()) open_output(a.csv_path) << rows.str();
  return 0;
}

// ---------------------------------------------------------------- annotate

struct AnnotateArgs {
  DataArgs data;
  std::string checkpoint, out_path;
  double tolerance = 2.0;
  std::uint64_t seed = 0;
};

inline int cmd_annotate(const AnnotateArgs& a, std::ostream& out, std::ostream& err) {
  const auto model = models::load_model<double>(resolve_data_path(a.checkpoint));
  if (!model->predicts_possession()) throw ConfigError("pass annotation needs a hierarchical model");
  const auto& mc = model->config();
  const bool truth = !a.data.events.empty();
  const auto set = a.data.load(truth, mc.pitch);
  report_skipped(set, err);
  auto csv = open_output(a.out_path);
  csv << "episode,passer,receiver,t0,t1\n";
  std::vector<data::PassEvent> detected_all, truth_all;
  int players = 0;
  for (std::size_t i = 0; i < set.episodes.size(); ++i) {
    const auto& w = set.episodes[i];
    const auto p = train::predict(*model, unobserved(w, mc), a.seed);
    const auto passes = apps::predicted_passes(p, w);
    for (const auto& e : passes) {
      csv << episode_label(w, i) << ',' << w.agent_set.id_of(e.passer) << ',' << w.agent_set.id_of(e.receiver) << ','
          << e.t0 << ',' << e.t1 << '\n';
    }
    // player indices are per episode; matching runs over the concatenation
    if (truth) {
      players = std::max(players, 2 * w.team_size());
      detected_all.insert(detected_all.end(), passes.begin(), passes.end());
      const auto tp = apps::truth_passes(w);
      truth_all.insert(truth_all.end(), tp.begin(), tp.end());
    }
  }
  out << "passes=" << detected_all.size() << "\n";
  if (truth) {
    const auto r = apps::match_passes(detected_all, truth_all, players, a.tolerance);
    out << "true_passes=" << r.truth << "\ndetected_passes=" << r.detected << "\n";
    out << "f1_pass,f1_passer,f1_receiver,r2_passes,r2_receives\n"
        << r.f1_pass << ',' << r.f1_passer << ',' << r.f1_receiver << ',' << r.r2_passes << ',' << r.r2_receives << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------- impute

struct ImputeArgs {
  DataArgs data;
  std::string checkpoint, out_path;
  std::vector<double> masking = {0.8};
  bool postprocess = false;
  std::uint64_t seed = 0;
};

inline int cmd_impute(const ImputeArgs& a, std::ostream& out, std::ostream& err) {
  const auto model = models::load_model<double>(resolve_data_path(a.checkpoint));
  const auto& mc = model->config();
  if (!mc.imputation) throw ConfigError("checkpoint was not trained in imputation mode (train with --masking)");
  const auto set = a.data.load(true, mc.pitch);
  report_skipped(set, err);
  auto csv = open_output(a.out_path);
  csv << "rate,episode,frame,time,x,y,observed\n";
  train::EvalOptions eo;
  eo.postprocess = a.postprocess;
  eo.seed = a.seed;
  for (double rate : a.masking) {
    for (std::size_t i = 0; i < set.episodes.size(); ++i) {
      const auto w = apps::mask_at_rate(set.episodes[i], rate, a.seed + i);
      const auto p = train::predict(*model, w, a.seed);
      for (int t = 0; t < w.steps; ++t) {
        csv << rate << ',' << episode_label(w, i) << ',' << t << ',' << w.start_time + t * data::kFramePeriod << ','
            << p.ball(t, 0) << ',' << p.ball(t, 1) << ',' << int(w.ball_mask[static_cast<std::size_t>(t)]) << '\n';
      }
    }
  }
  const auto rows = apps::evaluate_imputation(*model, set.episodes, a.masking, a.seed, eo);
  out << "rate," << losses::MetricsReport::csv_header() << (a.postprocess ? ",pp_pe,pp_rl,pp_ppa,pp_tpa" : "") << "\n";
  for (const auto& r : rows) {
    out << r.rate << ',' << r.result.raw.csv_row();
    if (r.result.has_post) out << ',' << r.result.post.csv_row();
    out << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string out_dir;
  int episodes = 10, players = 11;
  double duration = 30.0;
  std::uint64_t seed = 0;
  bool library = false;
};

inline int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  std::vector<sim::SimResult> matches;
  if (a.library) {
    for (const auto& s : sim::script_library()) matches.push_back(sim::generate_match(s));
  } else {
    if (a.episodes < 1) throw ConfigError("--episodes must be positive");
    for (int i = 0; i < a.episodes; ++i) {
      matches.push_back(sim::generate_match(sim::auto_script(a.seed + static_cast<std::uint64_t>(i), a.players, a.duration)));
    }
  }
  fs::create_directories(a.out_dir);
  const fs::path dir(a.out_dir);
  sim::write_matches(matches, (dir / "tracking.csv").string(), (dir / "events.csv").string());
  auto passes = open_output((dir / "passes.csv").string());
  passes << "episode,passer,receiver,t0,t1\n";
  std::size_t frames = 0, count = 0;
  for (std::size_t i = 0; i < matches.size(); ++i) {
    frames += matches[i].episode.size();
    for (const auto& p : matches[i].passes) {
      passes << i << ',' << matches[i].agents.id_of(p.passer) << ',' << matches[i].agents.id_of(p.receiver) << ','
             << p.t0 << ',' << p.t1 << '\n';
      ++count;
    }
  }
  out << "simulated " << matches.size() << " episodes, " << frames << " frames, " << count << " passes into "
      << a.out_dir << "\n";
  return 0;
}

// ---------------------------------------------------------------- entry

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Ball trajectory inference from multi-agent tracking data"};
  app.require_subcommand(1);

  TrainArgs ta;
  auto* train_cmd = app.add_subcommand("train", "train a model and save the best checkpoint");
  ta.data.add_to(*train_cmd, true);
  ta.split.add_to(*train_cmd);
  train_cmd->add_option("--config", ta.config_file, "key=value config file; flags override it");
  train_cmd->add_option("--out", ta.checkpoint, "checkpoint path")->required();
  train_cmd->add_option("--log", ta.log_path, "per-epoch CSV log");
  train_cmd->add_option("--variant", ta.variant, "H_LSTM, LSTM, H_TRANSFORMER, TRANSFORMER or VRNN");
  train_cmd->add_option("--embeddings", ta.embeddings, "context embeddings, e.g. PPE+FPE+FPI");
  train_cmd->add_option("--ablate", ta.ablate, "model config override key=value (repeatable)");
  train_cmd->add_option("--lambda-real", ta.lambda_real, "reality loss weight");
  train_cmd->add_option("--lambda-ce", ta.lambda_ce, "possession cross-entropy weight");
  train_cmd->add_option("--masking", ta.masking, "train an imputation model with this masking rate");
  train_cmd->add_option("--seed", ta.seed, "random seed");
  train_cmd->add_option("--epochs", ta.epochs, "maximum epochs");
  train_cmd->add_option("--batch-size", ta.batch_size, "windows per batch");
  train_cmd->add_option("--lr", ta.lr, "learning rate");
  train_cmd->add_option("--patience", ta.patience, "early-stopping patience in epochs");
  train_cmd->add_option("--time-limit", ta.time_limit, "stop after this many seconds");
  train_cmd->add_option("--window-length", ta.window_length, "training window length in frames");
  train_cmd->add_option("--stride", ta.stride, "training window stride in frames");
  train_cmd->add_flag("--flip", ta.flip, "random pitch flips");

  PredictArgs pa;
  auto* predict_cmd = app.add_subcommand("predict", "write predicted trajectories, possession and touches");
  pa.data.add_to(*predict_cmd, false);
  predict_cmd->add_option("--checkpoint", pa.checkpoint)->required();
  predict_cmd->add_option("--out-dir", pa.out_dir)->required();
  predict_cmd->add_flag("--postprocess", pa.postprocess, "add the rebuilt trajectory and touch intervals");
  predict_cmd->add_flag("--plot", pa.plot, "write SVG trajectory and score plots");
  predict_cmd->add_option("--seed", pa.seed);

  EvaluateArgs ea;
  auto* eval_cmd = app.add_subcommand("evaluate", "PE, RL, PPA and TPA on labelled data");
  ea.data.add_to(*eval_cmd, true);
  ea.split.add_to(*eval_cmd);
  eval_cmd->add_option("--checkpoint", ea.checkpoint)->required();
  eval_cmd->add_option("--split", ea.which, "all, train, validation or test")
      ->check(CLI::IsMember({"all", "train", "validation", "test"}));
  eval_cmd->add_option("--csv", ea.csv_path, "also write the result rows here");
  eval_cmd->add_flag("--postprocess", ea.postprocess, "also report postprocessed metrics");
  eval_cmd->add_option("--seed", ea.seed, "split seed");

  AnnotateArgs aa;
  auto* annotate_cmd = app.add_subcommand("annotate", "detect passes; scores them when events are given");
  aa.data.add_to(*annotate_cmd, false);
  annotate_cmd->add_option("--checkpoint", aa.checkpoint)->required();
  annotate_cmd->add_option("--out", aa.out_path)->required();
  annotate_cmd->add_option("--tolerance", aa.tolerance, "matching tolerance in seconds");
  annotate_cmd->add_option("--seed", aa.seed);

  ImputeArgs ia;
  auto* impute_cmd = app.add_subcommand("impute", "fill masked ball positions");
  ia.data.add_to(*impute_cmd, true);
  impute_cmd->add_option("--checkpoint", ia.checkpoint)->required();
  impute_cmd->add_option("--out", ia.out_path)->required();
  impute_cmd->add_option("--masking", ia.masking, "masking rate(s) in [0, 1]");
  impute_cmd->add_flag("--postprocess", ia.postprocess);
  impute_cmd->add_option("--seed", ia.seed);

  SimulateArgs sa;
  auto* sim_cmd = app.add_subcommand("simulate", "write scripted matches as tracking and event CSVs");
  sim_cmd->add_option("--out-dir", sa.out_dir)->required();
  sim_cmd->add_option("--episodes", sa.episodes);
  sim_cmd->add_option("--players", sa.players, "players per team");
  sim_cmd->add_option("--duration", sa.duration, "seconds per episode");
  sim_cmd->add_option("--seed", sa.seed);
  sim_cmd->add_flag("--library", sa.library, "the fixed scenario library instead of random scripts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }
  try {
    if (*train_cmd) return cmd_train(ta, *train_cmd, out, err);
    if (*predict_cmd) return cmd_predict(pa, out, err);
    if (*eval_cmd) return cmd_evaluate(ea, out, err);
    if (*annotate_cmd) return cmd_annotate(aa, out, err);
    if (*impute_cmd) return cmd_impute(ia, out, err);
    if (*sim_cmd) return cmd_simulate(sa, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace balltraj::cli
