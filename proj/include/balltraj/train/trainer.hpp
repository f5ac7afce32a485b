#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "balltraj/data/windows.hpp"
#include "balltraj/models/model.hpp"
#include "balltraj/nn/adam.hpp"
#include "balltraj/train/evaluate.hpp"

namespace balltraj::train {

struct TrainConfig {
  double learning_rate = 5e-4;
  int batch_size = 32;
  int max_epochs = 100;
  int patience = 10;                  // epochs without validation PE improvement
  losses::LossWeights weights;
  double mask_rate = 0.8;             // imputation models: masking rate of partially observed batches
  double observed_batch_fraction = 0.5;
  bool flip_augment = false;
  double clip_norm = 0.0;
  std::uint64_t seed = 0;
  double time_limit_seconds = 0.0;    // 0 disables
  int window_length = data::kWindowLength;
  int stride = 5;

  void validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
    if (max_epochs < 0 || patience < 1) throw ConfigError("max_epochs must be >= 0 and patience >= 1");
    if (!(mask_rate >= 0.0 && mask_rate <= 1.0)) throw ConfigError("mask_rate must lie in [0, 1]");
    if (!(observed_batch_fraction >= 0.0 && observed_batch_fraction <= 1.0)) {
      throw ConfigError("observed_batch_fraction must lie in [0, 1]");
    }
    if (clip_norm < 0.0 || time_limit_seconds < 0.0) throw ConfigError("clip_norm and time limit must be non-negative");
    if (window_length < 1 || stride < 1) throw ConfigError("window length and stride must be positive");
    weights.validate();
  }

  bool set(const std::string& key, const std::string& value) {
    try {
      if (key == "learning_rate") learning_rate = std::stod(value);
      else if (key == "batch_size") batch_size = std::stoi(value);
      else if (key == "max_epochs") max_epochs = std::stoi(value);
      else if (key == "patience") patience = std::stoi(value);
      else if (key == "lambda_real") weights.lambda_real = std::stod(value);
      else if (key == "lambda_ce") weights.lambda_ce = std::stod(value);
      else if (key == "mask_rate") mask_rate = std::stod(value);
      else if (key == "observed_batch_fraction") observed_batch_fraction = std::stod(value);
      else if (key == "flip_augment") flip_augment = value == "1" || value == "true";
      else if (key == "clip_norm") clip_norm = std::stod(value);
      else if (key == "seed") seed = std::stoull(value);
      else if (key == "time_limit_seconds") time_limit_seconds = std::stod(value);
      else if (key == "window_length") window_length = std::stoi(value);
      else if (key == "stride") stride = std::stoi(value);
      else return false;
    } catch (const std::logic_error&) {
      throw ConfigError("bad value for " + key + ": " + value);
    }
    return true;
  }
};

// Run name: variant plus "-RL" when the reality loss is on.
inline std::string run_tag(models::Variant v, const losses::LossWeights& w) {
  return std::string(models::to_string(v)) + (w.lambda_real == 1.0 ? "-RL" : "");
}

struct EpochLog {
  int epoch = 0;
  losses::LossParts train;  // batch means
  double train_total = 0.0;
  double train_kl = 0.0;
  bool has_validation = false;
  MetricsReport validation;
  double seconds = 0.0;
};

struct TrainResult {
  std::vector<EpochLog> history;
  int best_epoch = 0;
  double best_score = std::numeric_limits<double>::infinity();  // validation PE, or train loss without validation
  bool stopped_early = false;
  bool timed_out = false;
  bool target_reached = false;  // stop condition met; the final parameters are kept
};

using EpochCallback = std::function<void(const EpochLog&)>;
using StopCondition = std::function<bool(const EpochLog&)>;

// Batches of equal-shaped windows, reshuffled every epoch.
inline std::vector<std::vector<int>> make_batches(const std::vector<data::Window>& windows, int batch_size,
                                                  std::mt19937_64& rng) {
  std::map<std::pair<int, int>, std::vector<int>> groups;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    groups[{windows[i].steps, windows[i].agents}].push_back(static_cast<int>(i));
  }
  std::vector<std::vector<int>> batches;
  for (auto& [key, idx] : groups) {
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t s = 0; s < idx.size(); s += static_cast<std::size_t>(batch_size)) {
      batches.emplace_back(idx.begin() + static_cast<long>(s),
                           idx.begin() + static_cast<long>(std::min(idx.size(), s + static_cast<std::size_t>(batch_size))));
    }
  }
  std::shuffle(batches.begin(), batches.end(), rng);
  return batches;
}

template <typename S>
TrainResult train_model(models::BallModel<S>& model, const std::vector<data::Window>& train_set,
                        const std::vector<data::Window>& validation_set, const TrainConfig& config,
                        const EpochCallback& on_epoch = {}, const StopCondition& stop = {}) {
  config.validate();
  if (train_set.empty()) throw InsufficientDataError("no training windows");
  const auto& mc = model.config();
  nn::AdamOptions adam_options;
  adam_options.learning_rate = config.learning_rate;
  adam_options.clip_norm = config.clip_norm;
  nn::Adam<S> adam(model.parameters(), adam_options);
  std::mt19937_64 rng(config.seed);
  std::bernoulli_distribution observed_batch(config.observed_batch_fraction), coin(0.5);
  std::uniform_int_distribution<int> flip_pick(0, 3);
  const auto started = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  };

  TrainResult result;
  auto best = model.parameters().snapshot();
  int since_best = 0;
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const double epoch_start = elapsed();
    EpochLog log;
    log.epoch = epoch;
    const auto batches = make_batches(train_set, config.batch_size, rng);
    for (std::size_t bi = 0; bi < batches.size(); ++bi) {
      std::vector<data::Window> prepared;
      prepared.reserve(batches[bi].size());
      const bool partially_observed = observed_batch(rng);
      for (int i : batches[bi]) {
        data::Window w = train_set[static_cast<std::size_t>(i)];
        if (config.flip_augment) {
          const int pick = flip_pick(rng);
          if (pick > 0) w = data::flip_augment(w, static_cast<data::FlipMode>(pick - 1), mc.pitch);
        }
        if (mc.imputation) w = data::mask_ball(w, partially_observed ? 1.0 - config.mask_rate : 0.0, rng());
        prepared.push_back(std::move(w));
      }
      std::vector<const data::Window*> ptrs;
      for (const auto& w : prepared) ptrs.push_back(&w);
      const auto batch = models::make_batch<S>(ptrs);
      ag::Graph<S> g(true, rng());
      const auto terms = models::compute_loss(model.forward(g, batch), batch, config.weights, mc.kl_weight);
      const double total = static_cast<double>(terms.total.scalar());
      if (!std::isfinite(total)) {
        std::ostringstream os;
        os << "non-finite training loss at epoch " << epoch << ", batch " << bi << " (mse=" << terms.parts.mse
           << ", real=" << terms.parts.real << ", ce=" << terms.parts.ce << ", kl=" << terms.kl << ")";
        throw NumericError(os.str());
      }
      model.parameters().zero_grad();
      g.backward(terms.total);
      adam.step();
      const double n = static_cast<double>(bi + 1);
      auto mean = [n](double& acc, double v) { acc += (v - acc) / n; };
      mean(log.train.mse, terms.parts.mse);
      mean(log.train.real, terms.parts.real);
      mean(log.train.ce, terms.parts.ce);
      mean(log.train_total, total);
      mean(log.train_kl, terms.kl);
    }
    double score = log.train_total;
    if (!validation_set.empty()) {
      EvalOptions eo;
      eo.postprocess = false;
      std::vector<data::Window> val = validation_set;
      if (mc.imputation) {
        // validation at the training masking rate, fixed per epoch
        for (std::size_t i = 0; i < val.size(); ++i) val[i] = data::mask_ball(val[i], 1.0 - config.mask_rate, config.seed + i);
      }
      log.validation = evaluate(model, val, eo).raw;
      log.has_validation = true;
      score = log.validation.pe;
    }
    log.seconds = elapsed() - epoch_start;
    result.history.push_back(log);
    if (on_epoch) on_epoch(log);
    if (stop && stop(log)) {
      result.target_reached = true;
      if (score < result.best_score) {
        result.best_score = score;
        result.best_epoch = epoch;
      }
      return result;
    }
    if (score < result.best_score) {
      result.best_score = score;
      result.best_epoch = epoch;
      best = model.parameters().snapshot();
      since_best = 0;
    } else if (++since_best >= config.patience) {
      result.stopped_early = true;
      break;
    }
    if (config.time_limit_seconds > 0.0 && elapsed() > config.time_limit_seconds) {
      result.timed_out = true;
      break;
    }
  }
  if (result.best_epoch > 0) model.parameters().restore(best);
  return result;
}

}  // namespace balltraj::train
