#pragma once

#include <random>
#include <vector>

#include "balltraj/apps/passes.hpp"
#include "balltraj/train/evaluate.hpp"

namespace balltraj::apps {

inline const std::vector<double>& default_masking_rates() {
  static const std::vector<double> rates = {1.0, 0.95, 0.9, 0.8};
  return rates;
}

// Masks each frame whose uniform draw falls below `rate`. With a fixed seed
// the masks are nested: a frame masked at rate r stays masked at every r' > r.
inline data::Window mask_at_rate(const data::Window& w, double rate, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw ConfigError("masking rate must lie in [0, 1]");
  data::Window out = w;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  out.ball_mask.assign(static_cast<std::size_t>(w.steps), 1);
  for (auto& m : out.ball_mask) m = u(rng) < rate ? 0 : 1;
  if (rate >= 1.0) std::fill(out.ball_mask.begin(), out.ball_mask.end(), 0);
  return out;
}

struct ImputationRow {
  double rate = 0.0;
  train::EvalResult result;
};

// PE is taken over all frames; observed frames contribute 0 by the overwrite.
template <typename S>
std::vector<ImputationRow> evaluate_imputation(const models::BallModel<S>& model,
                                               const std::vector<data::Window>& windows,
                                               const std::vector<double>& rates = default_masking_rates(),
                                               std::uint64_t seed = 0, const train::EvalOptions& options = {}) {
  if (!model.config().imputation) throw ConfigError("evaluate_imputation needs a model trained in imputation mode");
  std::vector<ImputationRow> out;
  for (double rate : rates) {
    std::vector<data::Window> masked;
    masked.reserve(windows.size());
    for (std::size_t i = 0; i < windows.size(); ++i) masked.push_back(mask_at_rate(windows[i], rate, seed + i));
    out.push_back({rate, train::evaluate(model, masked, options)});
  }
  return out;
}

inline MatrixD one_hot(const std::vector<int>& labels, int classes) {
  MatrixD m = MatrixD::Zero(static_cast<Eigen::Index>(labels.size()), classes);
  for (std::size_t t = 0; t < labels.size(); ++t) {
    const int q = labels[t];
    if (q < 0 || q >= classes) throw LabelError("one_hot: label out of range");
    m(static_cast<Eigen::Index>(t), q) = 1.0;
  }
  return m;
}

// Passes implied by the window's own labels and ball path.
inline std::vector<PassEvent> truth_passes(const data::Window& w, const postprocess::PostprocessConfig& config = {}) {
  train::Prediction p{w.ball, one_hot(w.labels, w.agents)};
  return detect_passes(train::postprocess_prediction(p, w, config).assignment, 2 * w.team_size(), w.start_time);
}

inline std::vector<PassEvent> predicted_passes(const train::Prediction& p, const data::Window& w,
                                               const postprocess::PostprocessConfig& config = {}) {
  return detect_passes(train::postprocess_prediction(p, w, config).assignment, 2 * w.team_size(), w.start_time);
}

}  // namespace balltraj::apps
