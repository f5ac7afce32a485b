#pragma once

// Context-aware variational recurrent baseline. A backward LSTM summarises
// the future player context; a forward LSTM cell steps through time on
// (context, ball, latent). Prior, encoder and decoder heads read the joint
// state (forward state of t-1, backward state of t).

#include <cmath>
#include <limits>
#include <random>

#include "balltraj/models/model.hpp"

namespace balltraj::models {

inline constexpr double kSigmaFloor = 1e-4;

enum class SampleSource { kPrior, kPosterior };

inline SampleSource parse_sample_source(const std::string& s) {
  if (s == "prior" || s == "PRIOR") return SampleSource::kPrior;
  if (s == "posterior" || s == "POSTERIOR") return SampleSource::kPosterior;
  throw ConfigError("unknown sample source: " + s);
}

template <typename S>
struct Gaussian {
  Var<S> mu;
  Var<S> sigma;
};

// KL(q || p) for diagonal Gaussians, summed over dimensions, [rows, 1].
template <typename S>
Var<S> gaussian_kl(const Gaussian<S>& q, const Gaussian<S>& p) {
  Var<S> log_q = ag::log(q.sigma), log_p = ag::log(p.sigma);
  Var<S> inv_var_p = ag::exp(ag::scale(log_p, S(-2)));
  Var<S> spread = ag::add(ag::square(q.sigma), ag::square(ag::sub(q.mu, p.mu)));
  Var<S> terms = ag::add_scalar(ag::add(ag::sub(log_p, log_q), ag::scale(ag::mul(spread, inv_var_p), S(0.5))), S(-0.5));
  return ag::row_sum(terms);
}

// Negative log-density of x under a diagonal Gaussian, [rows, 1].
template <typename S>
Var<S> gaussian_nll(const Var<S>& x, const Gaussian<S>& d) {
  Var<S> log_s = ag::log(d.sigma);
  Var<S> z2 = ag::mul(ag::square(ag::sub(x, d.mu)), ag::exp(ag::scale(log_s, S(-2))));
  const S c = static_cast<S>(0.5 * std::log(2.0 * M_PI));
  return ag::row_sum(ag::add_scalar(ag::add(ag::scale(z2, S(0.5)), log_s), c));
}

template <typename S>
class GaussianHead {
 public:
  GaussianHead() = default;
  GaussianHead(nn::ParameterStore<S>& store, const std::string& name, Eigen::Index in, Eigen::Index width,
               Eigen::Index out)
      : hidden_(store, name + ".hidden", in, width), mu_(store, name + ".mu", width, out),
        sigma_(store, name + ".sigma", width, out) {}

  Gaussian<S> operator()(Graph<S>& g, const Var<S>& x) const {
    Var<S> h = ag::relu(hidden_(g, x));
    return {mu_(g, h), ag::add_scalar(ag::softplus(sigma_(g, h)), static_cast<S>(kSigmaFloor))};
  }

 private:
  nn::Linear<S> hidden_, mu_, sigma_;
};

template <typename S>
class LstmCell {
 public:
  LstmCell() = default;
  LstmCell(nn::ParameterStore<S>& store, const std::string& name, Eigen::Index in, Eigen::Index hidden)
      : hidden_(hidden) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
    w_input_ = &store.uniform(name + ".w_input", in, 4 * hidden, bound);
    w_hidden_ = &store.uniform(name + ".w_hidden", hidden, 4 * hidden, bound);
    bias_ = &store.uniform(name + ".bias", 1, 4 * hidden, bound);
    bias_->value.middleCols(hidden, hidden).array() += S(1);
  }

  // Returns (h, c) after one step.
  std::pair<Var<S>, Var<S>> operator()(Graph<S>& g, const Var<S>& x, const Var<S>& h, const Var<S>& c) const {
    Var<S> gates = ag::add_row(ag::add(ag::matmul(x, g.parameter(*w_input_)), ag::matmul(h, g.parameter(*w_hidden_))),
                               g.parameter(*bias_));
    const Eigen::Index H = hidden_;
    Var<S> i = ag::sigmoid(ag::slice_cols(gates, 0, H));
    Var<S> f = ag::sigmoid(ag::slice_cols(gates, H, H));
    Var<S> u = ag::tanh(ag::slice_cols(gates, 2 * H, H));
    Var<S> o = ag::sigmoid(ag::slice_cols(gates, 3 * H, H));
    Var<S> c_next = ag::add(ag::mul(f, c), ag::mul(i, u));
    return {ag::mul(o, ag::tanh(c_next)), c_next};
  }

 private:
  Eigen::Index hidden_ = 0;
  ag::Parameter<S>* w_input_ = nullptr;
  ag::Parameter<S>* w_hidden_ = nullptr;
  ag::Parameter<S>* bias_ = nullptr;
};

template <typename S>
struct VrnnTrace {
  std::vector<Gaussian<S>> prior, encoder, decoder;  // one entry per step, [B, dim]
  Var<S> context;                                    // [F, d]
};

template <typename S>
class VrnnModel : public BallModel<S> {
 public:
  explicit VrnnModel(const ModelConfig& config) : BallModel<S>(config) {
    if (config.variant != Variant::kVrnn) throw ConfigError("VRNN model needs variant VRNN");
    auto& store = this->store_;
    const Eigen::Index d = config.d_btr, H = config.lstm_hidden, z = config.vrnn_latent;
    context_ = encoders::TeamContextEncoder<S>(store, "vrnn.context", config.feature_count, this->set_config(d));
    const double bound = 1.0 / std::sqrt(static_cast<double>(H));
    bwd_w_input_ = &store.uniform("vrnn.bwd.w_input", d, 4 * H, bound);
    bwd_w_hidden_ = &store.uniform("vrnn.bwd.w_hidden", H, 4 * H, bound);
    bwd_bias_ = &store.uniform("vrnn.bwd.bias", 1, 4 * H, bound);
    bwd_bias_->value.middleCols(H, H).array() += S(1);
    fwd_ = LstmCell<S>(store, "vrnn.fwd", d + 2 + z, H);
    prior_ = GaussianHead<S>(store, "vrnn.prior", 2 * H, H, z);
    encoder_ = GaussianHead<S>(store, "vrnn.encoder", 2 * H + 2, H, z);
    decoder_ = GaussianHead<S>(store, "vrnn.decoder", 2 * H + z, H, 2);
  }

  // Source of z_t outside training; training always uses the encoder.
  void set_sample_source(SampleSource s) { source_ = s; }
  SampleSource sample_source() const { return source_; }

  ForwardResult<S> forward(Graph<S>& g, const Batch<S>& b) const override {
    VrnnTrace<S> trace;
    return run(g, b, trace);
  }

  ForwardResult<S> run(Graph<S>& g, const Batch<S>& b, VrnnTrace<S>& trace) const {
    const Eigen::Index B = b.batch, T = b.steps, H = this->config_.lstm_hidden, Z = this->config_.vrnn_latent;
    Var<S> x = this->inputs(g, b);
    const Eigen::Index n = b.team_size;
    Var<S> players = ag::gather_rows(x, encoders::agent_rows(b.frames(), b.agents, 0, 2 * n));
    trace.context = context_(g, players, n);
    Var<S> hb = ag::lstm_layer(trace.context, g.parameter(*bwd_w_input_), g.parameter(*bwd_w_hidden_),
                               g.parameter(*bwd_bias_), B, true);
    const Var<S> truth = g.constant(normalize_positions<S>(b.ball, this->config_.pitch));
    const bool posterior = g.training() || source_ == SampleSource::kPosterior;

    Var<S> h = g.constant(Matrix<S>::Zero(B, H)), c = g.constant(Matrix<S>::Zero(B, H));
    std::vector<Var<S>> means, states, kls, nlls;
    std::normal_distribution<double> normal(0.0, 1.0);
    S sigma_min = std::numeric_limits<S>::infinity();
    auto track = [&](const Gaussian<S>& d) {
      if (!d.sigma.value().allFinite() || !d.mu.value().allFinite()) throw NumericError("VRNN produced a non-finite distribution");
      sigma_min = std::min(sigma_min, d.sigma.value().minCoeff());
    };
    for (Eigen::Index t = 0; t < T; ++t) {
      Var<S> joint = ag::concat_cols<S>({h, ag::slice_rows(hb, t * B, B)});
      Var<S> x_t = ag::slice_rows(truth, t * B, B);
      Gaussian<S> pri = prior_(g, joint);
      Gaussian<S> enc = encoder_(g, ag::concat_cols<S>({x_t, joint}));
      track(pri);
      track(enc);
      const Gaussian<S>& src = posterior ? enc : pri;
      Matrix<S> eps(B, Z);
      for (Eigen::Index i = 0; i < eps.size(); ++i) eps.data()[i] = static_cast<S>(normal(g.rng()));
      Var<S> z = ag::add(src.mu, ag::mul(src.sigma, g.constant(std::move(eps))));
      Gaussian<S> dec = decoder_(g, ag::concat_cols<S>({z, joint}));
      track(dec);
      kls.push_back(gaussian_kl(enc, pri));
      nlls.push_back(gaussian_nll(x_t, dec));
      means.push_back(dec.mu);
      states.push_back(joint);
      Var<S> fed = posterior ? x_t : dec.mu;
      std::tie(h, c) = fwd_(g, ag::concat_cols<S>({ag::slice_rows(trace.context, t * B, B), fed, z}), h, c);
      trace.prior.push_back(pri);
      trace.encoder.push_back(enc);
      trace.decoder.push_back(dec);
    }
    ForwardResult<S> out;
    out.ball = this->to_metres(ag::concat_rows(means));
    out.hidden = ag::concat_rows(states);
    const S per_frame = S(1) / static_cast<S>(T * B);
    out.kl = ag::scale(ag::sum(ag::concat_rows(kls)), per_frame);
    out.nll = ag::scale(ag::sum(ag::concat_rows(nlls)), per_frame);
    out.sigma_min = g.constant(Matrix<S>::Constant(1, 1, sigma_min));
    return out;
  }

 private:
  SampleSource source_ = SampleSource::kPrior;
  encoders::TeamContextEncoder<S> context_;
  ag::Parameter<S>* bwd_w_input_ = nullptr;
  ag::Parameter<S>* bwd_w_hidden_ = nullptr;
  ag::Parameter<S>* bwd_bias_ = nullptr;
  LstmCell<S> fwd_;
  GaussianHead<S> prior_, encoder_, decoder_;
};

}  // namespace balltraj::models
