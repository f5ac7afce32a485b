#pragma once

// Game-context encoders over the agent roster of each frame.
//
// Frame f of a stack occupies rows [f * agents, (f + 1) * agents) with agents
// ordered team 1 (team_size), team 2 (team_size), then the four ball-out
// pseudo-agents.

#include <string>
#include <vector>

#include "balltraj/encoders/set_transformer.hpp"

namespace balltraj::encoders {

inline constexpr Eigen::Index kBallOutAgents = 4;

struct AgentLayout {
  Eigen::Index team_size = 11;

  Eigen::Index agents() const { return 2 * team_size + kBallOutAgents; }
  Eigen::Index players() const { return 2 * team_size; }
};

// Row indices of agents [first, first + count) in every frame of the stack.
inline std::vector<int> agent_rows(Eigen::Index frames, Eigen::Index agents, Eigen::Index first,
                                   Eigen::Index count) {
  std::vector<int> idx;
  idx.reserve(static_cast<std::size_t>(frames * count));
  for (Eigen::Index f = 0; f < frames; ++f) {
    for (Eigen::Index a = 0; a < count; ++a) idx.push_back(static_cast<int>(f * agents + first + a));
  }
  return idx;
}

// Row f*agents + a of the result is row f of `per_frame`.
inline std::vector<int> broadcast_rows(Eigen::Index frames, Eigen::Index agents) {
  std::vector<int> idx;
  idx.reserve(static_cast<std::size_t>(frames * agents));
  for (Eigen::Index f = 0; f < frames; ++f) {
    for (Eigen::Index a = 0; a < agents; ++a) idx.push_back(static_cast<int>(f));
  }
  return idx;
}

template <typename S>
Eigen::Index frame_count(const Var<S>& features, const AgentLayout& layout) {
  if (layout.team_size <= 0) throw ConfigError("team size must be positive");
  if (features.rows() % layout.agents() != 0) {
    throw ShapeError("feature rows " + std::to_string(features.rows()) + " are not a multiple of " +
                     std::to_string(layout.agents()) + " agents");
  }
  return features.rows() / layout.agents();
}

// Per-agent context embeddings for possession classification.
template <typename S>
class ContextEncoders {
 public:
  ContextEncoders() = default;
  ContextEncoders(nn::ParameterStore<S>& store, const std::string& name, Eigen::Index in,
                  const SetEncoderConfig& config, bool use_ppe, bool use_fpe, bool use_fpi)
      : use_ppe_(use_ppe), use_fpe_(use_fpe), use_fpi_(use_fpi), width_(config.embed_dim) {
    if (use_ppe) {
      ppe_team_ = SetEncoder<S>(store, name + ".ppe.team", in, config);
      ppe_out_ = nn::Linear<S>(store, name + ".ppe.out", in, config.embed_dim);
    }
    if (use_fpe) fpe_ = SetEncoder<S>(store, name + ".fpe", in, config);
    if (use_fpi) fpi_ = SetTransformer<S>(store, name + ".fpi", in, config);
  }

  Eigen::Index width() const { return width_; }
  bool has_ppe() const { return use_ppe_; }
  bool has_fpe() const { return use_fpe_; }
  bool has_fpi() const { return use_fpi_; }

  // Teams share one set encoder; ball-out rows see only their own features.
  Var<S> ppe(Graph<S>& g, const Var<S>& features, const AgentLayout& layout) const {
    require(use_ppe_, "PPE");
    const Eigen::Index frames = frame_count(features, layout);
    const Eigen::Index n = layout.team_size, a = layout.agents();
    Var<S> t1 = ppe_team_(g, ag::gather_rows(features, agent_rows(frames, a, 0, n)), n);
    Var<S> t2 = ppe_team_(g, ag::gather_rows(features, agent_rows(frames, a, n, n)), n);
    Var<S> out = ppe_out_(g, ag::gather_rows(features, agent_rows(frames, a, 2 * n, kBallOutAgents)));
    std::vector<int> order;
    order.reserve(static_cast<std::size_t>(frames * a));
    for (Eigen::Index f = 0; f < frames; ++f) {
      for (Eigen::Index i = 0; i < n; ++i) order.push_back(static_cast<int>(f * n + i));
      for (Eigen::Index i = 0; i < n; ++i) order.push_back(static_cast<int>(frames * n + f * n + i));
      for (Eigen::Index i = 0; i < kBallOutAgents; ++i) {
        order.push_back(static_cast<int>(2 * frames * n + f * kBallOutAgents + i));
      }
    }
    return ag::gather_rows(ag::concat_rows<S>({t1, t2, out}), std::move(order));
  }

  Var<S> fpe(Graph<S>& g, const Var<S>& features, const AgentLayout& layout) const {
    require(use_fpe_, "FPE");
    frame_count(features, layout);
    return fpe_(g, features, layout.agents());
  }

  // One row per frame.
  Var<S> fpi(Graph<S>& g, const Var<S>& features, const AgentLayout& layout) const {
    require(use_fpi_, "FPI");
    frame_count(features, layout);
    return fpi_(g, features, layout.agents());
  }

  // Concatenation of the enabled embeddings, one row per agent (FPI broadcast).
  Var<S> combined(Graph<S>& g, const Var<S>& features, const AgentLayout& layout) const {
    const Eigen::Index frames = frame_count(features, layout);
    std::vector<Var<S>> parts;
    if (use_ppe_) parts.push_back(ppe(g, features, layout));
    if (use_fpe_) parts.push_back(fpe(g, features, layout));
    if (use_fpi_) {
      parts.push_back(ag::gather_rows(fpi(g, features, layout), broadcast_rows(frames, layout.agents())));
    }
    return ag::concat_cols(parts);
  }

  Eigen::Index combined_width() const {
    return width_ * ((use_ppe_ ? 1 : 0) + (use_fpe_ ? 1 : 0) + (use_fpi_ ? 1 : 0));
  }

 private:
  static void require(bool enabled, const char* which) {
    if (!enabled) throw ConfigError(std::string(which) + " embedding is disabled in this configuration");
  }

  bool use_ppe_ = false, use_fpe_ = false, use_fpi_ = false;
  Eigen::Index width_ = 0;
  SetEncoder<S> ppe_team_;
  nn::Linear<S> ppe_out_;
  SetEncoder<S> fpe_;
  SetTransformer<S> fpi_;
};

template <typename S>
struct PPIEmbedding {
  Var<S> team1;
  Var<S> team2;
  Var<S> ball_out;
  Var<S> fused;
};

// Team-wise invariant embedding of the whole roster: one set transformer per
// team, a fully-connected map of the four ball-out rows, and a fusing layer.
template <typename S>
class PPIEncoder {
 public:
  PPIEncoder() = default;
  PPIEncoder(nn::ParameterStore<S>& store, const std::string& name, Eigen::Index in,
             const SetEncoderConfig& config)
      : team1_(store, name + ".team1", in, config),
        team2_(store, name + ".team2", in, config),
        out_(store, name + ".out", kBallOutAgents * in, config.embed_dim),
        fuse_(store, name + ".fuse", 3 * config.embed_dim, config.embed_dim),
        in_(in) {}

  PPIEmbedding<S> operator()(Graph<S>& g, const Var<S>& features, const AgentLayout& layout) const {
    if (features.cols() != in_) throw ShapeError("PPI encoder: feature width");
    const Eigen::Index frames = frame_count(features, layout);
    const Eigen::Index n = layout.team_size, a = layout.agents();
    PPIEmbedding<S> e;
    e.team1 = team1_(g, ag::gather_rows(features, agent_rows(frames, a, 0, n)), n);
    e.team2 = team2_(g, ag::gather_rows(features, agent_rows(frames, a, n, n)), n);
    Var<S> outs = ag::gather_rows(features, agent_rows(frames, a, 2 * n, kBallOutAgents));
    e.ball_out = out_(g, ag::reshape(outs, frames, kBallOutAgents * in_));
    e.fused = fuse_(g, ag::concat_cols<S>({e.team1, e.team2, e.ball_out}));
    return e;
  }

 private:
  SetTransformer<S> team1_, team2_;
  nn::Linear<S> out_, fuse_;
  Eigen::Index in_ = 0;
};

// Team-wise invariant embedding of players only (no ball-out rows). Input
// frames hold 2 * team_size rows.
template <typename S>
class TeamContextEncoder {
 public:
  TeamContextEncoder() = default;
  TeamContextEncoder(nn::ParameterStore<S>& store, const std::string& name, Eigen::Index in,
                     const SetEncoderConfig& config)
      : team1_(store, name + ".team1", in, config),
        team2_(store, name + ".team2", in, config),
        fuse_(store, name + ".fuse", 2 * config.embed_dim, config.embed_dim) {}

  Var<S> operator()(Graph<S>& g, const Var<S>& players, Eigen::Index team_size) const {
    const Eigen::Index per_frame = 2 * team_size;
    if (players.rows() % per_frame != 0) throw ShapeError("team context: rows not a multiple of roster");
    const Eigen::Index frames = players.rows() / per_frame;
    Var<S> z1 = team1_(g, ag::gather_rows(players, agent_rows(frames, per_frame, 0, team_size)), team_size);
    Var<S> z2 =
        team2_(g, ag::gather_rows(players, agent_rows(frames, per_frame, team_size, team_size)), team_size);
    return fuse_(g, ag::concat_cols<S>({z1, z2}));
  }

 private:
  SetTransformer<S> team1_, team2_;
  nn::Linear<S> fuse_;
};

}  // namespace balltraj::encoders
