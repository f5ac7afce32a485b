#pragma once

// Goalkeeper trajectory model: a team-possession classifier (TPC) over a
// team-wise invariant context, then a regressor (GTR) for both goalkeepers.
// Also the roster surgery that removes goalkeepers for training and puts
// predicted ones back.

#include <sstream>

#include "balltraj/data/kinematics.hpp"
#include "balltraj/models/model.hpp"

namespace balltraj::models {

struct GkConfig {
  int outfield_players = 10;  // per team, goalkeeper excluded
  Eigen::Index d_context = 128;
  Eigen::Index lstm_hidden = 256;
  int lstm_layers = 2;
  double dropout = 0.2;
  Eigen::Index heads = 4;
  int feature_count = data::kFeatureCount;
  std::uint64_t seed = 0;
  data::PitchConfig pitch;

  void validate() const {
    pitch.validate();
    if (outfield_players <= 0 || d_context <= 0 || lstm_hidden <= 0 || lstm_layers <= 0 || heads <= 0) {
      throw ConfigError("goalkeeper model dimensions must be positive");
    }
    if (d_context % heads != 0) throw ConfigError("d_context must be divisible by heads");
    if (feature_count != 2 && feature_count != 4 && feature_count != 6) throw ConfigError("feature_count must be 2, 4 or 6");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  }

  // Reuses the ball-model normalisation.
  ModelConfig normalisation() const {
    ModelConfig c;
    c.feature_count = feature_count;
    c.pitch = pitch;
    return c;
  }

  std::string to_text() const {
    std::ostringstream os;
    os.precision(17);
    os << "model=GK\n"
       << "outfield_players=" << outfield_players << "\n"
       << "d_context=" << d_context << "\n"
       << "lstm_hidden=" << lstm_hidden << "\n"
       << "lstm_layers=" << lstm_layers << "\n"
       << "dropout=" << dropout << "\n"
       << "heads=" << heads << "\n"
       << "feature_count=" << feature_count << "\n"
       << "seed=" << seed << "\n"
       << "pitch_length=" << pitch.length << "\n"
       << "pitch_width=" << pitch.width << "\n";
    return os.str();
  }

  static GkConfig from_text(const std::string& text) {
    GkConfig c;
    std::istringstream is(text);
    std::string line;
    std::size_t number = 0;
    while (std::getline(is, line)) {
      ++number;
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ParseError("goalkeeper config line without '='", number);
      const std::string key = line.substr(0, eq), value = line.substr(eq + 1);
      try {
        if (key == "model") {
          if (value != "GK") throw ParseError("not a goalkeeper model config", number);
        } else if (key == "outfield_players") c.outfield_players = std::stoi(value);
        else if (key == "d_context") c.d_context = std::stol(value);
        else if (key == "lstm_hidden") c.lstm_hidden = std::stol(value);
        else if (key == "lstm_layers") c.lstm_layers = std::stoi(value);
        else if (key == "dropout") c.dropout = std::stod(value);
        else if (key == "heads") c.heads = std::stol(value);
        else if (key == "feature_count") c.feature_count = std::stoi(value);
        else if (key == "seed") c.seed = std::stoull(value);
        else if (key == "pitch_length") c.pitch.length = std::stod(value);
        else if (key == "pitch_width") c.pitch.width = std::stod(value);
        else throw ParseError("unknown goalkeeper config key: " + key, number);
      } catch (const std::logic_error&) {
        throw ParseError("bad value for " + key, number);
      }
    }
    c.validate();
    return c;
  }
};

// Outfield-only window with goalkeeper targets.
struct GkExample {
  data::Window outfield;
  data::MatrixD goalkeepers;   // [T, 4]: team 1 (x, y), team 2 (x, y)
  std::vector<int> team;       // [T] team in possession, 1 or 2
  std::array<std::string, 2> ids;
};

// Per frame, the team of the labelled agent; ball-out frames inherit the
// previous team (or the next one at the start).
inline std::vector<int> team_targets(const std::vector<int>& labels, const data::AgentSet& agents) {
  std::vector<int> team(labels.size(), 0);
  int last = 0;
  for (std::size_t t = 0; t < labels.size(); ++t) {
    const int k = agents.team_of(labels[t]);
    if (k != 0) last = k;
    team[t] = last;
  }
  int next = 1;
  for (std::size_t t = labels.size(); t-- > 0;) {
    if (team[t] != 0) next = team[t];
    else team[t] = next;
  }
  return team;
}

// Index within each team of the player nearest (on average) to a goal.
inline std::array<int, 2> find_goalkeepers(const data::Window& w, const data::PitchConfig& pitch) {
  const int n = w.team_size();
  std::array<int, 2> best{0, 0};
  for (int team = 0; team < 2; ++team) {
    double best_d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      const int a = team * n + i;
      double d = 0.0;
      for (int t = 0; t < w.steps; ++t) {
        const double x = w.feature(t, a, 0), y = w.feature(t, a, 1);
        d += std::min(std::hypot(x, y - pitch.width / 2.0), std::hypot(x - pitch.length, y - pitch.width / 2.0));
      }
      if (d < best_d) {
        best_d = d;
        best[static_cast<std::size_t>(team)] = i;
      }
    }
  }
  return best;
}

// Removes one goalkeeper per team. Labels of frames controlled by a removed
// goalkeeper become -1; other labels are re-indexed.
inline GkExample remove_goalkeepers(const data::Window& w, const std::array<int, 2>& keepers) {
  const int n = w.team_size();
  if (n < 2) throw ConfigError("teams need at least two players to remove a goalkeeper");
  GkExample ex;
  ex.team = team_targets(w.labels, w.agent_set);
  std::vector<int> keep, map(static_cast<std::size_t>(w.agents), -1);
  std::vector<std::string> t1, t2;
  for (int a = 0; a < w.agents; ++a) {
    const int team = w.agent_set.team_of(a);
    if (team != 0 && a - (team - 1) * n == keepers[static_cast<std::size_t>(team - 1)]) {
      ex.ids[static_cast<std::size_t>(team - 1)] = w.agent_set.id_of(a);
      continue;
    }
    map[static_cast<std::size_t>(a)] = static_cast<int>(keep.size());
    keep.push_back(a);
    if (team == 1) t1.push_back(w.agent_set.id_of(a));
    if (team == 2) t2.push_back(w.agent_set.id_of(a));
  }
  data::Window& o = ex.outfield;
  o.steps = w.steps;
  o.agents = static_cast<int>(keep.size());
  o.start_time = w.start_time;
  o.agent_set = w.agent_set;
  o.agent_set.team1 = t1;
  o.agent_set.team2 = t2;
  o.features.resize(static_cast<Eigen::Index>(w.steps) * o.agents, data::kFeatureCount);
  ex.goalkeepers.resize(w.steps, 4);
  for (int t = 0; t < w.steps; ++t) {
    for (int i = 0; i < o.agents; ++i) o.features.row(t * o.agents + i) = w.features.row(t * w.agents + keep[static_cast<std::size_t>(i)]);
    for (int team = 0; team < 2; ++team) {
      const int a = team * n + keepers[static_cast<std::size_t>(team)];
      ex.goalkeepers(t, 2 * team) = w.feature(t, a, 0);
      ex.goalkeepers(t, 2 * team + 1) = w.feature(t, a, 1);
    }
  }
  o.ball = w.ball;
  o.ball_mask = w.ball_mask;
  o.roster_ok = w.roster_ok;
  o.labels.resize(w.labels.size());
  for (std::size_t t = 0; t < w.labels.size(); ++t) o.labels[t] = map[static_cast<std::size_t>(w.labels[t])];
  return ex;
}

// Inserts goalkeeper tracks as the first player of each team, with
// kinematics derived from the positions. Labels are re-indexed.
inline data::Window insert_goalkeepers(const data::Window& w, const data::MatrixD& goalkeepers,
                                       const std::array<std::string, 2>& ids = {"GK1", "GK2"},
                                       const data::KinematicsOptions& options = {}) {
  if (goalkeepers.rows() != w.steps || goalkeepers.cols() != 4) throw ShapeError("goalkeeper tracks must be [T, 4]");
  const int n = w.team_size();
  data::Window o = w;
  o.agents = w.agents + 2;
  o.agent_set.team1.insert(o.agent_set.team1.begin(), ids[0]);
  o.agent_set.team2.insert(o.agent_set.team2.begin(), ids[1]);
  std::array<data::Kinematics, 2> kin;
  for (int team = 0; team < 2; ++team) {
    if (w.steps >= 2) {
      kin[static_cast<std::size_t>(team)] = data::derive_kinematics(goalkeepers.middleCols(2 * team, 2), options);
    } else {
      auto& k = kin[static_cast<std::size_t>(team)];
      k.vx = k.vy = k.speed = k.accel = Eigen::VectorXd::Zero(w.steps);
    }
  }
  o.features.resize(static_cast<Eigen::Index>(w.steps) * o.agents, data::kFeatureCount);
  for (int t = 0; t < w.steps; ++t) {
    int r = t * o.agents;
    for (int team = 0; team < 2; ++team) {
      const auto& k = kin[static_cast<std::size_t>(team)];
      o.features.row(r++) << goalkeepers(t, 2 * team), goalkeepers(t, 2 * team + 1), k.vx(t), k.vy(t), k.speed(t), k.accel(t);
      for (int i = 0; i < n; ++i) o.features.row(r++) = w.features.row(t * w.agents + team * n + i);
    }
    for (int i = 2 * n; i < w.agents; ++i) o.features.row(r++) = w.features.row(t * w.agents + i);
  }
  for (auto& label : o.labels) {
    if (label < 0) continue;
    label += label < n ? 1 : 2;
  }
  return o;
}

template <typename S>
struct GkOutput {
  Var<S> team_logits;  // [F, 2]
  Var<S> team_probs;   // [F, 2]
  Var<S> positions;    // [F, 4] metres
};

template <typename S>
class GkModel {
 public:
  explicit GkModel(const GkConfig& config) : config_(config), store_(config.seed) {
    config.validate();
    encoders::SetEncoderConfig set;
    set.embed_dim = config.d_context;
    set.num_heads = config.heads;
    context_ = encoders::TeamContextEncoder<S>(store_, "gk.context", config.feature_count, set);
    tpc_ = nn::BiLstm<S>(store_, "gk.tpc", config.d_context, config.lstm_hidden, config.lstm_layers, config.dropout);
    tpc_out_ = nn::Linear<S>(store_, "gk.tpc.out", tpc_.output_width(), 2);
    gtr_ = nn::BiLstm<S>(store_, "gk.gtr", config.d_context + 2, config.lstm_hidden, config.lstm_layers, config.dropout);
    gtr_out_ = nn::Linear<S>(store_, "gk.gtr.out", gtr_.output_width(), 4);
  }

  GkModel(const GkModel&) = delete;
  GkModel& operator=(const GkModel&) = delete;

  const GkConfig& config() const { return config_; }
  nn::ParameterStore<S>& parameters() { return store_; }
  const nn::ParameterStore<S>& parameters() const { return store_; }

  GkOutput<S> forward(Graph<S>& g, const Batch<S>& b) const {
    if (b.team_size != config_.outfield_players) {
      throw ConfigError("goalkeeper model expects " + std::to_string(config_.outfield_players) +
                        " outfield players per team, got " + std::to_string(b.team_size) +
                        " (does the roster still include goalkeepers?)");
    }
    Var<S> x = g.constant(normalize_features<S>(b.features, config_.normalisation()));
    const Eigen::Index n = b.team_size;
    Var<S> players = ag::gather_rows(x, encoders::agent_rows(b.frames(), b.agents, 0, 2 * n));
    Var<S> z = context_(g, players, n);
    GkOutput<S> out;
    out.team_logits = tpc_out_(g, tpc_(g, z, b.batch));
    out.team_probs = ag::softmax_rows(out.team_logits);
    Var<S> y = gtr_out_(g, gtr_(g, ag::concat_cols<S>({z, out.team_probs}), b.batch));
    Matrix<S> scale(1, 4);
    const S cx = static_cast<S>(config_.pitch.length / 2.0), cy = static_cast<S>(config_.pitch.width / 2.0);
    scale << cx, cy, cx, cy;
    out.positions = ag::add_row(ag::mul(y, g.constant(Matrix<S>(scale.replicate(y.rows(), 1)))), g.constant(scale));
    return out;
  }

 private:
  GkConfig config_;
  nn::ParameterStore<S> store_;
  encoders::TeamContextEncoder<S> context_;
  nn::BiLstm<S> tpc_;
  nn::Linear<S> tpc_out_;
  nn::BiLstm<S> gtr_;
  nn::Linear<S> gtr_out_;
};

// Time-major targets for a batch of GK examples.
template <typename S>
struct GkTargets {
  Matrix<S> positions;     // [F, 4]
  std::vector<int> team;   // [F] class 0 (team 1) or 1 (team 2)
};

template <typename S>
GkTargets<S> make_gk_targets(const std::vector<const GkExample*>& examples) {
  if (examples.empty()) throw InsufficientDataError("cannot batch zero goalkeeper examples");
  const Eigen::Index B = static_cast<Eigen::Index>(examples.size()), T = examples.front()->outfield.steps;
  GkTargets<S> out;
  out.positions.resize(T * B, 4);
  out.team.resize(static_cast<std::size_t>(T * B));
  for (Eigen::Index b = 0; b < B; ++b) {
    const GkExample& e = *examples[static_cast<std::size_t>(b)];
    if (e.outfield.steps != T) throw ShapeError("goalkeeper examples must share length");
    for (Eigen::Index t = 0; t < T; ++t) {
      out.positions.row(t * B + b) = e.goalkeepers.row(t).template cast<S>();
      out.team[static_cast<std::size_t>(t * B + b)] = e.team[static_cast<std::size_t>(t)] - 1;
    }
  }
  return out;
}

// Squared error on both keepers plus weighted team cross-entropy.
template <typename S>
Var<S> gk_loss(const GkOutput<S>& out, const GkTargets<S>& targets, double lambda_ce) {
  Graph<S>& g = out.positions.graph();
  Var<S> mse = ag::scale(ag::sum(ag::square(ag::sub(out.positions, g.constant(targets.positions)))),
                         S(1) / static_cast<S>(2 * out.positions.rows()));
  return ag::add(mse, ag::scale(losses::ce_loss_logits(out.team_logits, targets.team), static_cast<S>(lambda_ce)));
}

}  // namespace balltraj::models
