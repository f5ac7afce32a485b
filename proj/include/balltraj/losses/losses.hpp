#pragma once

// Training losses. Plain versions operate on one sequence in double
// precision; the graph versions work on time-major batches
// (row t * batch + b) and are differentiable.

#include <cmath>
#include <limits>
#include <vector>

#include "balltraj/autograd/ops.hpp"

namespace balltraj::losses {

using MatrixD = Matrix<double>;

inline constexpr double kAngleEpsilon = 1e-6;  // m per frame

struct LossWeights {
  double lambda_real = 1.0;
  double lambda_ce = 20.0;

  void validate() const {
    if (!(lambda_real >= 0.0) || !(lambda_ce >= 0.0)) throw ConfigError("loss weights must be nonnegative");
  }
};

struct LossParts {
  double mse = 0.0;
  double real = 0.0;
  double ce = 0.0;
};

inline double total_loss(const LossParts& parts, const LossWeights& w) {
  w.validate();
  return parts.mse + w.lambda_real * parts.real + w.lambda_ce * parts.ce;
}

inline void require_same_shape(const MatrixD& a, const MatrixD& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError(std::string(what) + ": shape mismatch");
}

inline double mse_loss(const MatrixD& pred, const MatrixD& truth) {
  require_same_shape(pred, truth, "mse_loss");
  if (pred.rows() == 0) return 0.0;
  return (pred - truth).rowwise().squaredNorm().mean();
}

inline double position_error(const MatrixD& pred, const MatrixD& truth) {
  require_same_shape(pred, truth, "position_error");
  if (pred.rows() == 0) return 0.0;
  return (pred - truth).rowwise().norm().mean();
}

// Turning angle between consecutive displacements, 0 when either is shorter
// than kAngleEpsilon.
inline double turn_angle(double ax, double ay, double bx, double by) {
  if (std::hypot(ax, ay) < kAngleEpsilon || std::hypot(bx, by) < kAngleEpsilon) return 0.0;
  return std::atan2(std::abs(ax * by - ay * bx), ax * bx + ay * by);
}

// players is [T * P, 2] with row t * P + p.
inline double nearest_distance(const MatrixD& players, Eigen::Index players_per_frame, Eigen::Index t, double x,
                               double y) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index p = 0; p < players_per_frame; ++p) {
    const Eigen::Index r = t * players_per_frame + p;
    best = std::min(best, std::hypot(x - players(r, 0), y - players(r, 1)));
  }
  return best;
}

// Mean over interior frames of tanh(turn angle) * distance to nearest player.
inline double reality_loss(const MatrixD& ball, const MatrixD& players, Eigen::Index players_per_frame) {
  const Eigen::Index steps = ball.rows();
  if (steps < 3) throw InsufficientDataError("reality loss needs at least three frames");
  if (ball.cols() != 2 || players.cols() != 2 || players_per_frame <= 0 ||
      players.rows() != steps * players_per_frame) {
    throw ShapeError("reality_loss: shape mismatch");
  }
  double total = 0.0;
  for (Eigen::Index t = 1; t + 1 < steps; ++t) {
    const double theta = turn_angle(ball(t, 0) - ball(t - 1, 0), ball(t, 1) - ball(t - 1, 1),
                                    ball(t + 1, 0) - ball(t, 0), ball(t + 1, 1) - ball(t, 1));
    if (theta == 0.0) continue;
    total += std::tanh(theta) * nearest_distance(players, players_per_frame, t, ball(t, 0), ball(t, 1));
  }
  return total / static_cast<double>(steps - 2);
}

// probs [T, K] on the simplex.
inline double ce_loss(const MatrixD& probs, const std::vector<int>& labels) {
  if (static_cast<Eigen::Index>(labels.size()) != probs.rows()) throw ShapeError("ce_loss: label count");
  if (labels.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t t = 0; t < labels.size(); ++t) {
    const int q = labels[t];
    if (q < 0 || q >= probs.cols()) throw LabelError("ce_loss: label out of range");
    total -= std::log(probs(static_cast<Eigen::Index>(t), q));
  }
  return total / static_cast<double>(labels.size());
}

// ---- graph versions --------------------------------------------------------

template <typename S>
ag::Var<S> mse_loss(const ag::Var<S>& pred, const ag::Var<S>& truth) {
  return ag::scale(ag::sum(ag::square(ag::sub(pred, truth))), S(1) / static_cast<S>(pred.rows()));
}

// Mean negative log-likelihood of labels under row-wise softmax(logits).
template <typename S>
ag::Var<S> ce_loss_logits(const ag::Var<S>& logits, const std::vector<int>& labels) {
  return ag::scale(ag::sum(ag::pick(ag::log_softmax_rows(logits), labels)), S(-1) / static_cast<S>(logits.rows()));
}

// Reality loss over a time-major batch, averaged over sequences.
// ball: [T * batch, 2]; players: [T * batch * P, 2] constant positions.
template <typename S>
ag::Var<S> reality_loss(const ag::Var<S>& ball, const Matrix<S>& players, Eigen::Index batch,
                        Eigen::Index players_per_frame) {
  if (batch <= 0 || ball.rows() % batch != 0 || ball.cols() != 2) throw ShapeError("reality_loss: ball shape");
  const Eigen::Index steps = ball.rows() / batch;
  if (steps < 3) throw InsufficientDataError("reality loss needs at least three frames");
  if (players.rows() != ball.rows() * players_per_frame || players.cols() != 2) {
    throw ShapeError("reality_loss: player shape");
  }
  const Matrix<S>& y = ball.value();
  const S eps = static_cast<S>(kAngleEpsilon);
  const S norm = S(1) / static_cast<S>(batch * (steps - 2));
  Matrix<S> grad = Matrix<S>::Zero(y.rows(), 2);
  S total = 0;
  for (Eigen::Index b = 0; b < batch; ++b) {
    for (Eigen::Index t = 1; t + 1 < steps; ++t) {
      const Eigen::Index r0 = (t - 1) * batch + b, r1 = t * batch + b, r2 = (t + 1) * batch + b;
      const S ax = y(r1, 0) - y(r0, 0), ay = y(r1, 1) - y(r0, 1);
      const S bx = y(r2, 0) - y(r1, 0), by = y(r2, 1) - y(r1, 1);
      if (std::hypot(ax, ay) < eps || std::hypot(bx, by) < eps) continue;
      const S cross = ax * by - ay * bx, dot = ax * bx + ay * by;
      const S theta = std::atan2(std::abs(cross), dot);
      // nearest player
      S best = std::numeric_limits<S>::infinity();
      Eigen::Index arg = 0;
      for (Eigen::Index p = 0; p < players_per_frame; ++p) {
        const Eigen::Index pr = r1 * players_per_frame + p;
        const S d = std::hypot(y(r1, 0) - players(pr, 0), y(r1, 1) - players(pr, 1));
        if (d < best) {
          best = d;
          arg = r1 * players_per_frame + p;
        }
      }
      const S th = std::tanh(theta);
      total += th * best;
      // d/d(theta)
      const S denom = cross * cross + dot * dot;
      const S sgn = cross > 0 ? S(1) : (cross < 0 ? S(-1) : S(0));
      const S coef = norm * (S(1) - th * th) * best / denom;
      // dtheta = (dot * d|cross| - |cross| * d dot) / denom
      const S dax = dot * sgn * by - std::abs(cross) * bx;
      const S day = dot * sgn * (-bx) - std::abs(cross) * by;
      const S dbx = dot * sgn * (-ay) - std::abs(cross) * ax;
      const S dby = dot * sgn * ax - std::abs(cross) * ay;
      // a = y1 - y0, b = y2 - y1
      grad(r0, 0) -= coef * dax;
      grad(r0, 1) -= coef * day;
      grad(r1, 0) += coef * (dax - dbx);
      grad(r1, 1) += coef * (day - dby);
      grad(r2, 0) += coef * dbx;
      grad(r2, 1) += coef * dby;
      if (best > S(0)) {
        grad(r1, 0) += norm * th * (y(r1, 0) - players(arg, 0)) / best;
        grad(r1, 1) += norm * th * (y(r1, 1) - players(arg, 1)) / best;
      }
    }
  }
  Matrix<S> out(1, 1);
  out(0, 0) = total * norm;
  const auto id = ball.id();
  return ball.graph().record(std::move(out), {ball}, [id, grad = std::move(grad)](ag::Graph<S>& g, std::size_t self) {
    if (g.requires_grad(id)) g.accumulate(id, grad * g.grad(self)(0, 0));
  });
}

}  // namespace balltraj::losses
