#pragma once

// Fused operations with hand-derived backward passes. Both run over many
// small independent problems (sequences, sets) stacked into one matrix.

#include <cmath>
#include <vector>

#include "balltraj/autograd/graph.hpp"

namespace balltraj::ag {

// One LSTM layer over a time-major stack of sequences.
//
// x is [steps * batch, in] with row (t * batch + b). Gate layout in the
// weight columns is (input, forget, cell, output). When `reverse` is set the
// recurrence runs from the last step to the first. Returns [steps * batch, hidden].
template <typename S>
Var<S> lstm_layer(const Var<S>& x, const Var<S>& w_input, const Var<S>& w_hidden,
                  const Var<S>& bias, Eigen::Index batch, bool reverse) {
  const Eigen::Index hidden = w_hidden.rows();
  if (batch <= 0 || x.rows() % batch != 0) throw ShapeError("lstm_layer: rows not divisible by batch");
  if (w_input.rows() != x.cols() || w_input.cols() != 4 * hidden || w_hidden.cols() != 4 * hidden ||
      bias.cols() != 4 * hidden) {
    throw ShapeError("lstm_layer: weight shapes");
  }
  const Eigen::Index steps = x.rows() / batch;

  Matrix<S> projected = x.value() * w_input.value();
  projected.rowwise() += bias.value().row(0);

  // Cached activations: gates after nonlinearity, cell states, tanh(cell).
  Matrix<S> gates(steps * batch, 4 * hidden);
  Matrix<S> cells(steps * batch, hidden);
  Matrix<S> cell_tanh(steps * batch, hidden);
  Matrix<S> out(steps * batch, hidden);

  Matrix<S> h = Matrix<S>::Zero(batch, hidden);
  Matrix<S> c = Matrix<S>::Zero(batch, hidden);
  const Matrix<S>& whh = w_hidden.value();
  for (Eigen::Index k = 0; k < steps; ++k) {
    const Eigen::Index t = reverse ? steps - 1 - k : k;
    Matrix<S> pre = projected.middleRows(t * batch, batch);
    pre.noalias() += h * whh;
    auto gi = pre.leftCols(hidden);
    auto gf = pre.middleCols(hidden, hidden);
    auto gg = pre.middleCols(2 * hidden, hidden);
    auto go = pre.rightCols(hidden);
    gi = (S(1) / (S(1) + (-gi.array()).exp())).matrix();
    gf = (S(1) / (S(1) + (-gf.array()).exp())).matrix();
    gg = gg.array().tanh().matrix();
    go = (S(1) / (S(1) + (-go.array()).exp())).matrix();
    c = gf.cwiseProduct(c) + gi.cwiseProduct(gg);
    Matrix<S> ct = c.array().tanh().matrix();
    h = go.cwiseProduct(ct);
    gates.middleRows(t * batch, batch) = pre;
    cells.middleRows(t * batch, batch) = c;
    cell_tanh.middleRows(t * batch, batch) = ct;
    out.middleRows(t * batch, batch) = h;
  }

  const auto ix = x.id(), iwi = w_input.id(), iwh = w_hidden.id(), ib = bias.id();
  return x.graph().record(
      std::move(out), {x, w_input, w_hidden, bias},
      [=, gates = std::move(gates), cells = std::move(cells),
       cell_tanh = std::move(cell_tanh)](Graph<S>& g, std::size_t self) {
        const Matrix<S>& dout = g.grad(self);
        const Matrix<S>& hs = g.value(self);
        const Matrix<S>& whh = g.value(iwh);
        Matrix<S> dpre_all(steps * batch, 4 * hidden);
        Matrix<S> dh_next = Matrix<S>::Zero(batch, hidden);
        Matrix<S> dc_next = Matrix<S>::Zero(batch, hidden);
        Matrix<S> dwh = Matrix<S>::Zero(hidden, 4 * hidden);
        for (Eigen::Index k = steps; k-- > 0;) {
          const Eigen::Index t = reverse ? steps - 1 - k : k;
          const auto gt = gates.middleRows(t * batch, batch);
          const auto gi = gt.leftCols(hidden).array();
          const auto gf = gt.middleCols(hidden, hidden).array();
          const auto gg = gt.middleCols(2 * hidden, hidden).array();
          const auto go = gt.rightCols(hidden).array();
          const auto ct = cell_tanh.middleRows(t * batch, batch).array();
          const bool first = (k == 0);
          const Eigen::Index t_prev = reverse ? t + 1 : t - 1;

          Matrix<S> dh = dout.middleRows(t * batch, batch) + dh_next;
          Matrix<S> dc = (dh.array() * go * (S(1) - ct.square())).matrix() + dc_next;
          auto dpre = dpre_all.middleRows(t * batch, batch);
          dpre.middleCols(3 * hidden, hidden) = (dh.array() * ct * go * (S(1) - go)).matrix();
          dpre.leftCols(hidden) = (dc.array() * gg * gi * (S(1) - gi)).matrix();
          dpre.middleCols(2 * hidden, hidden) = (dc.array() * gi * (S(1) - gg.square())).matrix();
          if (first) {
            dpre.middleCols(hidden, hidden).setZero();
          } else {
            const auto c_prev = cells.middleRows(t_prev * batch, batch).array();
            dpre.middleCols(hidden, hidden) = (dc.array() * c_prev * gf * (S(1) - gf)).matrix();
            dwh.noalias() += hs.middleRows(t_prev * batch, batch).transpose() * dpre;
          }
          dc_next = (dc.array() * gf).matrix();
          dh_next.noalias() = dpre * whh.transpose();
        }
        if (g.requires_grad(ix)) g.accumulate(ix, dpre_all * g.value(iwi).transpose());
        if (g.requires_grad(iwi)) g.accumulate(iwi, g.value(ix).transpose() * dpre_all);
        if (g.requires_grad(iwh)) g.accumulate(iwh, dwh);
        if (g.requires_grad(ib)) g.accumulate(ib, dpre_all.colwise().sum());
      });
}

// Multi-head scaled dot-product attention inside independent groups.
//
// query is [groups * query_size, d]; key and value are [groups * key_size, d].
// Group g attends only to its own key/value rows. Heads split the d columns
// evenly. Returns [groups * query_size, d] (before the output projection).
template <typename S>
Var<S> grouped_attention(const Var<S>& query, const Var<S>& key, const Var<S>& value,
                         Eigen::Index query_size, Eigen::Index key_size, Eigen::Index heads) {
  const Eigen::Index d = query.cols();
  if (key.cols() != d || value.cols() != d) throw ShapeError("grouped_attention: widths differ");
  if (heads <= 0 || d % heads != 0) throw ShapeError("grouped_attention: width not divisible by heads");
  if (query_size <= 0 || key_size <= 0) throw EmptySetError("grouped_attention: empty set");
  if (query.rows() % query_size != 0) throw ShapeError("grouped_attention: query rows");
  const Eigen::Index groups = query.rows() / query_size;
  if (key.rows() != groups * key_size || value.rows() != groups * key_size) {
    throw ShapeError("grouped_attention: key/value rows");
  }
  const Eigen::Index dh = d / heads;
  const S scale = S(1) / std::sqrt(static_cast<S>(dh));

  // Attention weights, one [query_size, key_size] block per (group, head).
  Matrix<S> weights(groups * heads * query_size, key_size);
  Matrix<S> out(groups * query_size, d);
  const Matrix<S>& q = query.value();
  const Matrix<S>& k = key.value();
  const Matrix<S>& v = value.value();
  for (Eigen::Index gi = 0; gi < groups; ++gi) {
    for (Eigen::Index h = 0; h < heads; ++h) {
      const auto qb = q.block(gi * query_size, h * dh, query_size, dh);
      const auto kb = k.block(gi * key_size, h * dh, key_size, dh);
      const auto vb = v.block(gi * key_size, h * dh, key_size, dh);
      auto a = weights.middleRows((gi * heads + h) * query_size, query_size);
      a.noalias() = (qb * kb.transpose()) * scale;
      for (Eigen::Index r = 0; r < query_size; ++r) {
        auto row = a.row(r);
        row.array() -= row.maxCoeff();
        row = row.array().exp().matrix();
        row /= row.sum();
      }
      out.block(gi * query_size, h * dh, query_size, dh).noalias() = a * vb;
    }
  }

  const auto iq = query.id(), ik = key.id(), iv = value.id();
  return query.graph().record(
      std::move(out), {query, key, value},
      [=, weights = std::move(weights)](Graph<S>& g, std::size_t self) {
        const Matrix<S>& dout = g.grad(self);
        const Matrix<S>& q = g.value(iq);
        const Matrix<S>& k = g.value(ik);
        const Matrix<S>& v = g.value(iv);
        Matrix<S> dq = Matrix<S>::Zero(q.rows(), d);
        Matrix<S> dk = Matrix<S>::Zero(k.rows(), d);
        Matrix<S> dv = Matrix<S>::Zero(v.rows(), d);
        Matrix<S> da(query_size, key_size);
        for (Eigen::Index gi = 0; gi < groups; ++gi) {
          for (Eigen::Index h = 0; h < heads; ++h) {
            const auto a = weights.middleRows((gi * heads + h) * query_size, query_size);
            const auto dob = dout.block(gi * query_size, h * dh, query_size, dh);
            const auto qb = q.block(gi * query_size, h * dh, query_size, dh);
            const auto kb = k.block(gi * key_size, h * dh, key_size, dh);
            const auto vb = v.block(gi * key_size, h * dh, key_size, dh);
            dv.block(gi * key_size, h * dh, key_size, dh).noalias() += a.transpose() * dob;
            da.noalias() = dob * vb.transpose();
            // softmax backward, row by row
            for (Eigen::Index r = 0; r < query_size; ++r) {
              const S inner = da.row(r).dot(a.row(r));
              da.row(r) = (a.row(r).array() * (da.row(r).array() - inner)).matrix();
            }
            dq.block(gi * query_size, h * dh, query_size, dh).noalias() += (da * kb) * scale;
            dk.block(gi * key_size, h * dh, key_size, dh).noalias() += (da.transpose() * qb) * scale;
          }
        }
        g.accumulate(iq, dq);
        g.accumulate(ik, dk);
        g.accumulate(iv, dv);
      });
}

}  // namespace balltraj::ag
