#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "balltraj/autograd/graph.hpp"

namespace balltraj::ag {

namespace detail {

template <typename S>
void require_same_shape(const Var<S>& a, const Var<S>& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()));
  }
}

}  // namespace detail

template <typename S>
Var<S> add(const Var<S>& a, const Var<S>& b) {
  detail::require_same_shape(a, b, "add");
  const auto ia = a.id(), ib = b.id();
  return a.graph().record(a.value() + b.value(), {a, b}, [ia, ib](Graph<S>& g, std::size_t self) {
    g.accumulate(ia, g.grad(self));
    g.accumulate(ib, g.grad(self));
  });
}

template <typename S>
Var<S> sub(const Var<S>& a, const Var<S>& b) {
  detail::require_same_shape(a, b, "sub");
  const auto ia = a.id(), ib = b.id();
  return a.graph().record(a.value() - b.value(), {a, b}, [ia, ib](Graph<S>& g, std::size_t self) {
    g.accumulate(ia, g.grad(self));
    g.accumulate(ib, -g.grad(self));
  });
}

// Element-wise product.
template <typename S>
Var<S> mul(const Var<S>& a, const Var<S>& b) {
  detail::require_same_shape(a, b, "mul");
  const auto ia = a.id(), ib = b.id();
  return a.graph().record(a.value().cwiseProduct(b.value()), {a, b},
                          [ia, ib](Graph<S>& g, std::size_t self) {
                            g.accumulate(ia, g.grad(self).cwiseProduct(g.value(ib)));
                            g.accumulate(ib, g.grad(self).cwiseProduct(g.value(ia)));
                          });
}

template <typename S>
Var<S> scale(const Var<S>& a, S factor) {
  const auto ia = a.id();
  return a.graph().record(a.value() * factor, {a}, [ia, factor](Graph<S>& g, std::size_t self) {
    g.accumulate(ia, g.grad(self) * factor);
  });
}

template <typename S>
Var<S> add_scalar(const Var<S>& a, S offset) {
  const auto ia = a.id();
  Matrix<S> out = a.value().array() + offset;
  return a.graph().record(std::move(out), {a}, [ia](Graph<S>& g, std::size_t self) {
    g.accumulate(ia, g.grad(self));
  });
}

template <typename S>
Var<S> matmul(const Var<S>& a, const Var<S>& b) {
  if (a.cols() != b.rows()) throw ShapeError("matmul: inner dimensions differ");
  const auto ia = a.id(), ib = b.id();
  Matrix<S> out = a.value() * b.value();
  return a.graph().record(std::move(out), {a, b}, [ia, ib](Graph<S>& g, std::size_t self) {
    const Matrix<S>& d = g.grad(self);
    if (g.requires_grad(ia)) g.accumulate(ia, d * g.value(ib).transpose());
    if (g.requires_grad(ib)) g.accumulate(ib, g.value(ia).transpose() * d);
  });
}

// x [N, d] + bias [1, d] broadcast over rows.
template <typename S>
Var<S> add_row(const Var<S>& x, const Var<S>& bias) {
  if (bias.rows() != 1 || bias.cols() != x.cols()) throw ShapeError("add_row: bias shape");
  const auto ix = x.id(), ib = bias.id();
  Matrix<S> out = x.value().rowwise() + bias.value().row(0);
  return x.graph().record(std::move(out), {x, bias}, [ix, ib](Graph<S>& g, std::size_t self) {
    g.accumulate(ix, g.grad(self));
    if (g.requires_grad(ib)) g.accumulate(ib, g.grad(self).colwise().sum());
  });
}

// x [N, d] * column [N, 1] broadcast over columns.
template <typename S>
Var<S> mul_col(const Var<S>& x, const Var<S>& column) {
  if (column.cols() != 1 || column.rows() != x.rows()) throw ShapeError("mul_col: shape");
  const auto ix = x.id(), ic = column.id();
  Matrix<S> out = x.value().array().colwise() * column.value().col(0).array();
  return x.graph().record(std::move(out), {x, column}, [ix, ic](Graph<S>& g, std::size_t self) {
    const Matrix<S>& d = g.grad(self);
    if (g.requires_grad(ix)) {
      Matrix<S> dx = d.array().colwise() * g.value(ic).col(0).array();
      g.accumulate(ix, dx);
    }
    if (g.requires_grad(ic)) {
      Matrix<S> dc = d.cwiseProduct(g.value(ix)).rowwise().sum();
      g.accumulate(ic, dc);
    }
  });
}

namespace detail {

template <typename S, typename F, typename DF>
Var<S> unary(const Var<S>& a, F f, DF df_from_out_and_in) {
  const auto ia = a.id();
  Matrix<S> out = a.value().unaryExpr(f);
  return a.graph().record(std::move(out), {a}, [ia, df_from_out_and_in](Graph<S>& g, std::size_t self) {
    const Matrix<S>& y = g.value(self);
    const Matrix<S>& x = g.value(ia);
    Matrix<S> d = g.grad(self);
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      d.data()[i] *= df_from_out_and_in(y.data()[i], x.data()[i]);
    }
    g.accumulate(ia, d);
  });
}

}  // namespace detail

template <typename S>
Var<S> sigmoid(const Var<S>& a) {
  return detail::unary(
      a, [](S x) { return S(1) / (S(1) + std::exp(-x)); }, [](S y, S) { return y * (S(1) - y); });
}

template <typename S>
Var<S> tanh(const Var<S>& a) {
  return detail::unary(
      a, [](S x) { return std::tanh(x); }, [](S y, S) { return S(1) - y * y; });
}

template <typename S>
Var<S> relu(const Var<S>& a) {
  return detail::unary(
      a, [](S x) { return x > S(0) ? x : S(0); }, [](S, S x) { return x > S(0) ? S(1) : S(0); });
}

template <typename S>
Var<S> exp(const Var<S>& a) {
  return detail::unary(
      a, [](S x) { return std::exp(x); }, [](S y, S) { return y; });
}

template <typename S>
Var<S> log(const Var<S>& a) {
  return detail::unary(
      a, [](S x) { return std::log(x); }, [](S, S x) { return S(1) / x; });
}

template <typename S>
Var<S> square(const Var<S>& a) {
  return detail::unary(
      a, [](S x) { return x * x; }, [](S, S x) { return S(2) * x; });
}

template <typename S>
Var<S> softplus(const Var<S>& a) {
  return detail::unary(
      a,
      [](S x) { return x > S(20) ? x : std::log1p(std::exp(x)); },
      [](S, S x) { return S(1) / (S(1) + std::exp(-x)); });
}

template <typename S>
Var<S> sum(const Var<S>& a) {
  const auto ia = a.id();
  Matrix<S> out(1, 1);
  out(0, 0) = a.value().sum();
  return a.graph().record(std::move(out), {a}, [ia](Graph<S>& g, std::size_t self) {
    const S d = g.grad(self)(0, 0);
    Matrix<S> full = Matrix<S>::Constant(g.value(ia).rows(), g.value(ia).cols(), d);
    g.accumulate(ia, full);
  });
}

template <typename S>
Var<S> mean(const Var<S>& a) {
  return scale(sum(a), S(1) / static_cast<S>(a.value().size()));
}

// Row-wise sum: [N, d] -> [N, 1].
template <typename S>
Var<S> row_sum(const Var<S>& a) {
  const auto ia = a.id();
  Matrix<S> out = a.value().rowwise().sum();
  return a.graph().record(std::move(out), {a}, [ia](Graph<S>& g, std::size_t self) {
    const Eigen::Index cols = g.value(ia).cols();
    Matrix<S> d = g.grad(self).col(0).replicate(1, cols);
    g.accumulate(ia, d);
  });
}

template <typename S>
Var<S> softmax_rows(const Var<S>& a) {
  const auto ia = a.id();
  Matrix<S> out = a.value();
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    row.array() -= row.maxCoeff();
    row = row.array().exp().matrix();
    row /= row.sum();
  }
  return a.graph().record(std::move(out), {a}, [ia](Graph<S>& g, std::size_t self) {
    const Matrix<S>& y = g.value(self);
    const Matrix<S>& d = g.grad(self);
    Matrix<S> dx = y.cwiseProduct(d);
    const Matrix<S> inner = dx.rowwise().sum();
    dx -= (y.array().colwise() * inner.col(0).array()).matrix();
    g.accumulate(ia, dx);
  });
}

template <typename S>
Var<S> log_softmax_rows(const Var<S>& a) {
  const auto ia = a.id();
  Matrix<S> out = a.value();
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    const S m = row.maxCoeff();
    const S lse = m + std::log((row.array() - m).exp().sum());
    row.array() -= lse;
  }
  return a.graph().record(std::move(out), {a}, [ia](Graph<S>& g, std::size_t self) {
    const Matrix<S>& y = g.value(self);
    const Matrix<S>& d = g.grad(self);
    const Matrix<S> total = d.rowwise().sum();
    Matrix<S> dx = d - (y.array().exp().colwise() * total.col(0).array()).matrix();
    g.accumulate(ia, dx);
  });
}

// Selects one entry per row: out[r] = a[r, index[r]].
template <typename S>
Var<S> pick(const Var<S>& a, const std::vector<int>& index) {
  if (static_cast<Eigen::Index>(index.size()) != a.rows()) throw ShapeError("pick: index size");
  const auto ia = a.id();
  Matrix<S> out(a.rows(), 1);
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    const int c = index[static_cast<std::size_t>(r)];
    if (c < 0 || c >= a.cols()) throw LabelError("pick: class index out of range");
    out(r, 0) = a.value()(r, c);
  }
  return a.graph().record(std::move(out), {a}, [ia, index](Graph<S>& g, std::size_t self) {
    Matrix<S>& slot = g.grad_slot(ia);
    const Matrix<S>& d = g.grad(self);
    for (Eigen::Index r = 0; r < d.rows(); ++r) slot(r, index[static_cast<std::size_t>(r)]) += d(r, 0);
  });
}

template <typename S>
Var<S> concat_cols(const std::vector<Var<S>>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const Eigen::Index rows = parts.front().rows();
  Eigen::Index cols = 0;
  for (const auto& p : parts) {
    if (p.rows() != rows) throw ShapeError("concat_cols: row mismatch");
    cols += p.cols();
  }
  Matrix<S> out(rows, cols);
  std::vector<std::size_t> ids;
  std::vector<Eigen::Index> offsets;
  Eigen::Index c = 0;
  for (const auto& p : parts) {
    out.middleCols(c, p.cols()) = p.value();
    ids.push_back(p.id());
    offsets.push_back(c);
    c += p.cols();
  }
  return parts.front().graph().record(
      std::move(out), parts, [ids, offsets](Graph<S>& g, std::size_t self) {
        const Matrix<S>& d = g.grad(self);
        for (std::size_t i = 0; i < ids.size(); ++i) {
          if (!g.requires_grad(ids[i])) continue;
          const Eigen::Index w = g.value(ids[i]).cols();
          Matrix<S> part = d.middleCols(offsets[i], w);
          g.accumulate(ids[i], part);
        }
      });
}

template <typename S>
Var<S> concat_rows(const std::vector<Var<S>>& parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  const Eigen::Index cols = parts.front().cols();
  Eigen::Index rows = 0;
  for (const auto& p : parts) {
    if (p.cols() != cols) throw ShapeError("concat_rows: column mismatch");
    rows += p.rows();
  }
  Matrix<S> out(rows, cols);
  std::vector<std::size_t> ids;
  std::vector<Eigen::Index> offsets;
  Eigen::Index r = 0;
  for (const auto& p : parts) {
    out.middleRows(r, p.rows()) = p.value();
    ids.push_back(p.id());
    offsets.push_back(r);
    r += p.rows();
  }
  return parts.front().graph().record(
      std::move(out), parts, [ids, offsets](Graph<S>& g, std::size_t self) {
        const Matrix<S>& d = g.grad(self);
        for (std::size_t i = 0; i < ids.size(); ++i) {
          if (!g.requires_grad(ids[i])) continue;
          const Eigen::Index h = g.value(ids[i]).rows();
          Matrix<S> part = d.middleRows(offsets[i], h);
          g.accumulate(ids[i], part);
        }
      });
}

template <typename S>
Var<S> slice_cols(const Var<S>& a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || start + count > a.cols()) throw ShapeError("slice_cols: out of range");
  const auto ia = a.id();
  Matrix<S> out = a.value().middleCols(start, count);
  return a.graph().record(std::move(out), {a}, [ia, start, count](Graph<S>& g, std::size_t self) {
    g.grad_slot(ia).middleCols(start, count) += g.grad(self);
  });
}

template <typename S>
Var<S> slice_rows(const Var<S>& a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || start + count > a.rows()) throw ShapeError("slice_rows: out of range");
  const auto ia = a.id();
  Matrix<S> out = a.value().middleRows(start, count);
  return a.graph().record(std::move(out), {a}, [ia, start, count](Graph<S>& g, std::size_t self) {
    g.grad_slot(ia).middleRows(start, count) += g.grad(self);
  });
}

// out[i] = a[index[i]]; gradient scatters back with accumulation.
template <typename S>
Var<S> gather_rows(const Var<S>& a, std::vector<int> index) {
  const auto ia = a.id();
  Matrix<S> out(static_cast<Eigen::Index>(index.size()), a.cols());
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] < 0 || index[i] >= a.rows()) throw ShapeError("gather_rows: index out of range");
    out.row(static_cast<Eigen::Index>(i)) = a.value().row(index[i]);
  }
  return a.graph().record(std::move(out), {a},
                          [ia, index = std::move(index)](Graph<S>& g, std::size_t self) {
                            Matrix<S>& slot = g.grad_slot(ia);
                            const Matrix<S>& d = g.grad(self);
                            for (std::size_t i = 0; i < index.size(); ++i) {
                              slot.row(index[i]) += d.row(static_cast<Eigen::Index>(i));
                            }
                          });
}

// Row-major reinterpretation; element order is preserved.
template <typename S>
Var<S> reshape(const Var<S>& a, Eigen::Index rows, Eigen::Index cols) {
  if (rows * cols != a.value().size()) throw ShapeError("reshape: size mismatch");
  const auto ia = a.id();
  Matrix<S> out = Eigen::Map<const Matrix<S>>(a.value().data(), rows, cols);
  return a.graph().record(std::move(out), {a}, [ia](Graph<S>& g, std::size_t self) {
    const Matrix<S>& src = g.value(ia);
    Matrix<S> d = Eigen::Map<const Matrix<S>>(g.grad(self).data(), src.rows(), src.cols());
    g.accumulate(ia, d);
  });
}

// Inverted dropout; identity outside training.
template <typename S>
Var<S> dropout(const Var<S>& a, double p) {
  Graph<S>& g = a.graph();
  if (!g.training() || p <= 0.0) return a;
  std::bernoulli_distribution keep(1.0 - p);
  Matrix<S> mask(a.rows(), a.cols());
  const S scale_kept = S(1.0 / (1.0 - p));
  for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = keep(g.rng()) ? scale_kept : S(0);
  return mul(a, g.constant(std::move(mask)));
}

// Per-row normalisation followed by an affine map.
template <typename S>
Var<S> layer_norm(const Var<S>& x, const Var<S>& gain, const Var<S>& bias, S eps = S(1e-5)) {
  const Eigen::Index n = x.rows(), d = x.cols();
  if (gain.cols() != d || bias.cols() != d) throw ShapeError("layer_norm: parameter width");
  Matrix<S> xhat(n, d);
  Matrix<S> inv_std(n, 1);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto row = x.value().row(r);
    const S mu = row.mean();
    const S var = (row.array() - mu).square().mean();
    inv_std(r, 0) = S(1) / std::sqrt(var + eps);
    xhat.row(r) = (row.array() - mu) * inv_std(r, 0);
  }
  Matrix<S> out = (xhat.array().rowwise() * gain.value().row(0).array()).rowwise() +
                  bias.value().row(0).array();
  const auto ix = x.id(), ig = gain.id(), ib = bias.id();
  return x.graph().record(
      std::move(out), {x, gain, bias},
      [ix, ig, ib, xhat = std::move(xhat), inv_std = std::move(inv_std)](Graph<S>& g,
                                                                          std::size_t self) {
        const Matrix<S>& dy = g.grad(self);
        if (g.requires_grad(ig)) g.accumulate(ig, dy.cwiseProduct(xhat).colwise().sum());
        if (g.requires_grad(ib)) g.accumulate(ib, dy.colwise().sum());
        if (g.requires_grad(ix)) {
          const Matrix<S> dxhat = dy.array().rowwise() * g.value(ig).row(0).array();
          const S inv_d = S(1) / static_cast<S>(dxhat.cols());
          Matrix<S> dx(dxhat.rows(), dxhat.cols());
          for (Eigen::Index r = 0; r < dxhat.rows(); ++r) {
            const S m1 = dxhat.row(r).mean();
            const S m2 = dxhat.row(r).cwiseProduct(xhat.row(r)).sum() * inv_d;
            dx.row(r) = (dxhat.row(r).array() - m1 - xhat.row(r).array() * m2) * inv_std(r, 0);
          }
          g.accumulate(ix, dx);
        }
      });
}

}  // namespace balltraj::ag
