#pragma once

// Tape-based reverse-mode differentiation over dense row-major matrices.
//
// A Graph records every operation performed during one forward pass. Each
// node owns its value and (after backward) its gradient. Parameters live
// outside the graph and receive accumulated gradients when backward() runs.

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <initializer_list>
#include <random>
#include <string>
#include <unordered_map>
#include <utility>

#include "balltraj/error.hpp"

namespace balltraj {

template <typename S>
using Matrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename S>
using RowVector = Eigen::Matrix<S, 1, Eigen::Dynamic>;

namespace ag {

template <typename S>
struct Parameter {
  std::string name;
  Matrix<S> value;
  Matrix<S> grad;

  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

template <typename S>
class Graph;

template <typename S>
class Var {
 public:
  Var() = default;
  Var(Graph<S>* graph, std::size_t id) : graph_(graph), id_(id) {}

  bool valid() const noexcept { return graph_ != nullptr; }
  Graph<S>& graph() const { return *graph_; }
  std::size_t id() const noexcept { return id_; }

  const Matrix<S>& value() const { return graph_->value(id_); }
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  S scalar() const { return value()(0, 0); }
  const Matrix<S>& grad() const { return graph_->grad(id_); }

 private:
  Graph<S>* graph_ = nullptr;
  std::size_t id_ = 0;
};

template <typename S>
class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, std::size_t self)>;

  explicit Graph(bool training = false, std::uint64_t seed = 0)
      : training_(training), rng_(seed) {}

  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  bool training() const noexcept { return training_; }
  std::mt19937_64& rng() noexcept { return rng_; }
  std::size_t size() const noexcept { return nodes_.size(); }

  Var<S> constant(Matrix<S> value) {
    nodes_.push_back(Node{std::move(value), {}, false, nullptr, {}});
    return Var<S>(this, nodes_.size() - 1);
  }

  // A leaf that receives gradients but is not bound to a Parameter.
  Var<S> variable(Matrix<S> value) {
    nodes_.push_back(Node{std::move(value), {}, true, nullptr, {}});
    return Var<S>(this, nodes_.size() - 1);
  }

  Var<S> parameter(Parameter<S>& p) {
    auto it = param_nodes_.find(&p);
    if (it != param_nodes_.end()) return Var<S>(this, it->second);
    nodes_.push_back(Node{p.value, {}, true, &p, {}});
    const std::size_t id = nodes_.size() - 1;
    param_nodes_.emplace(&p, id);
    return Var<S>(this, id);
  }

  Var<S> record(Matrix<S> value, std::initializer_list<Var<S>> parents,
                BackwardFn backward) {
    bool needs = false;
    for (const auto& p : parents) needs = needs || nodes_[p.id()].requires_grad;
    nodes_.push_back(
        Node{std::move(value), {}, needs, nullptr, needs ? std::move(backward) : BackwardFn{}});
    return Var<S>(this, nodes_.size() - 1);
  }

  Var<S> record(Matrix<S> value, const std::vector<Var<S>>& parents, BackwardFn backward) {
    bool needs = false;
    for (const auto& p : parents) needs = needs || nodes_[p.id()].requires_grad;
    nodes_.push_back(
        Node{std::move(value), {}, needs, nullptr, needs ? std::move(backward) : BackwardFn{}});
    return Var<S>(this, nodes_.size() - 1);
  }

  const Matrix<S>& value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }

  // Gradient of node `id`; empty if nothing flowed into it.
  const Matrix<S>& grad(std::size_t id) const { return nodes_[id].grad; }

  template <typename Expr>
  void accumulate(std::size_t id, const Expr& contribution) {
    Node& n = nodes_[id];
    if (!n.requires_grad) return;
    if (n.grad.size() == 0) {
      n.grad = contribution;
    } else {
      n.grad += contribution;
    }
  }

  // Mutable gradient slot, zero-initialised on first access.
  Matrix<S>& grad_slot(std::size_t id) {
    Node& n = nodes_[id];
    if (n.grad.size() == 0) n.grad.setZero(n.value.rows(), n.value.cols());
    return n.grad;
  }

  // Runs reverse accumulation from a 1x1 node and adds parameter gradients
  // into Parameter::grad (which is allocated if empty).
  void backward(const Var<S>& loss) {
    if (loss.rows() != 1 || loss.cols() != 1) {
      throw ShapeError("backward() requires a scalar loss");
    }
    for (auto& n : nodes_) n.grad.resize(0, 0);
    nodes_[loss.id()].grad = Matrix<S>::Ones(1, 1);
    for (std::size_t i = loss.id() + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (n.grad.size() == 0) continue;
      if (n.backward) n.backward(*this, i);
      if (n.param != nullptr) {
        if (n.param->grad.size() == 0) {
          n.param->grad = n.grad;
        } else {
          n.param->grad += n.grad;
        }
      }
    }
  }

 private:
  struct Node {
    Matrix<S> value;
    Matrix<S> grad;
    bool requires_grad = false;
    Parameter<S>* param = nullptr;
    BackwardFn backward;
  };

  bool training_;
  std::mt19937_64 rng_;
  std::deque<Node> nodes_;
  std::unordered_map<const Parameter<S>*, std::size_t> param_nodes_;
};

}  // namespace ag
}  // namespace balltraj
