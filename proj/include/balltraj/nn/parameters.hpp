#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "balltraj/autograd/graph.hpp"

namespace balltraj::nn {

using ag::Parameter;

// Owns every trainable tensor of a model under a unique dotted name.
template <typename S>
class ParameterStore {
 public:
  explicit ParameterStore(std::uint64_t seed = 0) : rng_(seed) {}

  ParameterStore(const ParameterStore&) = delete;
  ParameterStore& operator=(const ParameterStore&) = delete;

  Parameter<S>& uniform(const std::string& name, Eigen::Index rows, Eigen::Index cols, double bound) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    Matrix<S> v(rows, cols);
    for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = static_cast<S>(dist(rng_));
    return add(name, std::move(v));
  }

  Parameter<S>& constant(const std::string& name, Eigen::Index rows, Eigen::Index cols, S value) {
    return add(name, Matrix<S>::Constant(rows, cols, value));
  }

  Parameter<S>& add(const std::string& name, Matrix<S> value) {
    if (index_.count(name) != 0) throw ConfigError("duplicate parameter name: " + name);
    auto p = std::make_unique<Parameter<S>>();
    p->name = name;
    p->value = std::move(value);
    index_.emplace(name, params_.size());
    params_.push_back(std::move(p));
    return *params_.back();
  }

  Parameter<S>* find(const std::string& name) {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : params_[it->second].get();
  }

  const std::vector<std::unique_ptr<Parameter<S>>>& all() const { return params_; }

  std::size_t count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += static_cast<std::size_t>(p->value.size());
    return n;
  }

  void zero_grad() {
    for (auto& p : params_) p->zero_grad();
  }

  std::vector<Matrix<S>> snapshot() const {
    std::vector<Matrix<S>> out;
    out.reserve(params_.size());
    for (const auto& p : params_) out.push_back(p->value);
    return out;
  }

  void restore(const std::vector<Matrix<S>>& values) {
    if (values.size() != params_.size()) throw ShapeError("restore: parameter count differs");
    for (std::size_t i = 0; i < values.size(); ++i) params_[i]->value = values[i];
  }

 private:
  std::mt19937_64 rng_;
  std::vector<std::unique_ptr<Parameter<S>>> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace balltraj::nn
