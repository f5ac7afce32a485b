#pragma once

#include <cmath>
#include <vector>

#include "balltraj/nn/parameters.hpp"

namespace balltraj::nn {

struct AdamOptions {
  double learning_rate = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double clip_norm = 0.0;  // global gradient norm clip; 0 disables
};

template <typename S>
class Adam {
 public:
  Adam(ParameterStore<S>& store, AdamOptions options) : store_(store), options_(options) {
    for (const auto& p : store.all()) {
      m_.push_back(Matrix<S>::Zero(p->value.rows(), p->value.cols()));
      v_.push_back(Matrix<S>::Zero(p->value.rows(), p->value.cols()));
    }
  }

  // Global L2 norm of all current gradients.
  double gradient_norm() const {
    double total = 0.0;
    for (const auto& p : store_.all()) {
      if (p->grad.size() != 0) total += static_cast<double>(p->grad.squaredNorm());
    }
    return std::sqrt(total);
  }

  void step() {
    ++t_;
    double factor = 1.0;
    if (options_.clip_norm > 0.0) {
      const double norm = gradient_norm();
      if (norm > options_.clip_norm) factor = options_.clip_norm / norm;
    }
    const double bc1 = 1.0 - std::pow(options_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(options_.beta2, static_cast<double>(t_));
    const S lr = static_cast<S>(options_.learning_rate * std::sqrt(bc2) / bc1);
    const S b1 = static_cast<S>(options_.beta1), b2 = static_cast<S>(options_.beta2);
    const S eps = static_cast<S>(options_.epsilon * std::sqrt(bc2));
    const auto& params = store_.all();
    for (std::size_t i = 0; i < params.size(); ++i) {
      Parameter<S>& p = *params[i];
      if (p.grad.size() == 0) continue;
      const Matrix<S> grad = p.grad * static_cast<S>(factor);
      m_[i] = b1 * m_[i] + (S(1) - b1) * grad;
      v_[i] = b2 * v_[i] + (S(1) - b2) * grad.cwiseProduct(grad);
      p.value.array() -= lr * m_[i].array() / (v_[i].array().sqrt() + eps);
    }
  }

  void set_learning_rate(double lr) { options_.learning_rate = lr; }

 private:
  ParameterStore<S>& store_;
  AdamOptions options_;
  std::vector<Matrix<S>> m_, v_;
  long t_ = 0;
};

}  // namespace balltraj::nn
