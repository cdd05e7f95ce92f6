#pragma once

#include <cmath>
#include <vector>

#include "protox/core/error.hpp"
#include "protox/core/tensor.hpp"

namespace protox::nn {

// Adaptive-moment gradient descent over a fixed list of parameter tensors.
template <typename S>
class Adam {
 public:
  explicit Adam(double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(std::vector<Tensor<S>*> params, const std::vector<Tensor<S>>& grads) {
    if (params.size() != grads.size()) throw ShapeError("adam: parameter/gradient count mismatch");
    if (m_.empty()) {
      for (auto* p : params) {
        m_.emplace_back(p->shape());
        v_.emplace_back(p->shape());
      }
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    for (std::size_t i = 0; i < params.size(); ++i) {
      Tensor<S>& p = *params[i];
      const Tensor<S>& g = grads[i];
      if (!p.same_shape(g)) throw ShapeError("adam: gradient shape mismatch");
      Tensor<S>& m = m_[i];
      Tensor<S>& v = v_[i];
      for (std::int64_t j = 0; j < p.numel(); ++j) {
        const double gj = static_cast<double>(g[j]);
        const double mj = beta1_ * m[j] + (1.0 - beta1_) * gj;
        const double vj = beta2_ * v[j] + (1.0 - beta2_) * gj * gj;
        m[j] = static_cast<S>(mj);
        v[j] = static_cast<S>(vj);
        p[j] -= static_cast<S>(lr_ * (mj / bc1) / (std::sqrt(vj / bc2) + eps_));
      }
    }
  }

  double learning_rate() const { return lr_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<Tensor<S>> m_, v_;
};

// Same update rule over Eigen matrices (used by the prototype head, whose
// parameters live as dense matrices rather than tensors).
template <typename S>
class AdamMats {
 public:
  explicit AdamMats(double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(std::vector<RowMatX<S>*> params, const std::vector<const RowMatX<S>*>& grads) {
    if (params.size() != grads.size()) throw ShapeError("adam: parameter/gradient count mismatch");
    if (m_.empty()) {
      for (auto* p : params) {
        m_.push_back(RowMatX<S>::Zero(p->rows(), p->cols()));
        v_.push_back(RowMatX<S>::Zero(p->rows(), p->cols()));
      }
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    for (std::size_t i = 0; i < params.size(); ++i) {
      RowMatX<S>& p = *params[i];
      const RowMatX<S>& gm = *grads[i];
      if (p.rows() != gm.rows() || p.cols() != gm.cols())
        throw ShapeError("adam: gradient shape mismatch");
      auto& m = m_[i];
      auto& v = v_[i];
      for (Eigen::Index j = 0; j < p.size(); ++j) {
        const double gj = static_cast<double>(gm(j));
        const double mj = beta1_ * m(j) + (1.0 - beta1_) * gj;
        const double vj = beta2_ * v(j) + (1.0 - beta2_) * gj * gj;
        m(j) = static_cast<S>(mj);
        v(j) = static_cast<S>(vj);
        p(j) -= static_cast<S>(lr_ * (mj / bc1) / (std::sqrt(vj / bc2) + eps_));
      }
    }
  }

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<RowMatX<S>> m_, v_;
};

}  // namespace protox::nn
