#pragma once

#include <cmath>
#include <string>

#include "protox/core/error.hpp"
#include "protox/core/tensor.hpp"

namespace protox::pretrain {

// Hinge loss over (anchor, positive, near-negative, far-negative)
// embeddings with squared L2 distances:
//   max(|za-zp|^2 - |za-zn|^2 + m1, 0) + max(|za-zp|^2 - |zn-znn|^2 + m2, 0)
template <typename S>
S quadruplet_loss(const VecX<S>& za, const VecX<S>& zp, const VecX<S>& zn, const VecX<S>& znn,
                  S m1, S m2) {
  if (za.size() != zp.size() || za.size() != zn.size() || za.size() != znn.size())
    throw ShapeError("quadruplet_loss: embedding dimensions differ");
  const S dap = (za - zp).squaredNorm();
  const S dan = (za - zn).squaredNorm();
  const S dnn = (zn - znn).squaredNorm();
  return std::max(dap - dan + m1, S(0)) + std::max(dap - dnn + m2, S(0));
}

// Same value; accumulates d(loss)/d(embedding) into the g* vectors.
template <typename S>
S quadruplet_loss_grad(const VecX<S>& za, const VecX<S>& zp, const VecX<S>& zn, const VecX<S>& znn,
                       S m1, S m2, VecX<S>& ga, VecX<S>& gp, VecX<S>& gn, VecX<S>& gnn) {
  if (za.size() != zp.size() || za.size() != zn.size() || za.size() != znn.size())
    throw ShapeError("quadruplet_loss: embedding dimensions differ");
  const VecX<S> ap = za - zp;
  const VecX<S> an = za - zn;
  const VecX<S> nn = zn - znn;
  const S h1 = ap.squaredNorm() - an.squaredNorm() + m1;
  const S h2 = ap.squaredNorm() - nn.squaredNorm() + m2;
  S loss = 0;
  if (h1 > S(0)) {
    loss += h1;
    ga += S(2) * (ap - an);
    gp -= S(2) * ap;
    gn += S(2) * an;
  }
  if (h2 > S(0)) {
    loss += h2;
    ga += S(2) * ap;
    gp -= S(2) * ap;
    gn -= S(2) * nn;
    gnn += S(2) * nn;
  }
  return loss;
}

// KL(N(mean, exp(logvar)) || N(0, I)), summed over dimensions.
template <typename S>
S gaussian_kl(const Tensor<S>& mean, const Tensor<S>& logvar) {
  if (!mean.same_shape(logvar)) throw ShapeError("gaussian_kl: mean/logvar shapes differ");
  S kl = 0;
  for (std::int64_t i = 0; i < mean.numel(); ++i) {
    const S m = mean[i], lv = logvar[i];
    if (!std::isfinite(static_cast<double>(m)) || !std::isfinite(static_cast<double>(lv)))
      throw NumericError("gaussian_kl: non-finite posterior parameters");
    kl += S(-0.5) * (S(1) + lv - m * m - std::exp(lv));
  }
  return kl;
}

template <typename S>
void gaussian_kl_grad(const Tensor<S>& mean, const Tensor<S>& logvar, S scale, Tensor<S>& dmean,
                      Tensor<S>& dlogvar) {
  for (std::int64_t i = 0; i < mean.numel(); ++i) {
    dmean[i] += scale * mean[i];
    dlogvar[i] += scale * S(0.5) * (std::exp(logvar[i]) - S(1));
  }
}

// Mean squared error over pixels scaled to [0,1].
template <typename S>
S recon_mse(const Tensor<S>& x, const Tensor<S>& recon) {
  if (!x.same_shape(recon)) throw ShapeError("recon_mse: reconstruction shape differs from input");
  S acc = 0;
  for (std::int64_t i = 0; i < x.numel(); ++i) {
    const S d = recon[i] - x[i];
    acc += d * d;
  }
  return acc / static_cast<S>(x.numel());
}

template <typename S>
void recon_mse_grad(const Tensor<S>& x, const Tensor<S>& recon, S scale, Tensor<S>& drecon) {
  const S c = scale * S(2) / static_cast<S>(x.numel());
  for (std::int64_t i = 0; i < x.numel(); ++i) drecon[i] += c * (recon[i] - x[i]);
}

// Reconstruction error plus (weighted) KL against the standard normal prior.
template <typename S>
S vae_loss(const Tensor<S>& state, const Tensor<S>& recon, const Tensor<S>& mean,
           const Tensor<S>& logvar, S kl_weight = S(1)) {
  return recon_mse(state, recon) + kl_weight * gaussian_kl(mean, logvar);
}

}  // namespace protox::pretrain
