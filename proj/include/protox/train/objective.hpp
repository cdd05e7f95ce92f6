#pragma once

#include <cmath>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "protox/core/error.hpp"
#include "protox/core/tensor.hpp"
#include "protox/model/head.hpp"

namespace protox::train {

struct ObjectiveWeights {
  double lambda_sep = 0.1;
  double lambda_clst = 0.1;
  double lambda_rep = 0.01;
  double lambda_iso = 1.0;

  void validate() const {
    if (lambda_sep < 0 || lambda_clst < 0 || lambda_rep < 0 || lambda_iso < 0)
      throw ConfigError("objective weights must be >= 0");
  }
};

// A minibatch of frozen encodings with expert action labels.
template <typename S>
struct EncodedBatch {
  RowMatX<S> F;             // B x d
  std::vector<int> labels;  // size B
};

template <typename S>
struct ObjectiveComponents {
  S ce = 0, sep = 0, clst = 0, rep = 0, iso = 0, total = 0;
};

template <typename S>
struct HeadGrads {
  RowMatX<S> dA, dP, dW;

  static HeadGrads zeros(const model::ProtoXModel<S>& m) {
    HeadGrads g;
    g.dA = RowMatX<S>::Zero(m.iso.A.rows(), m.iso.A.cols());
    g.dP = RowMatX<S>::Zero(m.protos.P.rows(), m.protos.P.cols());
    g.dW = RowMatX<S>::Zero(m.head.W.rows(), m.head.W.cols());
    return g;
  }
};

namespace detail {

// Shared forward pass: post-isometry encodings, distances, similarities,
// evidence scores.
template <typename S>
struct HeadForward {
  RowMatX<S> Z;     // B x d
  RowMatX<S> dist;  // B x M, plain L2
  RowMatX<S> sim;   // exp(-beta * dist)
  RowMatX<S> E;     // B x |A|
};

template <typename S>
HeadForward<S> head_forward(const model::ProtoXModel<S>& m, const RowMatX<S>& F) {
  if (F.cols() != m.iso.A.cols()) throw ShapeError("objective: encoding dimension mismatch");
  HeadForward<S> f;
  f.Z.noalias() = F * m.iso.A.transpose();
  const Eigen::Index B = F.rows(), M = m.protos.count();
  f.dist.resize(B, M);
  for (Eigen::Index i = 0; i < B; ++i)
    for (Eigen::Index mm = 0; mm < M; ++mm)
      f.dist(i, mm) = (f.Z.row(i) - m.protos.P.row(mm)).norm();
  f.sim = (-m.protos.beta * f.dist.array()).exp();
  f.E.noalias() = f.sim * m.head.W;
  return f;
}

template <typename S>
void check_labels(const EncodedBatch<S>& batch, int n_actions) {
  if (batch.F.rows() == 0 || batch.labels.empty()) throw DataError("objective: empty batch");
  if (static_cast<Eigen::Index>(batch.labels.size()) != batch.F.rows())
    throw ShapeError("objective: label count does not match batch rows");
  for (int y : batch.labels)
    if (y < 0 || y >= n_actions)
      throw DataError("objective: unknown action label " + std::to_string(y));
}

template <typename S>
void check_multi_action(const model::ProtoXModel<S>& m) {
  std::set<int> tags(m.protos.action_tags.begin(), m.protos.action_tags.end());
  if (m.n_actions() < 2 || tags.size() < 2)
    throw ConfigError("objective: separation needs prototypes for at least two actions");
}

}  // namespace detail

// Mean softmax cross-entropy of the evidence scores against expert labels.
template <typename S>
S ce_term(const EncodedBatch<S>& batch, const model::ProtoXModel<S>& m) {
  detail::check_labels(batch, m.n_actions());
  const auto f = detail::head_forward(m, batch.F);
  S acc = 0;
  for (Eigen::Index i = 0; i < f.E.rows(); ++i) {
    const S mx = f.E.row(i).maxCoeff();
    S lse = 0;
    for (Eigen::Index a = 0; a < f.E.cols(); ++a) lse += std::exp(f.E(i, a) - mx);
    acc += (mx + std::log(lse)) - f.E(i, batch.labels[static_cast<std::size_t>(i)]);
  }
  return acc / static_cast<S>(f.E.rows());
}

// -(1/n) sum_i min over wrong-action prototypes of |A f(x_i) - p|.
template <typename S>
S sep_term(const EncodedBatch<S>& batch, const model::ProtoXModel<S>& m) {
  detail::check_labels(batch, m.n_actions());
  detail::check_multi_action(m);
  const auto f = detail::head_forward(m, batch.F);
  S acc = 0;
  for (Eigen::Index i = 0; i < f.dist.rows(); ++i) {
    S best = std::numeric_limits<S>::infinity();
    for (Eigen::Index mm = 0; mm < f.dist.cols(); ++mm)
      if (m.protos.action_tags[static_cast<std::size_t>(mm)] != batch.labels[static_cast<std::size_t>(i)])
        best = std::min(best, f.dist(i, mm));
    acc += best;
  }
  return -acc / static_cast<S>(f.dist.rows());
}

// (1/n) sum_i min over same-action prototypes of |A f(x_i) - p|.
template <typename S>
S clst_term(const EncodedBatch<S>& batch, const model::ProtoXModel<S>& m) {
  detail::check_labels(batch, m.n_actions());
  const auto f = detail::head_forward(m, batch.F);
  S acc = 0;
  for (Eigen::Index i = 0; i < f.dist.rows(); ++i) {
    S best = std::numeric_limits<S>::infinity();
    bool found = false;
    for (Eigen::Index mm = 0; mm < f.dist.cols(); ++mm)
      if (m.protos.action_tags[static_cast<std::size_t>(mm)] == batch.labels[static_cast<std::size_t>(i)]) {
        best = std::min(best, f.dist(i, mm));
        found = true;
      }
    if (!found)
      throw ConfigError("clst_term: no prototype tagged with action " +
                        std::to_string(batch.labels[static_cast<std::size_t>(i)]));
    acc += best;
  }
  return acc / static_cast<S>(f.dist.rows());
}

// sum over prototypes of min_i |A f(x_i) - p|^2 over the sampled encodings.
template <typename S>
S rep_term(const RowMatX<S>& sample_F, const model::ProtoXModel<S>& m) {
  if (sample_F.rows() == 0) throw DataError("rep_term: empty sample");
  const RowMatX<S> Z = sample_F * m.iso.A.transpose();
  S acc = 0;
  for (Eigen::Index mm = 0; mm < m.protos.count(); ++mm) {
    S best = std::numeric_limits<S>::infinity();
    for (Eigen::Index i = 0; i < Z.rows(); ++i)
      best = std::min(best, (Z.row(i) - m.protos.P.row(mm)).squaredNorm());
    acc += best;
  }
  return acc;
}

// CE + l1*Sep + l2*Clst + l3*Rep + l4*Iso, with gradients w.r.t. (A, P, W)
// accumulated into `g` when non-null.
template <typename S>
ObjectiveComponents<S> objective_and_grads(const EncodedBatch<S>& batch,
                                           const model::ProtoXModel<S>& m,
                                           const ObjectiveWeights& weights,
                                           const RowMatX<S>& rep_sample, HeadGrads<S>* g) {
  weights.validate();
  detail::check_labels(batch, m.n_actions());
  if (weights.lambda_sep > 0) detail::check_multi_action(m);

  const auto f = detail::head_forward(m, batch.F);
  const Eigen::Index B = batch.F.rows(), M = m.protos.count(), A = m.head.W.cols();
  ObjectiveComponents<S> out;

  // Cross-entropy with softmax over evidence scores.
  RowMatX<S> dE;  // B x A
  if (g) dE = RowMatX<S>::Zero(B, A);
  for (Eigen::Index i = 0; i < B; ++i) {
    const int y = batch.labels[static_cast<std::size_t>(i)];
    const S mx = f.E.row(i).maxCoeff();
    S lse = 0;
    for (Eigen::Index a = 0; a < A; ++a) lse += std::exp(f.E(i, a) - mx);
    out.ce += (mx + std::log(lse)) - f.E(i, y);
    if (g) {
      for (Eigen::Index a = 0; a < A; ++a) dE(i, a) = std::exp(f.E(i, a) - mx) / lse;
      dE(i, y) -= S(1);
    }
  }
  out.ce /= static_cast<S>(B);

  RowMatX<S> dSim;  // B x M
  if (g) {
    dE /= static_cast<S>(B);
    g->dW.noalias() += f.sim.transpose() * dE;
    dSim.noalias() = dE * m.head.W.transpose();
  }

  // Distance-space gradients: CE through sim, plus the Sep/Clst argmins.
  for (Eigen::Index i = 0; i < B; ++i) {
    const int y = batch.labels[static_cast<std::size_t>(i)];
    Eigen::Index sep_arg = -1, clst_arg = -1;
    S sep_best = std::numeric_limits<S>::infinity();
    S clst_best = std::numeric_limits<S>::infinity();
    for (Eigen::Index mm = 0; mm < M; ++mm) {
      const bool same = m.protos.action_tags[static_cast<std::size_t>(mm)] == y;
      const S d = f.dist(i, mm);
      if (same) {
        if (d < clst_best) {
          clst_best = d;
          clst_arg = mm;
        }
      } else if (d < sep_best) {
        sep_best = d;
        sep_arg = mm;
      }
    }
    if (clst_arg < 0)
      throw ConfigError("objective: no prototype tagged with action " + std::to_string(y));
    if (weights.lambda_sep > 0 && sep_arg < 0)
      throw ConfigError("objective: separation needs a wrong-action prototype");

    out.sep += sep_arg >= 0 ? sep_best : S(0);
    out.clst += clst_best;
    if (g) {
      // Distance gradients: per-prototype unit vectors feed dP directly;
      // their sum feeds dA through one outer product per sample.
      VecX<S> dz = VecX<S>::Zero(f.Z.cols());
      for (Eigen::Index mm = 0; mm < M; ++mm) {
        S coeff = 0;
        if (dSim.size() > 0) coeff += dSim(i, mm) * (-m.protos.beta) * f.sim(i, mm);
        if (mm == sep_arg) coeff += static_cast<S>(-weights.lambda_sep) / static_cast<S>(B);
        if (mm == clst_arg) coeff += static_cast<S>(weights.lambda_clst) / static_cast<S>(B);
        if (coeff == S(0)) continue;
        const S dd = f.dist(i, mm);
        if (dd <= S(0)) continue;  // zero-distance kink: zero subgradient
        const VecX<S> unit = (f.Z.row(i) - m.protos.P.row(mm)).transpose() / dd;
        g->dP.row(mm) -= coeff * unit.transpose();
        dz += coeff * unit;
      }
      g->dA.noalias() += dz * batch.F.row(i);
    }
  }
  out.sep = -out.sep / static_cast<S>(B);
  out.clst /= static_cast<S>(B);

  // Representability over the sampled encodings (squared distances).
  if (rep_sample.rows() > 0) {
    const RowMatX<S> Zr = rep_sample * m.iso.A.transpose();
    for (Eigen::Index mm = 0; mm < M; ++mm) {
      Eigen::Index arg = 0;
      S best = std::numeric_limits<S>::infinity();
      for (Eigen::Index i = 0; i < Zr.rows(); ++i) {
        const S d2 = (Zr.row(i) - m.protos.P.row(mm)).squaredNorm();
        if (d2 < best) {
          best = d2;
          arg = i;
        }
      }
      out.rep += best;
      if (g && weights.lambda_rep > 0) {
        const VecX<S> diff = (m.protos.P.row(mm) - Zr.row(arg)).transpose();
        g->dP.row(mm) += static_cast<S>(2 * weights.lambda_rep) * diff.transpose();
        g->dA.noalias() -= static_cast<S>(2 * weights.lambda_rep) * diff * rep_sample.row(arg);
      }
    }
  }

  out.iso = model::iso_penalty(m.iso);
  if (g && weights.lambda_iso > 0) g->dA += static_cast<S>(weights.lambda_iso) * model::iso_penalty_grad(m.iso);

  out.total = out.ce + static_cast<S>(weights.lambda_sep) * out.sep +
              static_cast<S>(weights.lambda_clst) * out.clst +
              static_cast<S>(weights.lambda_rep) * out.rep +
              static_cast<S>(weights.lambda_iso) * out.iso;
  return out;
}

template <typename S>
ObjectiveComponents<S> total_objective(const EncodedBatch<S>& batch, const model::ProtoXModel<S>& m,
                                       const ObjectiveWeights& weights, const RowMatX<S>& rep_sample) {
  return objective_and_grads<S>(batch, m, weights, rep_sample, nullptr);
}

}  // namespace protox::train
