#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "protox/core/error.hpp"
#include "protox/core/parallel.hpp"
#include "protox/core/rng.hpp"
#include "protox/data/dataset.hpp"
#include "protox/model/head.hpp"
#include "protox/nn/adam.hpp"
#include "protox/train/objective.hpp"

namespace protox::train {

struct TrainConfig {
  int epochs = 120;
  int batch_size = 256;
  double learning_rate = 1e-3;
  int projection_period = 25;
  std::uint64_t seed = 0;
  int initial_K = 25;       // prototypes per action
  int rep_subsample = 4096; // encodings sampled per epoch for the Rep term
  int workers = 0;

  void validate() const {
    if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
    if (projection_period < 1) throw ConfigError("train: projection_period must be >= 1");
    if (initial_K < 1) throw ConfigError("train: initial_K must be >= 1");
    if (batch_size < 1 || rep_subsample < 1) throw ConfigError("train: batch sizes must be >= 1");
    if (learning_rate <= 0) throw ConfigError("train: learning_rate must be > 0");
  }
};

struct EpochRecord {
  int epoch = 0;
  double ce = 0, sep = 0, clst = 0, rep = 0, iso = 0, total = 0;
  bool projected = false;
};

struct ProjectionEvent {
  int prototype = 0;
  std::pair<int, int> source{0, 0};
  double moved_distance = 0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::vector<int> projection_epochs;
};

inline Json to_json(const TrainHistory& h) {
  Json epochs = Json::array();
  for (const auto& e : h.epochs)
    epochs.push_back({{"epoch", e.epoch}, {"ce", e.ce}, {"sep", e.sep}, {"clst", e.clst},
                      {"rep", e.rep}, {"iso", e.iso}, {"total", e.total},
                      {"projected", e.projected}});
  return Json{{"epochs", epochs}, {"projection_epochs", h.projection_epochs}};
}

// Snaps every prototype to the nearest training encoding (post-isometry) and
// records which state it now equals. Ties break toward the lowest index.
template <typename S>
std::vector<ProjectionEvent> project_prototypes(model::ProtoXModel<S>& m, const RowMatX<S>& F,
                                                const std::vector<std::pair<int, int>>& index,
                                                int workers = 0) {
  if (F.rows() == 0) throw DataError("project_prototypes: empty training encodings");
  if (static_cast<std::size_t>(F.rows()) != index.size())
    throw ShapeError("project_prototypes: encoding/index size mismatch");
  const RowMatX<S> Z = F * m.iso.A.transpose();
  const Eigen::Index M = m.protos.count();
  std::vector<ProjectionEvent> events(static_cast<std::size_t>(M));
  parallel_chunks(static_cast<std::size_t>(M), workers, [&](std::size_t m0, std::size_t m1, int) {
    for (std::size_t mm = m0; mm < m1; ++mm) {
      Eigen::Index arg = 0;
      S best = std::numeric_limits<S>::infinity();
      for (Eigen::Index i = 0; i < Z.rows(); ++i) {
        const S d = (Z.row(i) - m.protos.P.row(static_cast<Eigen::Index>(mm))).norm();
        if (d < best) {
          best = d;
          arg = i;
        }
      }
      events[mm] = {static_cast<int>(mm), index[static_cast<std::size_t>(arg)],
                    static_cast<double>(best)};
      m.protos.P.row(static_cast<Eigen::Index>(mm)) = Z.row(arg);
      m.protos.sources[mm] = index[static_cast<std::size_t>(arg)];
    }
  });
  return events;
}

template <typename S>
std::vector<ProjectionEvent> project_prototypes(model::ProtoXModel<S>& m,
                                                const data::DemonstrationDataset& dataset,
                                                int workers = 0) {
  const RowMatX<S> F = pretrain::encode_dataset(m.encoder, dataset, workers);
  return project_prototypes(m, F, dataset.index, workers);
}

struct MergeReport {
  int initial = 0;
  int merged = 0;
  // For each kept prototype: the member ids it absorbed (itself first).
  std::vector<std::vector<int>> groups;
};

inline Json to_json(const MergeReport& r) {
  return Json{{"initial", r.initial}, {"merged", r.merged}, {"groups", r.groups}};
}

// Collapses prototypes sharing a projection source; the merged connection to
// each action is the sum of the group's connections, so evidence vectors are
// preserved up to float summation order.
template <typename S>
std::pair<model::ProtoXModel<S>, MergeReport> merge_prototypes(const model::ProtoXModel<S>& m) {
  if (!m.protos.all_projected())
    throw StateError("merge_prototypes: model has unprojected prototypes");

  const Eigen::Index M = m.protos.count();
  std::map<std::pair<int, int>, std::size_t> group_of;
  MergeReport report;
  report.initial = static_cast<int>(M);

  model::ProtoXModel<S> out;
  out.encoder = m.encoder;
  out.iso = m.iso;
  out.action_names = m.action_names;
  out.encoder_file = m.encoder_file;
  out.encoder_hash = m.encoder_hash;
  out.dataset_hash = m.dataset_hash;
  out.protos.beta = m.protos.beta;

  std::vector<Eigen::Index> keep;
  for (Eigen::Index mm = 0; mm < M; ++mm) {
    const auto src = m.protos.sources[static_cast<std::size_t>(mm)];
    auto it = group_of.find(src);
    if (it == group_of.end()) {
      group_of.emplace(src, keep.size());
      keep.push_back(mm);
      report.groups.push_back({static_cast<int>(mm)});
    } else {
      report.groups[it->second].push_back(static_cast<int>(mm));
    }
  }

  const Eigen::Index K = static_cast<Eigen::Index>(keep.size());
  out.protos.P = RowMatX<S>(K, m.protos.P.cols());
  out.protos.action_tags.resize(static_cast<std::size_t>(K));
  out.protos.sources.resize(static_cast<std::size_t>(K));
  out.head.W = RowMatX<S>::Zero(K, m.head.W.cols());
  for (Eigen::Index k = 0; k < K; ++k) {
    const Eigen::Index first = keep[static_cast<std::size_t>(k)];
    out.protos.P.row(k) = m.protos.P.row(first);
    out.protos.action_tags[static_cast<std::size_t>(k)] =
        m.protos.action_tags[static_cast<std::size_t>(first)];
    out.protos.sources[static_cast<std::size_t>(k)] = m.protos.sources[static_cast<std::size_t>(first)];
    for (int member : report.groups[static_cast<std::size_t>(k)])
      out.head.W.row(k) += m.head.W.row(member);
  }
  out.merged = true;
  report.merged = static_cast<int>(K);
  out.validate();
  return {std::move(out), std::move(report)};
}

// Behavior cloning over the composite objective; optimizes (A, prototypes, W)
// with the encoder frozen. Projects every projection_period epochs and once
// after the final epoch.
template <typename S>
TrainHistory train_bc(model::ProtoXModel<S>& m, const RowMatX<S>& F, const std::vector<int>& labels,
                      const std::vector<std::pair<int, int>>& index, const ObjectiveWeights& weights,
                      const TrainConfig& config, std::ostream* progress = nullptr) {
  config.validate();
  weights.validate();
  if (!m.encoder.frozen) throw StateError("train_bc: encoder must be frozen");
  if (F.rows() == 0) throw DataError("train_bc: empty training set");
  if (static_cast<std::size_t>(F.rows()) != labels.size() || labels.size() != index.size())
    throw ShapeError("train_bc: encodings, labels and index must align");

  nn::AdamMats<S> opt(config.learning_rate);
  const auto n = static_cast<std::size_t>(F.rows());
  TrainHistory history;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Rng rng = Rng::substream(config.seed, "train.epoch", static_cast<std::uint64_t>(epoch));
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order);

    const std::size_t rep_n = std::min<std::size_t>(static_cast<std::size_t>(config.rep_subsample), n);
    RowMatX<S> rep_sample(static_cast<Eigen::Index>(rep_n), F.cols());
    for (std::size_t i = 0; i < rep_n; ++i)
      rep_sample.row(static_cast<Eigen::Index>(i)) = F.row(static_cast<Eigen::Index>(rng.uniform_index(n)));

    EpochRecord rec;
    rec.epoch = epoch;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(n, start + static_cast<std::size_t>(config.batch_size));
      EncodedBatch<S> batch;
      batch.F.resize(static_cast<Eigen::Index>(end - start), F.cols());
      batch.labels.resize(end - start);
      for (std::size_t i = start; i < end; ++i) {
        batch.F.row(static_cast<Eigen::Index>(i - start)) = F.row(static_cast<Eigen::Index>(order[i]));
        batch.labels[i - start] = labels[order[i]];
      }

      auto grads = HeadGrads<S>::zeros(m);
      const auto comps = objective_and_grads(batch, m, weights, rep_sample, &grads);
      if (!std::isfinite(static_cast<double>(comps.total)))
        throw NumericError("train_bc: non-finite loss at epoch " + std::to_string(epoch) +
                           ", batch starting at sample " + std::to_string(start));
      opt.step({&m.iso.A, &m.protos.P, &m.head.W}, {&grads.dA, &grads.dP, &grads.dW});

      rec.ce += static_cast<double>(comps.ce);
      rec.sep += static_cast<double>(comps.sep);
      rec.clst += static_cast<double>(comps.clst);
      rec.rep += static_cast<double>(comps.rep);
      rec.iso += static_cast<double>(comps.iso);
      rec.total += static_cast<double>(comps.total);
      ++batches;
    }
    if (batches > 0) {
      rec.ce /= static_cast<double>(batches);
      rec.sep /= static_cast<double>(batches);
      rec.clst /= static_cast<double>(batches);
      rec.rep /= static_cast<double>(batches);
      rec.iso /= static_cast<double>(batches);
      rec.total /= static_cast<double>(batches);
    }

    if ((epoch + 1) % config.projection_period == 0 && epoch + 1 < config.epochs) {
      project_prototypes(m, F, index, config.workers);
      rec.projected = true;
      history.projection_epochs.push_back(epoch);
    }
    if (progress)
      (*progress) << "train epoch " << epoch << ": ce=" << rec.ce << " sep=" << rec.sep
                  << " clst=" << rec.clst << " rep=" << rec.rep << " iso=" << rec.iso
                  << (rec.projected ? " [projected]" : "") << "\n";
    history.epochs.push_back(rec);
  }

  // Shipped models always satisfy the projection postcondition.
  project_prototypes(m, F, index, config.workers);
  if (!history.epochs.empty()) history.epochs.back().projected = true;
  history.projection_epochs.push_back(config.epochs - 1);
  return history;
}

template <typename S>
TrainHistory train_bc(model::ProtoXModel<S>& m, const data::DemonstrationDataset& dataset,
                      const ObjectiveWeights& weights, const TrainConfig& config,
                      std::ostream* progress = nullptr) {
  const RowMatX<S> F = pretrain::encode_dataset(m.encoder, dataset, config.workers);
  std::vector<int> labels(dataset.n_states());
  for (std::size_t i = 0; i < labels.size(); ++i)
    labels[i] = static_cast<int>(data::label_at(dataset, i));
  return train_bc(m, F, labels, dataset.index, weights, config, progress);
}

}  // namespace protox::train
