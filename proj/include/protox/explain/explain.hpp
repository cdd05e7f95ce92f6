#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "protox/core/error.hpp"
#include "protox/core/parallel.hpp"
#include "protox/data/dataset.hpp"
#include "protox/explain/image.hpp"
#include "protox/model/head.hpp"

namespace protox::explain {

// One prototype's share of an evidence score.
struct Contribution {
  int prototype_id = 0;
  int action_tag = 0;
  std::pair<int, int> source{-1, -1};
  double similarity = 0;
  double weight = 0;        // connection to the predicted action
  double contribution = 0;  // weight * similarity
};

template <typename S>
struct Explanation {
  std::pair<int, int> state_ref{-1, -1};  // (episode_id, t) when known
  int predicted_action = 0;
  VecX<S> evidence;
  VecX<S> similarities;
  std::vector<Contribution> contributions;  // all prototypes, |contribution| descending
  int top_k = 5;
};

// Evidence decomposition for one state. Contributions cover every prototype;
// top_k only controls how many a renderer shows.
template <typename S>
Explanation<S> explain(const model::ProtoXModel<S>& m, const Tensor<S>& state, int top_k) {
  if (!m.protos.all_projected())
    throw StateError("explain: model prototypes have no source states (run projection/merge first)");
  if (top_k < 1) throw ConfigError("explain: top_k must be >= 1");

  const auto pred = model::predict(m, state);
  Explanation<S> e;
  e.predicted_action = pred.action;
  e.evidence = pred.evidence;
  e.similarities = pred.similarities;
  e.top_k = top_k;
  for (Eigen::Index mm = 0; mm < m.protos.count(); ++mm) {
    Contribution c;
    c.prototype_id = static_cast<int>(mm);
    c.action_tag = m.protos.action_tags[static_cast<std::size_t>(mm)];
    c.source = m.protos.sources[static_cast<std::size_t>(mm)];
    c.similarity = static_cast<double>(pred.similarities[mm]);
    c.weight = static_cast<double>(m.head.W(mm, pred.action));
    c.contribution = c.weight * c.similarity;
    e.contributions.push_back(c);
  }
  std::stable_sort(e.contributions.begin(), e.contributions.end(),
                   [](const Contribution& a, const Contribution& b) {
                     return std::abs(a.contribution) > std::abs(b.contribution);
                   });
  return e;
}

struct ImportanceMap {
  int h = 0, w = 0;
  std::vector<double> heatmap;  // h*w, >= 0
  int patch_size = 8;
  int stride = 4;
  double keep_fraction = 0.95;

  double at(int y, int x) const { return heatmap[static_cast<std::size_t>(y) * w + x]; }

  std::pair<int, int> argmax() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < heatmap.size(); ++i)
      if (heatmap[i] > heatmap[best]) best = i;
    return {static_cast<int>(best / static_cast<std::size_t>(w)),
            static_cast<int>(best % static_cast<std::size_t>(w))};
  }
};

// Masks patches of the prototype's source image (most recent frame only),
// re-encodes, and records how much the similarity to the input drops.
// Per-pixel importance is the mean drop over covering patches; only the top
// floor(keep_fraction * pixels) ranked values are kept.
template <typename S>
ImportanceMap importance_map(const model::ProtoXModel<S>& m,
                             const data::DemonstrationDataset& dataset, const Tensor<S>& input_state,
                             int prototype_id, int patch_size, int stride,
                             std::optional<std::array<double, 3>> mask_value, double keep_fraction) {
  if (prototype_id < 0 || prototype_id >= m.protos.count())
    throw IndexError("importance_map: prototype id out of range");
  const auto source = m.protos.sources[static_cast<std::size_t>(prototype_id)];
  if (source == model::kNoSource)
    throw StateError("importance_map: prototype has no source state (projection has not run)");
  if (patch_size < 1 || stride < 1) throw ConfigError("importance_map: patch and stride must be >= 1");
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0))
    throw ConfigError("importance_map: keep_fraction must be in (0,1]");

  const auto& traj = dataset.trajectory_by_id(source.first);
  const Tensor<S> src = data::state_tensor<S>(traj, source.second, dataset.stack_depth);
  const int h = src.dim(1), w = src.dim(2);
  if (patch_size > h || patch_size > w)
    throw ConfigError("importance_map: patch " + std::to_string(patch_size) + " larger than image " +
                      std::to_string(h) + "x" + std::to_string(w));

  const VecX<S> z_input = model::apply_isometry(m.iso, pretrain::flat_mean(m.encoder.encode(input_state)));
  // Baseline goes through the same encode path as the masked variants, so an
  // identity mask produces an exactly zero map.
  const VecX<S> z_src = model::apply_isometry(m.iso, pretrain::flat_mean(m.encoder.encode(src)));
  const S sim_orig = model::similarity(z_input, z_src, m.protos.beta);

  std::vector<int> ys, xs;
  for (int y = 0;; y += stride) {
    if (y + patch_size > h) break;
    ys.push_back(y);
  }
  for (int x = 0;; x += stride) {
    if (x + patch_size > w) break;
    xs.push_back(x);
  }
  const std::size_t n_pos = ys.size() * xs.size();
  std::vector<double> drops(n_pos, 0.0);

  parallel_chunks(n_pos, 0, [&](std::size_t b0, std::size_t b1, int) {
    for (std::size_t pos = b0; pos < b1; ++pos) {
      const int py = ys[pos / xs.size()];
      const int px = xs[pos % xs.size()];
      Tensor<S> masked = src;
      for (int c = 0; c < 3; ++c) {
        for (int y = py; y < py + patch_size; ++y)
          for (int x = px; x < px + patch_size; ++x)
            if (mask_value) masked.at(c, y, x) = static_cast<S>((*mask_value)[static_cast<std::size_t>(c)] / 255.0);
      }
      const VecX<S> z_m = model::apply_isometry(m.iso, pretrain::flat_mean(m.encoder.encode(masked)));
      const S sim_masked = model::similarity(z_input, z_m, m.protos.beta);
      drops[pos] = std::max(0.0, static_cast<double>(sim_orig - sim_masked));
    }
  });

  ImportanceMap map;
  map.h = h;
  map.w = w;
  map.patch_size = patch_size;
  map.stride = stride;
  map.keep_fraction = keep_fraction;
  map.heatmap.assign(static_cast<std::size_t>(h) * w, 0.0);
  std::vector<int> cover(map.heatmap.size(), 0);
  for (std::size_t pos = 0; pos < n_pos; ++pos) {
    const int py = ys[pos / xs.size()];
    const int px = xs[pos % xs.size()];
    for (int y = py; y < py + patch_size; ++y)
      for (int x = px; x < px + patch_size; ++x) {
        map.heatmap[static_cast<std::size_t>(y) * w + x] += drops[pos];
        cover[static_cast<std::size_t>(y) * w + x] += 1;
      }
  }
  for (std::size_t i = 0; i < map.heatmap.size(); ++i)
    if (cover[i] > 0) map.heatmap[i] /= cover[i];

  // Rank (value desc, index asc); zero everything past the keep quota so the
  // nonzero fraction is bounded by keep_fraction even under ties.
  const std::size_t n = map.heatmap.size();
  const auto quota = static_cast<std::size_t>(std::floor(keep_fraction * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return map.heatmap[a] > map.heatmap[b];
  });
  for (std::size_t r = quota; r < n; ++r) map.heatmap[order[r]] = 0.0;
  return map;
}

struct Overlay {
  Observation composite;
  std::vector<std::size_t> members;  // flat dataset indices, nearest first
};

// Ranks dataset states by latent distance to the probe (pre- or
// post-isometry) and blends the n nearest most-recent frames.
template <typename S>
Overlay nearest_overlay(const model::ProtoXModel<S>& m, const data::DemonstrationDataset& dataset,
                        const RowMatX<S>& encodings, const VecX<S>& probe_encoding, int n,
                        bool use_isometry) {
  if (n < 1) throw ConfigError("nearest_overlay: n must be >= 1");
  if (static_cast<std::size_t>(n) > dataset.n_states())
    throw ConfigError("nearest_overlay: n = " + std::to_string(n) + " exceeds dataset size " +
                      std::to_string(dataset.n_states()));
  if (static_cast<std::size_t>(encodings.rows()) != dataset.n_states())
    throw ShapeError("nearest_overlay: encoding matrix does not cover the dataset");

  VecX<S> zp = probe_encoding;
  RowMatX<S> Z;
  if (use_isometry) {
    Z = encodings * m.iso.A.transpose();
    zp = m.iso.A * probe_encoding;
  } else {
    Z = encodings;
  }
  std::vector<std::size_t> order(dataset.n_states());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<S> dist(order.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    dist[i] = (Z.row(static_cast<Eigen::Index>(i)) - zp.transpose()).norm();
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dist[a] < dist[b];
  });
  order.resize(static_cast<std::size_t>(n));

  std::vector<Observation> frames;
  frames.reserve(order.size());
  for (std::size_t idx : order) {
    const auto [ep, t] = dataset.index[idx];
    frames.push_back(dataset.trajectory_by_id(ep).observations[static_cast<std::size_t>(t)]);
  }
  return {overlay_blend(frames), std::move(order)};
}

template <typename S>
Overlay nearest_overlay(const model::ProtoXModel<S>& m, const data::DemonstrationDataset& dataset,
                        const Tensor<S>& probe_state, int n, bool use_isometry, int workers = 0) {
  const RowMatX<S> encodings = pretrain::encode_dataset(m.encoder, dataset, workers);
  const VecX<S> probe = pretrain::flat_mean(m.encoder.encode(probe_state));
  return nearest_overlay(m, dataset, encodings, probe, n, use_isometry);
}

}  // namespace protox::explain
