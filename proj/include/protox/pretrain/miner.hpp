#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "protox/core/error.hpp"
#include "protox/core/rng.hpp"
#include "protox/data/dataset.hpp"

namespace protox::pretrain {

// Temporal quadruplet: positive shares the anchor's action inside the time
// window, the near negative differs in action inside the window, the far
// negative lies outside the window (or in another episode).
struct QuadrupletSpec {
  std::pair<int, int> anchor;
  std::pair<int, int> positive;
  std::pair<int, int> near_negative;
  std::pair<int, int> far_negative;
};

struct MinerConfig {
  int delta_time = 10;
  double margin1 = 1.0;
  double margin2 = 1.0;
  int max_resamples = 32;

  void validate() const {
    if (delta_time < 1) throw ConfigError("miner: delta_time must be >= 1");
    if (margin1 < 0 || margin2 < 0) throw ConfigError("miner: margins must be >= 0");
    if (max_resamples < 1) throw ConfigError("miner: max_resamples must be >= 1");
  }
};

// Candidates are enumerated exactly (the window is small), so absence is
// decided exactly. max_resamples only bounds the cross-episode redraws used
// when the anchor's episode has no state outside the window.
inline std::optional<QuadrupletSpec> mine_quadruplet(const data::DemonstrationDataset& dataset,
                                                     std::pair<int, int> anchor,
                                                     const MinerConfig& config, Rng& rng) {
  config.validate();
  const auto [ep, t] = anchor;
  const data::Trajectory& traj = dataset.trajectory_by_id(ep);
  const int len = static_cast<int>(traj.actions.size());
  if (t < 0 || t >= len) throw IndexError("mine_quadruplet: anchor t out of range");
  const auto a = traj.actions[static_cast<std::size_t>(t)];

  std::vector<int> positives, near_negs;
  const int lo = std::max(0, t - config.delta_time);
  const int hi = std::min(len - 1, t + config.delta_time);
  for (int u = lo; u <= hi; ++u) {
    if (u == t) continue;
    (traj.actions[static_cast<std::size_t>(u)] == a ? positives : near_negs).push_back(u);
  }
  if (positives.empty() || near_negs.empty()) return std::nullopt;

  QuadrupletSpec spec;
  spec.anchor = anchor;
  spec.positive = {ep, positives[rng.uniform_index(positives.size())]};
  spec.near_negative = {ep, near_negs[rng.uniform_index(near_negs.size())]};

  std::vector<int> far_same;
  for (int u = 0; u < len; ++u)
    if (std::abs(u - t) > config.delta_time) far_same.push_back(u);
  if (!far_same.empty()) {
    spec.far_negative = {ep, far_same[rng.uniform_index(far_same.size())]};
    return spec;
  }
  // Episode shorter than the window: fall back to a different episode.
  for (int attempt = 0; attempt < config.max_resamples; ++attempt) {
    const auto& cand = dataset.index[rng.uniform_index(dataset.index.size())];
    if (cand.first != ep) {
      spec.far_negative = cand;
      return spec;
    }
  }
  return std::nullopt;
}

// Invariant check used by tests and the mining loop.
inline bool quadruplet_valid(const data::DemonstrationDataset& dataset, const QuadrupletSpec& q,
                             int delta_time) {
  const auto action_of = [&](std::pair<int, int> s) {
    return dataset.trajectory_by_id(s.first).actions.at(static_cast<std::size_t>(s.second));
  };
  const auto a = action_of(q.anchor);
  const bool pos_ok = q.positive.first == q.anchor.first &&
                      std::abs(q.positive.second - q.anchor.second) <= delta_time &&
                      q.positive.second != q.anchor.second && action_of(q.positive) == a;
  const bool near_ok = q.near_negative.first == q.anchor.first &&
                       std::abs(q.near_negative.second - q.anchor.second) <= delta_time &&
                       action_of(q.near_negative) != a;
  const bool far_ok = q.far_negative.first != q.anchor.first ||
                      std::abs(q.far_negative.second - q.anchor.second) > delta_time;
  return pos_ok && near_ok && far_ok;
}

}  // namespace protox::pretrain
