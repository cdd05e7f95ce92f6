#pragma once

#include <optional>
#include <vector>

#include "protox/core/error.hpp"
#include "protox/data/dataset.hpp"
#include "protox/env/corridor.hpp"

namespace protox::data {

// Per-step ground truth recovered by re-simulating each episode from the
// dataset's provenance. Entry [i][t] describes the state the t-th action of
// trajectory i was taken in.
inline std::vector<std::vector<env::StepInfo>> annotate_dataset(const DemonstrationDataset& d) {
  if (!d.provenance)
    throw StateError("annotate_dataset: dataset has no environment provenance");
  if (d.provenance->episode_seeds.size() != d.trajectories.size())
    throw FormatError("annotate_dataset: provenance does not cover every episode");
  std::vector<std::vector<env::StepInfo>> out;
  out.reserve(d.trajectories.size());
  for (std::size_t i = 0; i < d.trajectories.size(); ++i) {
    env::CorridorConfig cfg = d.provenance->base_config;
    cfg.seed = d.provenance->episode_seeds[i];
    out.push_back(env::replay_info(cfg, d.trajectories[i].actions));
  }
  return out;
}

// Obstacle kind a recorded jump initiation was reacting to, when the step's
// action is a jump and an obstacle lies ahead.
inline std::optional<env::ObstacleKind> jump_cause(const Trajectory& traj,
                                                   const std::vector<env::StepInfo>& info, int t) {
  if (t < 0 || t >= static_cast<int>(traj.actions.size())) return std::nullopt;
  if (!env::has_jump(traj.actions[static_cast<std::size_t>(t)])) return std::nullopt;
  const auto& s = info[static_cast<std::size_t>(t)];
  if (s.airborne || !s.nearest) return std::nullopt;
  return s.nearest->kind;
}

}  // namespace protox::data
