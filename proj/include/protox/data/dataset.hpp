#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "protox/core/error.hpp"
#include "protox/core/io.hpp"
#include "protox/core/rng.hpp"
#include "protox/core/tensor.hpp"
#include "protox/env/corridor.hpp"

namespace protox::data {

using env::ActionId;
using env::Observation;

// A state is the stack of the C latest observations, most recent first.
// Missing history at episode start is padded by repeating the first frame.
struct State {
  std::vector<Observation> frames;
  int time_index = 0;
  int episode_id = 0;
};

struct Trajectory {
  int episode_id = 0;
  std::vector<Observation> observations;
  std::vector<ActionId> actions;  // expert action taken at each observation

  bool operator==(const Trajectory&) const = default;
};

// Optional record of how a dataset was produced, enough to re-simulate any
// episode bit-exactly (per-step ground truth for evaluation tooling).
struct Provenance {
  env::CorridorConfig base_config;
  std::vector<std::uint64_t> episode_seeds;  // one per trajectory

  bool operator==(const Provenance&) const = default;
};

struct DemonstrationDataset {
  std::vector<Trajectory> trajectories;
  std::vector<std::pair<int, int>> index;  // (episode_id, t), canonical order
  std::vector<std::string> action_names;
  int stack_depth = 2;
  std::optional<Provenance> provenance;

  std::size_t n_states() const { return index.size(); }
  std::size_t n_episodes() const { return trajectories.size(); }

  const Trajectory& trajectory_by_id(int episode_id) const {
    for (const auto& t : trajectories)
      if (t.episode_id == episode_id) return t;
    throw IndexError("episode id " + std::to_string(episode_id) + " not in dataset");
  }

  bool operator==(const DemonstrationDataset&) const = default;
};

inline State stack_state(const Trajectory& traj, int t, int C) {
  if (t < 0 || t >= static_cast<int>(traj.observations.size()))
    throw IndexError("stack_state: t=" + std::to_string(t) + " outside trajectory of length " +
                     std::to_string(traj.observations.size()));
  if (C < 1) throw ConfigError("stack depth must be >= 1");
  State s;
  s.time_index = t;
  s.episode_id = traj.episode_id;
  s.frames.reserve(static_cast<std::size_t>(C));
  for (int j = 0; j < C; ++j) s.frames.push_back(traj.observations[static_cast<std::size_t>(std::max(t - j, 0))]);
  return s;
}

// (C*3, H, W) tensor with pixels scaled to [0,1]; frame j fills channels
// [3j, 3j+3), most recent first.
template <typename S>
Tensor<S> state_tensor(const Trajectory& traj, int t, int C) {
  if (t < 0 || t >= static_cast<int>(traj.observations.size()))
    throw IndexError("state_tensor: t out of range");
  const Observation& first = traj.observations[0];
  Tensor<S> x({C * 3, first.h, first.w});
  for (int j = 0; j < C; ++j) {
    const Observation& o = traj.observations[static_cast<std::size_t>(std::max(t - j, 0))];
    for (int y = 0; y < o.h; ++y)
      for (int xx = 0; xx < o.w; ++xx) {
        const auto* p = &o.pixels[(static_cast<std::size_t>(y) * o.w + xx) * 3];
        x.at(j * 3 + 0, y, xx) = static_cast<S>(p[0]) / S(255);
        x.at(j * 3 + 1, y, xx) = static_cast<S>(p[1]) / S(255);
        x.at(j * 3 + 2, y, xx) = static_cast<S>(p[2]) / S(255);
      }
  }
  return x;
}

template <typename S>
Tensor<S> state_tensor(const DemonstrationDataset& d, std::size_t flat_index) {
  const auto [ep, t] = d.index.at(flat_index);
  return state_tensor<S>(d.trajectory_by_id(ep), t, d.stack_depth);
}

inline ActionId label_at(const DemonstrationDataset& d, std::size_t flat_index) {
  const auto [ep, t] = d.index.at(flat_index);
  return d.trajectory_by_id(ep).actions[static_cast<std::size_t>(t)];
}

struct FlipPointIndex {
  std::vector<std::pair<int, int>> entries;  // (episode_id, t), t >= 1
};

inline FlipPointIndex find_flip_points(const Trajectory& traj) {
  if (traj.actions.empty()) throw DataError("find_flip_points: empty trajectory");
  FlipPointIndex f;
  for (std::size_t t = 1; t < traj.actions.size(); ++t)
    if (traj.actions[t] != traj.actions[t - 1]) f.entries.emplace_back(traj.episode_id, static_cast<int>(t));
  return f;
}

inline FlipPointIndex find_flip_points(const DemonstrationDataset& d) {
  FlipPointIndex f;
  for (const auto& traj : d.trajectories) {
    auto part = find_flip_points(traj);
    f.entries.insert(f.entries.end(), part.entries.begin(), part.entries.end());
  }
  return f;
}

// Runs seeded episodes until at least n_pairs state-action pairs exist.
// `env_factory(episode_seed)` must return a freshly reset environment.
template <typename EnvFactory>
DemonstrationDataset collect(EnvFactory&& env_factory, const env::ScriptedExpert& expert,
                             std::size_t n_pairs, std::uint64_t seed, int stack_depth = 2) {
  if (n_pairs < 1) throw ConfigError("collect: n_pairs must be >= 1");
  for (ActionId a : expert.action_table)
    if (static_cast<int>(a) < 0 || static_cast<int>(a) >= env::kNumActions)
      throw ConfigError("collect: expert action table does not match the environment action set");

  DemonstrationDataset d;
  d.action_names = env::default_action_names();
  d.stack_depth = stack_depth;

  int episode_id = 0;
  while (d.index.size() < n_pairs) {
    const std::uint64_t ep_seed = Rng::substream(seed, "collect.episode",
                                                 static_cast<std::uint64_t>(episode_id)).next_u64();
    auto env = env_factory(ep_seed);

    Trajectory traj;
    traj.episode_id = episode_id;
    Observation obs = env.render();
    const std::size_t max_steps = static_cast<std::size_t>(env.config().width) * 8 + 64;
    while (!env.done()) {
      if (traj.actions.size() > max_steps)
        throw StateError("collect: episode failed to terminate within " + std::to_string(max_steps) + " steps");
      const ActionId a = env::expert_action(expert, env);
      traj.observations.push_back(obs);
      traj.actions.push_back(a);
      auto r = env.step(a);
      obs = std::move(r.observation);
    }
    for (std::size_t t = 0; t < traj.actions.size(); ++t)
      d.index.emplace_back(episode_id, static_cast<int>(t));
    d.trajectories.push_back(std::move(traj));
    ++episode_id;
  }
  return d;
}

// Corridor-specific collection: runs the generic loop and records the
// provenance (base config + per-episode seeds) needed to re-simulate.
inline DemonstrationDataset collect_corridor(const env::CorridorConfig& base,
                                             const env::ScriptedExpert& expert, std::size_t n_pairs,
                                             std::uint64_t seed, int stack_depth = 2) {
  auto d = collect(
      [&base](std::uint64_t ep_seed) {
        env::CorridorConfig c = base;
        c.seed = ep_seed;
        return env::CorridorEnv(c);
      },
      expert, n_pairs, seed, stack_depth);
  Provenance p;
  p.base_config = base;
  for (std::size_t e = 0; e < d.trajectories.size(); ++e)
    p.episode_seeds.push_back(Rng::substream(seed, "collect.episode", e).next_u64());
  d.provenance = std::move(p);
  return d;
}

// Whole-episode split; episode id sets are disjoint and jointly exhaustive.
inline std::pair<DemonstrationDataset, DemonstrationDataset> split(const DemonstrationDataset& d,
                                                                   double train_fraction,
                                                                   std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ConfigError("split: train_fraction must be in (0,1)");
  const std::size_t n_ep = d.trajectories.size();
  if (n_ep < 2) throw SplitError("split: need at least 2 episodes, got " + std::to_string(n_ep));

  std::vector<std::size_t> order(n_ep);
  for (std::size_t i = 0; i < n_ep; ++i) order[i] = i;
  Rng rng = Rng::substream(seed, "split");
  rng.shuffle(order);

  std::size_t n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n_ep)));
  n_train = std::clamp<std::size_t>(n_train, 1, n_ep - 1);

  std::vector<std::size_t> train_pos(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> test_pos(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(train_pos.begin(), train_pos.end());
  std::sort(test_pos.begin(), test_pos.end());

  auto take = [&](const std::vector<std::size_t>& positions) {
    DemonstrationDataset out;
    out.action_names = d.action_names;
    out.stack_depth = d.stack_depth;
    if (d.provenance) {
      Provenance p;
      p.base_config = d.provenance->base_config;
      for (std::size_t pos : positions) p.episode_seeds.push_back(d.provenance->episode_seeds.at(pos));
      out.provenance = std::move(p);
    }
    for (std::size_t pos : positions) {
      const Trajectory& traj = d.trajectories[pos];
      for (std::size_t t = 0; t < traj.actions.size(); ++t)
        out.index.emplace_back(traj.episode_id, static_cast<int>(t));
      out.trajectories.push_back(traj);
    }
    return out;
  };
  return {take(train_pos), take(test_pos)};
}

inline std::array<double, 3> mean_pixel(const DemonstrationDataset& d) {
  std::array<double, 3> sum{0, 0, 0};
  double count = 0;
  for (const auto& traj : d.trajectories)
    for (const auto& o : traj.observations) {
      for (std::size_t i = 0; i + 2 < o.pixels.size(); i += 3) {
        sum[0] += o.pixels[i];
        sum[1] += o.pixels[i + 1];
        sum[2] += o.pixels[i + 2];
      }
      count += static_cast<double>(o.pixels.size()) / 3.0;
    }
  if (count == 0) throw DataError("mean_pixel: empty dataset");
  return {sum[0] / count, sum[1] / count, sum[2] / count};
}

inline constexpr char kDatasetMagic[4] = {'P', 'T', 'X', 'D'};
inline constexpr std::uint32_t kDatasetVersion = 1;

inline void save(const DemonstrationDataset& d, const std::filesystem::path& path) {
  BinaryWriter w(path);
  w.magic(kDatasetMagic, kDatasetVersion);

  Json episodes = Json::array();
  int obs_h = 0, obs_w = 0;
  for (const auto& traj : d.trajectories) {
    episodes.push_back({{"id", traj.episode_id}, {"length", traj.actions.size()}});
    if (!traj.observations.empty()) {
      obs_h = traj.observations[0].h;
      obs_w = traj.observations[0].w;
    }
  }
  Json header{{"action_names", d.action_names},
              {"stack_depth", d.stack_depth},
              {"obs_h", obs_h},
              {"obs_w", obs_w},
              {"episodes", episodes}};
  if (d.provenance) {
    header["provenance"] = {{"env_config", d.provenance->base_config},
                            {"episode_seeds", d.provenance->episode_seeds}};
  }
  w.header(header);

  for (const auto& traj : d.trajectories) {
    for (const auto& o : traj.observations) w.blob(o.pixels.data(), o.pixels.size());
    std::vector<std::uint8_t> acts(traj.actions.size());
    for (std::size_t i = 0; i < acts.size(); ++i) acts[i] = static_cast<std::uint8_t>(traj.actions[i]);
    w.blob(acts.data(), acts.size());
  }
  w.close();
}

inline DemonstrationDataset load(const std::filesystem::path& path) {
  BinaryReader r(path);
  r.magic(kDatasetMagic, kDatasetVersion);
  const Json header = r.header();

  DemonstrationDataset d;
  header.at("action_names").get_to(d.action_names);
  header.at("stack_depth").get_to(d.stack_depth);
  const int obs_h = header.at("obs_h").get<int>();
  const int obs_w = header.at("obs_w").get<int>();
  if (header.contains("provenance")) {
    Provenance p;
    header["provenance"].at("env_config").get_to(p.base_config);
    header["provenance"].at("episode_seeds").get_to(p.episode_seeds);
    d.provenance = std::move(p);
  }

  const std::size_t frame_bytes = static_cast<std::size_t>(obs_h) * obs_w * 3;
  for (const auto& ep : header.at("episodes")) {
    Trajectory traj;
    traj.episode_id = ep.at("id").get<int>();
    const std::size_t len = ep.at("length").get<std::size_t>();
    traj.observations.resize(len);
    for (auto& o : traj.observations) {
      o.h = obs_h;
      o.w = obs_w;
      o.pixels.resize(frame_bytes);
      r.blob(o.pixels.data(), frame_bytes);
    }
    std::vector<std::uint8_t> acts(len);
    r.blob(acts.data(), len);
    traj.actions.resize(len);
    for (std::size_t i = 0; i < len; ++i) {
      if (acts[i] >= d.action_names.size())
        throw FormatError(path.string() + ": action id " + std::to_string(acts[i]) +
                          " outside declared action set");
      traj.actions[i] = static_cast<ActionId>(acts[i]);
    }
    for (std::size_t t = 0; t < len; ++t) d.index.emplace_back(traj.episode_id, static_cast<int>(t));
    d.trajectories.push_back(std::move(traj));
  }
  if (!r.at_eof())
    throw FormatError(path.string() + ": trailing bytes after byte offset " + std::to_string(r.offset()));
  return d;
}

}  // namespace protox::data
