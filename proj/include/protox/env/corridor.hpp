#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "protox/core/json.hpp"

#include "protox/core/error.hpp"
#include "protox/core/rng.hpp"

namespace protox::env {

// Deterministic side-scrolling corridor. The agent walks left to right over
// a tiled floor with obstacles; jumping clears them. Rendering is flat-color
// tiles into a fixed-size RGB frame with the camera locked to the agent.

enum class ActionId : std::uint8_t { right = 0, jump = 1, right_jump = 2, noop = 3 };

inline constexpr int kNumActions = 4;

inline const char* action_name(ActionId a) {
  switch (a) {
    case ActionId::right: return "RIGHT";
    case ActionId::jump: return "JUMP";
    case ActionId::right_jump: return "RIGHT+JUMP";
    case ActionId::noop: return "NOOP";
  }
  return "?";
}

inline std::vector<std::string> default_action_names() {
  return {"RIGHT", "JUMP", "RIGHT+JUMP", "NOOP"};
}

inline bool has_right(ActionId a) { return a == ActionId::right || a == ActionId::right_jump; }
inline bool has_jump(ActionId a) { return a == ActionId::jump || a == ActionId::right_jump; }

enum class ObstacleKind : std::uint8_t { hole = 0, pipe = 1, enemy = 2 };

inline const char* kind_name(ObstacleKind k) {
  switch (k) {
    case ObstacleKind::hole: return "hole";
    case ObstacleKind::pipe: return "pipe";
    case ObstacleKind::enemy: return "enemy";
  }
  return "?";
}

inline ObstacleKind kind_from_name(const std::string& s) {
  if (s == "hole") return ObstacleKind::hole;
  if (s == "pipe") return ObstacleKind::pipe;
  if (s == "enemy") return ObstacleKind::enemy;
  throw ConfigError("unknown obstacle kind '" + s + "'");
}

struct Obstacle {
  int position = 0;
  ObstacleKind kind = ObstacleKind::hole;
  friend bool operator==(const Obstacle&, const Obstacle&) = default;
};

using Rgb = std::array<std::uint8_t, 3>;

struct Palette {
  Rgb sky{135, 206, 235};
  Rgb floor{139, 69, 19};
  Rgb agent{255, 215, 0};
  Rgb hole{0, 0, 0};
  Rgb pipe{34, 139, 34};
  Rgb enemy{178, 34, 34};

  const Rgb& for_kind(ObstacleKind k) const {
    switch (k) {
      case ObstacleKind::hole: return hole;
      case ObstacleKind::pipe: return pipe;
      case ObstacleKind::enemy: return enemy;
    }
    return hole;
  }
  friend bool operator==(const Palette&, const Palette&) = default;
};

// Jump arc: initiating a jump keeps the agent at kJumpHeight for
// kJumpAirSteps consecutive steps (including the initiating one), then it
// lands. With lookahead <= 3 the scripted expert always clears obstacles.
inline constexpr int kJumpAirSteps = 3;
inline constexpr int kJumpHeight = 2;

struct CorridorConfig {
  int width = 48;   // tiles
  int height = 8;   // tiles
  std::vector<Obstacle> obstacles;  // empty -> procedural layout from seed
  int render_h = 64;
  int render_w = 64;
  Palette palette;
  std::uint64_t seed = 0;

  // Procedural layout knobs (used only when `obstacles` is empty).
  int gen_obstacle_count = 8;
  int gen_min_spacing = 4;   // guarantees the expert can always land safely
  int gen_max_spacing = 7;
  std::vector<ObstacleKind> gen_kinds{ObstacleKind::hole, ObstacleKind::pipe};

  friend bool operator==(const CorridorConfig&, const CorridorConfig&) = default;
};

inline void validate(const CorridorConfig& c) {
  if (c.width < 10) throw ConfigError("corridor width must be >= 10, got " + std::to_string(c.width));
  if (c.height < 6) throw ConfigError("corridor height must be >= 6, got " + std::to_string(c.height));
  if (c.render_h <= 0 || c.render_w <= 0) throw ConfigError("render size must be positive");
  if (c.render_h % c.height != 0)
    throw ConfigError("render height " + std::to_string(c.render_h) + " not divisible by " +
                      std::to_string(c.height) + " tiles");
  const int tile_px = c.render_h / c.height;
  if (c.render_w % tile_px != 0)
    throw ConfigError("render width " + std::to_string(c.render_w) + " not divisible by tile size " +
                      std::to_string(tile_px));
  if (c.render_w / tile_px < 4) throw ConfigError("viewport must span at least 4 tiles");
  int prev = 0;
  for (const auto& o : c.obstacles) {
    if (o.position < 1 || o.position > c.width - 1)
      throw ConfigError("obstacle position " + std::to_string(o.position) + " outside [1, " +
                        std::to_string(c.width - 1) + "]");
    if (o.position <= prev && prev != 0)
      throw ConfigError("obstacle positions must be strictly increasing");
    prev = o.position;
  }
  if (c.gen_obstacle_count < 0 || c.gen_min_spacing < 1 || c.gen_max_spacing < c.gen_min_spacing)
    throw ConfigError("bad procedural layout parameters");
  if (c.obstacles.empty() && c.gen_kinds.empty())
    throw ConfigError("procedural layout needs at least one obstacle kind");
}

// `.` floor, `H` hole, `P` pipe, `E` enemy. One character per tile column.
inline std::vector<Obstacle> parse_ascii_map(const std::string& map) {
  std::vector<Obstacle> out;
  for (std::size_t i = 0; i < map.size(); ++i) {
    const char ch = map[i];
    if (ch == '.') continue;
    ObstacleKind k;
    if (ch == 'H') k = ObstacleKind::hole;
    else if (ch == 'P') k = ObstacleKind::pipe;
    else if (ch == 'E') k = ObstacleKind::enemy;
    else throw ConfigError("bad map character '" + std::string(1, ch) + "' at column " + std::to_string(i));
    out.push_back({static_cast<int>(i), k});
  }
  return out;
}

inline std::vector<Obstacle> generate_layout(const CorridorConfig& c) {
  Rng rng = Rng::substream(c.seed, "corridor.layout");
  std::vector<Obstacle> out;
  int pos = c.gen_min_spacing + static_cast<int>(rng.uniform_index(3));
  while (static_cast<int>(out.size()) < c.gen_obstacle_count && pos <= c.width - 2) {
    const auto k = c.gen_kinds[rng.uniform_index(c.gen_kinds.size())];
    out.push_back({pos, k});
    pos += c.gen_min_spacing +
           static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(c.gen_max_spacing - c.gen_min_spacing + 1)));
  }
  return out;
}

struct Observation {
  int h = 0, w = 0;
  std::vector<std::uint8_t> pixels;  // row-major h*w*3

  bool operator==(const Observation&) const = default;
};

class CorridorEnv {
 public:
  explicit CorridorEnv(const CorridorConfig& config) : config_(config) {
    validate(config_);
    layout_ = config_.obstacles.empty() ? generate_layout(config_) : config_.obstacles;
    reset();
  }

  const CorridorConfig& config() const { return config_; }
  const std::vector<Obstacle>& layout() const { return layout_; }

  Observation reset() {
    agent_x_ = 0;
    air_steps_ = 0;
    done_ = false;
    return render();
  }

  struct StepResult {
    Observation observation;
    bool done = false;
  };

  StepResult step(ActionId action) {
    if (done_) throw StateError("step() called on a finished episode");
    // +1 absorbs this step's decrement: the agent is elevated for exactly
    // kJumpAirSteps end-of-step positions starting with this one.
    if (height() == 0 && has_jump(action)) air_steps_ = kJumpAirSteps + 1;
    if (has_right(action)) agent_x_ += 1;
    if (air_steps_ > 0) air_steps_ -= 1;

    if (agent_x_ >= config_.width - 1) {
      done_ = true;  // reached the right edge
    } else if (height() == 0) {
      if (const auto* o = obstacle_at(agent_x_)) {
        (void)o;
        done_ = true;  // fell into a hole or walked into a solid obstacle
      }
    }
    return {render(), done_};
  }

  bool done() const { return done_; }
  int agent_x() const { return agent_x_; }
  int height() const { return air_steps_ > 0 ? kJumpHeight : 0; }
  bool airborne() const { return height() > 0; }

  const Obstacle* obstacle_at(int x) const {
    for (const auto& o : layout_)
      if (o.position == x) return &o;
    return nullptr;
  }

  // Nearest obstacle strictly ahead of the agent, if any.
  std::optional<Obstacle> nearest_ahead() const {
    for (const auto& o : layout_)
      if (o.position > agent_x_) return o;
    return std::nullopt;
  }

  int tile_px() const { return config_.render_h / config_.height; }
  int view_tiles() const { return config_.render_w / tile_px(); }
  int camera_col() const { return 2; }  // agent's fixed on-screen tile column

  // Pixel bounding box {x0, y0, x1, y1} (inclusive) of the tiles an obstacle
  // occupies in the current frame, or nullopt when off-screen.
  std::optional<std::array<int, 4>> screen_bbox(const Obstacle& o) const {
    const int px = tile_px();
    const int col = o.position - agent_x_ + camera_col();
    if (col < 0 || col >= view_tiles()) return std::nullopt;
    int row0, row1;
    switch (o.kind) {
      case ObstacleKind::hole: row0 = row1 = config_.height - 1; break;
      case ObstacleKind::pipe: row0 = config_.height - 3; row1 = config_.height - 2; break;
      case ObstacleKind::enemy: row0 = row1 = config_.height - 2; break;
      default: return std::nullopt;
    }
    return std::array<int, 4>{col * px, row0 * px, (col + 1) * px - 1, (row1 + 1) * px - 1};
  }

  Observation render() const {
    const int px = tile_px();
    const int vt = view_tiles();
    Observation obs;
    obs.h = config_.render_h;
    obs.w = config_.render_w;
    obs.pixels.assign(static_cast<std::size_t>(obs.h) * obs.w * 3, 0);
    const Palette& pal = config_.palette;

    const int floor_row = config_.height - 1;
    for (int col = 0; col < vt; ++col) {
      const int wx = agent_x_ + col - camera_col();
      const Obstacle* o = (wx >= 0 && wx < config_.width) ? obstacle_at(wx) : nullptr;
      for (int row = 0; row < config_.height; ++row) {
        Rgb c = pal.sky;
        if (row == floor_row) c = pal.floor;
        if (o) {
          switch (o->kind) {
            case ObstacleKind::hole:
              if (row == floor_row) c = pal.hole;
              break;
            case ObstacleKind::pipe:
              if (row == floor_row - 1 || row == floor_row - 2) c = pal.pipe;
              break;
            case ObstacleKind::enemy:
              if (row == floor_row - 1) c = pal.enemy;
              break;
          }
        }
        fill_tile(obs, px, row, col, c);
      }
    }
    // Agent on top, one tile, raised by its jump height.
    const int agent_row = config_.height - 2 - height();
    if (agent_row >= 0) fill_tile(obs, px, agent_row, camera_col(), pal.agent);
    return obs;
  }

 private:
  static void fill_tile(Observation& obs, int px, int row, int col, const Rgb& c) {
    for (int y = row * px; y < (row + 1) * px; ++y) {
      for (int x = col * px; x < (col + 1) * px; ++x) {
        auto* p = &obs.pixels[(static_cast<std::size_t>(y) * obs.w + x) * 3];
        p[0] = c[0];
        p[1] = c[1];
        p[2] = c[2];
      }
    }
  }

  CorridorConfig config_;
  std::vector<Obstacle> layout_;
  int agent_x_ = 0;
  int air_steps_ = 0;
  bool done_ = false;
};

inline std::pair<CorridorEnv, Observation> reset(const CorridorConfig& config) {
  CorridorEnv env(config);
  Observation obs = env.render();
  return {std::move(env), std::move(obs)};
}

// Scripted expert: jumps when an obstacle is within `lookahead` tiles ahead,
// otherwise walks right. The per-kind table decides which jump action fires.
struct ScriptedExpert {
  int lookahead = 3;
  std::array<ActionId, 3> action_table{ActionId::right_jump, ActionId::right_jump,
                                       ActionId::right_jump};  // hole, pipe, enemy

  ActionId action_for(ObstacleKind k) const { return action_table[static_cast<int>(k)]; }
};

inline ScriptedExpert good_expert() { return ScriptedExpert{}; }

// Never jumps; dies at the first obstacle.
inline ScriptedExpert bad_expert() {
  ScriptedExpert e;
  e.action_table = {ActionId::right, ActionId::right, ActionId::right};
  return e;
}

inline bool emits_jump(const ScriptedExpert& e) {
  for (ActionId a : e.action_table)
    if (has_jump(a)) return true;
  return false;
}

inline ActionId expert_action(const ScriptedExpert& expert, const CorridorEnv& env) {
  if (env.done()) throw StateError("expert_action() on a finished episode");
  if (!env.airborne()) {
    if (auto o = env.nearest_ahead()) {
      const int d = o->position - env.agent_x();
      if (d >= 1 && d <= expert.lookahead) return expert.action_for(o->kind);
    }
  }
  return ActionId::right;
}

// Ground truth about the state at each step of a replayed episode, used by
// the evaluation and diagnosis tooling.
struct StepInfo {
  int agent_x = 0;
  bool airborne = false;
  std::optional<Obstacle> nearest;              // nearest obstacle strictly ahead
  int nearest_distance = -1;                    // tiles; -1 when none
  std::optional<std::array<int, 4>> nearest_bbox;  // pixel bbox in this frame
};

inline StepInfo step_info(const CorridorEnv& env) {
  StepInfo info;
  info.agent_x = env.agent_x();
  info.airborne = env.airborne();
  info.nearest = env.nearest_ahead();
  if (info.nearest) {
    info.nearest_distance = info.nearest->position - env.agent_x();
    info.nearest_bbox = env.screen_bbox(*info.nearest);
  }
  return info;
}

// Replays a recorded action sequence and reports per-step ground truth,
// where entry t describes the state the t-th action was taken in.
inline std::vector<StepInfo> replay_info(const CorridorConfig& config,
                                         const std::vector<ActionId>& actions) {
  CorridorEnv env(config);
  std::vector<StepInfo> out;
  out.reserve(actions.size());
  for (ActionId a : actions) {
    out.push_back(step_info(env));
    if (env.done()) throw StateError("replay: action recorded after episode end");
    env.step(a);
  }
  return out;
}

inline void to_json(Json& j, const CorridorConfig& c) {
  Json obs = Json::array();
  for (const auto& o : c.obstacles) obs.push_back({o.position, kind_name(o.kind)});
  Json kinds = Json::array();
  for (auto k : c.gen_kinds) kinds.push_back(kind_name(k));
  j = Json{{"width", c.width},
           {"height", c.height},
           {"obstacles", obs},
           {"render_h", c.render_h},
           {"render_w", c.render_w},
           {"seed", c.seed},
           {"gen_obstacle_count", c.gen_obstacle_count},
           {"gen_min_spacing", c.gen_min_spacing},
           {"gen_max_spacing", c.gen_max_spacing},
           {"gen_kinds", kinds},
           {"palette",
            {{"sky", c.palette.sky}, {"floor", c.palette.floor}, {"agent", c.palette.agent},
             {"hole", c.palette.hole}, {"pipe", c.palette.pipe}, {"enemy", c.palette.enemy}}}};
}

inline void from_json(const Json& j, CorridorConfig& c) {
  j.at("width").get_to(c.width);
  j.at("height").get_to(c.height);
  c.obstacles.clear();
  for (const auto& e : j.at("obstacles"))
    c.obstacles.push_back({e.at(0).get<int>(), kind_from_name(e.at(1).get<std::string>())});
  j.at("render_h").get_to(c.render_h);
  j.at("render_w").get_to(c.render_w);
  j.at("seed").get_to(c.seed);
  j.at("gen_obstacle_count").get_to(c.gen_obstacle_count);
  j.at("gen_min_spacing").get_to(c.gen_min_spacing);
  j.at("gen_max_spacing").get_to(c.gen_max_spacing);
  c.gen_kinds.clear();
  for (const auto& e : j.at("gen_kinds")) c.gen_kinds.push_back(kind_from_name(e.get<std::string>()));
  const auto& p = j.at("palette");
  p.at("sky").get_to(c.palette.sky);
  p.at("floor").get_to(c.palette.floor);
  p.at("agent").get_to(c.palette.agent);
  p.at("hole").get_to(c.palette.hole);
  p.at("pipe").get_to(c.palette.pipe);
  p.at("enemy").get_to(c.palette.enemy);
}

}  // namespace protox::env
