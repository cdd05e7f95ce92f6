#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "protox/core/error.hpp"
#include "protox/core/rng.hpp"
#include "protox/env/corridor.hpp"
#include "protox/pretrain/miner.hpp"
#include "protox/pretrain/pretrain.hpp"
#include "protox/pretrain/vae.hpp"
#include "protox/train/objective.hpp"
#include "protox/train/trainer.hpp"

namespace protox {

namespace cfgdetail {

inline long long parse_int(const std::string& s, const std::string& key) {
  long long v = 0;
  const auto* b = s.data();
  const auto* e = s.data() + s.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc{} || p != e)
    throw ConfigError(key + ": '" + s + "' is not an integer");
  return v;
}

inline double parse_double(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": '" + s + "' is not a number");
  }
}

inline std::vector<std::string> split_list(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty() || !out.empty()) out.push_back(cur);
  return out;
}

inline env::Rgb parse_rgb(const std::string& s, const std::string& key) {
  std::string h = s;
  if (!h.empty() && h[0] == '#') h = h.substr(1);
  if (h.size() != 6) throw ConfigError(key + ": expected RRGGBB hex color, got '" + s + "'");
  auto hexbyte = [&](int i) {
    const std::string b = h.substr(static_cast<std::size_t>(i), 2);
    return static_cast<std::uint8_t>(std::stoul(b, nullptr, 16));
  };
  try {
    return {hexbyte(0), hexbyte(2), hexbyte(4)};
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected RRGGBB hex color, got '" + s + "'");
  }
}

inline std::string rgb_str(const env::Rgb& c) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "%02x%02x%02x", c[0], c[1], c[2]);
  return buf;
}

}  // namespace cfgdetail

// Whole-pipeline configuration. Every key has a default; unknown keys are
// rejected by name. Values can come from a key-value file ([section] blocks)
// or from --set section.key=value overrides.
struct PipelineConfig {
  // [env]
  int env_width = 48;
  int env_height = 8;
  int render_h = 64, render_w = 64;
  std::string env_map;         // ASCII layout; overrides obstacles and width
  std::string env_obstacles;   // "pos:kind,pos:kind"; empty -> procedural
  int obstacle_count = 8;
  int min_spacing = 4;
  int max_spacing = 7;
  std::string obstacle_kinds = "hole,pipe";
  env::Palette palette;

  // [data]
  std::uint64_t n_pairs = 13000;
  int stack_depth = 2;
  double train_fraction = 0.8;
  std::string expert = "good";

  // [pretrain]
  pretrain::MinerConfig miner;
  int pre_epochs = 16;
  int pre_batch_size = 32;
  double pre_learning_rate = 1e-3;
  int quadruplets_per_epoch = 1200;
  double kl_weight = 1.0;
  double vae_weight = 1.0;
  double target_distance = 30.0;
  int latent_channels = 16;
  std::string enc_channels = "16,32,32,32";
  std::string dec_channels = "32,32,16,16";

  // [train]
  train::ObjectiveWeights weights;
  int train_epochs = 120;
  int train_batch_size = 256;
  double train_learning_rate = 1e-3;
  int projection_period = 25;
  int initial_k = 25;
  int rep_subsample = 4096;
  double beta = 0.05;

  // [explain]
  int patch_size = 8;
  int patch_stride = 4;
  double keep_fraction = 0.95;
  int overlay_n = 60;
  int top_k = 5;
  std::string mask = "mean";  // mean | identity | RRGGBB
  int n_explanations = 6;

  // [paths] (relative to the --out directory)
  std::string path_train = "train.ptxd";
  std::string path_test = "test.ptxd";
  std::string path_encoder = "encoder.ptxe";
  std::string path_model = "model.ptxm";
  std::string path_merged = "model_merged.ptxm";
  std::string path_history = "history.json";
  std::string path_eval = "eval.json";
  std::string path_report = "report";
  std::string bad_prefix = "bad_";

  struct Key {
    std::string name;
    std::string desc;
    std::function<void(PipelineConfig&, const std::string&)> set;
    std::function<std::string(const PipelineConfig&)> get;
  };

  static const std::vector<Key>& registry();

  void set_key(const std::string& dotted, const std::string& value) {
    for (const auto& k : registry()) {
      if (k.name == dotted) {
        k.set(*this, value);
        return;
      }
    }
    throw ConfigError("unknown config key '" + dotted + "'");
  }

  // Applies "section.key=value".
  void apply_set(const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw ConfigError("--set expects section.key=value, got '" + kv + "'");
    set_key(kv.substr(0, eq), kv.substr(eq + 1));
  }

  void apply_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DependencyError("config file not found: " + path.string());
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      // Strip comments and whitespace.
      const auto hash = line.find_first_of("#;");
      if (hash != std::string::npos) line = line.substr(0, hash);
      auto l = line.find_first_not_of(" \t\r");
      if (l == std::string::npos) continue;
      auto r = line.find_last_not_of(" \t\r");
      line = line.substr(l, r - l + 1);

      if (line.front() == '[') {
        if (line.back() != ']')
          throw ConfigError(path.string() + ":" + std::to_string(lineno) + ":" +
                            std::to_string(line.size()) + ": unterminated [section]");
        section = line.substr(1, line.size() - 2);
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError(path.string() + ":" + std::to_string(lineno) + ":1: expected key = value");
      auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t");
        if (a == std::string::npos) return std::string{};
        const auto b = s.find_last_not_of(" \t");
        return s.substr(a, b - a + 1);
      };
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty())
        throw ConfigError(path.string() + ":" + std::to_string(lineno) + ":1: empty key");
      const std::string dotted = section.empty() ? key : section + "." + key;
      try {
        set_key(dotted, value);
      } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ":" + std::to_string(lineno) + ":" +
                          std::to_string(eq + 2) + ": " + e.what());
      }
    }
  }

  // Deterministic dump of every key (registry order); hashed into manifests.
  std::string canonical() const {
    std::string out;
    for (const auto& k : registry()) out += k.name + " = " + k.get(*this) + "\n";
    return out;
  }

  std::uint64_t config_hash() const { return fnv1a64(canonical()); }

  static std::string help() {
    std::string out = "config keys (section.key = default):\n";
    for (const auto& k : registry()) {
      PipelineConfig d;
      out += "  " + k.name + " = " + k.get(d) + "\n      " + k.desc + "\n";
    }
    return out;
  }

  env::CorridorConfig env_config(std::uint64_t seed) const {
    env::CorridorConfig c;
    c.width = env_width;
    c.height = env_height;
    c.render_h = render_h;
    c.render_w = render_w;
    c.palette = palette;
    c.seed = seed;
    c.gen_obstacle_count = obstacle_count;
    c.gen_min_spacing = min_spacing;
    c.gen_max_spacing = max_spacing;
    c.gen_kinds.clear();
    for (const auto& k : cfgdetail::split_list(obstacle_kinds, ','))
      c.gen_kinds.push_back(env::kind_from_name(k));
    if (!env_map.empty()) {
      c.obstacles = env::parse_ascii_map(env_map);
      c.width = static_cast<int>(env_map.size());
    } else if (!env_obstacles.empty()) {
      for (const auto& item : cfgdetail::split_list(env_obstacles, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos)
          throw ConfigError("env.obstacles: expected pos:kind, got '" + item + "'");
        c.obstacles.push_back(
            {static_cast<int>(cfgdetail::parse_int(item.substr(0, colon), "env.obstacles")),
             env::kind_from_name(item.substr(colon + 1))});
      }
    }
    env::validate(c);
    return c;
  }

  pretrain::VaeConfig vae_config() const {
    pretrain::VaeConfig v;
    v.in_channels = stack_depth * 3;
    v.in_h = render_h;
    v.in_w = render_w;
    v.latent_channels = latent_channels;
    v.enc_channels.clear();
    for (const auto& s : cfgdetail::split_list(enc_channels, ','))
      v.enc_channels.push_back(static_cast<int>(cfgdetail::parse_int(s, "pretrain.enc_channels")));
    v.dec_channels.clear();
    for (const auto& s : cfgdetail::split_list(dec_channels, ','))
      v.dec_channels.push_back(static_cast<int>(cfgdetail::parse_int(s, "pretrain.dec_channels")));
    v.validate();
    return v;
  }

  std::optional<std::array<double, 3>> mask_fill(const data::DemonstrationDataset& d) const {
    if (mask == "identity") return std::nullopt;
    if (mask == "mean") return data::mean_pixel(d);
    const env::Rgb c = cfgdetail::parse_rgb(mask, "explain.mask");
    return std::array<double, 3>{static_cast<double>(c[0]), static_cast<double>(c[1]),
                                 static_cast<double>(c[2])};
  }
};

inline const std::vector<PipelineConfig::Key>& PipelineConfig::registry() {
  using C = PipelineConfig;
  auto num = [](auto v) {
    std::ostringstream os;
    os << v;
    return os.str();
  };
  static const std::vector<Key> keys = {
      {"env.width", "corridor width in tiles (>= 10)",
       [](C& c, const std::string& v) { c.env_width = static_cast<int>(cfgdetail::parse_int(v, "env.width")); },
       [num](const C& c) { return num(c.env_width); }},
      {"env.height", "corridor height in tiles (>= 6)",
       [](C& c, const std::string& v) { c.env_height = static_cast<int>(cfgdetail::parse_int(v, "env.height")); },
       [num](const C& c) { return num(c.env_height); }},
      {"env.render", "rendered frame size as HxW, divisible by the tile grid",
       [](C& c, const std::string& v) {
         const auto x = v.find('x');
         if (x == std::string::npos) throw ConfigError("env.render: expected HxW, got '" + v + "'");
         c.render_h = static_cast<int>(cfgdetail::parse_int(v.substr(0, x), "env.render"));
         c.render_w = static_cast<int>(cfgdetail::parse_int(v.substr(x + 1), "env.render"));
       },
       [num](const C& c) { return num(c.render_h) + "x" + num(c.render_w); }},
      {"env.map", "ASCII layout (. floor, H hole, P pipe, E enemy); overrides width/obstacles",
       [](C& c, const std::string& v) { c.env_map = v; },
       [](const C& c) { return c.env_map; }},
      {"env.obstacles", "explicit layout as pos:kind,...; empty = procedural per episode seed",
       [](C& c, const std::string& v) { c.env_obstacles = v; },
       [](const C& c) { return c.env_obstacles; }},
      {"env.obstacle_count", "procedural layout: obstacles per episode",
       [](C& c, const std::string& v) { c.obstacle_count = static_cast<int>(cfgdetail::parse_int(v, "env.obstacle_count")); },
       [num](const C& c) { return num(c.obstacle_count); }},
      {"env.min_spacing", "procedural layout: minimum tiles between obstacles",
       [](C& c, const std::string& v) { c.min_spacing = static_cast<int>(cfgdetail::parse_int(v, "env.min_spacing")); },
       [num](const C& c) { return num(c.min_spacing); }},
      {"env.max_spacing", "procedural layout: maximum tiles between obstacles",
       [](C& c, const std::string& v) { c.max_spacing = static_cast<int>(cfgdetail::parse_int(v, "env.max_spacing")); },
       [num](const C& c) { return num(c.max_spacing); }},
      {"env.kinds", "procedural layout: obstacle kinds to draw from",
       [](C& c, const std::string& v) { c.obstacle_kinds = v; },
       [](const C& c) { return c.obstacle_kinds; }},
      {"env.palette_sky", "sky color (RRGGBB)",
       [](C& c, const std::string& v) { c.palette.sky = cfgdetail::parse_rgb(v, "env.palette_sky"); },
       [](const C& c) { return cfgdetail::rgb_str(c.palette.sky); }},
      {"env.palette_floor", "floor color (RRGGBB)",
       [](C& c, const std::string& v) { c.palette.floor = cfgdetail::parse_rgb(v, "env.palette_floor"); },
       [](const C& c) { return cfgdetail::rgb_str(c.palette.floor); }},
      {"env.palette_agent", "agent color (RRGGBB)",
       [](C& c, const std::string& v) { c.palette.agent = cfgdetail::parse_rgb(v, "env.palette_agent"); },
       [](const C& c) { return cfgdetail::rgb_str(c.palette.agent); }},
      {"env.palette_hole", "hole color (RRGGBB)",
       [](C& c, const std::string& v) { c.palette.hole = cfgdetail::parse_rgb(v, "env.palette_hole"); },
       [](const C& c) { return cfgdetail::rgb_str(c.palette.hole); }},
      {"env.palette_pipe", "pipe color (RRGGBB)",
       [](C& c, const std::string& v) { c.palette.pipe = cfgdetail::parse_rgb(v, "env.palette_pipe"); },
       [](const C& c) { return cfgdetail::rgb_str(c.palette.pipe); }},
      {"env.palette_enemy", "enemy color (RRGGBB)",
       [](C& c, const std::string& v) { c.palette.enemy = cfgdetail::parse_rgb(v, "env.palette_enemy"); },
       [](const C& c) { return cfgdetail::rgb_str(c.palette.enemy); }},

      {"data.n_pairs", "state-action pairs to collect (before the split)",
       [](C& c, const std::string& v) { c.n_pairs = static_cast<std::uint64_t>(cfgdetail::parse_int(v, "data.n_pairs")); },
       [num](const C& c) { return num(c.n_pairs); }},
      {"data.stack_depth", "observations stacked per state (C)",
       [](C& c, const std::string& v) { c.stack_depth = static_cast<int>(cfgdetail::parse_int(v, "data.stack_depth")); },
       [num](const C& c) { return num(c.stack_depth); }},
      {"data.train_fraction", "fraction of episodes assigned to the training split",
       [](C& c, const std::string& v) { c.train_fraction = cfgdetail::parse_double(v, "data.train_fraction"); },
       [num](const C& c) { return num(c.train_fraction); }},
      {"data.expert", "demonstration source: good | bad",
       [](C& c, const std::string& v) {
         if (v != "good" && v != "bad") throw ConfigError("data.expert: expected good or bad, got '" + v + "'");
         c.expert = v;
       },
       [](const C& c) { return c.expert; }},

      {"pretrain.delta_time", "temporal window radius for quadruplet mining",
       [](C& c, const std::string& v) { c.miner.delta_time = static_cast<int>(cfgdetail::parse_int(v, "pretrain.delta_time")); },
       [num](const C& c) { return num(c.miner.delta_time); }},
      {"pretrain.margin1", "quadruplet margin m1",
       [](C& c, const std::string& v) { c.miner.margin1 = cfgdetail::parse_double(v, "pretrain.margin1"); },
       [num](const C& c) { return num(c.miner.margin1); }},
      {"pretrain.margin2", "quadruplet margin m2",
       [](C& c, const std::string& v) { c.miner.margin2 = cfgdetail::parse_double(v, "pretrain.margin2"); },
       [num](const C& c) { return num(c.miner.margin2); }},
      {"pretrain.max_resamples", "cross-episode far-negative redraw bound",
       [](C& c, const std::string& v) { c.miner.max_resamples = static_cast<int>(cfgdetail::parse_int(v, "pretrain.max_resamples")); },
       [num](const C& c) { return num(c.miner.max_resamples); }},
      {"pretrain.epochs", "encoder pre-training epochs",
       [](C& c, const std::string& v) { c.pre_epochs = static_cast<int>(cfgdetail::parse_int(v, "pretrain.epochs")); },
       [num](const C& c) { return num(c.pre_epochs); }},
      {"pretrain.batch_size", "quadruplets per gradient step",
       [](C& c, const std::string& v) { c.pre_batch_size = static_cast<int>(cfgdetail::parse_int(v, "pretrain.batch_size")); },
       [num](const C& c) { return num(c.pre_batch_size); }},
      {"pretrain.learning_rate", "encoder Adam learning rate",
       [](C& c, const std::string& v) { c.pre_learning_rate = cfgdetail::parse_double(v, "pretrain.learning_rate"); },
       [num](const C& c) { return num(c.pre_learning_rate); }},
      {"pretrain.quadruplets_per_epoch", "mined quadruplets per epoch",
       [](C& c, const std::string& v) { c.quadruplets_per_epoch = static_cast<int>(cfgdetail::parse_int(v, "pretrain.quadruplets_per_epoch")); },
       [num](const C& c) { return num(c.quadruplets_per_epoch); }},
      {"pretrain.kl_weight", "weight of the KL term in the VAE loss",
       [](C& c, const std::string& v) { c.kl_weight = cfgdetail::parse_double(v, "pretrain.kl_weight"); },
       [num](const C& c) { return num(c.kl_weight); }},
      {"pretrain.vae_weight", "weight of the VAE loss against the quadruplet loss",
       [](C& c, const std::string& v) { c.vae_weight = cfgdetail::parse_double(v, "pretrain.vae_weight"); },
       [num](const C& c) { return num(c.vae_weight); }},
      {"pretrain.target_distance", "median pairwise latent distance after freeze calibration (0 = off)",
       [](C& c, const std::string& v) { c.target_distance = cfgdetail::parse_double(v, "pretrain.target_distance"); },
       [num](const C& c) { return num(c.target_distance); }},
      {"pretrain.latent_channels", "latent block channels C'",
       [](C& c, const std::string& v) { c.latent_channels = static_cast<int>(cfgdetail::parse_int(v, "pretrain.latent_channels")); },
       [num](const C& c) { return num(c.latent_channels); }},
      {"pretrain.enc_channels", "encoder block channels (comma list; one stride-2 block each)",
       [](C& c, const std::string& v) { c.enc_channels = v; },
       [](const C& c) { return c.enc_channels; }},
      {"pretrain.dec_channels", "decoder block channels (comma list, same length)",
       [](C& c, const std::string& v) { c.dec_channels = v; },
       [](const C& c) { return c.dec_channels; }},

      {"train.epochs", "behavior-cloning epochs",
       [](C& c, const std::string& v) { c.train_epochs = static_cast<int>(cfgdetail::parse_int(v, "train.epochs")); },
       [num](const C& c) { return num(c.train_epochs); }},
      {"train.batch_size", "behavior-cloning batch size",
       [](C& c, const std::string& v) { c.train_batch_size = static_cast<int>(cfgdetail::parse_int(v, "train.batch_size")); },
       [num](const C& c) { return num(c.train_batch_size); }},
      {"train.learning_rate", "head Adam learning rate",
       [](C& c, const std::string& v) { c.train_learning_rate = cfgdetail::parse_double(v, "train.learning_rate"); },
       [num](const C& c) { return num(c.train_learning_rate); }},
      {"train.projection_period", "epochs between prototype projections",
       [](C& c, const std::string& v) { c.projection_period = static_cast<int>(cfgdetail::parse_int(v, "train.projection_period")); },
       [num](const C& c) { return num(c.projection_period); }},
      {"train.initial_k", "initial prototypes per action",
       [](C& c, const std::string& v) { c.initial_k = static_cast<int>(cfgdetail::parse_int(v, "train.initial_k")); },
       [num](const C& c) { return num(c.initial_k); }},
      {"train.rep_subsample", "encodings sampled per epoch for the representability term",
       [](C& c, const std::string& v) { c.rep_subsample = static_cast<int>(cfgdetail::parse_int(v, "train.rep_subsample")); },
       [num](const C& c) { return num(c.rep_subsample); }},
      {"train.lambda_sep", "separation term weight",
       [](C& c, const std::string& v) { c.weights.lambda_sep = cfgdetail::parse_double(v, "train.lambda_sep"); },
       [num](const C& c) { return num(c.weights.lambda_sep); }},
      {"train.lambda_clst", "clustering term weight",
       [](C& c, const std::string& v) { c.weights.lambda_clst = cfgdetail::parse_double(v, "train.lambda_clst"); },
       [num](const C& c) { return num(c.weights.lambda_clst); }},
      {"train.lambda_rep", "representability term weight",
       [](C& c, const std::string& v) { c.weights.lambda_rep = cfgdetail::parse_double(v, "train.lambda_rep"); },
       [num](const C& c) { return num(c.weights.lambda_rep); }},
      {"train.lambda_iso", "isometry penalty weight",
       [](C& c, const std::string& v) { c.weights.lambda_iso = cfgdetail::parse_double(v, "train.lambda_iso"); },
       [num](const C& c) { return num(c.weights.lambda_iso); }},
      {"train.beta", "similarity concentration",
       [](C& c, const std::string& v) { c.beta = cfgdetail::parse_double(v, "train.beta"); },
       [num](const C& c) { return num(c.beta); }},

      {"explain.patch_size", "importance-map mask patch size (pixels)",
       [](C& c, const std::string& v) { c.patch_size = static_cast<int>(cfgdetail::parse_int(v, "explain.patch_size")); },
       [num](const C& c) { return num(c.patch_size); }},
      {"explain.stride", "importance-map mask stride (pixels)",
       [](C& c, const std::string& v) { c.patch_stride = static_cast<int>(cfgdetail::parse_int(v, "explain.stride")); },
       [num](const C& c) { return num(c.patch_stride); }},
      {"explain.keep_fraction", "fraction of importance pixels kept after thresholding",
       [](C& c, const std::string& v) { c.keep_fraction = cfgdetail::parse_double(v, "explain.keep_fraction"); },
       [num](const C& c) { return num(c.keep_fraction); }},
      {"explain.overlay_n", "states blended into a nearest-state overlay",
       [](C& c, const std::string& v) { c.overlay_n = static_cast<int>(cfgdetail::parse_int(v, "explain.overlay_n")); },
       [num](const C& c) { return num(c.overlay_n); }},
      {"explain.top_k", "contributions rendered per explanation",
       [](C& c, const std::string& v) { c.top_k = static_cast<int>(cfgdetail::parse_int(v, "explain.top_k")); },
       [num](const C& c) { return num(c.top_k); }},
      {"explain.mask", "mask fill: mean | identity | RRGGBB",
       [](C& c, const std::string& v) { c.mask = v; },
       [](const C& c) { return c.mask; }},
      {"explain.n_explanations", "states explained by the explain command",
       [](C& c, const std::string& v) { c.n_explanations = static_cast<int>(cfgdetail::parse_int(v, "explain.n_explanations")); },
       [num](const C& c) { return num(c.n_explanations); }},

      {"paths.train_data", "training dataset file name",
       [](C& c, const std::string& v) { c.path_train = v; }, [](const C& c) { return c.path_train; }},
      {"paths.test_data", "test dataset file name",
       [](C& c, const std::string& v) { c.path_test = v; }, [](const C& c) { return c.path_test; }},
      {"paths.encoder", "encoder checkpoint file name",
       [](C& c, const std::string& v) { c.path_encoder = v; }, [](const C& c) { return c.path_encoder; }},
      {"paths.model", "trained model checkpoint file name",
       [](C& c, const std::string& v) { c.path_model = v; }, [](const C& c) { return c.path_model; }},
      {"paths.merged_model", "merged model checkpoint file name",
       [](C& c, const std::string& v) { c.path_merged = v; }, [](const C& c) { return c.path_merged; }},
      {"paths.history", "training history file name",
       [](C& c, const std::string& v) { c.path_history = v; }, [](const C& c) { return c.path_history; }},
      {"paths.eval", "evaluation report file name",
       [](C& c, const std::string& v) { c.path_eval = v; }, [](const C& c) { return c.path_eval; }},
      {"paths.report_dir", "explanation report directory name",
       [](C& c, const std::string& v) { c.path_report = v; }, [](const C& c) { return c.path_report; }},
      {"paths.bad_prefix", "file-name prefix for the bad-agent pipeline artifacts",
       [](C& c, const std::string& v) { c.bad_prefix = v; }, [](const C& c) { return c.bad_prefix; }},
  };
  return keys;
}

}  // namespace protox
