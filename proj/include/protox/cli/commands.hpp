#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "protox/config.hpp"
#include "protox/core/error.hpp"
#include "protox/core/io.hpp"
#include "protox/data/annotate.hpp"
#include "protox/data/dataset.hpp"
#include "protox/diagnostics/diagnose.hpp"
#include "protox/eval/metrics.hpp"
#include "protox/explain/explain.hpp"
#include "protox/explain/report.hpp"
#include "protox/model/head.hpp"
#include "protox/pretrain/pretrain.hpp"
#include "protox/train/trainer.hpp"

namespace protox::cli {

inline constexpr const char* kToolVersion = "0.1.0";

using Scalar = float;
namespace fs = std::filesystem;

struct Options {
  fs::path out = "out";
  std::string config_file;
  std::vector<std::string> sets;
  std::uint64_t seed = 0;
  int workers = 0;
  bool force = false;
  std::ostream* log = &std::cout;
};

inline PipelineConfig make_config(const Options& o) {
  PipelineConfig cfg;
  if (!o.config_file.empty()) cfg.apply_file(o.config_file);
  for (const auto& s : o.sets) cfg.apply_set(s);
  return cfg;
}

namespace detail {

inline void require_file(const fs::path& p, const std::string& producer) {
  if (!fs::exists(p))
    throw DependencyError("missing upstream artifact " + p.string() + " (produce it with `protox " +
                          producer + "`)");
}

// Stages always recompute; an existing artifact is only replaced with --force.
inline void prepare_output(const fs::path& p, bool force) {
  if (fs::exists(p) && !force)
    throw ConfigError("output " + p.string() + " already exists; pass --force to overwrite");
  if (p.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
  }
}

inline void write_manifest(const fs::path& artifact, const std::string& command,
                           const Options& opts, const PipelineConfig& cfg,
                           const std::vector<fs::path>& inputs) {
  Json in = Json::object();
  for (const auto& p : inputs) in[p.filename().string()] = hex64(hash_file(p));
  const Json manifest{{"tool_version", kToolVersion},
                      {"command", command},
                      {"seed", opts.seed},
                      {"config_hash", hex64(cfg.config_hash())},
                      {"inputs", in},
                      {"artifact", artifact.filename().string()},
                      {"artifact_hash", hex64(hash_file(artifact))}};
  std::ofstream f(artifact.string() + ".manifest.json", std::ios::trunc);
  if (!f) throw IoError("cannot write manifest for " + artifact.string());
  f << manifest.dump(2) << "\n";
}

inline std::string prefix_for(const PipelineConfig& cfg) {
  return cfg.expert == "bad" ? cfg.bad_prefix : "";
}

inline model::ProtoXModel<Scalar> load_model_checked(const fs::path& model_path,
                                                     const fs::path& encoder_path, bool force) {
  require_file(model_path, "train");
  require_file(encoder_path, "pretrain");
  auto encoder = pretrain::load_encoder<Scalar>(encoder_path);
  auto m = model::load_model<Scalar>(model_path, std::move(encoder));
  const std::string h = hex64(hash_file(encoder_path));
  if (!m.encoder_hash.empty() && m.encoder_hash != h && !force)
    throw DependencyError("encoder " + encoder_path.string() + " (hash " + h +
                          ") does not match the one the model was trained with (hash " +
                          m.encoder_hash + "); pass --force to override");
  return m;
}

}  // namespace detail

inline int cmd_collect(const Options& opts) {
  const PipelineConfig cfg = make_config(opts);
  const std::string prefix = detail::prefix_for(cfg);
  const fs::path train_path = opts.out / (prefix + cfg.path_train);
  const fs::path test_path = opts.out / (prefix + cfg.path_test);
  detail::prepare_output(train_path, opts.force);
  detail::prepare_output(test_path, opts.force);

  const auto expert = cfg.expert == "bad" ? env::bad_expert() : env::good_expert();
  const auto base = cfg.env_config(opts.seed);
  (*opts.log) << "collecting " << cfg.n_pairs << " state-action pairs (" << cfg.expert
              << " expert)...\n";
  auto dataset = data::collect_corridor(base, expert, cfg.n_pairs, opts.seed, cfg.stack_depth);
  auto [train_set, test_set] = data::split(dataset, cfg.train_fraction, opts.seed);
  (*opts.log) << "collected " << dataset.n_states() << " pairs over " << dataset.n_episodes()
              << " episodes; split " << train_set.n_states() << "/" << test_set.n_states() << "\n";

  data::save(train_set, train_path);
  data::save(test_set, test_path);
  detail::write_manifest(train_path, "collect", opts, cfg, {});
  detail::write_manifest(test_path, "collect", opts, cfg, {});
  return 0;
}

inline int cmd_pretrain(const Options& opts) {
  const PipelineConfig cfg = make_config(opts);
  const fs::path train_path = opts.out / cfg.path_train;
  const fs::path enc_path = opts.out / cfg.path_encoder;
  detail::require_file(train_path, "collect");
  detail::prepare_output(enc_path, opts.force);

  const auto dataset = data::load(train_path);
  pretrain::PretrainConfig pc;
  pc.epochs = cfg.pre_epochs;
  pc.batch_size = cfg.pre_batch_size;
  pc.learning_rate = cfg.pre_learning_rate;
  pc.quadruplets_per_epoch = cfg.quadruplets_per_epoch;
  pc.kl_weight = cfg.kl_weight;
  pc.vae_weight = cfg.vae_weight;
  pc.target_median_distance = cfg.target_distance;
  pc.seed = opts.seed;
  pc.workers = opts.workers;

  auto [encoder, history] = pretrain::pretrain_encoder<Scalar>(dataset, cfg.vae_config(),
                                                               cfg.miner, pc, opts.log);
  pretrain::save_encoder(encoder, enc_path);
  detail::write_manifest(enc_path, "pretrain", opts, cfg, {train_path});
  return 0;
}

inline int cmd_train(const Options& opts) {
  const PipelineConfig cfg = make_config(opts);
  const std::string prefix = detail::prefix_for(cfg);
  const fs::path train_path = opts.out / (prefix + cfg.path_train);
  const fs::path enc_path = opts.out / cfg.path_encoder;
  const fs::path model_path = opts.out / (prefix + cfg.path_model);
  const fs::path hist_path = opts.out / (prefix + cfg.path_history);
  detail::require_file(train_path, "collect");
  detail::require_file(enc_path, "pretrain");
  detail::prepare_output(model_path, opts.force);
  detail::prepare_output(hist_path, opts.force);

  const auto dataset = data::load(train_path);
  auto encoder = pretrain::load_encoder<Scalar>(enc_path);

  (*opts.log) << "encoding " << dataset.n_states() << " training states...\n";
  const RowMatX<Scalar> F = pretrain::encode_dataset(encoder, dataset, opts.workers);
  std::vector<int> labels(dataset.n_states());
  for (std::size_t i = 0; i < labels.size(); ++i)
    labels[i] = static_cast<int>(data::label_at(dataset, i));

  auto m = model::init_model<Scalar>(std::move(encoder), F, labels, dataset.action_names,
                                     cfg.initial_k, static_cast<Scalar>(cfg.beta), opts.seed);
  m.encoder_file = cfg.path_encoder;
  m.encoder_hash = hex64(hash_file(enc_path));
  m.dataset_hash = hex64(hash_file(train_path));

  train::TrainConfig tc;
  tc.epochs = cfg.train_epochs;
  tc.batch_size = cfg.train_batch_size;
  tc.learning_rate = cfg.train_learning_rate;
  tc.projection_period = cfg.projection_period;
  tc.initial_K = cfg.initial_k;
  tc.rep_subsample = cfg.rep_subsample;
  tc.seed = opts.seed;
  tc.workers = opts.workers;

  const auto history = train::train_bc(m, F, labels, dataset.index, cfg.weights, tc, opts.log);
  model::save_model(m, model_path);
  {
    std::ofstream f(hist_path, std::ios::trunc);
    if (!f) throw IoError("cannot write " + hist_path.string());
    f << train::to_json(history).dump(2) << "\n";
  }
  detail::write_manifest(model_path, "train", opts, cfg, {train_path, enc_path});
  detail::write_manifest(hist_path, "train", opts, cfg, {train_path, enc_path});
  return 0;
}

inline int cmd_merge(const Options& opts) {
  const PipelineConfig cfg = make_config(opts);
  const std::string prefix = detail::prefix_for(cfg);
  const fs::path model_path = opts.out / (prefix + cfg.path_model);
  const fs::path enc_path = opts.out / cfg.path_encoder;
  const fs::path merged_path = opts.out / (prefix + cfg.path_merged);
  const fs::path report_path = opts.out / (prefix + std::string("merge_report.json"));
  detail::prepare_output(merged_path, opts.force);
  detail::prepare_output(report_path, opts.force);

  auto m = detail::load_model_checked(model_path, enc_path, opts.force);
  auto [merged, report] = train::merge_prototypes(m);
  (*opts.log) << "merged " << report.initial << " prototypes into " << report.merged << "\n";
  model::save_model(merged, merged_path);
  {
    std::ofstream f(report_path, std::ios::trunc);
    if (!f) throw IoError("cannot write " + report_path.string());
    f << train::to_json(report).dump(2) << "\n";
  }
  detail::write_manifest(merged_path, "merge", opts, cfg, {model_path, enc_path});
  return 0;
}

inline int cmd_eval(const Options& opts) {
  const PipelineConfig cfg = make_config(opts);
  const std::string prefix = detail::prefix_for(cfg);
  const fs::path merged_path = opts.out / (prefix + cfg.path_merged);
  const fs::path test_path = opts.out / (prefix + cfg.path_test);
  const fs::path eval_path = opts.out / (prefix + cfg.path_eval);
  detail::require_file(test_path, "collect");
  detail::prepare_output(eval_path, opts.force);

  auto m = detail::load_model_checked(merged_path, opts.out / cfg.path_encoder, opts.force);
  const auto test_set = data::load(test_path);
  const auto report = metrics::evaluate(m, test_set, opts.workers);
  {
    std::ofstream f(eval_path, std::ios::trunc);
    if (!f) throw IoError("cannot write " + eval_path.string());
    f << metrics::to_json(report).dump(2) << "\n";
  }
  (*opts.log) << metrics::format_table(report);
  detail::write_manifest(eval_path, "eval", opts, cfg, {merged_path, test_path});
  return 0;
}

namespace detail {

// Standard explanation sections: test-set flip points, their evidence
// decomposition, the top prototype, its importance map, and a post-isometry
// nearest-state overlay from the training data.
inline std::vector<explain::ReportItem<Scalar>> build_explain_items(
    const PipelineConfig& cfg, const model::ProtoXModel<Scalar>& m,
    const data::DemonstrationDataset& train_set, const data::DemonstrationDataset& test_set,
    int workers) {
  const auto flips = data::find_flip_points(test_set);
  std::vector<std::pair<int, int>> probes;
  for (const auto& e : flips.entries) {
    if (static_cast<int>(probes.size()) >= cfg.n_explanations) break;
    probes.push_back(e);
  }
  if (probes.empty() && test_set.n_states() > 0) probes.push_back(test_set.index.front());

  const RowMatX<Scalar> train_F = pretrain::encode_dataset(m.encoder, train_set, workers);
  const auto mask = cfg.mask_fill(train_set);

  std::vector<explain::ReportItem<Scalar>> items;
  for (const auto& [ep, t] : probes) {
    const auto& traj = test_set.trajectory_by_id(ep);
    const Tensor<Scalar> x = data::state_tensor<Scalar>(traj, t, test_set.stack_depth);

    explain::ReportItem<Scalar> item;
    item.title = "test state (" + std::to_string(ep) + "," + std::to_string(t) + ")";
    item.input_image = traj.observations[static_cast<std::size_t>(t)];
    item.explanation = explain::explain(m, x, cfg.top_k);
    item.explanation.state_ref = {ep, t};

    const int shown = std::min<int>(cfg.top_k, static_cast<int>(item.explanation.contributions.size()));
    for (int i = 0; i < shown; ++i) {
      const auto& c = item.explanation.contributions[static_cast<std::size_t>(i)];
      const auto& src_traj = train_set.trajectory_by_id(c.source.first);
      item.prototype_images.emplace_back(c.prototype_id,
                                         src_traj.observations[static_cast<std::size_t>(c.source.second)]);
    }
    if (!item.explanation.contributions.empty()) {
      const auto& top = item.explanation.contributions.front();
      item.importance = {top.prototype_id,
                         explain::importance_map(m, train_set, x, top.prototype_id, cfg.patch_size,
                                                 cfg.patch_stride, mask, cfg.keep_fraction)};
    }
    const int n_overlay = std::min<int>(cfg.overlay_n, static_cast<int>(train_set.n_states()));
    const VecX<Scalar> probe_enc = pretrain::flat_mean(m.encoder.encode(x));
    item.overlay = explain::nearest_overlay(m, train_set, train_F, probe_enc, n_overlay, true).composite;
    items.push_back(std::move(item));
  }
  return items;
}

}  // namespace detail

inline int cmd_explain(const Options& opts) {
  const PipelineConfig cfg = make_config(opts);
  const fs::path merged_path = opts.out / cfg.path_merged;
  const fs::path train_path = opts.out / cfg.path_train;
  const fs::path test_path = opts.out / cfg.path_test;
  const fs::path report_dir = opts.out / cfg.path_report;
  detail::require_file(train_path, "collect");
  detail::require_file(test_path, "collect");
  if (fs::exists(report_dir / "report.html") && !opts.force)
    throw ConfigError("report " + report_dir.string() + " already exists; pass --force to overwrite");

  auto m = detail::load_model_checked(merged_path, opts.out / cfg.path_encoder, opts.force);
  const auto train_set = data::load(train_path);
  const auto test_set = data::load(test_path);

  auto items = detail::build_explain_items(cfg, m, train_set, test_set, opts.workers);
  explain::render_report(items, m.action_names, report_dir);
  (*opts.log) << "wrote " << (report_dir / "report.html").string() << " (" << items.size()
              << " explanations)\n";
  detail::write_manifest(report_dir / "report.html", "explain", opts, cfg,
                         {merged_path, train_path, test_path});
  return 0;
}

inline int cmd_diagnose(const Options& opts) {
  const PipelineConfig cfg = make_config(opts);
  const fs::path good_model_path = opts.out / cfg.path_merged;
  const fs::path bad_model_path = opts.out / (cfg.bad_prefix + cfg.path_merged);
  const fs::path train_path = opts.out / cfg.path_train;
  const fs::path bad_train_path = opts.out / (cfg.bad_prefix + cfg.path_train);
  const fs::path test_path = opts.out / cfg.path_test;
  const fs::path report_dir = opts.out / cfg.path_report;
  detail::require_file(train_path, "collect");
  detail::require_file(bad_train_path, "collect --set data.expert=bad");
  detail::require_file(test_path, "collect");
  if (fs::exists(report_dir / "report.html") && !opts.force)
    throw ConfigError("report " + report_dir.string() + " already exists; pass --force to overwrite");

  auto good_model = detail::load_model_checked(good_model_path, opts.out / cfg.path_encoder, opts.force);
  auto bad_model = detail::load_model_checked(bad_model_path, opts.out / cfg.path_encoder, opts.force);
  const auto train_set = data::load(train_path);
  const auto bad_train_set = data::load(bad_train_path);
  const auto test_set = data::load(test_path);

  auto items = detail::build_explain_items(cfg, good_model, train_set, test_set, opts.workers);

  auto probes = diagnostics::jump_flip_probes(test_set);
  if (probes.size() > static_cast<std::size_t>(cfg.n_explanations))
    probes.resize(static_cast<std::size_t>(cfg.n_explanations));
  const auto mask = cfg.mask_fill(train_set);
  for (const auto& probe : probes) {
    auto pair = diagnostics::run_diagnosis(good_model, bad_model, train_set, bad_train_set, test_set,
                                           probe, cfg.top_k, cfg.patch_size, cfg.patch_stride, mask,
                                           cfg.keep_fraction);
    items.push_back(std::move(pair.good));
    items.push_back(std::move(pair.bad));
  }
  explain::render_report(items, good_model.action_names, report_dir);
  (*opts.log) << "wrote diagnosis report to " << (report_dir / "report.html").string() << "\n";
  detail::write_manifest(report_dir / "report.html", "diagnose", opts, cfg,
                         {good_model_path, bad_model_path, train_path, bad_train_path, test_path});
  return 0;
}

// collect -> pretrain -> train -> merge -> eval -> explain, then the
// bad-agent pipeline and the comparison report.
inline int cmd_demo(const Options& opts) {
  Options o = opts;
  cmd_collect(o);
  cmd_pretrain(o);
  cmd_train(o);
  cmd_merge(o);
  cmd_eval(o);
  cmd_explain(o);

  Options bad = opts;
  bad.sets.push_back("data.expert=bad");
  bad.force = true;  // the report directory is rewritten with the comparison
  cmd_collect(bad);
  cmd_train(bad);
  cmd_merge(bad);
  cmd_diagnose(bad);
  return 0;
}

}  // namespace protox::cli
