#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "protox/data/annotate.hpp"
#include "protox/data/dataset.hpp"
#include "protox/eval/metrics.hpp"
#include "protox/explain/explain.hpp"
#include "protox/explain/report.hpp"
#include "protox/model/head.hpp"

namespace protox::diagnostics {

// Flip points of the good expert where the new action is a jump: the moments
// where jumping matters, used as probe states.
inline std::vector<std::pair<int, int>> jump_flip_probes(const data::DemonstrationDataset& d) {
  std::vector<std::pair<int, int>> out;
  for (const auto& traj : d.trajectories)
    for (std::size_t t = 1; t < traj.actions.size(); ++t)
      if (traj.actions[t] != traj.actions[t - 1] && env::has_jump(traj.actions[t]))
        out.emplace_back(traj.episode_id, static_cast<int>(t));
  return out;
}

// Prototypes whose connection to `action` exceeds the zero threshold.
template <typename S>
int count_positive_weights(const model::ProtoXModel<S>& m, int action, double threshold) {
  if (action < 0 || action >= m.n_actions()) throw IndexError("count_positive_weights: bad action");
  int count = 0;
  for (Eigen::Index mm = 0; mm < m.head.W.rows(); ++mm)
    if (static_cast<double>(m.head.W(mm, action)) > threshold) ++count;
  return count;
}

template <typename S>
struct DiagnosisBundle {
  explain::ReportItem<S> good;
  explain::ReportItem<S> bad;
};

template <typename S>
explain::ReportItem<S> diagnosis_item(const model::ProtoXModel<S>& m,
                                      const data::DemonstrationDataset& model_train_data,
                                      const Tensor<S>& probe, std::pair<int, int> probe_ref,
                                      const data::Observation& probe_image, const std::string& title,
                                      int top_k, int patch_size, int stride,
                                      std::optional<std::array<double, 3>> mask_value,
                                      double keep_fraction) {
  explain::ReportItem<S> item;
  item.title = title;
  item.input_image = probe_image;
  item.explanation = explain::explain(m, probe, top_k);
  item.explanation.state_ref = probe_ref;

  // Top prototype for the predicted action, its source frame, its map.
  if (!item.explanation.contributions.empty()) {
    const auto& top = item.explanation.contributions.front();
    const auto src = top.source;
    const auto& traj = model_train_data.trajectory_by_id(src.first);
    item.prototype_images.emplace_back(top.prototype_id,
                                       traj.observations[static_cast<std::size_t>(src.second)]);
    item.importance = {top.prototype_id,
                       explain::importance_map(m, model_train_data, probe, top.prototype_id,
                                               patch_size, stride, mask_value, keep_fraction)};
    item.note = "top prototype #" + std::to_string(top.prototype_id) + " is tagged " +
                m.action_names[static_cast<std::size_t>(top.action_tag)] + "; predicted " +
                m.action_names[static_cast<std::size_t>(item.explanation.predicted_action)];
  }
  return item;
}

// Side-by-side explanation of one probe state under the good and bad agents'
// models: each model's top prototype plus the importance map over it.
template <typename S>
DiagnosisBundle<S> run_diagnosis(const model::ProtoXModel<S>& good_model,
                                 const model::ProtoXModel<S>& bad_model,
                                 const data::DemonstrationDataset& good_train,
                                 const data::DemonstrationDataset& bad_train,
                                 const data::DemonstrationDataset& probe_data,
                                 std::pair<int, int> probe_ref, int top_k, int patch_size, int stride,
                                 std::optional<std::array<double, 3>> mask_value,
                                 double keep_fraction) {
  const auto& traj = probe_data.trajectory_by_id(probe_ref.first);
  const Tensor<S> probe = data::state_tensor<S>(traj, probe_ref.second, probe_data.stack_depth);
  const auto& probe_image = traj.observations[static_cast<std::size_t>(probe_ref.second)];

  DiagnosisBundle<S> out;
  const std::string where =
      "state (" + std::to_string(probe_ref.first) + "," + std::to_string(probe_ref.second) + ")";
  out.good = diagnosis_item(good_model, good_train, probe, probe_ref, probe_image,
                            "good agent on " + where, top_k, patch_size, stride, mask_value,
                            keep_fraction);
  out.bad = diagnosis_item(bad_model, bad_train, probe, probe_ref, probe_image,
                           "bad agent on " + where, top_k, patch_size, stride, mask_value,
                           keep_fraction);
  return out;
}

}  // namespace protox::diagnostics
