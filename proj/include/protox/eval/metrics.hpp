#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "protox/core/error.hpp"
#include "protox/core/io.hpp"
#include "protox/core/parallel.hpp"
#include "protox/data/dataset.hpp"
#include "protox/model/head.hpp"

namespace protox::metrics {

// One prediction per indexed state; identical to calling predict() state by
// state (each state is handled independently).
template <typename S>
std::vector<int> predict_dataset(const model::ProtoXModel<S>& m,
                                 const data::DemonstrationDataset& dataset, int workers = 0) {
  if (dataset.action_names != m.action_names)
    throw ConfigError("evaluate: dataset action set does not match the model's");
  std::vector<int> out(dataset.n_states());
  parallel_chunks(dataset.n_states(), workers, [&](std::size_t b0, std::size_t b1, int) {
    for (std::size_t i = b0; i < b1; ++i) {
      const Tensor<S> x = data::state_tensor<S>(dataset, i);
      out[i] = model::predict(m, x).action;
    }
  });
  return out;
}

// Fraction of states where the model reproduces the recorded expert action.
template <typename S>
double fidelity(const model::ProtoXModel<S>& m, const data::DemonstrationDataset& dataset,
                int workers = 0) {
  if (dataset.n_states() == 0) throw DataError("fidelity: empty test set");
  const auto preds = predict_dataset(m, dataset, workers);
  std::size_t agree = 0;
  for (std::size_t i = 0; i < preds.size(); ++i)
    if (preds[i] == static_cast<int>(data::label_at(dataset, i))) ++agree;
  return static_cast<double>(agree) / static_cast<double>(preds.size());
}

// Fidelity restricted to flip points.
template <typename S>
double sensitivity(const model::ProtoXModel<S>& m, const data::DemonstrationDataset& dataset,
                   const data::FlipPointIndex& flips, int workers = 0) {
  if (flips.entries.empty()) throw EvalError("sensitivity: empty flip-point set");
  std::vector<int> agree(flips.entries.size(), 0);
  parallel_chunks(flips.entries.size(), workers, [&](std::size_t b0, std::size_t b1, int) {
    for (std::size_t i = b0; i < b1; ++i) {
      const auto [ep, t] = flips.entries[i];
      const auto& traj = dataset.trajectory_by_id(ep);
      if (t < 1 || t >= static_cast<int>(traj.actions.size()))
        throw IndexError("sensitivity: flip point (" + std::to_string(ep) + "," + std::to_string(t) +
                         ") not a valid flip index");
      const Tensor<S> x = data::state_tensor<S>(traj, t, dataset.stack_depth);
      agree[i] = model::predict(m, x).action == static_cast<int>(traj.actions[static_cast<std::size_t>(t)]);
    }
  });
  std::size_t total = 0;
  for (int a : agree) total += static_cast<std::size_t>(a);
  return static_cast<double>(total) / static_cast<double>(flips.entries.size());
}

struct Complexity {
  int prototype_count = 0;
  int nonzero_weight_count = 0;
};

inline constexpr double kWeightZeroThreshold = 1e-8;

template <typename S>
Complexity complexity(const model::ProtoXModel<S>& m) {
  if (!m.merged) throw StateError("complexity: model has not been merged");
  Complexity c;
  c.prototype_count = static_cast<int>(m.protos.count());
  for (Eigen::Index i = 0; i < m.head.W.size(); ++i)
    if (std::abs(static_cast<double>(m.head.W(i))) > kWeightZeroThreshold) ++c.nonzero_weight_count;
  return c;
}

struct EvalReport {
  double fidelity = 0;
  double sensitivity = 0;
  int n_test = 0;
  int n_flip = 0;
  int prototype_count = 0;
  int nonzero_weight_count = 0;
  std::vector<std::string> action_names;
  std::vector<std::vector<long>> confusion;  // rows: expert action, cols: predicted
};

template <typename S>
EvalReport evaluate(const model::ProtoXModel<S>& m, const data::DemonstrationDataset& dataset,
                    int workers = 0) {
  if (dataset.n_states() == 0) throw DataError("evaluate: empty test set");
  if (dataset.action_names != m.action_names)
    throw ConfigError("evaluate: dataset action set does not match the model's");

  EvalReport r;
  r.action_names = m.action_names;
  const int A = m.n_actions();
  r.confusion.assign(static_cast<std::size_t>(A), std::vector<long>(static_cast<std::size_t>(A), 0));

  const auto preds = predict_dataset(m, dataset, workers);
  long agree = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const int y = static_cast<int>(data::label_at(dataset, i));
    r.confusion[static_cast<std::size_t>(y)][static_cast<std::size_t>(preds[i])] += 1;
    if (preds[i] == y) ++agree;
  }
  r.n_test = static_cast<int>(preds.size());
  r.fidelity = static_cast<double>(agree) / static_cast<double>(r.n_test);

  const auto flips = data::find_flip_points(dataset);
  r.n_flip = static_cast<int>(flips.entries.size());
  r.sensitivity = flips.entries.empty() ? 0.0 : sensitivity(m, dataset, flips, workers);

  if (m.merged) {
    const auto c = complexity(m);
    r.prototype_count = c.prototype_count;
    r.nonzero_weight_count = c.nonzero_weight_count;
  } else {
    r.prototype_count = static_cast<int>(m.protos.count());
  }
  return r;
}

inline Json to_json(const EvalReport& r) {
  return Json{{"fidelity", r.fidelity},
              {"sensitivity", r.sensitivity},
              {"n_test", r.n_test},
              {"n_flip", r.n_flip},
              {"prototype_count", r.prototype_count},
              {"nonzero_weight_count", r.nonzero_weight_count},
              {"action_names", r.action_names},
              {"confusion", r.confusion}};
}

inline std::string format_table(const EvalReport& r) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof(line), "fidelity     %.4f  (%d states)\n", r.fidelity, r.n_test);
  out += line;
  std::snprintf(line, sizeof(line), "sensitivity  %.4f  (%d flip points)\n", r.sensitivity, r.n_flip);
  out += line;
  std::snprintf(line, sizeof(line), "prototypes   %d\n", r.prototype_count);
  out += line;
  std::snprintf(line, sizeof(line), "weights>eps  %d\n", r.nonzero_weight_count);
  out += line;
  out += "confusion (rows: expert, cols: model)\n";
  for (std::size_t y = 0; y < r.confusion.size(); ++y) {
    std::snprintf(line, sizeof(line), "  %-11s", r.action_names[y].c_str());
    out += line;
    for (long v : r.confusion[y]) {
      std::snprintf(line, sizeof(line), " %7ld", v);
      out += line;
    }
    out += "\n";
  }
  return out;
}

}  // namespace protox::metrics
