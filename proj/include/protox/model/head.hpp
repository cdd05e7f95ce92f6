#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "protox/core/error.hpp"
#include "protox/core/io.hpp"
#include "protox/core/rng.hpp"
#include "protox/core/tensor.hpp"
#include "protox/data/dataset.hpp"
#include "protox/pretrain/pretrain.hpp"

namespace protox::model {

inline constexpr std::pair<int, int> kNoSource{-1, -1};

// Trainable square matrix applied to flattened encodings; penalized toward
// orthogonality so it can only boundedly reshape the pre-trained geometry.
template <typename S>
struct IsometryLayer {
  RowMatX<S> A;

  static IsometryLayer identity(std::int64_t d) {
    IsometryLayer iso;
    iso.A = RowMatX<S>::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    return iso;
  }
};

template <typename S>
VecX<S> apply_isometry(const IsometryLayer<S>& iso, const Tensor<S>& latent_block) {
  if (latent_block.numel() != iso.A.cols())
    throw ShapeError("apply_isometry: latent size " + std::to_string(latent_block.numel()) +
                     " does not match matrix of " + std::to_string(iso.A.cols()) + " columns");
  return iso.A * latent_block.vec();
}

template <typename S>
VecX<S> apply_isometry(const IsometryLayer<S>& iso, const VecX<S>& latent) {
  if (latent.size() != iso.A.cols()) throw ShapeError("apply_isometry: latent dimension mismatch");
  return iso.A * latent;
}

// Squared Frobenius norm of (A^T A - I); zero exactly when A is orthogonal.
template <typename S>
S iso_penalty(const IsometryLayer<S>& iso) {
  const RowMatX<S> g = iso.A.transpose() * iso.A -
                       RowMatX<S>::Identity(iso.A.cols(), iso.A.cols());
  return g.squaredNorm();
}

template <typename S>
RowMatX<S> iso_penalty_grad(const IsometryLayer<S>& iso) {
  const RowMatX<S> g = iso.A.transpose() * iso.A -
                       RowMatX<S>::Identity(iso.A.cols(), iso.A.cols());
  return S(4) * iso.A * g;
}

// Prototypes live in the post-isometry space; each carries one action tag
// and, after projection, the index of the training state it equals.
template <typename S>
struct PrototypeLayer {
  RowMatX<S> P;                                // M x d
  std::vector<int> action_tags;                // size M
  std::vector<std::pair<int, int>> sources;    // (episode_id, t); kNoSource before projection
  S beta = S(0.05);

  Eigen::Index count() const { return P.rows(); }

  bool all_projected() const {
    for (const auto& s : sources)
      if (s == kNoSource) return false;
    return !sources.empty();
  }
};

template <typename S>
struct EvidenceHead {
  RowMatX<S> W;  // (prototype) x (action); entries may be negative
};

template <typename S>
S similarity(const VecX<S>& z, const VecX<S>& p, S beta) {
  if (z.size() != p.size()) throw ShapeError("similarity: dimension mismatch");
  if (!(beta > S(0))) throw ConfigError("similarity: beta must be > 0");
  return std::exp(-beta * (z - p).norm());
}

template <typename S>
VecX<S> similarities(const PrototypeLayer<S>& protos, const VecX<S>& z) {
  if (z.size() != protos.P.cols()) throw ShapeError("similarities: dimension mismatch");
  VecX<S> out(protos.count());
  for (Eigen::Index m = 0; m < protos.count(); ++m)
    out[m] = std::exp(-protos.beta * (z - protos.P.row(m).transpose()).norm());
  return out;
}

template <typename S>
VecX<S> evidence(const VecX<S>& sims, const EvidenceHead<S>& head) {
  if (sims.size() != head.W.rows())
    throw ShapeError("evidence: " + std::to_string(sims.size()) + " similarities vs head with " +
                     std::to_string(head.W.rows()) + " rows");
  return head.W.transpose() * sims;
}

template <typename S>
struct ProtoXModel {
  pretrain::Encoder<S> encoder;
  IsometryLayer<S> iso;
  PrototypeLayer<S> protos;
  EvidenceHead<S> head;
  std::vector<std::string> action_names;
  bool merged = false;

  // Provenance carried into the checkpoint.
  std::string encoder_file;
  std::string encoder_hash;
  std::string dataset_hash;

  int n_actions() const { return static_cast<int>(action_names.size()); }

  void validate() const {
    const auto d = iso.A.cols();
    if (iso.A.rows() != d) throw ShapeError("model: isometry matrix must be square");
    if (protos.P.cols() != d) throw ShapeError("model: prototype dimension mismatch");
    if (head.W.rows() != protos.count() || head.W.cols() != n_actions())
      throw ShapeError("model: evidence head shape mismatch");
    if (static_cast<Eigen::Index>(protos.action_tags.size()) != protos.count() ||
        static_cast<Eigen::Index>(protos.sources.size()) != protos.count())
      throw ShapeError("model: prototype tag/source bookkeeping out of sync");
    if (!(protos.beta > S(0))) throw ConfigError("model: beta must be > 0");
    for (int tag : protos.action_tags)
      if (tag < 0 || tag >= n_actions()) throw ConfigError("model: prototype action tag out of range");
  }
};

template <typename S>
struct Prediction {
  int action = 0;
  VecX<S> evidence;
  VecX<S> similarities;
};

template <typename S>
int argmax_lowest(const VecX<S>& v) {
  int best = 0;
  for (int i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

template <typename S>
Prediction<S> predict_encoded(const ProtoXModel<S>& model, const VecX<S>& encoding) {
  Prediction<S> out;
  const VecX<S> z = apply_isometry(model.iso, encoding);
  out.similarities = similarities(model.protos, z);
  out.evidence = evidence(out.similarities, model.head);
  out.action = argmax_lowest(out.evidence);
  return out;
}

template <typename S>
Prediction<S> predict(const ProtoXModel<S>& model, const Tensor<S>& state) {
  const Tensor<S> block = model.encoder.encode(state);
  return predict_encoded(model, pretrain::flat_mean(block));
}

// Prototypes start at the isometry image of randomly chosen training states
// whose expert action matches the tag; actions absent from the data fall
// back to arbitrary states. The head starts at zero.
template <typename S>
ProtoXModel<S> init_model(pretrain::Encoder<S> encoder, const RowMatX<S>& encodings,
                          const std::vector<int>& labels, const std::vector<std::string>& action_names,
                          int prototypes_per_action, S beta, std::uint64_t seed) {
  if (prototypes_per_action < 1) throw ConfigError("init_model: initial_K must be >= 1");
  if (encodings.rows() == 0) throw DataError("init_model: empty encoding set");
  const auto n_actions = static_cast<int>(action_names.size());
  const std::int64_t d = encodings.cols();

  ProtoXModel<S> model;
  model.encoder = std::move(encoder);
  model.action_names = action_names;
  model.iso = IsometryLayer<S>::identity(d);

  std::vector<std::vector<Eigen::Index>> by_action(static_cast<std::size_t>(n_actions));
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(labels.size()); ++i)
    by_action[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])].push_back(i);

  const Eigen::Index M = static_cast<Eigen::Index>(n_actions) * prototypes_per_action;
  model.protos.P = RowMatX<S>(M, d);
  model.protos.beta = beta;
  model.protos.action_tags.resize(static_cast<std::size_t>(M));
  model.protos.sources.assign(static_cast<std::size_t>(M), kNoSource);

  Rng rng = Rng::substream(seed, "model.init");
  Eigen::Index m = 0;
  for (int a = 0; a < n_actions; ++a) {
    const auto& pool = by_action[static_cast<std::size_t>(a)];
    for (int k = 0; k < prototypes_per_action; ++k, ++m) {
      Eigen::Index pick;
      if (!pool.empty())
        pick = pool[rng.uniform_index(pool.size())];
      else
        pick = static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(encodings.rows())));
      model.protos.P.row(m) = (model.iso.A * encodings.row(pick).transpose()).transpose();
      model.protos.action_tags[static_cast<std::size_t>(m)] = a;
    }
  }
  model.head.W = RowMatX<S>::Zero(M, n_actions);
  model.validate();
  return model;
}

inline constexpr char kModelMagic[4] = {'P', 'T', 'X', 'M'};
inline constexpr std::uint32_t kModelVersion = 1;

template <typename S>
void save_model(const ProtoXModel<S>& model, const std::filesystem::path& path) {
  model.validate();
  BinaryWriter w(path);
  w.magic(kModelMagic, kModelVersion);
  Json sources = Json::array();
  for (const auto& s : model.protos.sources) sources.push_back({s.first, s.second});
  Json header{{"action_names", model.action_names},
              {"beta", static_cast<double>(model.protos.beta)},
              {"dim", model.iso.A.cols()},
              {"n_prototypes", model.protos.count()},
              {"action_tags", model.protos.action_tags},
              {"sources", sources},
              {"merged", model.merged},
              {"encoder_file", model.encoder_file},
              {"encoder_hash", model.encoder_hash},
              {"dataset_hash", model.dataset_hash},
              {"dtype", "f32"}};
  w.header(header);
  auto write_mat = [&w](const RowMatX<S>& m) {
    std::vector<float> buf(static_cast<std::size_t>(m.size()));
    std::size_t i = 0;
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) buf[i++] = static_cast<float>(m(r, c));
    w.blob(buf.data(), buf.size());
  };
  write_mat(model.iso.A);
  write_mat(model.protos.P);
  write_mat(model.head.W);
  w.close();
}

// Loads the head parameters; the caller attaches the encoder it references.
template <typename S>
ProtoXModel<S> load_model(const std::filesystem::path& path, pretrain::Encoder<S> encoder) {
  BinaryReader r(path);
  r.magic(kModelMagic, kModelVersion);
  const Json header = r.header();

  ProtoXModel<S> model;
  model.encoder = std::move(encoder);
  header.at("action_names").get_to(model.action_names);
  model.protos.beta = static_cast<S>(header.at("beta").get<double>());
  const auto d = header.at("dim").get<Eigen::Index>();
  const auto M = header.at("n_prototypes").get<Eigen::Index>();
  header.at("action_tags").get_to(model.protos.action_tags);
  model.protos.sources.clear();
  for (const auto& s : header.at("sources"))
    model.protos.sources.emplace_back(s.at(0).get<int>(), s.at(1).get<int>());
  header.at("merged").get_to(model.merged);
  header.at("encoder_file").get_to(model.encoder_file);
  header.at("encoder_hash").get_to(model.encoder_hash);
  header.at("dataset_hash").get_to(model.dataset_hash);

  auto read_mat = [&r](Eigen::Index rows, Eigen::Index cols) {
    std::vector<float> buf(static_cast<std::size_t>(rows * cols));
    r.blob(buf.data(), buf.size());
    RowMatX<S> m(rows, cols);
    std::size_t i = 0;
    for (Eigen::Index rr = 0; rr < rows; ++rr)
      for (Eigen::Index cc = 0; cc < cols; ++cc) m(rr, cc) = static_cast<S>(buf[i++]);
    return m;
  };
  model.iso.A = read_mat(d, d);
  model.protos.P = read_mat(M, d);
  model.head.W = read_mat(M, static_cast<Eigen::Index>(model.action_names.size()));
  if (!r.at_eof()) throw FormatError(path.string() + ": trailing bytes after parameters");
  model.validate();
  return model;
}

}  // namespace protox::model
