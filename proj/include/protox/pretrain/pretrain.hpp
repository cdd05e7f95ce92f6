#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "protox/core/error.hpp"
#include "protox/core/io.hpp"
#include "protox/core/parallel.hpp"
#include "protox/core/rng.hpp"
#include "protox/core/tensor.hpp"
#include "protox/data/dataset.hpp"
#include "protox/nn/adam.hpp"
#include "protox/pretrain/losses.hpp"
#include "protox/pretrain/miner.hpp"
#include "protox/pretrain/vae.hpp"

namespace protox::pretrain {

// Frozen self-supervised encoder. encode() follows the posterior-mean path
// and is a pure function of its input. output_gain is a fixed scaling set
// when the encoder is frozen so that latent distances land in the range the
// similarity concentration (beta) was designed for.
template <typename S>
struct Encoder {
  ConvVae<S> net;
  bool frozen = false;
  int stack_depth = 2;
  S output_gain = S(1);

  Tensor<S> encode(const Tensor<S>& state) const {
    Tensor<S> m = net.encode(state);
    if (output_gain != S(1))
      for (std::int64_t i = 0; i < m.numel(); ++i) m[i] *= output_gain;
    return m;
  }

  std::int64_t latent_dim() const { return net.config().latent_dim(); }
};

struct PretrainConfig {
  int epochs = 16;
  int batch_size = 32;
  double learning_rate = 1e-3;
  int quadruplets_per_epoch = 1200;
  double kl_weight = 1.0;
  double vae_weight = 1.0;
  // Median pairwise latent distance the frozen encoder is scaled to
  // (0 disables calibration). The KL prior keeps raw means near the origin;
  // the similarity concentration expects distances an order of magnitude
  // larger, so the gap is closed with a fixed output gain at freeze time.
  double target_median_distance = 30.0;
  std::uint64_t seed = 0;
  int workers = 0;  // 0 = all hardware threads

  void validate() const {
    if (epochs < 1 || batch_size < 1 || quadruplets_per_epoch < 1)
      throw ConfigError("pretrain: epochs, batch_size and quadruplets_per_epoch must be >= 1");
    if (learning_rate <= 0) throw ConfigError("pretrain: learning_rate must be > 0");
    if (kl_weight < 0 || vae_weight < 0) throw ConfigError("pretrain: loss weights must be >= 0");
    if (target_median_distance < 0) throw ConfigError("pretrain: target_median_distance must be >= 0");
  }
};

template <typename S>
VecX<S> flat_mean(const Tensor<S>& block) {
  VecX<S> v(block.numel());
  for (std::int64_t i = 0; i < block.numel(); ++i) v[i] = block[i];
  return v;
}

namespace detail {

template <typename S>
struct QuadrupletBatchItem {
  Tensor<S> states[4];  // anchor, positive, near negative, far negative
  Tensor<S> eps;        // prior noise for the anchor's reconstruction path
};

// Per-item losses; gradients accumulate into `g` scaled by `scale`.
template <typename S>
struct ItemLosses {
  S quad = 0, recon = 0, kl = 0;
};

template <typename S>
ItemLosses<S> quadruplet_item_backward(const ConvVae<S>& net, const QuadrupletBatchItem<S>& item,
                                       S m1, S m2, S vae_weight, S kl_weight, S scale,
                                       std::vector<Tensor<S>>& g) {
  typename ConvVae<S>::EncTrace traces[4];
  VecX<S> means[4];
  for (int i = 0; i < 4; ++i) {
    traces[i] = net.encode_trace(item.states[i]);
    means[i] = flat_mean(traces[i].mean);
  }

  const std::int64_t d = means[0].size();
  VecX<S> gm[4];
  for (auto& v : gm) v = VecX<S>::Zero(d);

  ItemLosses<S> out;
  out.quad = quadruplet_loss_grad(means[0], means[1], means[2], means[3], m1, m2, gm[0], gm[1],
                                  gm[2], gm[3]);

  // VAE path on the anchor: z = mean + exp(logvar/2) * eps -> decode.
  const Tensor<S>& mean = traces[0].mean;
  const Tensor<S>& logvar = traces[0].logvar;
  Tensor<S> z(mean.shape());
  for (std::int64_t i = 0; i < z.numel(); ++i)
    z[i] = mean[i] + std::exp(S(0.5) * logvar[i]) * item.eps[i];
  auto dec = net.decode_trace(z);
  out.recon = recon_mse(item.states[0], dec.recon);
  out.kl = gaussian_kl(mean, logvar);

  Tensor<S> drecon(dec.recon.shape());
  recon_mse_grad(item.states[0], dec.recon, scale * vae_weight, drecon);
  Tensor<S> dz = net.decode_backward(dec, drecon, g);

  Tensor<S> dmean0(mean.shape());
  Tensor<S> dlogvar0(logvar.shape());
  for (std::int64_t i = 0; i < dz.numel(); ++i) {
    dmean0[i] = dz[i];
    dlogvar0[i] = dz[i] * item.eps[i] * S(0.5) * std::exp(S(0.5) * logvar[i]);
  }
  gaussian_kl_grad(mean, logvar, scale * vae_weight * kl_weight, dmean0, dlogvar0);

  const Tensor<S> zero_lv(logvar.shape());
  for (int i = 0; i < 4; ++i) {
    Tensor<S> dmean(mean.shape());
    for (std::int64_t k = 0; k < dmean.numel(); ++k) dmean[k] = scale * gm[i][k];
    if (i == 0) dmean.vec() += dmean0.vec();
    net.encode_backward(traces[i], dmean, i == 0 ? dlogvar0 : zero_lv, g);
  }
  return out;
}

}  // namespace detail

struct EpochStats {
  double quad = 0, recon = 0, kl = 0;
  int quadruplets = 0;
  int skipped_anchors = 0;
};

// Mines temporal quadruplets and trains the siamese VAE on the quadruplet
// loss plus the reconstruction/KL terms, then freezes the encoder.
template <typename S>
std::pair<Encoder<S>, std::vector<EpochStats>> pretrain_encoder(
    const data::DemonstrationDataset& dataset, const VaeConfig& vae_config,
    const MinerConfig& miner_config, const PretrainConfig& train_config,
    std::ostream* progress = nullptr) {
  train_config.validate();
  miner_config.validate();

  std::set<env::ActionId> distinct;
  for (const auto& traj : dataset.trajectories)
    for (auto a : traj.actions) distinct.insert(a);
  if (distinct.size() < 2)
    throw ConfigError("pretrain: dataset contains a single action; no near-negatives exist");

  Rng init_rng = Rng::substream(train_config.seed, "pretrain.init");
  ConvVae<S> net(vae_config, init_rng);
  nn::Adam<S> opt(train_config.learning_rate);

  const S m1 = static_cast<S>(miner_config.margin1);
  const S m2 = static_cast<S>(miner_config.margin2);
  const int workers = resolve_workers(train_config.workers);

  std::vector<EpochStats> history;
  for (int epoch = 0; epoch < train_config.epochs; ++epoch) {
    Rng rng = Rng::substream(train_config.seed, "pretrain.epoch", static_cast<std::uint64_t>(epoch));
    EpochStats stats;

    std::vector<QuadrupletSpec> specs;
    const int want = train_config.quadruplets_per_epoch;
    for (int attempt = 0; attempt < 20 * want && static_cast<int>(specs.size()) < want; ++attempt) {
      const auto anchor = dataset.index[rng.uniform_index(dataset.index.size())];
      if (auto q = mine_quadruplet(dataset, anchor, miner_config, rng))
        specs.push_back(*q);
      else
        ++stats.skipped_anchors;
    }
    if (specs.empty())
      throw ConfigError("pretrain: could not mine any quadruplets from the dataset");

    for (std::size_t start = 0; start < specs.size(); start += train_config.batch_size) {
      const std::size_t end = std::min(specs.size(), start + train_config.batch_size);
      const std::size_t bsz = end - start;

      // Deterministic: states and noise drawn sequentially before fan-out.
      std::vector<detail::QuadrupletBatchItem<S>> items(bsz);
      for (std::size_t i = 0; i < bsz; ++i) {
        const QuadrupletSpec& q = specs[start + i];
        const std::pair<int, int> refs[4] = {q.anchor, q.positive, q.near_negative, q.far_negative};
        for (int k = 0; k < 4; ++k)
          items[i].states[k] = data::state_tensor<S>(dataset.trajectory_by_id(refs[k].first),
                                                     refs[k].second, dataset.stack_depth);
        items[i].eps = Tensor<S>({vae_config.latent_channels, vae_config.latent_h(), vae_config.latent_w()});
        for (std::int64_t e = 0; e < items[i].eps.numel(); ++e)
          items[i].eps[e] = static_cast<S>(rng.normal());
      }

      const S scale = S(1) / static_cast<S>(bsz);
      std::vector<std::vector<Tensor<S>>> worker_grads(static_cast<std::size_t>(workers));
      std::vector<detail::ItemLosses<S>> losses(bsz);
      parallel_chunks(bsz, workers, [&](std::size_t b0, std::size_t b1, int w) {
        auto& g = worker_grads[static_cast<std::size_t>(w)];
        g = net.make_grads();
        for (std::size_t i = b0; i < b1; ++i)
          losses[i] = detail::quadruplet_item_backward(net, items[i], m1, m2,
                                                       static_cast<S>(train_config.vae_weight),
                                                       static_cast<S>(train_config.kl_weight), scale, g);
      });

      std::vector<Tensor<S>> grads = net.make_grads();
      for (auto& wg : worker_grads) {
        if (wg.empty()) continue;
        for (std::size_t p = 0; p < grads.size(); ++p) grads[p].vec() += wg[p].vec();
      }
      opt.step(net.param_ptrs(), grads);

      for (const auto& l : losses) {
        stats.quad += static_cast<double>(l.quad);
        stats.recon += static_cast<double>(l.recon);
        stats.kl += static_cast<double>(l.kl);
      }
      stats.quadruplets += static_cast<int>(bsz);

      const double batch_mean = (static_cast<double>(losses[0].quad) + losses[0].recon);
      if (!std::isfinite(batch_mean) || !net.params_finite())
        throw NumericError("pretrain: non-finite loss at epoch " + std::to_string(epoch) +
                           ", batch starting at quadruplet " + std::to_string(start));
    }
    if (stats.quadruplets > 0) {
      stats.quad /= stats.quadruplets;
      stats.recon /= stats.quadruplets;
      stats.kl /= stats.quadruplets;
    }
    if (progress)
      (*progress) << "pretrain epoch " << epoch << ": quad=" << stats.quad
                  << " recon=" << stats.recon << " kl=" << stats.kl << "\n";
    history.push_back(stats);
  }

  Encoder<S> enc;
  enc.net = std::move(net);
  enc.frozen = true;
  enc.stack_depth = dataset.stack_depth;
  if (train_config.target_median_distance > 0)
    enc.output_gain = static_cast<S>(calibrate_output_gain(enc.net, dataset,
                                                           train_config.target_median_distance,
                                                           train_config.seed));
  return {std::move(enc), std::move(history)};
}

// Gain that maps the median pairwise raw-mean distance (over a seeded state
// sample) onto the target distance.
template <typename S>
double calibrate_output_gain(const ConvVae<S>& net, const data::DemonstrationDataset& dataset,
                             double target_median_distance, std::uint64_t seed) {
  Rng rng = Rng::substream(seed, "pretrain.calibration");
  const std::size_t n_states = std::min<std::size_t>(dataset.n_states(), 256);
  std::vector<VecX<S>> embs;
  embs.reserve(n_states);
  for (std::size_t i = 0; i < n_states; ++i) {
    const std::size_t pick = rng.uniform_index(dataset.n_states());
    embs.push_back(flat_mean(net.encode(data::state_tensor<S>(dataset, pick))));
  }
  std::vector<double> dists;
  const std::size_t n_pairs = std::min<std::size_t>(2000, n_states * (n_states - 1) / 2);
  for (std::size_t k = 0; k < n_pairs; ++k) {
    const std::size_t i = rng.uniform_index(embs.size());
    std::size_t j = rng.uniform_index(embs.size());
    if (i == j) continue;
    dists.push_back(static_cast<double>((embs[i] - embs[j]).norm()));
  }
  if (dists.empty()) return 1.0;
  std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(dists.size() / 2),
                   dists.end());
  const double median = dists[dists.size() / 2];
  if (!(median > 1e-9)) return 1.0;
  return target_median_distance / median;
}

// Flattened posterior-mean embeddings for every indexed state, row i for
// dataset.index[i].
template <typename S>
RowMatX<S> encode_dataset(const Encoder<S>& encoder, const data::DemonstrationDataset& dataset,
                          int workers = 0) {
  const std::int64_t d = encoder.latent_dim();
  RowMatX<S> out(static_cast<Eigen::Index>(dataset.n_states()), static_cast<Eigen::Index>(d));
  parallel_chunks(dataset.n_states(), workers, [&](std::size_t b0, std::size_t b1, int) {
    for (std::size_t i = b0; i < b1; ++i) {
      Tensor<S> x = data::state_tensor<S>(dataset, i);
      Tensor<S> m = encoder.encode(x);
      for (std::int64_t k = 0; k < d; ++k) out(static_cast<Eigen::Index>(i), k) = m[k];
    }
  });
  return out;
}

struct SeparationStats {
  double mean_pos_dist = 0;
  double mean_near_neg_dist = 0;
  int n_quadruplets = 0;
};

// Mean anchor-positive vs anchor-near-negative embedding distance over
// quadruplets mined from a held-out dataset.
template <typename S>
SeparationStats measure_separation(const Encoder<S>& encoder,
                                   const data::DemonstrationDataset& dataset,
                                   const MinerConfig& miner_config, int n_quadruplets,
                                   std::uint64_t seed) {
  Rng rng = Rng::substream(seed, "separation");
  SeparationStats s;
  for (int attempt = 0; attempt < 50 * n_quadruplets && s.n_quadruplets < n_quadruplets; ++attempt) {
    const auto anchor = dataset.index[rng.uniform_index(dataset.index.size())];
    auto q = mine_quadruplet(dataset, anchor, miner_config, rng);
    if (!q) continue;
    auto emb = [&](std::pair<int, int> ref) {
      return flat_mean(encoder.encode(
          data::state_tensor<S>(dataset.trajectory_by_id(ref.first), ref.second, dataset.stack_depth)));
    };
    const VecX<S> za = emb(q->anchor), zp = emb(q->positive), zn = emb(q->near_negative);
    s.mean_pos_dist += static_cast<double>((za - zp).norm());
    s.mean_near_neg_dist += static_cast<double>((za - zn).norm());
    ++s.n_quadruplets;
  }
  if (s.n_quadruplets == 0) throw EvalError("measure_separation: no quadruplets could be mined");
  s.mean_pos_dist /= s.n_quadruplets;
  s.mean_near_neg_dist /= s.n_quadruplets;
  return s;
}

inline constexpr char kEncoderMagic[4] = {'P', 'T', 'X', 'E'};
inline constexpr std::uint32_t kEncoderVersion = 1;

template <typename S>
void save_encoder(const Encoder<S>& enc, const std::filesystem::path& path) {
  BinaryWriter w(path);
  w.magic(kEncoderMagic, kEncoderVersion);
  Json header{{"vae", enc.net.config()},
              {"frozen", enc.frozen},
              {"stack_depth", enc.stack_depth},
              {"output_gain", static_cast<double>(enc.output_gain)},
              {"dtype", "f32"}};
  w.header(header);
  for (const auto* p : enc.net.param_ptrs()) {
    std::vector<float> buf(static_cast<std::size_t>(p->numel()));
    for (std::int64_t i = 0; i < p->numel(); ++i) buf[static_cast<std::size_t>(i)] = static_cast<float>((*p)[i]);
    w.blob(buf.data(), buf.size());
  }
  w.close();
}

template <typename S>
Encoder<S> load_encoder(const std::filesystem::path& path) {
  BinaryReader r(path);
  r.magic(kEncoderMagic, kEncoderVersion);
  const Json header = r.header();
  VaeConfig cfg = header.at("vae").get<VaeConfig>();
  Encoder<S> enc;
  Rng rng(0);
  enc.net = ConvVae<S>(cfg, rng);
  enc.frozen = header.at("frozen").get<bool>();
  enc.stack_depth = header.at("stack_depth").get<int>();
  enc.output_gain = static_cast<S>(header.at("output_gain").get<double>());
  for (auto* p : enc.net.param_ptrs()) {
    std::vector<float> buf(static_cast<std::size_t>(p->numel()));
    r.blob(buf.data(), buf.size());
    for (std::int64_t i = 0; i < p->numel(); ++i) (*p)[i] = static_cast<S>(buf[static_cast<std::size_t>(i)]);
  }
  if (!r.at_eof()) throw FormatError(path.string() + ": trailing bytes after parameters");
  return enc;
}

}  // namespace protox::pretrain
