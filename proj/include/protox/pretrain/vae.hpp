#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "protox/core/error.hpp"
#include "protox/core/rng.hpp"
#include "protox/core/tensor.hpp"
#include "protox/nn/layers.hpp"

namespace protox::pretrain {

// Convolutional siamese VAE. The encoder downsamples with stride-2 blocks to
// a latent block (latent_channels, H', W'); two 1x1 heads produce the
// posterior mean and log-variance. The decoder mirrors it with nearest
// upsampling. The posterior mean is the embedding used downstream.
struct VaeConfig {
  int in_channels = 6;
  int in_h = 64;
  int in_w = 64;
  std::vector<int> enc_channels{16, 32, 32, 32};
  int latent_channels = 16;
  std::vector<int> dec_channels{32, 32, 16, 16};
  double leaky_slope = 0.1;

  int n_blocks() const { return static_cast<int>(enc_channels.size()); }
  int latent_h() const { return in_h >> n_blocks(); }
  int latent_w() const { return in_w >> n_blocks(); }
  std::int64_t latent_dim() const {
    return static_cast<std::int64_t>(latent_channels) * latent_h() * latent_w();
  }

  void validate() const {
    if (in_channels < 1 || in_h < 1 || in_w < 1) throw ConfigError("vae: bad input shape");
    if (enc_channels.empty()) throw ConfigError("vae: need at least one encoder block");
    if (dec_channels.size() != enc_channels.size())
      throw ConfigError("vae: dec_channels must have one entry per encoder block");
    const int f = 1 << n_blocks();
    if (in_h % f != 0 || in_w % f != 0)
      throw ConfigError("vae: input " + std::to_string(in_h) + "x" + std::to_string(in_w) +
                        " not divisible by the downsampling factor " + std::to_string(f));
    if (latent_channels < 1) throw ConfigError("vae: latent_channels must be >= 1");
  }
};

inline void to_json(Json& j, const VaeConfig& c) {
  j = Json{{"in_channels", c.in_channels}, {"in_h", c.in_h},
           {"in_w", c.in_w},               {"enc_channels", c.enc_channels},
           {"latent_channels", c.latent_channels}, {"dec_channels", c.dec_channels},
           {"leaky_slope", c.leaky_slope}};
}

inline void from_json(const Json& j, VaeConfig& c) {
  j.at("in_channels").get_to(c.in_channels);
  j.at("in_h").get_to(c.in_h);
  j.at("in_w").get_to(c.in_w);
  j.at("enc_channels").get_to(c.enc_channels);
  j.at("latent_channels").get_to(c.latent_channels);
  j.at("dec_channels").get_to(c.dec_channels);
  j.at("leaky_slope").get_to(c.leaky_slope);
}

template <typename S>
class ConvVae {
 public:
  ConvVae() = default;

  explicit ConvVae(const VaeConfig& cfg, Rng& rng) : cfg_(cfg) {
    cfg_.validate();
    int ch = cfg_.in_channels;
    for (int c : cfg_.enc_channels) {
      nn::Conv<S> conv;
      conv.spec = {ch, c, 3, 2, 1};
      conv.init(rng);
      enc_.push_back(std::move(conv));
      ch = c;
    }
    mean_head_.spec = {ch, cfg_.latent_channels, 1, 1, 0};
    mean_head_.init(rng);
    logvar_head_.spec = {ch, cfg_.latent_channels, 1, 1, 0};
    logvar_head_.init(rng);

    dec_init_.spec = {cfg_.latent_channels, cfg_.dec_channels[0], 1, 1, 0};
    dec_init_.init(rng);
    const int n = cfg_.n_blocks();
    for (int j = 0; j < n; ++j) {
      nn::Conv<S> conv;
      const int in = cfg_.dec_channels[static_cast<std::size_t>(j)];
      const int out = (j + 1 < n) ? cfg_.dec_channels[static_cast<std::size_t>(j + 1)] : cfg_.in_channels;
      conv.spec = {in, out, 3, 1, 1};
      conv.init(rng);
      dec_.push_back(std::move(conv));
    }
  }

  const VaeConfig& config() const { return cfg_; }

  std::vector<int> latent_shape() const {
    return {cfg_.latent_channels, cfg_.latent_h(), cfg_.latent_w()};
  }

  // --- parameter plumbing (fixed enumeration order) ---

  std::vector<Tensor<S>*> param_ptrs() {
    std::vector<Tensor<S>*> out;
    for (auto& c : enc_) {
      out.push_back(&c.w);
      out.push_back(&c.b);
    }
    out.push_back(&mean_head_.w);
    out.push_back(&mean_head_.b);
    out.push_back(&logvar_head_.w);
    out.push_back(&logvar_head_.b);
    out.push_back(&dec_init_.w);
    out.push_back(&dec_init_.b);
    for (auto& c : dec_) {
      out.push_back(&c.w);
      out.push_back(&c.b);
    }
    return out;
  }

  std::vector<const Tensor<S>*> param_ptrs() const {
    auto* self = const_cast<ConvVae*>(this);
    std::vector<const Tensor<S>*> out;
    for (auto* p : self->param_ptrs()) out.push_back(p);
    return out;
  }

  std::vector<Tensor<S>> make_grads() const {
    std::vector<Tensor<S>> g;
    for (const auto* p : param_ptrs()) g.emplace_back(p->shape());
    return g;
  }

  std::size_t enc_w_index(std::size_t i) const { return 2 * i; }
  std::size_t mean_w_index() const { return 2 * enc_.size(); }
  std::size_t logvar_w_index() const { return 2 * enc_.size() + 2; }
  std::size_t dec_init_w_index() const { return 2 * enc_.size() + 4; }
  std::size_t dec_w_index(std::size_t j) const { return 2 * enc_.size() + 6 + 2 * j; }

  // --- encoder ---

  struct EncTrace {
    std::vector<Tensor<S>> inputs;  // input to each conv block
    std::vector<Tensor<S>> pre;     // pre-activation conv outputs
    Tensor<S> feat;                 // input to the posterior heads
    Tensor<S> mean, logvar;
  };

  EncTrace encode_trace(const Tensor<S>& x) const {
    x.check_shape({cfg_.in_channels, cfg_.in_h, cfg_.in_w}, "encoder input");
    EncTrace t;
    Tensor<S> cur = x;
    for (const auto& conv : enc_) {
      Tensor<S> pre = nn::conv_forward(conv, cur);
      t.inputs.push_back(std::move(cur));
      cur = pre;
      nn::leaky_relu_inplace(cur, static_cast<S>(cfg_.leaky_slope));
      t.pre.push_back(std::move(pre));
    }
    t.feat = cur;
    t.mean = nn::conv_forward(mean_head_, t.feat);
    t.logvar = nn::conv_forward(logvar_head_, t.feat);
    return t;
  }

  // Posterior-mean path only; the frozen-encoder fast path.
  Tensor<S> encode(const Tensor<S>& x) const {
    x.check_shape({cfg_.in_channels, cfg_.in_h, cfg_.in_w}, "encoder input");
    Tensor<S> cur = x;
    for (const auto& conv : enc_) {
      cur = nn::conv_forward(conv, cur);
      nn::leaky_relu_inplace(cur, static_cast<S>(cfg_.leaky_slope));
    }
    return nn::conv_forward(mean_head_, cur);
  }

  void encode_backward(const EncTrace& t, const Tensor<S>& dmean, const Tensor<S>& dlogvar,
                       std::vector<Tensor<S>>& g) const {
    Tensor<S> dfeat =
        nn::conv_backward(mean_head_, t.feat, dmean, g[mean_w_index()], g[mean_w_index() + 1]);
    Tensor<S> dfeat2 =
        nn::conv_backward(logvar_head_, t.feat, dlogvar, g[logvar_w_index()], g[logvar_w_index() + 1]);
    dfeat.vec() += dfeat2.vec();
    Tensor<S> d = std::move(dfeat);
    for (std::size_t i = enc_.size(); i-- > 0;) {
      nn::leaky_relu_backward_inplace(t.pre[i], d, static_cast<S>(cfg_.leaky_slope));
      d = nn::conv_backward(enc_[i], t.inputs[i], d, g[enc_w_index(i)], g[enc_w_index(i) + 1]);
    }
  }

  // --- decoder ---

  struct DecTrace {
    Tensor<S> z;
    Tensor<S> pre_init;
    std::vector<Tensor<S>> up_inputs;  // input to each 3x3 conv (post-upsample)
    std::vector<Tensor<S>> pre;        // pre-activation conv outputs
    Tensor<S> recon;                   // sigmoid output
  };

  DecTrace decode_trace(const Tensor<S>& z) const {
    DecTrace t;
    t.z = z;
    t.pre_init = nn::conv_forward(dec_init_, z);
    Tensor<S> cur = t.pre_init;
    nn::leaky_relu_inplace(cur, static_cast<S>(cfg_.leaky_slope));
    const int n = cfg_.n_blocks();
    for (int j = 0; j < n; ++j) {
      Tensor<S> up = nn::upsample2x(cur);
      Tensor<S> pre = nn::conv_forward(dec_[static_cast<std::size_t>(j)], up);
      t.up_inputs.push_back(std::move(up));
      cur = pre;
      if (j + 1 < n)
        nn::leaky_relu_inplace(cur, static_cast<S>(cfg_.leaky_slope));
      else
        nn::sigmoid_inplace(cur);
      t.pre.push_back(std::move(pre));
    }
    t.recon = cur;
    return t;
  }

  Tensor<S> decode_backward(const DecTrace& t, const Tensor<S>& drecon,
                            std::vector<Tensor<S>>& g) const {
    const int n = cfg_.n_blocks();
    Tensor<S> d = drecon;
    nn::sigmoid_backward_inplace(t.recon, d);
    for (int j = n - 1; j >= 0; --j) {
      const auto ju = static_cast<std::size_t>(j);
      Tensor<S> dup = nn::conv_backward(dec_[ju], t.up_inputs[ju], d, g[dec_w_index(ju)],
                                        g[dec_w_index(ju) + 1]);
      d = nn::upsample2x_backward(dup);
      if (j > 0) nn::leaky_relu_backward_inplace(t.pre[ju - 1], d, static_cast<S>(cfg_.leaky_slope));
    }
    nn::leaky_relu_backward_inplace(t.pre_init, d, static_cast<S>(cfg_.leaky_slope));
    return nn::conv_backward(dec_init_, t.z, d, g[dec_init_w_index()], g[dec_init_w_index() + 1]);
  }

  bool params_finite() const {
    for (const auto* p : param_ptrs())
      for (std::int64_t i = 0; i < p->numel(); ++i)
        if (!std::isfinite(static_cast<double>((*p)[i]))) return false;
    return true;
  }

 private:
  VaeConfig cfg_;
  std::vector<nn::Conv<S>> enc_;
  nn::Conv<S> mean_head_, logvar_head_;
  nn::Conv<S> dec_init_;
  std::vector<nn::Conv<S>> dec_;
};

}  // namespace protox::pretrain
