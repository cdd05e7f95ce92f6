#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "protox/core/rng.hpp"
#include "protox/core/tensor.hpp"

namespace protox::nn {

template <typename S>
using RowMat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// 2-d convolution over (C,H,W) tensors, implemented as im2col + GEMM.
struct ConvSpec {
  int in_ch = 0, out_ch = 0, k = 3, stride = 1, pad = 1;

  int out_h(int h) const { return (h + 2 * pad - k) / stride + 1; }
  int out_w(int w) const { return (w + 2 * pad - k) / stride + 1; }
};

template <typename S>
struct Conv {
  ConvSpec spec;
  Tensor<S> w;  // (out_ch, in_ch*k*k)
  Tensor<S> b;  // (out_ch)

  void init(Rng& rng) {
    const int fan_in = spec.in_ch * spec.k * spec.k;
    w = Tensor<S>({spec.out_ch, fan_in});
    b = Tensor<S>({spec.out_ch});
    const double std = std::sqrt(2.0 / fan_in);
    for (std::int64_t i = 0; i < w.numel(); ++i) w[i] = static_cast<S>(rng.normal() * std);
  }
};

template <typename S>
RowMat<S> im2col(const ConvSpec& c, const Tensor<S>& x) {
  const int H = x.dim(1), W = x.dim(2);
  const int ho = c.out_h(H), wo = c.out_w(W);
  RowMat<S> col(c.in_ch * c.k * c.k, ho * wo);
  col.setZero();
  for (int ch = 0; ch < c.in_ch; ++ch) {
    for (int ky = 0; ky < c.k; ++ky) {
      for (int kx = 0; kx < c.k; ++kx) {
        const int row = (ch * c.k + ky) * c.k + kx;
        for (int oy = 0; oy < ho; ++oy) {
          const int iy = oy * c.stride + ky - c.pad;
          if (iy < 0 || iy >= H) continue;
          for (int ox = 0; ox < wo; ++ox) {
            const int ix = ox * c.stride + kx - c.pad;
            if (ix < 0 || ix >= W) continue;
            col(row, oy * wo + ox) = x.at(ch, iy, ix);
          }
        }
      }
    }
  }
  return col;
}

template <typename S>
void col2im(const ConvSpec& c, const RowMat<S>& col, Tensor<S>& dx) {
  const int H = dx.dim(1), W = dx.dim(2);
  const int ho = c.out_h(H), wo = c.out_w(W);
  for (int ch = 0; ch < c.in_ch; ++ch) {
    for (int ky = 0; ky < c.k; ++ky) {
      for (int kx = 0; kx < c.k; ++kx) {
        const int row = (ch * c.k + ky) * c.k + kx;
        for (int oy = 0; oy < ho; ++oy) {
          const int iy = oy * c.stride + ky - c.pad;
          if (iy < 0 || iy >= H) continue;
          for (int ox = 0; ox < wo; ++ox) {
            const int ix = ox * c.stride + kx - c.pad;
            if (ix < 0 || ix >= W) continue;
            dx.at(ch, iy, ix) += col(row, oy * wo + ox);
          }
        }
      }
    }
  }
}

template <typename S>
Tensor<S> conv_forward(const Conv<S>& conv, const Tensor<S>& x) {
  const ConvSpec& c = conv.spec;
  x.check_shape({c.in_ch, x.dim(1), x.dim(2)}, "conv input");
  const int ho = c.out_h(x.dim(1)), wo = c.out_w(x.dim(2));
  const RowMat<S> col = im2col(c, x);
  Tensor<S> y({c.out_ch, ho, wo});
  Eigen::Map<const RowMat<S>> W(conv.w.data(), c.out_ch, c.in_ch * c.k * c.k);
  Eigen::Map<RowMat<S>> Y(y.data(), c.out_ch, ho * wo);
  Y.noalias() = W * col;
  for (int o = 0; o < c.out_ch; ++o) Y.row(o).array() += conv.b[o];
  return y;
}

// Accumulates dw/db; returns dx. Recomputes im2col from the cached input.
template <typename S>
Tensor<S> conv_backward(const Conv<S>& conv, const Tensor<S>& x, const Tensor<S>& dy,
                        Tensor<S>& dw, Tensor<S>& db) {
  const ConvSpec& c = conv.spec;
  const int ho = c.out_h(x.dim(1)), wo = c.out_w(x.dim(2));
  const RowMat<S> col = im2col(c, x);
  Eigen::Map<const RowMat<S>> dY(dy.data(), c.out_ch, ho * wo);
  Eigen::Map<RowMat<S>> dW(dw.data(), c.out_ch, c.in_ch * c.k * c.k);
  dW.noalias() += dY * col.transpose();
  for (int o = 0; o < c.out_ch; ++o) db[o] += dY.row(o).sum();

  Eigen::Map<const RowMat<S>> W(conv.w.data(), c.out_ch, c.in_ch * c.k * c.k);
  const RowMat<S> dcol = W.transpose() * dY;
  Tensor<S> dx({c.in_ch, x.dim(1), x.dim(2)});
  col2im(c, dcol, dx);
  return dx;
}

template <typename S>
void leaky_relu_inplace(Tensor<S>& x, S slope) {
  for (std::int64_t i = 0; i < x.numel(); ++i)
    if (x[i] < S(0)) x[i] *= slope;
}

// `pre` is the pre-activation value.
template <typename S>
void leaky_relu_backward_inplace(const Tensor<S>& pre, Tensor<S>& dy, S slope) {
  for (std::int64_t i = 0; i < dy.numel(); ++i)
    if (pre[i] < S(0)) dy[i] *= slope;
}

template <typename S>
void sigmoid_inplace(Tensor<S>& x) {
  for (std::int64_t i = 0; i < x.numel(); ++i) x[i] = S(1) / (S(1) + std::exp(-x[i]));
}

// `y` is the sigmoid output.
template <typename S>
void sigmoid_backward_inplace(const Tensor<S>& y, Tensor<S>& dy) {
  for (std::int64_t i = 0; i < dy.numel(); ++i) dy[i] *= y[i] * (S(1) - y[i]);
}

template <typename S>
Tensor<S> upsample2x(const Tensor<S>& x) {
  Tensor<S> y({x.dim(0), x.dim(1) * 2, x.dim(2) * 2});
  for (int c = 0; c < x.dim(0); ++c)
    for (int i = 0; i < x.dim(1); ++i)
      for (int j = 0; j < x.dim(2); ++j) {
        const S v = x.at(c, i, j);
        y.at(c, 2 * i, 2 * j) = v;
        y.at(c, 2 * i, 2 * j + 1) = v;
        y.at(c, 2 * i + 1, 2 * j) = v;
        y.at(c, 2 * i + 1, 2 * j + 1) = v;
      }
  return y;
}

template <typename S>
Tensor<S> upsample2x_backward(const Tensor<S>& dy) {
  Tensor<S> dx({dy.dim(0), dy.dim(1) / 2, dy.dim(2) / 2});
  for (int c = 0; c < dx.dim(0); ++c)
    for (int i = 0; i < dx.dim(1); ++i)
      for (int j = 0; j < dx.dim(2); ++j)
        dx.at(c, i, j) = dy.at(c, 2 * i, 2 * j) + dy.at(c, 2 * i, 2 * j + 1) +
                         dy.at(c, 2 * i + 1, 2 * j) + dy.at(c, 2 * i + 1, 2 * j + 1);
  return dx;
}

}  // namespace protox::nn
