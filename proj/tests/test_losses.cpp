#include <catch2/catch_amalgamated.hpp>

#include "protox/pretrain/losses.hpp"
#include "test_helpers.hpp"

using namespace protox;
using namespace protox::pretrain;

namespace {
VecX<double> vec1(double v) {
  VecX<double> x(1);
  x[0] = v;
  return x;
}
}  // namespace

TEST_CASE("quadruplet loss scalar examples") {
  // za=0, zp=2, zn=1, znn=1.5, m1=m2=0.5 -> 3.5 + 4.25
  CHECK(quadruplet_loss<double>(vec1(0), vec1(2), vec1(1), vec1(1.5), 0.5, 0.5) ==
        Catch::Approx(7.75));
  // za=0, zp=1, zn=1, znn=1, m1=m2=0 -> 0 + 1
  CHECK(quadruplet_loss<double>(vec1(0), vec1(1), vec1(1), vec1(1), 0.0, 0.0) ==
        Catch::Approx(1.0));
  // Anchor equals positive with inactive hinges -> 0.
  CHECK(quadruplet_loss<double>(vec1(0), vec1(0), vec1(2), vec1(5), 0.5, 0.5) == 0.0);
}

TEST_CASE("quadruplet loss shape check and nonnegativity") {
  VecX<double> a(2), b(1);
  a.setZero();
  b.setZero();
  CHECK_THROWS_AS(quadruplet_loss<double>(a, b, b, b, 1, 1), ShapeError);

  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    VecX<double> za(4), zp(4), zn(4), znn(4);
    for (int k = 0; k < 4; ++k) {
      za[k] = rng.normal();
      zp[k] = rng.normal();
      zn[k] = rng.normal();
      znn[k] = rng.normal();
    }
    CHECK(quadruplet_loss<double>(za, zp, zn, znn, 1.0, 1.0) >= 0.0);
  }
}

TEST_CASE("quadruplet loss is monotone in the anchor-positive distance") {
  VecX<double> za = vec1(0), zn = vec1(1), znn = vec1(3);
  double prev = -1;
  for (double dist = 0; dist < 4.0; dist += 0.25) {
    const double loss = quadruplet_loss<double>(za, vec1(dist), zn, znn, 1.0, 1.0);
    CHECK(loss >= prev);
    prev = loss;
  }
}

TEST_CASE("quadruplet loss gradient matches central finite differences") {
  Rng rng(11);
  int checked = 0;
  for (int trial = 0; trial < 60 && checked < 20; ++trial) {
    const int d = 5;
    VecX<double> z[4];
    for (auto& v : z) {
      v.resize(d);
      for (int k = 0; k < d; ++k) v[k] = rng.normal();
    }
    const double m1 = 0.7, m2 = 0.4;
    // Stay away from the hinge kinks.
    const double h1 = (z[0] - z[1]).squaredNorm() - (z[0] - z[2]).squaredNorm() + m1;
    const double h2 = (z[0] - z[1]).squaredNorm() - (z[2] - z[3]).squaredNorm() + m2;
    if (std::abs(h1) < 1e-2 || std::abs(h2) < 1e-2) continue;
    ++checked;

    VecX<double> g[4];
    for (int i = 0; i < 4; ++i) g[i] = VecX<double>::Zero(d);
    quadruplet_loss_grad<double>(z[0], z[1], z[2], z[3], m1, m2, g[0], g[1], g[2], g[3]);

    for (int i = 0; i < 4; ++i) {
      for (int k = 0; k < d; ++k) {
        const double fd = testutil::fd_central(
            [&] { return quadruplet_loss<double>(z[0], z[1], z[2], z[3], m1, m2); }, &z[i][k]);
        CHECK(testutil::rel_err(g[i][k], fd) <= 1e-4);
      }
    }
  }
  CHECK(checked >= 20);
}

TEST_CASE("gaussian KL identities") {
  Tensor<double> mean({1});
  Tensor<double> logvar({1});
  CHECK(gaussian_kl(mean, logvar) == Catch::Approx(0.0));  // standard normal

  mean[0] = 1.0;
  CHECK(gaussian_kl(mean, logvar) == Catch::Approx(0.5));  // closed form

  logvar[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(gaussian_kl(mean, logvar), NumericError);
}

TEST_CASE("reconstruction error examples") {
  Tensor<double> x({2, 2, 2});
  for (std::int64_t i = 0; i < x.numel(); ++i) x[i] = 0.25 * static_cast<double>(i);
  Tensor<double> recon = x;
  CHECK(recon_mse(x, recon) == Catch::Approx(0.0));  // perfect reconstruction
  recon[0] += 1.0;
  CHECK(recon_mse(x, recon) == Catch::Approx(1.0 / 8.0));
  Tensor<double> wrong({2, 2, 1});
  CHECK_THROWS_AS(recon_mse(x, wrong), ShapeError);
}

TEST_CASE("vae_loss composes reconstruction and KL") {
  Tensor<double> x({1, 2, 2});
  Tensor<double> recon = x;
  Tensor<double> mean({4});
  Tensor<double> logvar({4});
  mean[0] = 1.0;
  CHECK(vae_loss(x, recon, mean, logvar) == Catch::Approx(0.5));
  CHECK(vae_loss(x, recon, mean, logvar, 2.0) == Catch::Approx(1.0));
}

TEST_CASE("KL and reconstruction gradients match finite differences") {
  Rng rng(5);
  Tensor<double> mean({6}), logvar({6});
  for (int i = 0; i < 6; ++i) {
    mean[i] = rng.normal();
    logvar[i] = 0.3 * rng.normal();
  }
  Tensor<double> dmean({6}), dlogvar({6});
  gaussian_kl_grad(mean, logvar, 1.0, dmean, dlogvar);
  for (int i = 0; i < 6; ++i) {
    const double fd_m = testutil::fd_central([&] { return gaussian_kl(mean, logvar); }, &mean[i]);
    const double fd_lv = testutil::fd_central([&] { return gaussian_kl(mean, logvar); }, &logvar[i]);
    CHECK(testutil::rel_err(dmean[i], fd_m) <= 1e-4);
    CHECK(testutil::rel_err(dlogvar[i], fd_lv) <= 1e-4);
  }

  Tensor<double> x({1, 2, 2}), recon({1, 2, 2});
  for (int i = 0; i < 4; ++i) {
    x[i] = rng.uniform();
    recon[i] = rng.uniform();
  }
  Tensor<double> drecon({1, 2, 2});
  recon_mse_grad(x, recon, 1.0, drecon);
  for (int i = 0; i < 4; ++i) {
    const double fd = testutil::fd_central([&] { return recon_mse(x, recon); }, &recon[i]);
    CHECK(testutil::rel_err(drecon[i], fd) <= 1e-4);
  }
}
