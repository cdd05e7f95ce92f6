// Acceptance suite: one pass/fail line per criterion. Heavy criteria share
// one desk-scale pipeline run. Criterion numbers can be passed as arguments
// to run a subset, e.g. `acceptance 1 4 9`.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "protox/protox.hpp"

using namespace protox;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Harness {
  int failures = 0;
  std::set<int> selected;  // empty = all

  bool wants(int id) const { return selected.empty() || selected.count(id) > 0; }

  void report(int id, const std::string& name, bool pass, const std::string& detail,
              double seconds) {
    std::printf("[%s] criterion %d: %s — %s (%.1f s)\n", pass ? "PASS" : "FAIL", id, name.c_str(),
                detail.c_str(), seconds);
    std::fflush(stdout);
    if (!pass) ++failures;
  }
};

struct Timer {
  Clock::time_point t0 = Clock::now();
  double seconds() const { return std::chrono::duration<double>(Clock::now() - t0).count(); }
};

// ---------------------------------------------------------------- criterion 1

// Independent naive-loop oracles, double precision.
double oracle_sq_norm(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return acc;
}

bool criterion1(Harness& h) {
  Timer timer;
  Rng rng(101);
  double worst = 0;
  auto track = [&](double got, double want) { worst = std::max(worst, std::abs(got - want)); };

  for (int trial = 0; trial < 120; ++trial) {
    const int d = 2 + static_cast<int>(rng.uniform_index(10));
    // quadruplet loss
    {
      std::vector<double> a(d), p(d), n(d), nn(d);
      VecX<double> va(d), vp(d), vn(d), vnn(d);
      for (int i = 0; i < d; ++i) {
        a[i] = rng.normal(); p[i] = rng.normal(); n[i] = rng.normal(); nn[i] = rng.normal();
        va[i] = a[i]; vp[i] = p[i]; vn[i] = n[i]; vnn[i] = nn[i];
      }
      const double m1 = rng.uniform(), m2 = rng.uniform();
      const double want = std::max(oracle_sq_norm(a, p) - oracle_sq_norm(a, n) + m1, 0.0) +
                          std::max(oracle_sq_norm(a, p) - oracle_sq_norm(n, nn) + m2, 0.0);
      track(pretrain::quadruplet_loss<double>(va, vp, vn, vnn, m1, m2), want);
    }
    // similarity
    {
      VecX<double> z(d), p(d);
      std::vector<double> za(d), pa(d);
      for (int i = 0; i < d; ++i) {
        z[i] = rng.normal(); p[i] = rng.normal();
        za[i] = z[i]; pa[i] = p[i];
      }
      const double beta = 0.01 + rng.uniform();
      track(model::similarity(z, p, beta), std::exp(-beta * std::sqrt(oracle_sq_norm(za, pa))));
    }
    // iso penalty
    {
      model::IsometryLayer<double> iso;
      iso.A = RowMatX<double>(d, d);
      for (Eigen::Index i = 0; i < iso.A.size(); ++i) iso.A(i) = rng.normal();
      double want = 0;
      for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) {
          double g = 0;
          for (int k = 0; k < d; ++k) g += iso.A(k, r) * iso.A(k, c);
          if (r == c) g -= 1.0;
          want += g * g;
        }
      track(model::iso_penalty(iso), want);
    }
  }

  // Composite terms on random head models with random batches.
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 3 + static_cast<int>(rng.uniform_index(5));
    const int A = 2 + static_cast<int>(rng.uniform_index(3));
    const int K = 1 + static_cast<int>(rng.uniform_index(3));
    const int M = A * K;
    const int B = 4 + static_cast<int>(rng.uniform_index(12));

    model::ProtoXModel<double> m;
    m.action_names.resize(A);
    for (int a = 0; a < A; ++a) m.action_names[a] = "A" + std::to_string(a);
    m.iso.A = RowMatX<double>(d, d);
    for (Eigen::Index i = 0; i < m.iso.A.size(); ++i) m.iso.A(i) = rng.normal();
    m.protos.P = RowMatX<double>(M, d);
    for (Eigen::Index i = 0; i < m.protos.P.size(); ++i) m.protos.P(i) = rng.normal();
    m.protos.beta = 0.05 + rng.uniform();
    m.protos.action_tags.resize(M);
    m.protos.sources.assign(M, {0, 0});
    for (int i = 0; i < M; ++i) m.protos.action_tags[i] = i % A;
    m.head.W = RowMatX<double>(M, A);
    for (Eigen::Index i = 0; i < m.head.W.size(); ++i) m.head.W(i) = rng.normal();
    m.encoder.frozen = true;

    train::EncodedBatch<double> batch;
    batch.F = RowMatX<double>(B, d);
    for (Eigen::Index i = 0; i < batch.F.size(); ++i) batch.F(i) = rng.normal();
    batch.labels.resize(B);
    for (auto& y : batch.labels) y = static_cast<int>(rng.uniform_index(A));

    // Naive forward.
    std::vector<std::vector<double>> dist(B, std::vector<double>(M));
    std::vector<std::vector<double>> sim = dist;
    std::vector<std::vector<double>> ev(B, std::vector<double>(A, 0.0));
    for (int i = 0; i < B; ++i) {
      std::vector<double> z(d, 0.0);
      for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) z[r] += m.iso.A(r, c) * batch.F(i, c);
      for (int mm = 0; mm < M; ++mm) {
        double acc = 0;
        for (int c = 0; c < d; ++c) {
          const double diff = z[c] - m.protos.P(mm, c);
          acc += diff * diff;
        }
        dist[i][mm] = std::sqrt(acc);
        sim[i][mm] = std::exp(-m.protos.beta * dist[i][mm]);
        for (int a = 0; a < A; ++a) ev[i][a] += m.head.W(mm, a) * sim[i][mm];
      }
    }
    // evidence oracle through the library entry point
    {
      VecX<double> s0(M);
      for (int mm = 0; mm < M; ++mm) s0[mm] = sim[0][mm];
      const VecX<double> got = model::evidence(s0, m.head);
      for (int a = 0; a < A; ++a) track(got[a], ev[0][a]);
    }
    // ce
    double ce = 0;
    for (int i = 0; i < B; ++i) {
      double lse = 0;
      for (int a = 0; a < A; ++a) lse += std::exp(ev[i][a]);
      ce += std::log(lse) - ev[i][batch.labels[i]];
    }
    ce /= B;
    track(train::ce_term(batch, m), ce);
    // sep / clst
    double sep = 0, clst = 0;
    for (int i = 0; i < B; ++i) {
      double wrong = 1e300, same = 1e300;
      for (int mm = 0; mm < M; ++mm) {
        if (m.protos.action_tags[mm] == batch.labels[i])
          same = std::min(same, dist[i][mm]);
        else
          wrong = std::min(wrong, dist[i][mm]);
      }
      sep += wrong;
      clst += same;
    }
    track(train::sep_term(batch, m), -sep / B);
    track(train::clst_term(batch, m), clst / B);
    // rep over an independent sample
    RowMatX<double> sample(B, d);
    for (Eigen::Index i = 0; i < sample.size(); ++i) sample(i) = rng.normal();
    double rep = 0;
    for (int mm = 0; mm < M; ++mm) {
      double best = 1e300;
      for (int i = 0; i < B; ++i) {
        std::vector<double> z(d, 0.0);
        for (int r = 0; r < d; ++r)
          for (int c = 0; c < d; ++c) z[r] += m.iso.A(r, c) * sample(i, c);
        std::vector<double> pr(d);
        for (int c = 0; c < d; ++c) pr[c] = m.protos.P(mm, c);
        best = std::min(best, oracle_sq_norm(z, pr));
      }
      rep += best;
    }
    track(train::rep_term(sample, m), rep);
  }

  std::ostringstream detail;
  detail << "max |library - oracle| = " << worst << " over 220 random instances";
  const bool pass = worst <= 1e-6;
  h.report(1, "oracle equivalence of loss terms", pass, detail.str(), timer.seconds());
  return pass;
}

// ---------------------------------------------------------------- criterion 2

bool criterion2(Harness& h) {
  Timer timer;
  const train::ObjectiveWeights w{0.4, 0.6, 0.15, 1.3};
  Rng seed_rng(0);
  double worst = 0;
  int configurations = 0;

  for (std::uint64_t seed = 0; seed < 200 && configurations < 3; ++seed) {
    // Tiny model: latent dim 4, K = 2, |A| = 2, batch 8.
    Rng rng(9000 + seed);
    model::ProtoXModel<double> m;
    m.action_names = {"A0", "A1"};
    m.iso = model::IsometryLayer<double>::identity(4);
    for (Eigen::Index i = 0; i < m.iso.A.size(); ++i) m.iso.A(i) += 0.05 * rng.normal();
    m.protos.P = RowMatX<double>(4, 4);
    for (Eigen::Index i = 0; i < m.protos.P.size(); ++i) m.protos.P(i) = rng.normal();
    m.protos.beta = 0.05;
    m.protos.action_tags = {0, 1, 0, 1};
    m.protos.sources.assign(4, {0, 0});
    m.head.W = RowMatX<double>(4, 2);
    for (Eigen::Index i = 0; i < m.head.W.size(); ++i) m.head.W(i) = rng.normal();
    m.encoder.frozen = true;

    train::EncodedBatch<double> batch;
    batch.F = RowMatX<double>(8, 4);
    for (Eigen::Index i = 0; i < batch.F.size(); ++i) batch.F(i) = rng.normal();
    batch.labels.resize(8);
    for (auto& y : batch.labels) y = static_cast<int>(rng.uniform_index(2));
    RowMatX<double> sample(6, 4);
    for (Eigen::Index i = 0; i < sample.size(); ++i) sample(i) = rng.normal();

    // Kink margins: argmin gaps and zero distances clear of the FD step.
    bool clear = true;
    const RowMatX<double> Z = batch.F * m.iso.A.transpose();
    for (Eigen::Index i = 0; i < Z.rows() && clear; ++i) {
      double s1 = 1e300, s2 = 1e300, w1 = 1e300, w2 = 1e300;
      for (Eigen::Index mm = 0; mm < 4; ++mm) {
        const double dd = (Z.row(i) - m.protos.P.row(mm)).norm();
        if (dd < 1e-3) clear = false;
        const bool same = m.protos.action_tags[mm] == batch.labels[i];
        double& b1 = same ? s1 : w1;
        double& b2 = same ? s2 : w2;
        if (dd < b1) { b2 = b1; b1 = dd; } else if (dd < b2) { b2 = dd; }
      }
      if (s2 - s1 < 1e-3 || w2 - w1 < 1e-3) clear = false;
    }
    const RowMatX<double> Zr = sample * m.iso.A.transpose();
    for (Eigen::Index mm = 0; mm < 4 && clear; ++mm) {
      double b1 = 1e300, b2 = 1e300;
      for (Eigen::Index i = 0; i < Zr.rows(); ++i) {
        const double dd = (Zr.row(i) - m.protos.P.row(mm)).squaredNorm();
        if (dd < b1) { b2 = b1; b1 = dd; } else if (dd < b2) { b2 = dd; }
      }
      if (b2 - b1 < 1e-3) clear = false;
    }
    if (!clear) continue;
    ++configurations;

    auto grads = train::HeadGrads<double>::zeros(m);
    train::objective_and_grads(batch, m, w, sample, &grads);
    auto value = [&] { return static_cast<double>(train::total_objective(batch, m, w, sample).total); };
    auto fd_check = [&](double* x, double analytic) {
      const double x0 = *x;
      const double hstep = 1e-5;
      *x = x0 + hstep;
      const double fp = value();
      *x = x0 - hstep;
      const double fm = value();
      *x = x0;
      const double fd = (fp - fm) / (2 * hstep);
      worst = std::max(worst,
                       std::abs(analytic - fd) / std::max({1.0, std::abs(analytic), std::abs(fd)}));
    };
    for (Eigen::Index i = 0; i < m.iso.A.size(); ++i) fd_check(&m.iso.A(i), grads.dA(i));
    for (Eigen::Index i = 0; i < m.protos.P.size(); ++i) fd_check(&m.protos.P(i), grads.dP(i));
    for (Eigen::Index i = 0; i < m.head.W.size(); ++i) fd_check(&m.head.W(i), grads.dW(i));
  }

  std::ostringstream detail;
  detail << "max relative error " << worst << " over " << configurations << " tiny models";
  const bool pass = configurations >= 3 && worst <= 1e-4;
  h.report(2, "gradient checks of the full objective", pass, detail.str(), timer.seconds());
  return pass;
}

// ---------------------------------------------------------------- criterion 3

bool criterion3(Harness& h) {
  Timer timer;
  Rng rng(303);
  bool pass = true;
  std::ostringstream detail;

  // Random head model over random encodings.
  const int d = 32, M = 30, n = 500;
  model::ProtoXModel<double> m;
  m.action_names = {"A0", "A1", "A2"};
  m.iso = model::IsometryLayer<double>::identity(d);
  for (Eigen::Index i = 0; i < m.iso.A.size(); ++i) m.iso.A(i) += 0.02 * rng.normal();
  m.protos.P = RowMatX<double>(M, d);
  for (Eigen::Index i = 0; i < m.protos.P.size(); ++i) m.protos.P(i) = rng.normal();
  m.protos.beta = 0.05;
  m.protos.action_tags.resize(M);
  for (int i = 0; i < M; ++i) m.protos.action_tags[i] = i % 3;
  m.protos.sources.assign(M, model::kNoSource);
  m.head.W = RowMatX<double>(M, 3);
  for (Eigen::Index i = 0; i < m.head.W.size(); ++i) m.head.W(i) = rng.normal();
  m.encoder.frozen = true;

  RowMatX<double> F(n, d);
  for (Eigen::Index i = 0; i < F.size(); ++i) F(i) = rng.normal();
  std::vector<std::pair<int, int>> index;
  for (int i = 0; i < n; ++i) index.emplace_back(i / 50, i % 50);

  train::project_prototypes(m, F, index, 0);
  const RowMatX<double> Z = F * m.iso.A.transpose();
  double worst_post = 0;
  for (Eigen::Index k = 0; k < M; ++k) {
    const auto src = m.protos.sources[k];
    const Eigen::Index row = static_cast<Eigen::Index>(src.first) * 50 + src.second;
    worst_post = std::max(worst_post, (m.protos.P.row(k) - Z.row(row)).norm());
  }
  if (worst_post > 1e-6) {
    pass = false;
    detail << "projection postcondition violated (" << worst_post << "); ";
  }

  const RowMatX<double> P1 = m.protos.P;
  const auto sources1 = m.protos.sources;
  train::project_prototypes(m, F, index, 0);
  if ((m.protos.P - P1).cwiseAbs().maxCoeff() != 0.0 || m.protos.sources != sources1) {
    pass = false;
    detail << "projection not idempotent; ";
  }

  // Force sharing, then merging must preserve evidence.
  for (Eigen::Index k = 0; k < M; ++k) {
    const Eigen::Index group = static_cast<Eigen::Index>(rng.uniform_index(8));
    m.protos.sources[k] = sources1[group];
    m.protos.P.row(k) = P1.row(group);
  }
  auto [merged, mreport] = train::merge_prototypes(m);
  double worst_ev = 0;
  for (int trial = 0; trial < 100; ++trial) {
    VecX<double> f(d);
    for (int i = 0; i < d; ++i) f[i] = rng.normal();
    const auto a = model::predict_encoded(m, f);
    const auto b = model::predict_encoded(merged, f);
    for (Eigen::Index c = 0; c < a.evidence.size(); ++c)
      worst_ev = std::max(worst_ev, std::abs(a.evidence[c] - b.evidence[c]));
  }
  if (worst_ev > 1e-5) {
    pass = false;
    detail << "merge changed evidence by " << worst_ev << "; ";
  }
  detail << "postcondition max " << worst_post << ", merge " << mreport.initial << "->"
         << mreport.merged << ", evidence drift " << worst_ev;
  h.report(3, "projection and merging invariants", pass, detail.str(), timer.seconds());
  return pass;
}

// ---------------------------------------------------------------- criterion 4

bool criterion4(Harness& h) {
  Timer timer;
  Rng rng(404);
  const int d = 24;
  bool pass = true;
  double worst_ratio = 0;
  for (double delta : {0.0, 0.1, 0.5}) {
    // Orthogonal factors via QR.
    auto ortho = [&rng, d]() {
      MatX<double> g(d, d);
      for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = rng.normal();
      Eigen::HouseholderQR<MatX<double>> qr(g);
      return MatX<double>(qr.householderQ());
    };
    const MatX<double> U = ortho(), V = ortho();
    VecX<double> sv = VecX<double>::Ones(d);
    sv[0] = std::sqrt(1.0 + delta);
    const MatX<double> A = U * sv.asDiagonal() * V.transpose();
    for (int pair = 0; pair < 1000; ++pair) {
      VecX<double> z(d), zp(d);
      for (int i = 0; i < d; ++i) {
        z[i] = rng.normal();
        zp[i] = rng.normal();
      }
      const double lhs = (A * (z - zp)).squaredNorm();
      const double rhs = (1.0 + delta) * (z - zp).squaredNorm();
      worst_ratio = std::max(worst_ratio, lhs / rhs);
      if (lhs > rhs * (1.0 + 1e-12) + 1e-12) pass = false;
    }
  }
  std::ostringstream detail;
  detail << "3000 pairs, worst lhs/((1+delta)*rhs) = " << worst_ratio;
  h.report(4, "near-isometry expansion bound", pass, detail.str(), timer.seconds());
  return pass;
}

// ---------------------------------------------------------------- criterion 9

bool criterion9(Harness& h) {
  Timer timer;
  Rng rng(909);
  bool pass = true;
  for (int trial = 0; trial < 1000 && pass; ++trial) {
    const int len = 1 + static_cast<int>(rng.uniform_index(200));
    data::Trajectory traj;
    traj.episode_id = trial;
    traj.actions.resize(len);
    for (auto& a : traj.actions) a = static_cast<env::ActionId>(rng.uniform_index(4));
    traj.observations.resize(len);
    for (auto& o : traj.observations) {
      o.h = 1;
      o.w = 1;
      o.pixels.assign(3, 0);
    }
    std::vector<int> brute;
    for (int t = 1; t < len; ++t)
      if (traj.actions[t] != traj.actions[t - 1]) brute.push_back(t);
    const auto got = data::find_flip_points(traj);
    if (got.entries.size() != brute.size()) pass = false;
    for (std::size_t i = 0; i < brute.size() && pass; ++i)
      if (got.entries[i] != std::make_pair(trial, brute[i])) pass = false;
  }
  h.report(9, "flip-point oracle", pass, "1000 random action sequences, exact match",
           timer.seconds());
  return pass;
}

// ----------------------------------------------------- criteria 5/6/7/10 (heavy)

struct PipelineArtifacts {
  data::DemonstrationDataset train_set, test_set;
  pretrain::Encoder<float> encoder;
  model::ProtoXModel<float> merged;
  train::MergeReport merge_report;
  RowMatX<float> train_F;
  metrics::EvalReport eval;
};

PipelineArtifacts run_pipeline(std::uint64_t seed) {
  PipelineArtifacts art;
  const PipelineConfig cfg;  // documented defaults throughout

  std::printf("      [pipeline] collecting %llu pairs...\n",
              static_cast<unsigned long long>(cfg.n_pairs));
  std::fflush(stdout);
  auto all = data::collect_corridor(cfg.env_config(seed), env::good_expert(), cfg.n_pairs, seed,
                                    cfg.stack_depth);
  std::tie(art.train_set, art.test_set) = data::split(all, cfg.train_fraction, seed);
  std::printf("      [pipeline] %zu train / %zu test states\n", art.train_set.n_states(),
              art.test_set.n_states());
  std::fflush(stdout);

  pretrain::PretrainConfig pc;
  pc.epochs = cfg.pre_epochs;
  pc.batch_size = cfg.pre_batch_size;
  pc.learning_rate = cfg.pre_learning_rate;
  pc.quadruplets_per_epoch = cfg.quadruplets_per_epoch;
  pc.kl_weight = cfg.kl_weight;
  pc.vae_weight = cfg.vae_weight;
  pc.target_median_distance = cfg.target_distance;
  pc.seed = seed;
  auto [encoder, pre_hist] = pretrain::pretrain_encoder<float>(art.train_set, cfg.vae_config(),
                                                               cfg.miner, pc, &std::cout);
  art.encoder = std::move(encoder);

  std::printf("      [pipeline] encoding training set...\n");
  std::fflush(stdout);
  art.train_F = pretrain::encode_dataset(art.encoder, art.train_set, 0);
  std::vector<int> labels(art.train_set.n_states());
  for (std::size_t i = 0; i < labels.size(); ++i)
    labels[i] = static_cast<int>(data::label_at(art.train_set, i));

  auto m = model::init_model<float>(art.encoder, art.train_F, labels, art.train_set.action_names,
                                    cfg.initial_k, static_cast<float>(cfg.beta), seed);
  train::TrainConfig tc;
  tc.epochs = cfg.train_epochs;
  tc.batch_size = cfg.train_batch_size;
  tc.learning_rate = cfg.train_learning_rate;
  tc.projection_period = cfg.projection_period;
  tc.initial_K = cfg.initial_k;
  tc.rep_subsample = cfg.rep_subsample;
  tc.seed = seed;
  train::train_bc(m, art.train_F, labels, art.train_set.index, cfg.weights, tc, &std::cout);

  auto [merged, report] = train::merge_prototypes(m);
  art.merged = std::move(merged);
  art.merge_report = report;
  art.eval = metrics::evaluate(art.merged, art.test_set, 0);
  return art;
}

bool criterion5(Harness& h, const PipelineArtifacts& art) {
  Timer timer;
  std::ostringstream detail;
  detail << "fidelity " << art.eval.fidelity << " (need >= 0.90), sensitivity "
         << art.eval.sensitivity << " over " << art.eval.n_flip
         << " flips (need >= 0.80), prototypes " << art.merge_report.initial << "->"
         << art.merge_report.merged << " (need <= 25)";
  const bool pass = art.eval.fidelity >= 0.90 && art.eval.sensitivity >= 0.80 &&
                    art.merge_report.merged <= 25 && art.merge_report.initial == 100;
  h.report(5, "end-to-end corridor benchmark", pass, detail.str(), timer.seconds());
  return pass;
}

bool criterion6(Harness& h, const PipelineArtifacts& art, std::uint64_t seed) {
  Timer timer;
  const PipelineConfig cfg;
  const auto stats = pretrain::measure_separation(art.encoder, art.test_set, cfg.miner, 500, seed);
  const double margin = stats.mean_near_neg_dist * 0.10;
  const bool pass = stats.n_quadruplets == 500 &&
                    stats.mean_pos_dist < stats.mean_near_neg_dist - margin;
  std::ostringstream detail;
  detail << "mean positive distance " << stats.mean_pos_dist << " vs near-negative "
         << stats.mean_near_neg_dist << " over " << stats.n_quadruplets
         << " held-out quadruplets (need 10% margin)";
  h.report(6, "pre-training separation property", pass, detail.str(), timer.seconds());
  return pass;
}

bool criterion7(Harness& h, const PipelineArtifacts& art) {
  Timer timer;
  // Classify train states by jump cause via re-simulation.
  const auto train_info = data::annotate_dataset(art.train_set);
  std::vector<char> train_is_pipe_jump(art.train_set.n_states(), 0);
  {
    std::size_t flat = 0;
    for (std::size_t e = 0; e < art.train_set.trajectories.size(); ++e) {
      const auto& traj = art.train_set.trajectories[e];
      for (std::size_t t = 0; t < traj.actions.size(); ++t, ++flat) {
        const auto cause = data::jump_cause(traj, train_info[e], static_cast<int>(t));
        train_is_pipe_jump[flat] = cause && *cause == env::ObstacleKind::pipe;
      }
    }
  }

  // Hole-jump probes from the test set.
  const auto test_info = data::annotate_dataset(art.test_set);
  std::vector<std::pair<int, int>> probes;
  for (std::size_t e = 0; e < art.test_set.trajectories.size(); ++e) {
    const auto& traj = art.test_set.trajectories[e];
    for (std::size_t t = 0; t < traj.actions.size(); ++t) {
      const auto cause = data::jump_cause(traj, test_info[e], static_cast<int>(t));
      if (cause && *cause == env::ObstacleKind::hole)
        probes.emplace_back(traj.episode_id, static_cast<int>(t));
    }
  }
  if (probes.size() > 100) probes.resize(100);

  int hits = 0;
  for (const auto& [ep, t] : probes) {
    const auto& traj = art.test_set.trajectory_by_id(ep);
    const auto x = data::state_tensor<float>(traj, t, art.test_set.stack_depth);
    const VecX<float> probe_enc = pretrain::flat_mean(art.merged.encoder.encode(x));
    const auto overlay = explain::nearest_overlay(art.merged, art.train_set, art.train_F, probe_enc,
                                                  30, true);
    bool found = false;
    for (std::size_t idx : overlay.members)
      if (train_is_pipe_jump[idx]) {
        found = true;
        break;
      }
    hits += found;
  }
  const double rate = probes.empty() ? 0.0 : static_cast<double>(hits) / probes.size();
  std::ostringstream detail;
  detail << hits << "/" << probes.size()
         << " hole-jump probes have a pipe-jump state in their top-30 post-isometry neighbors"
         << " (need >= 0.70)";
  const bool pass = !probes.empty() && rate >= 0.70;
  h.report(7, "scenario-similarity property", pass, detail.str(), timer.seconds());
  return pass;
}

bool criterion10(Harness& h, const PipelineArtifacts& art, std::uint64_t seed) {
  Timer timer;
  const PipelineConfig cfg;
  std::ostringstream detail;
  bool pass = true;

  // Bad-agent pipeline: same encoder, demonstrations from the jump-free expert.
  auto bad_all = data::collect_corridor(cfg.env_config(seed), env::bad_expert(), cfg.n_pairs, seed,
                                        cfg.stack_depth);
  auto [bad_train, bad_test] = data::split(bad_all, cfg.train_fraction, seed);
  const RowMatX<float> bad_F = pretrain::encode_dataset(art.encoder, bad_train, 0);
  std::vector<int> bad_labels(bad_train.n_states());
  for (std::size_t i = 0; i < bad_labels.size(); ++i)
    bad_labels[i] = static_cast<int>(data::label_at(bad_train, i));

  auto bad_model = model::init_model<float>(art.encoder, bad_F, bad_labels, bad_train.action_names,
                                            cfg.initial_k, static_cast<float>(cfg.beta), seed);
  train::TrainConfig tc;
  tc.epochs = cfg.train_epochs;
  tc.batch_size = cfg.train_batch_size;
  tc.learning_rate = cfg.train_learning_rate;
  tc.projection_period = cfg.projection_period;
  tc.initial_K = cfg.initial_k;
  tc.rep_subsample = cfg.rep_subsample;
  tc.seed = seed;
  train::train_bc(bad_model, bad_F, bad_labels, bad_train.index, cfg.weights, tc);
  auto [bad_merged, bad_report] = train::merge_prototypes(bad_model);

  const double bad_fidelity = metrics::fidelity(bad_merged, bad_test, 0);
  const int jump_pos = diagnostics::count_positive_weights(bad_merged, 1, 1e-8);
  const int rjump_pos = diagnostics::count_positive_weights(bad_merged, 2, 1e-8);
  detail << "bad-agent fidelity " << bad_fidelity << " (need >= 0.95), positive jump weights "
         << jump_pos + rjump_pos << " (need 0)";
  if (bad_fidelity < 0.95 || jump_pos != 0 || rjump_pos != 0) pass = false;

  // Localization: the good model's importance maps concentrate on the
  // obstacle of the prototype's source frame.
  const auto probes = diagnostics::jump_flip_probes(art.test_set);
  const auto train_info = data::annotate_dataset(art.train_set);
  std::vector<std::size_t> traj_pos_by_id(art.train_set.trajectories.size());
  const auto mask = cfg.mask_fill(art.train_set);

  int localized = 0, tested = 0;
  for (const auto& probe : probes) {
    if (tested >= 50) break;
    const auto& traj = art.test_set.trajectory_by_id(probe.first);
    const auto x = data::state_tensor<float>(traj, probe.second, art.test_set.stack_depth);
    const auto expl = explain::explain(art.merged, x, 1);
    if (expl.contributions.empty()) continue;
    const auto& top = expl.contributions.front();

    // Ground truth bbox on the prototype's source frame.
    std::size_t src_pos = 0;
    for (; src_pos < art.train_set.trajectories.size(); ++src_pos)
      if (art.train_set.trajectories[src_pos].episode_id == top.source.first) break;
    if (src_pos == art.train_set.trajectories.size()) continue;
    const auto& info = train_info[src_pos][static_cast<std::size_t>(top.source.second)];
    if (!info.nearest_bbox) continue;
    ++tested;

    const auto map = explain::importance_map(art.merged, art.train_set, x, top.prototype_id,
                                             cfg.patch_size, cfg.patch_stride, mask,
                                             cfg.keep_fraction);
    const auto [my, mx] = map.argmax();
    const auto& bb = *info.nearest_bbox;
    if (mx >= bb[0] && my >= bb[1] && mx <= bb[2] && my <= bb[3]) ++localized;
  }
  const double rate = tested == 0 ? 0.0 : static_cast<double>(localized) / tested;
  detail << "; importance maps localized on the obstacle for " << localized << "/" << tested
         << " probes (need >= 0.80)";
  if (tested == 0 || rate < 0.80) pass = false;

  h.report(10, "diagnosis study", pass, detail.str(), timer.seconds());
  return pass;
}

// ---------------------------------------------------------------- criterion 8

bool criterion8(Harness& h) {
  Timer timer;
  std::ostringstream detail;
  bool pass = true;
  const fs::path tmp = fs::temp_directory_path() / "protox_acceptance_c8";
  fs::create_directories(tmp);

  // Datasets and splits.
  env::CorridorConfig ec;
  auto d1 = data::collect_corridor(ec, env::good_expert(), 1000, 77);
  auto d2 = data::collect_corridor(ec, env::good_expert(), 1000, 77);
  if (!(d1 == d2)) {
    pass = false;
    detail << "collect not deterministic; ";
  }
  auto [tr1, te1] = data::split(d1, 0.8, 5);
  auto [tr2, te2] = data::split(d2, 0.8, 5);
  if (!(tr1 == tr2 && te1 == te2)) {
    pass = false;
    detail << "split not deterministic; ";
  }

  // Mined quadruplets.
  pretrain::MinerConfig mc;
  Rng r1(9), r2(9);
  for (int i = 0; i < 200; ++i) {
    const auto anchor = d1.index[i % d1.index.size()];
    auto q1 = pretrain::mine_quadruplet(d1, anchor, mc, r1);
    auto q2 = pretrain::mine_quadruplet(d2, anchor, mc, r2);
    const bool same = q1.has_value() == q2.has_value() &&
                      (!q1 || (q1->positive == q2->positive &&
                               q1->near_negative == q2->near_negative &&
                               q1->far_negative == q2->far_negative));
    if (!same) {
      pass = false;
      detail << "mining not deterministic; ";
      break;
    }
  }

  // Dataset file round trip, bit exact.
  data::save(tr1, tmp / "a.ptxd");
  auto loaded = data::load(tmp / "a.ptxd");
  data::save(loaded, tmp / "b.ptxd");
  if (!(loaded == tr1) || hash_file(tmp / "a.ptxd") != hash_file(tmp / "b.ptxd")) {
    pass = false;
    detail << "dataset round trip not bit-exact; ";
  }

  // Encoder + model checkpoints round trip; head training reproducibility.
  pretrain::VaeConfig vc;
  vc.in_channels = 6;
  vc.in_h = 64;
  vc.in_w = 64;
  vc.enc_channels = {8, 8, 8, 8};
  vc.latent_channels = 4;
  vc.dec_channels = {8, 8, 8, 8};
  pretrain::PretrainConfig pc;
  pc.epochs = 1;
  pc.quadruplets_per_epoch = 60;
  pc.seed = 3;
  pc.workers = 1;
  auto [enc, hist] = pretrain::pretrain_encoder<float>(tr1, vc, mc, pc);
  pretrain::save_encoder(enc, tmp / "e1.ptxe");
  auto enc_back = pretrain::load_encoder<float>(tmp / "e1.ptxe");
  pretrain::save_encoder(enc_back, tmp / "e2.ptxe");
  if (hash_file(tmp / "e1.ptxe") != hash_file(tmp / "e2.ptxe")) {
    pass = false;
    detail << "encoder round trip not bit-exact; ";
  }

  const RowMatX<float> F = pretrain::encode_dataset(enc, tr1, 1);
  std::vector<int> labels(tr1.n_states());
  for (std::size_t i = 0; i < labels.size(); ++i)
    labels[i] = static_cast<int>(data::label_at(tr1, i));
  train::TrainConfig tc;
  tc.epochs = 12;
  tc.projection_period = 6;
  tc.initial_K = 4;
  tc.rep_subsample = 512;
  tc.seed = 21;
  tc.workers = 1;
  auto ma = model::init_model<float>(enc, F, labels, tr1.action_names, 4, 0.05f, 21);
  auto mb = ma;
  train::train_bc(ma, F, labels, tr1.index, train::ObjectiveWeights{}, tc);
  train::train_bc(mb, F, labels, tr1.index, train::ObjectiveWeights{}, tc);
  if (ma.protos.sources != mb.protos.sources) {
    pass = false;
    detail << "final prototype sources differ across identical runs; ";
  }
  model::save_model(ma, tmp / "m1.ptxm");
  auto m_back = model::load_model<float>(tmp / "m1.ptxm", enc);
  model::save_model(m_back, tmp / "m2.ptxm");
  if (hash_file(tmp / "m1.ptxm") != hash_file(tmp / "m2.ptxm")) {
    pass = false;
    detail << "model round trip not bit-exact; ";
  }

  fs::remove_all(tmp);
  if (pass) detail << "datasets, splits, mining, training seeds, and all three file formats";
  h.report(8, "determinism and round trips", pass, detail.str(), timer.seconds());
  return pass;
}

}  // namespace

int main(int argc, char** argv) {
  Harness h;
  for (int i = 1; i < argc; ++i) h.selected.insert(std::atoi(argv[i]));
  const std::uint64_t seed = 2025;

  if (h.wants(1)) criterion1(h);
  if (h.wants(2)) criterion2(h);
  if (h.wants(3)) criterion3(h);
  if (h.wants(4)) criterion4(h);
  if (h.wants(9)) criterion9(h);
  if (h.wants(8)) criterion8(h);

  if (h.wants(5) || h.wants(6) || h.wants(7) || h.wants(10)) {
    Timer pipeline_timer;
    std::printf("      [pipeline] running the desk-scale benchmark (defaults, seed %llu)\n",
                static_cast<unsigned long long>(seed));
    std::fflush(stdout);
    const auto art = run_pipeline(seed);
    std::printf("      [pipeline] finished in %.1f s\n", pipeline_timer.seconds());
    std::fflush(stdout);
    if (h.wants(5)) criterion5(h, art);
    if (h.wants(6)) criterion6(h, art, seed);
    if (h.wants(7)) criterion7(h, art);
    if (h.wants(10)) criterion10(h, art, seed);
  }

  if (h.failures == 0) {
    std::printf("all selected criteria passed\n");
    return 0;
  }
  std::printf("%d criterion(s) failed\n", h.failures);
  return 1;
}
