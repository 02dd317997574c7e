#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include <doctest.h>

#include "ews/experiments.hpp"
#include "ews/words.hpp"
#include "test_util.hpp"

using namespace ews;

TEST_SUITE_BEGIN("experiments");

TEST_CASE("random streams are deterministic and well-formed") {
  Rng a(42), b(42), c(43);
  bool any_diff = false;
  for (int i = 0; i < 200; ++i) {
    const double u = a.uniform();
    CHECK(u == b.uniform());
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    if (u != c.uniform()) any_diff = true;
  }
  CHECK(any_diff);

  Rng n1(7), n2(7);
  double mean = 0.0, var = 0.0;
  const int samples = 20000;
  for (int i = 0; i < samples; ++i) {
    const double z = n1.normal();
    CHECK(z == n2.normal());  // spare-value caching must be reproducible
    mean += z;
    var += z * z;
  }
  mean /= samples;
  var = var / samples - mean * mean;
  CHECK(std::fabs(mean) < 0.05);
  CHECK(std::fabs(var - 1.0) < 0.05);
}

TEST_CASE("seed mixing separates streams") {
  CHECK(seed_mix(1, 2) == seed_mix(1, 2));
  CHECK(seed_mix(1, 2) != seed_mix(2, 1));
  CHECK(seed_mix(0, 0) != seed_mix(0, 1));
  CHECK(seed_mix(0, 0) != 0);
}

TEST_CASE("brownian simulator shapes and determinism") {
  const auto bp = simulate_brownian(11, 2, 50, 5.0);
  REQUIRE(bp.channels == 2);
  REQUIRE(bp.times.size() == 51);
  REQUIRE(bp.values.size() == 102);
  CHECK(bp.values[0] == 0.0);
  CHECK(bp.values[1] == 0.0);
  CHECK(bp.times.front() == 0.0);
  CHECK(bp.times.back() == 5.0);
  CHECK(bp.times[1] == doctest::Approx(0.1));

  const auto again = simulate_brownian(11, 2, 50, 5.0);
  CHECK(bp.values == again.values);
  const auto other = simulate_brownian(12, 2, 50, 5.0);
  CHECK(bp.values != other.values);
}

TEST_CASE("coupled diffusion simulator shapes and determinism") {
  const auto s = simulate_coupled_sde(21, 40, 4.0);
  REQUIRE(s.times.size() == 41);
  REQUIRE(s.w.size() == 82);
  REQUIRE(s.x.size() == 82);
  CHECK(s.x[0] == 0.5);
  CHECK(s.x[1] == 0.5);
  CHECK(s.w[0] == 0.0);
  const auto again = simulate_coupled_sde(21, 40, 4.0);
  CHECK(s.x == again.x);
  CHECK(s.w == again.w);
}

TEST_CASE("learner parametrizations") {
  Rng rng(5);
  const LearnerParams full = init_learner(LearnerKind::full, 3, rng, 2.0);
  REQUIRE(full.p.size() == 9);
  const Matrix af = full.realize();
  CHECK(af.at(0, 0) == full.p[0]);
  CHECK(af.at(2, 1) == full.p[7]);

  const LearnerParams diag = init_learner(LearnerKind::diagonal, 3, rng, 2.0);
  REQUIRE(diag.p.size() == 3);
  const Matrix ad = diag.realize();
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(ad.at(i, i) == std::exp(diag.p[i]));
    CHECK(ad.at(i, i) > 0.0);
  }
  CHECK(ad.at(0, 1) == 0.0);

  const LearnerParams zero = init_learner(LearnerKind::zero, 3, rng, 2.0);
  CHECK(zero.p.empty());
  CHECK(zero.realize().is_zero());

  CHECK(std::string(learner_name(LearnerKind::full)) == "full");
  CHECK(std::string(learner_column(LearnerKind::full)) == "pred_ews");
  CHECK(std::string(learner_column(LearnerKind::diagonal)) == "pred_efm");
  CHECK(std::string(learner_column(LearnerKind::zero)) == "pred_sig");
}

TEST_CASE("target operators have the intended spectra") {
  CHECK(target_operator(TargetKind::sig).is_zero());

  const Matrix efm = target_operator(TargetKind::efm);
  CHECK(efm.is_diagonal());
  CHECK(efm.at(0, 0) == 0.5);
  CHECK(efm.at(1, 1) == 0.3);
  CHECK(efm.at(2, 2) == 0.8);

  const Matrix ews = target_operator(TargetKind::ews);
  CHECK_FALSE(ews.is_diagonal(1e-12));
  // Orthogonal conjugation preserves trace, Frobenius norm and eigenvalues.
  const double trace = ews.at(0, 0) + ews.at(1, 1) + ews.at(2, 2);
  CHECK(trace == doctest::Approx(-0.2).epsilon(1e-10));
  double frob = 0.0;
  for (double v : ews.data) frob += v * v;
  CHECK(frob == doctest::Approx(0.25 + 27.04 + 27.04 + 0.25 + 0.64).epsilon(1e-10));
  const auto eig = eigenvalues_sorted(ews);
  REQUIRE(eig.size() == 3);
  CHECK(eig[0].real() == doctest::Approx(0.8).epsilon(1e-9));
  CHECK(eig[0].imag() == doctest::Approx(0.0));
  CHECK(eig[1].real() == doctest::Approx(-0.5).epsilon(1e-9));
  CHECK(eig[1].imag() == doctest::Approx(5.2).epsilon(1e-9));
  CHECK(eig[2].imag() == doctest::Approx(-5.2).epsilon(1e-9));

  CHECK(target_word() == Word{2, 3});
  CHECK(std::string(target_name(TargetKind::ews)) == "ews");
  CHECK(std::string(target_name(TargetKind::efm)) == "efm");
  CHECK(std::string(target_name(TargetKind::sig)) == "sig");
}

TEST_CASE("target scalers") {
  const TargetScaler z = fit_zscore({1.0, 2.0, 3.0});
  CHECK(z.shift == doctest::Approx(2.0));
  CHECK(z.scale == doctest::Approx(std::sqrt(2.0 / 3.0)));
  CHECK(z.invert(z.apply(1.7)) == doctest::Approx(1.7));

  const TargetScaler m = fit_minmax({1.0, 2.0, 4.0});
  CHECK(m.shift == 1.0);
  CHECK(m.scale == 3.0);
  CHECK(m.apply(4.0) == doctest::Approx(1.0));
  CHECK(m.apply(1.0) == doctest::Approx(0.0));

  CHECK_THROWS(fit_zscore({2.0, 2.0, 2.0}));
  CHECK_THROWS(fit_minmax({2.0, 2.0}));
  CHECK_THROWS(fit_zscore({}));
}

TEST_CASE("ridge readout recovers an exact linear map") {
  FeatureMatrix fm;
  fm.cols = 3;
  const double coef[3] = {2.0, -1.5, 0.25};
  testsupport::TestRng rng(31);
  for (int r = 0; r < 40; ++r) {
    double row[3] = {1.0, rng.normal(), rng.normal()};  // intercept column
    double y = 0.0;
    for (int c = 0; c < 3; ++c) {
      fm.x.push_back(row[c]);
      y += coef[c] * row[c];
    }
    fm.y.push_back(y);
    ++fm.rows;
  }
  const Readout r = fit_ridge(fm, 1e-12);
  REQUIRE(r.coef.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(r.coef[i] == doctest::Approx(coef[i]).epsilon(1e-8));
  }
  CHECK(mse_of(fm, r) <= 1e-16);
  const double row[3] = {1.0, 2.0, 3.0};
  CHECK(predict_row(r, row, 3) == doctest::Approx(2.0 - 3.0 + 0.75).epsilon(1e-7));
}

TEST_CASE("feature rows follow the evaluation knots") {
  testsupport::TestRng rng(37);
  const auto bp = simulate_brownian(3, 2, 20, 2.0);
  TrajectoryData td;
  td.path = time_augment(bp.times, bp.values, 2);
  td.eval_knots = {10, 20};
  td.targets = {0.25, 0.75};
  const Operator op = make_operator(target_operator(TargetKind::efm));
  FeatureMatrix fm;
  append_features(op, 2, 4, td, fm, 1);
  REQUIRE(fm.cols == total_dim(3, 2));
  REQUIRE(fm.rows == 2);
  REQUIRE(fm.y == std::vector<double>{0.25, 0.75});
  CHECK(fm.x[0] == 1.0);  // level-0 entry of the first row
  // Second row corresponds to the full horizon (sequential chunk folding, so
  // equal to the balanced-tree scan up to rounding only).
  const auto full = flatten(scan_ews(td.path, op, 2, 4, 1));
  for (std::size_t i = 0; i < fm.cols; ++i) {
    CHECK(fm.x[fm.cols + i] == doctest::Approx(full[i]).epsilon(1e-12));
  }
}

namespace {

ExpressivityConfig small_expressivity() {
  ExpressivityConfig cfg;
  cfg.trajectories = 10;
  cfg.steps = 40;
  cfg.t_end = 2.0;
  cfg.seeds = {5};
  cfg.train.eval_stride = 10;
  cfg.train.m_target = 4;
  cfg.train.m_train = 2;
  return cfg;
}

SdeConfig small_sde() {
  SdeConfig cfg;
  cfg.trajectories = 10;
  cfg.steps = 40;
  cfg.t_end = 2.0;
  cfg.seeds = {5};
  cfg.train.eval_stride = 10;
  cfg.train.m_train = 2;
  return cfg;
}

}  // namespace

TEST_CASE("synthetic-target dataset layout and thread independence") {
  const ExpressivityConfig cfg = small_expressivity();
  const Dataset ds = build_expressivity_dataset(cfg, 5, TargetKind::ews, 1);
  REQUIRE(ds.train.size() == 7);
  REQUIRE(ds.val.size() == 1);
  REQUIRE(ds.test.size() == 2);
  CHECK(ds.input_dim == 3);
  for (const auto& td : ds.train) {
    CHECK(td.path.dim == 3);
    CHECK(td.path.clock_index == 1);
    REQUIRE(td.eval_knots.size() == 4);
    CHECK(td.eval_knots.front() == 10);
    CHECK(td.eval_knots.back() == 40);
    REQUIRE(td.eval_times.size() == 4);
    CHECK(td.eval_times.back() == doctest::Approx(2.0));
    REQUIRE(td.targets.size() == 4);
  }
  // Train labels are z-scored: pooled mean 0, variance 1.
  double mean = 0.0, var = 0.0;
  std::size_t count = 0;
  for (const auto& td : ds.train) {
    for (double v : td.targets) {
      mean += v;
      ++count;
    }
  }
  mean /= static_cast<double>(count);
  for (const auto& td : ds.train) {
    for (double v : td.targets) var += (v - mean) * (v - mean);
  }
  var /= static_cast<double>(count);
  CHECK(std::fabs(mean) < 1e-12);
  CHECK(var == doctest::Approx(1.0).epsilon(1e-10));

  const Dataset ds3 = build_expressivity_dataset(cfg, 5, TargetKind::ews, 3);
  REQUIRE(ds3.train.size() == ds.train.size());
  CHECK(ds3.scaler.shift == ds.scaler.shift);
  CHECK(ds3.scaler.scale == ds.scaler.scale);
  for (std::size_t i = 0; i < ds.train.size(); ++i) {
    REQUIRE(ds3.train[i].raw_targets == ds.train[i].raw_targets);
    REQUIRE(ds3.train[i].path.knots == ds.train[i].path.knots);
  }

  // Different targets relabel the same inputs.
  const Dataset dsig = build_expressivity_dataset(cfg, 5, TargetKind::sig, 1);
  REQUIRE(dsig.train[0].path.knots == ds.train[0].path.knots);
  CHECK(dsig.train[0].raw_targets != ds.train[0].raw_targets);
}

TEST_CASE("diffusion dataset normalizes inputs and prepends a basepoint") {
  const SdeConfig cfg = small_sde();
  const Dataset ds = build_sde_dataset(cfg, 5, 1);
  REQUIRE(ds.train.size() == 7);
  REQUIRE(ds.val.size() == 1);
  REQUIRE(ds.test.size() == 2);
  for (const auto& td : ds.train) {
    CHECK(td.path.dim == 3);
    REQUIRE(td.path.num_knots() == 42);  // 41 grid knots + basepoint
    REQUIRE(td.eval_knots.size() == 4);
    CHECK(td.eval_knots.front() == 11);  // shifted by the basepoint knot
    // Basepoint knot: zero in every channel except the clock extension.
    CHECK(td.path.knot(0)[1] == 0.0);
    CHECK(td.path.knot(0)[2] == 0.0);
    CHECK(td.path.knot(0)[0] < td.path.knot(1)[0]);
    // Labels are min-max scaled with train statistics.
    for (double v : td.targets) {
      CHECK(v >= -1e-12);
      CHECK(v <= 1.0 + 1e-12);
    }
  }
  // Normalized channels stay inside the unit box on the training split.
  for (const auto& td : ds.train) {
    for (std::size_t i = 1; i < td.path.num_knots(); ++i) {
      for (int c = 0; c < 3; ++c) {
        CHECK(td.path.knot(i)[c] >= -1e-12);
        CHECK(td.path.knot(i)[c] <= 1.0 + 1e-12);
      }
    }
  }
  // Labels come from the first solution coordinate in original units.
  const auto sim = simulate_coupled_sde(seed_mix(seed_mix(5, 0x64617461u), 0), cfg.steps, cfg.t_end);
  CHECK(ds.train[0].raw_targets[0] == sim.x[2 * 10 + 0]);

  const Dataset ds3 = build_sde_dataset(cfg, 5, 3);
  for (std::size_t i = 0; i < ds.train.size(); ++i) {
    REQUIRE(ds3.train[i].path.knots == ds.train[i].path.knots);
    REQUIRE(ds3.train[i].targets == ds.train[i].targets);
  }
}

TEST_CASE("training is deterministic and readout-only for the zero class") {
  ExpressivityConfig cfg = small_expressivity();
  const Dataset ds = build_expressivity_dataset(cfg, 5, TargetKind::efm, 1);

  TrainConfig tcfg = cfg.train;
  tcfg.steps = 4;
  tcfg.eval_every = 2;
  tcfg.batch = 2;
  tcfg.base_lr = 0.01;

  const TrainOutcome zero = train_learner(LearnerKind::zero, ds, tcfg, 5, 1);
  CHECK(zero.params.p.empty());
  CHECK(zero.a.is_zero());
  CHECK(zero.best_step == -1);
  CHECK_FALSE(zero.diverged);
  CHECK(std::isfinite(zero.train_rmse));
  CHECK(std::isfinite(zero.val_rmse));
  CHECK(std::isfinite(zero.test_rmse));
  REQUIRE(zero.spectrum.size() == 3);
  CHECK(zero.spectrum[0] == std::complex<double>(0.0, 0.0));

  const TrainOutcome d1 = train_learner(LearnerKind::diagonal, ds, tcfg, 5, 1);
  const TrainOutcome d2 = train_learner(LearnerKind::diagonal, ds, tcfg, 5, 1);
  REQUIRE(d1.params.p == d2.params.p);
  CHECK(d1.train_rmse == d2.train_rmse);
  CHECK(d1.val_rmse == d2.val_rmse);
  CHECK(d1.test_rmse == d2.test_rmse);
  CHECK(d1.best_step >= 0);
  REQUIRE(d1.spectrum.size() == 3);
  for (const auto& ev : d1.spectrum) {
    CHECK(ev.imag() == 0.0);
    CHECK(ev.real() > 0.0);  // exp-parametrized rates stay positive
  }

  // Thread count must not change the trained result.
  const TrainOutcome d3 = train_learner(LearnerKind::diagonal, ds, tcfg, 5, 3);
  REQUIRE(d3.params.p == d1.params.p);
  CHECK(d3.test_rmse == d1.test_rmse);
}

TEST_CASE("experiment drivers aggregate per-seed runs") {
  ExpressivityConfig cfg = small_expressivity();
  cfg.targets = {TargetKind::efm};
  cfg.learners = {LearnerKind::diagonal, LearnerKind::zero};
  cfg.train.steps = 2;
  cfg.train.eval_every = 1;
  cfg.train.batch = 2;
  cfg.train.base_lr = 0.01;

  const ExperimentResult res = run_expressivity(cfg, 2);
  REQUIRE(res.name == "expressivity");
  REQUIRE(res.groups.size() == 1);
  const ExperimentGroup& g = res.groups[0];
  CHECK(g.label == "efm");
  REQUIRE(g.seeds == std::vector<std::uint64_t>{5});
  REQUIRE(g.learners.size() == 2);
  REQUIRE(g.test_times.size() == 1);
  REQUIRE(g.test_times[0].size() == 8);  // 2 test trajectories x 4 knots
  REQUIRE(g.test_truth[0].size() == 8);
  for (const auto& lr : g.learners) {
    REQUIRE(lr.seeds.size() == 1);
    REQUIRE(lr.seeds[0].test_pred.size() == 8);
    CHECK(std::isfinite(lr.mean_test_rmse));
    CHECK(lr.mean_test_rmse == lr.seeds[0].out.test_rmse);
  }
  CHECK(&g.learner(LearnerKind::zero) == &g.learners[1]);
  CHECK_THROWS(g.learner(LearnerKind::full));

  // Rerunning with a different thread count reproduces everything.
  const ExperimentResult res2 = run_expressivity(cfg, 1);
  const auto& l1 = res.groups[0].learners[0].seeds[0];
  const auto& l2 = res2.groups[0].learners[0].seeds[0];
  REQUIRE(l1.test_pred == l2.test_pred);
  CHECK(l1.out.test_rmse == l2.out.test_rmse);
}

TEST_SUITE_END();
