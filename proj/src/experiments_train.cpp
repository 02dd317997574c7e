#include <algorithm>
#include <cmath>
#include <limits>

#include "ews/errors.hpp"
#include "ews/experiments.hpp"
#include "ews/parallel.hpp"

namespace ews {

namespace {

constexpr std::uint64_t kStreamTrain = 0x7472696eu;
constexpr double kPi = 3.14159265358979323846;

// Linear warmup to base_lr, then cosine decay to zero.
double lr_schedule(const TrainConfig& cfg, int step) {
  const int warmup = std::max(1, static_cast<int>(std::lround(cfg.warmup_frac * cfg.steps)));
  if (step < warmup) {
    return cfg.base_lr * static_cast<double>(step + 1) / static_cast<double>(warmup);
  }
  const double progress =
      static_cast<double>(step - warmup) / static_cast<double>(std::max(1, cfg.steps - warmup));
  return cfg.base_lr * 0.5 * (1.0 + std::cos(kPi * progress));
}

// Feature rows for a list of trajectories, parallel over trajectory blocks
// with precomputed row offsets so the layout is thread-count independent.
FeatureMatrix features_for(const Matrix& a, const std::vector<const TrajectoryData*>& trajs,
                           const TrainConfig& cfg, int threads) {
  FeatureMatrix fm;
  if (trajs.empty()) return fm;
  const Operator op = make_operator(a);
  fm.cols = total_dim(op.width(), cfg.depth);
  std::vector<std::size_t> offsets(trajs.size() + 1, 0);
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    offsets[i + 1] = offsets[i] + trajs[i]->eval_knots.size();
  }
  fm.rows = offsets.back();
  fm.x.assign(fm.rows * fm.cols, 0.0);
  fm.y.assign(fm.rows, 0.0);

  const int workers = threads <= 0 ? parallel::default_threads() : threads;
  const std::size_t nblocks = std::max<std::size_t>(
      1, std::min<std::size_t>(static_cast<std::size_t>(workers), trajs.size()));
  const std::size_t chunk = (trajs.size() + nblocks - 1) / nblocks;
  parallel::parallel_for(nblocks, workers, [&](std::size_t b) {
    // One context per block: the kernel and flow caches carry over between
    // trajectories, and cache entries depend only on the operator and the
    // clock increments, so the block split cannot change any row.
    ScanContext ctx(op, cfg.depth, cfg.m_train);
    for (std::size_t i = b * chunk; i < std::min(trajs.size(), b * chunk + chunk); ++i) {
      const TrajectoryData& td = *trajs[i];
      ctx.rows_at(td.path, td.eval_knots, fm.x.data() + offsets[i] * fm.cols);
      for (std::size_t j = 0; j < td.eval_knots.size(); ++j) {
        fm.y[offsets[i] + j] = td.targets[j];
      }
    }
  });
  return fm;
}

std::vector<const TrajectoryData*> all_of(const std::vector<TrajectoryData>& split) {
  std::vector<const TrajectoryData*> out;
  out.reserve(split.size());
  for (const auto& td : split) out.push_back(&td);
  return out;
}

double rmse(double mse) { return std::sqrt(mse); }

// Minibatch loss after refitting the readout on the minibatch itself: the
// probe gradient measures how much the operator change helps once the linear
// head has adapted.
double batch_loss(const Matrix& a, const std::vector<const TrajectoryData*>& batch,
                  const TrainConfig& cfg) {
  const FeatureMatrix fm = features_for(a, batch, cfg, 1);
  if (!std::all_of(fm.x.begin(), fm.x.end(), [](double v) { return std::isfinite(v); })) {
    return std::numeric_limits<double>::infinity();
  }
  // An ill-conditioned Gram solve (features blown up by an unstable operator
  // probe) counts as an infinite loss, so the divergence guard sees it.
  try {
    const Readout r = fit_ridge(fm, cfg.ridge);
    return mse_of(fm, r);
  } catch (const error&) {
    return std::numeric_limits<double>::infinity();
  }
}

struct EvalResult {
  Readout readout;
  double train_rmse = 0.0;
  double val_rmse = 0.0;
};

EvalResult evaluate(const Matrix& a, const Dataset& data, const TrainConfig& cfg, int threads) {
  EvalResult ev;
  ev.train_rmse = ev.val_rmse = std::numeric_limits<double>::infinity();
  const FeatureMatrix ftrain = features_for(a, all_of(data.train), cfg, threads);
  if (!std::all_of(ftrain.x.begin(), ftrain.x.end(),
                   [](double v) { return std::isfinite(v); })) {
    return ev;  // blown-up features: infinite RMSEs, empty readout
  }
  try {
    ev.readout = fit_ridge(ftrain, cfg.ridge);
  } catch (const error&) {
    return ev;
  }
  ev.train_rmse = rmse(mse_of(ftrain, ev.readout));
  const FeatureMatrix fval = features_for(a, all_of(data.val), cfg, threads);
  ev.val_rmse = rmse(mse_of(fval, ev.readout));
  return ev;
}

}  // namespace

std::vector<std::complex<double>> eigenvalues_sorted(const Matrix& a);  // eigen_report.cpp

TrainOutcome train_learner(LearnerKind kind, const Dataset& data, const TrainConfig& cfg,
                           std::uint64_t seed, int threads) {
  require(!data.train.empty() && !data.val.empty() && !data.test.empty(),
          "train: dataset has an empty split");
  const int w = data.input_dim;
  Rng rng(seed_mix(seed, kStreamTrain));
  LearnerParams params = init_learner(kind, w, rng, cfg.init_scale);

  TrainOutcome out;
  out.params = params;
  out.diverged = false;

  if (!params.p.empty()) {
    const std::size_t np = params.p.size();
    std::vector<std::size_t> order(data.train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::size_t cursor = order.size();  // forces an initial shuffle
    const auto next_index = [&]() {
      if (cursor >= order.size()) {
        for (std::size_t i = order.size(); i > 1; --i) {
          const std::size_t j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i));
          std::swap(order[i - 1], order[std::min(j, i - 1)]);
        }
        cursor = 0;
      }
      return order[cursor++];
    };

    LearnerParams best = params;
    double best_val = std::numeric_limits<double>::infinity();
    int best_step = -1;
    double first_val = std::numeric_limits<double>::quiet_NaN();
    int rescues = 0;

    std::vector<const TrajectoryData*> batch(
        std::min<std::size_t>(static_cast<std::size_t>(cfg.batch), data.train.size()));
    std::vector<double> losses(2 * np, 0.0);

    for (int step = 0; step < cfg.steps; ++step) {
      for (auto& slot : batch) slot = &data.train[next_index()];

      // Central differences, one loss per probe slot; parallel over probes.
      parallel::parallel_for(2 * np, threads, [&](std::size_t q) {
        LearnerParams probe = params;
        probe.p[q / 2] += (q % 2 == 0) ? cfg.fd_step : -cfg.fd_step;
        losses[q] = batch_loss(probe.realize(), batch, cfg);
      });

      bool bad = false;
      const double lr = lr_schedule(cfg, step);
      for (std::size_t i = 0; i < np; ++i) {
        const double g = (losses[2 * i] - losses[2 * i + 1]) / (2.0 * cfg.fd_step);
        if (!std::isfinite(g)) {
          bad = true;
          break;
        }
        params.p[i] -= lr * g;
      }
      if (bad || !std::all_of(params.p.begin(), params.p.end(),
                              [](double v) { return std::isfinite(v); })) {
        // Blown-up step: restore the best checkpoint (the initial parameters
        // when nothing has validated yet) and keep going; the decaying
        // schedule takes smaller steps from here on.
        params = best;
        ++rescues;
        continue;
      }

      if ((step + 1) % cfg.eval_every == 0 || step + 1 == cfg.steps) {
        const EvalResult ev = evaluate(params.realize(), data, cfg, threads);
        if (!std::isfinite(ev.val_rmse) ||
            (std::isfinite(first_val) && ev.val_rmse > cfg.divergence_factor * first_val)) {
          params = best;
          ++rescues;
          continue;
        }
        if (!std::isfinite(first_val)) first_val = ev.val_rmse;
        if (ev.val_rmse < best_val) {
          best_val = ev.val_rmse;
          best = params;
          best_step = step + 1;
        }
      }
    }

    out.diverged = rescues > 0;
    if (std::isfinite(best_val)) {
      params = best;
      out.best_step = best_step;
    } else {
      // Nothing ever validated: fall back to the initial parameters.
      params = out.params;
      out.best_step = 0;
    }
  }

  out.params = params;
  out.a = params.realize();
  const EvalResult ev = evaluate(out.a, data, cfg, threads);
  out.readout = ev.readout;
  out.train_rmse = ev.train_rmse;
  out.val_rmse = ev.val_rmse;
  if (out.readout.coef.empty()) {
    // Even the fallback parameters failed to evaluate; report the failure
    // instead of aborting the whole experiment.
    out.diverged = true;
    out.test_rmse = std::numeric_limits<double>::infinity();
  } else {
    const FeatureMatrix ftest = features_for(out.a, all_of(data.test), cfg, threads);
    out.test_rmse = rmse(mse_of(ftest, out.readout));
  }
  out.spectrum = eigenvalues_sorted(out.a);
  return out;
}

const LearnerResult& ExperimentGroup::learner(LearnerKind k) const {
  for (const auto& lr : learners) {
    if (lr.kind == k) return lr;
  }
  throw error("experiment group has no such learner");
}

namespace {

// Shared driver body: one experiment group given its per-seed dataset
// builder.
template <typename BuildFn>
ExperimentGroup run_group(const std::string& label, const std::vector<std::uint64_t>& seeds,
                          const std::vector<LearnerKind>& kinds, const TrainConfig& tcfg,
                          const BuildFn& build, int threads) {
  ExperimentGroup g;
  g.label = label;
  g.seeds = seeds;
  g.learners.resize(kinds.size());
  for (std::size_t k = 0; k < kinds.size(); ++k) g.learners[k].kind = kinds[k];

  for (std::uint64_t seed : seeds) {
    const Dataset data = build(seed);

    std::vector<double> times, truth;
    for (const auto& td : data.test) {
      times.insert(times.end(), td.eval_times.begin(), td.eval_times.end());
      truth.insert(truth.end(), td.raw_targets.begin(), td.raw_targets.end());
    }
    g.test_times.push_back(std::move(times));
    g.test_truth.push_back(std::move(truth));

    for (std::size_t k = 0; k < kinds.size(); ++k) {
      SeedRun run;
      run.seed = seed;
      run.out = train_learner(kinds[k], data, tcfg, seed, threads);

      // Unscaled test predictions, row-aligned with the seed's test rows. A
      // learner whose readout never fit (diverged past rescue) emits NaNs so
      // the rows stay aligned.
      const Operator op = make_operator(run.out.a);
      for (const auto& td : data.test) {
        const auto tensors = scan_ews_at(td.path, op, tcfg.depth, tcfg.m_train, td.eval_knots, threads);
        for (const auto& ten : tensors) {
          const auto row = flatten(ten);
          run.test_pred.push_back(
              run.out.readout.coef.empty()
                  ? std::numeric_limits<double>::quiet_NaN()
                  : data.scaler.invert(predict_row(run.out.readout, row.data(), row.size())));
        }
      }
      g.learners[k].seeds.push_back(std::move(run));
    }
  }

  for (auto& lr : g.learners) {
    double acc = 0.0;
    for (const auto& run : lr.seeds) acc += run.out.test_rmse;
    lr.mean_test_rmse = acc / static_cast<double>(lr.seeds.size());
  }
  return g;
}

}  // namespace

ExperimentResult run_expressivity(const ExpressivityConfig& cfg, int threads) {
  require(!cfg.seeds.empty(), "expressivity: need at least one seed");
  require(!cfg.targets.empty() && !cfg.learners.empty(),
          "expressivity: need at least one target and learner");
  ExperimentResult res;
  res.name = "expressivity";
  for (TargetKind target : cfg.targets) {
    res.groups.push_back(run_group(
        target_name(target), cfg.seeds, cfg.learners, cfg.train,
        [&](std::uint64_t seed) { return build_expressivity_dataset(cfg, seed, target, threads); },
        threads));
  }
  return res;
}

ExperimentResult run_sde(const SdeConfig& cfg, int threads) {
  require(!cfg.seeds.empty(), "sde: need at least one seed");
  require(!cfg.learners.empty(), "sde: need at least one learner");
  ExperimentResult res;
  res.name = "sde";
  res.groups.push_back(run_group(
      "sde", cfg.seeds, cfg.learners, cfg.train,
      [&](std::uint64_t seed) { return build_sde_dataset(cfg, seed, threads); }, threads));
  return res;
}

}  // namespace ews
