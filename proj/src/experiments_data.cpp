#include <algorithm>
#include <cmath>

#include "ews/errors.hpp"
#include "ews/experiments.hpp"
#include "ews/kernels.hpp"
#include "ews/parallel.hpp"

namespace ews {

namespace {

// Stream tags separating independent RNG uses of one base seed.
constexpr std::uint64_t kStreamData = 0x64617461u;   // trajectory draws
constexpr std::uint64_t kStreamTrain = 0x7472696eu;  // initialization + batching

// Fixed seed for the orthogonal basis of the rotation-coupled target; part
// of the experiment definition, not of the per-run seeding.
constexpr std::uint64_t kBasisSeed = 987654321u;

constexpr double kPi = 3.14159265358979323846;

std::uint64_t traj_seed(std::uint64_t base_seed, int traj_index) {
  return seed_mix(seed_mix(base_seed, kStreamData), static_cast<std::uint64_t>(traj_index));
}

}  // namespace

std::uint64_t seed_mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform() {
  return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  // Box-Muller on explicit uniforms keeps the stream independent of the
  // standard library's normal_distribution implementation.
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * kPi * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

BrownianPath simulate_brownian(std::uint64_t seed, int channels, int steps, double t_end) {
  require(channels >= 1 && steps >= 1 && t_end > 0.0, "brownian: bad arguments");
  Rng rng(seed);
  BrownianPath bp;
  bp.channels = channels;
  const std::size_t cz = static_cast<std::size_t>(channels);
  bp.times.resize(static_cast<std::size_t>(steps) + 1);
  bp.values.assign((static_cast<std::size_t>(steps) + 1) * cz, 0.0);
  const double dt = t_end / static_cast<double>(steps);
  const double sdt = std::sqrt(dt);
  for (int s = 0; s <= steps; ++s) {
    bp.times[static_cast<std::size_t>(s)] = t_end * static_cast<double>(s) / static_cast<double>(steps);
  }
  for (int s = 0; s < steps; ++s) {
    const double* prev = bp.values.data() + static_cast<std::size_t>(s) * cz;
    double* next = bp.values.data() + static_cast<std::size_t>(s + 1) * cz;
    for (int c = 0; c < channels; ++c) {
      next[c] = prev[c] + sdt * rng.normal();
    }
  }
  return bp;
}

SdeSample simulate_coupled_sde(std::uint64_t seed, int steps, double t_end) {
  require(steps >= 1 && t_end > 0.0, "sde: bad arguments");
  Rng rng(seed);
  SdeSample out;
  out.times.resize(static_cast<std::size_t>(steps) + 1);
  out.w.assign(2 * (static_cast<std::size_t>(steps) + 1), 0.0);
  out.x.assign(2 * (static_cast<std::size_t>(steps) + 1), 0.0);
  const double dt = t_end / static_cast<double>(steps);
  const double sdt = std::sqrt(dt);
  out.x[0] = 0.5;
  out.x[1] = 0.5;
  for (int s = 0; s <= steps; ++s) {
    out.times[static_cast<std::size_t>(s)] = t_end * static_cast<double>(s) / static_cast<double>(steps);
  }
  for (int s = 0; s < steps; ++s) {
    const std::size_t i0 = 2 * static_cast<std::size_t>(s);
    const std::size_t i1 = 2 * static_cast<std::size_t>(s + 1);
    const double dw1 = sdt * rng.normal();
    const double dw2 = sdt * rng.normal();
    out.w[i1 + 0] = out.w[i0 + 0] + dw1;
    out.w[i1 + 1] = out.w[i0 + 1] + dw2;
    const double x1 = out.x[i0 + 0];
    const double x2 = out.x[i0 + 1];
    out.x[i1 + 0] = x1 + (3.0 * std::sin(x2) - 0.5 * x1) * dt + 0.4 * dw1;
    out.x[i1 + 1] = x2 + (3.0 * std::cos(x1) - 0.5 * x2) * dt + 0.4 * dw2;
  }
  return out;
}

const char* learner_name(LearnerKind k) {
  switch (k) {
    case LearnerKind::full: return "full";
    case LearnerKind::diagonal: return "diagonal";
    case LearnerKind::zero: return "zero";
  }
  return "zero";
}

const char* learner_column(LearnerKind k) {
  switch (k) {
    case LearnerKind::full: return "pred_ews";
    case LearnerKind::diagonal: return "pred_efm";
    case LearnerKind::zero: return "pred_sig";
  }
  return "pred_sig";
}

Matrix LearnerParams::realize() const {
  const std::size_t wz = static_cast<std::size_t>(w);
  Matrix a(wz, wz);
  switch (kind) {
    case LearnerKind::full:
      require(p.size() == wz * wz, "learner: parameter count mismatch");
      std::copy(p.begin(), p.end(), a.data.begin());
      break;
    case LearnerKind::diagonal:
      require(p.size() == wz, "learner: parameter count mismatch");
      for (std::size_t i = 0; i < wz; ++i) a.at(i, i) = std::exp(p[i]);
      break;
    case LearnerKind::zero:
      require(p.empty(), "learner: parameter count mismatch");
      break;
  }
  return a;
}

LearnerParams init_learner(LearnerKind kind, int w, Rng& rng, double init_scale) {
  require(w >= 1, "learner: width must be >= 1");
  LearnerParams lp;
  lp.kind = kind;
  lp.w = w;
  switch (kind) {
    case LearnerKind::full:
      lp.p.resize(static_cast<std::size_t>(w) * static_cast<std::size_t>(w));
      for (double& v : lp.p) v = init_scale * rng.normal();
      break;
    case LearnerKind::diagonal:
      // Log-rates: exp keeps the learned rates positive; a 0.5 spread covers
      // roughly [0.4, 2.7].
      lp.p.resize(static_cast<std::size_t>(w));
      for (double& v : lp.p) v = 0.5 * rng.normal();
      break;
    case LearnerKind::zero:
      break;
  }
  return lp;
}

const char* target_name(TargetKind k) {
  switch (k) {
    case TargetKind::ews: return "ews";
    case TargetKind::efm: return "efm";
    case TargetKind::sig: return "sig";
  }
  return "sig";
}

Word target_word() { return Word{2, 3}; }

Matrix target_operator(TargetKind kind) {
  switch (kind) {
    case TargetKind::sig:
      return Matrix(3, 3);
    case TargetKind::efm: {
      Matrix a(3, 3);
      a.at(0, 0) = 0.5;
      a.at(1, 1) = 0.3;
      a.at(2, 2) = 0.8;
      return a;
    }
    case TargetKind::ews:
      break;
  }
  // Damped rotation block plus a growth direction, conjugated by a fixed
  // seeded orthogonal basis so the operator is dense.
  Matrix m0(3, 3);
  m0.at(0, 0) = -0.5;
  m0.at(0, 1) = 5.2;
  m0.at(1, 0) = -5.2;
  m0.at(1, 1) = -0.5;
  m0.at(2, 2) = 0.8;

  Rng rng(kBasisSeed);
  Matrix g(3, 3);
  for (double& v : g.data) v = rng.normal();
  // Modified Gram-Schmidt on the columns (positive diagonal by construction).
  Matrix q(3, 3);
  for (std::size_t j = 0; j < 3; ++j) {
    double col[3] = {g.at(0, j), g.at(1, j), g.at(2, j)};
    for (std::size_t k = 0; k < j; ++k) {
      const double dot = q.at(0, k) * col[0] + q.at(1, k) * col[1] + q.at(2, k) * col[2];
      for (std::size_t i = 0; i < 3; ++i) col[i] -= dot * q.at(i, k);
    }
    const double nrm = std::sqrt(col[0] * col[0] + col[1] * col[1] + col[2] * col[2]);
    require(nrm > 1e-8, "target basis: degenerate draw");
    for (std::size_t i = 0; i < 3; ++i) q.at(i, j) = col[i] / nrm;
  }
  return q * m0 * q.transpose();
}

TargetScaler fit_zscore(const std::vector<double>& y) {
  require(!y.empty(), "scaler: empty targets");
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double var = 0.0;
  for (double v : y) var += (v - mean) * (v - mean);
  var /= static_cast<double>(y.size());
  const double sd = std::sqrt(var);
  require(sd > 0.0, "scaler: targets are constant");
  return TargetScaler{mean, sd};
}

TargetScaler fit_minmax(const std::vector<double>& y) {
  require(!y.empty(), "scaler: empty targets");
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  require(*hi > *lo, "scaler: targets are constant");
  return TargetScaler{*lo, *hi - *lo};
}

void append_features(const Operator& op, int depth, int M, const TrajectoryData& td,
                     FeatureMatrix& fm, int threads) {
  const std::size_t f = total_dim(op.width(), depth);
  if (fm.cols == 0) fm.cols = f;
  require(fm.cols == f, "features: column count changed between trajectories");
  const auto tensors = scan_ews_at(td.path, op, depth, M, td.eval_knots, threads);
  for (std::size_t j = 0; j < tensors.size(); ++j) {
    const auto row = flatten(tensors[j]);
    fm.x.insert(fm.x.end(), row.begin(), row.end());
    fm.y.push_back(td.targets[j]);
    ++fm.rows;
  }
}

Readout fit_ridge(const FeatureMatrix& fm, double ridge) {
  require(fm.rows >= 1 && fm.cols >= 1, "ridge: empty feature matrix");
  require(fm.x.size() == fm.rows * fm.cols && fm.y.size() == fm.rows,
          "ridge: inconsistent feature matrix");
  const std::size_t f = fm.cols;
  Matrix xtx(f, f);
  std::vector<double> xty(f, 0.0);
  for (std::size_t r = 0; r < fm.rows; ++r) {
    const double* row = fm.x.data() + r * f;
    const double yr = fm.y[r];
    for (std::size_t i = 0; i < f; ++i) {
      xty[i] += row[i] * yr;
      const double ri = row[i];
      double* out = xtx.data.data() + i * f;
      for (std::size_t j = i; j < f; ++j) out[j] += ri * row[j];
    }
  }
  for (std::size_t i = 0; i < f; ++i) {
    for (std::size_t j = 0; j < i; ++j) xtx.at(i, j) = xtx.at(j, i);
    xtx.at(i, i) += ridge;
  }
  Readout r;
  r.coef = cholesky_solve(xtx, xty);
  return r;
}

double predict_row(const Readout& r, const double* row, std::size_t cols) {
  double acc = 0.0;
  for (std::size_t i = 0; i < cols; ++i) acc += r.coef[i] * row[i];
  return acc;
}

double mse_of(const FeatureMatrix& fm, const Readout& r) {
  require(fm.rows >= 1, "mse: empty feature matrix");
  double acc = 0.0;
  for (std::size_t i = 0; i < fm.rows; ++i) {
    const double e = predict_row(r, fm.x.data() + i * fm.cols, fm.cols) - fm.y[i];
    acc += e * e;
  }
  return acc / static_cast<double>(fm.rows);
}

namespace {

std::vector<std::size_t> eval_grid(int steps, int stride) {
  require(stride >= 1 && stride <= steps, "eval stride out of range");
  std::vector<std::size_t> out;
  for (int j = stride; j <= steps; j += stride) out.push_back(static_cast<std::size_t>(j));
  return out;
}

void split_dataset(std::vector<TrajectoryData>& all, Dataset& ds) {
  const std::size_t n = all.size();
  const std::size_t ntrain = (n * 70) / 100;
  const std::size_t nval = (n * 15) / 100;
  require(ntrain >= 1 && nval >= 1 && ntrain + nval < n,
          "dataset: too few trajectories for a 70:15:15 split");
  for (std::size_t i = 0; i < n; ++i) {
    if (i < ntrain)
      ds.train.push_back(std::move(all[i]));
    else if (i < ntrain + nval)
      ds.val.push_back(std::move(all[i]));
    else
      ds.test.push_back(std::move(all[i]));
  }
}

void scale_targets(Dataset& ds, bool zscore) {
  std::vector<double> pooled;
  for (const auto& td : ds.train)
    pooled.insert(pooled.end(), td.raw_targets.begin(), td.raw_targets.end());
  ds.scaler = zscore ? fit_zscore(pooled) : fit_minmax(pooled);
  for (auto* split : {&ds.train, &ds.val, &ds.test}) {
    for (auto& td : *split) {
      td.targets.resize(td.raw_targets.size());
      for (std::size_t j = 0; j < td.raw_targets.size(); ++j) {
        td.targets[j] = ds.scaler.apply(td.raw_targets[j]);
      }
    }
  }
}

}  // namespace

Dataset build_expressivity_dataset(const ExpressivityConfig& cfg, std::uint64_t base_seed,
                                   TargetKind target, int threads) {
  require(cfg.trajectories >= 10, "expressivity: need at least 10 trajectories");
  const auto grid = eval_grid(cfg.steps, cfg.train.eval_stride);
  const Operator target_op = make_operator(target_operator(target));
  const Word word = target_word();
  const std::size_t widx = word_to_index(word, 3);

  std::vector<TrajectoryData> all(static_cast<std::size_t>(cfg.trajectories));
  const std::size_t n = all.size();
  const int workers = threads <= 0 ? parallel::default_threads() : threads;
  const std::size_t nblocks =
      std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(workers), n));
  const std::size_t chunk = (n + nblocks - 1) / nblocks;
  parallel::parallel_for(nblocks, workers, [&](std::size_t b) {
    for (std::size_t i = b * chunk; i < std::min(n, b * chunk + chunk); ++i) {
      const auto bp =
          simulate_brownian(traj_seed(base_seed, static_cast<int>(i)), 2, cfg.steps, cfg.t_end);
      TrajectoryData td;
      td.path = time_augment(bp.times, bp.values, 2);
      td.eval_knots = grid;
      // Labels: the target-word coefficient of the depth-2 weighted signature
      // under the target operator, evaluated with the finer target grid.
      const auto tensors =
          scan_ews_at(td.path, target_op, 2, cfg.train.m_target, td.eval_knots, 1);
      td.raw_targets.resize(tensors.size());
      td.eval_times.resize(tensors.size());
      for (std::size_t j = 0; j < tensors.size(); ++j) {
        td.raw_targets[j] = tensors[j].levels[2][widx];
        td.eval_times[j] = bp.times[td.eval_knots[j]];
      }
      all[i] = std::move(td);
    }
  });

  Dataset ds;
  ds.input_dim = 3;
  split_dataset(all, ds);
  scale_targets(ds, /*zscore=*/true);
  return ds;
}

Dataset build_sde_dataset(const SdeConfig& cfg, std::uint64_t base_seed, int threads) {
  require(cfg.trajectories >= 10, "sde: need at least 10 trajectories");
  const auto grid = eval_grid(cfg.steps, cfg.train.eval_stride);

  const std::size_t n = static_cast<std::size_t>(cfg.trajectories);
  std::vector<TrajectoryData> all(n);
  const int workers = threads <= 0 ? parallel::default_threads() : threads;
  const std::size_t nblocks =
      std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(workers), n));
  const std::size_t chunk = (n + nblocks - 1) / nblocks;
  parallel::parallel_for(nblocks, workers, [&](std::size_t b) {
    for (std::size_t i = b * chunk; i < std::min(n, b * chunk + chunk); ++i) {
      const auto sim =
          simulate_coupled_sde(traj_seed(base_seed, static_cast<int>(i)), cfg.steps, cfg.t_end);
      TrajectoryData td;
      td.path = time_augment(sim.times, sim.w, 2);
      td.raw_targets.resize(grid.size());
      td.eval_times.resize(grid.size());
      for (std::size_t j = 0; j < grid.size(); ++j) {
        td.raw_targets[j] = sim.x[2 * grid[j] + 0];  // first solution coordinate
        td.eval_times[j] = sim.times[grid[j]];
      }
      all[i] = std::move(td);
    }
  });

  Dataset ds;
  ds.input_dim = 3;
  split_dataset(all, ds);

  // Channel normalization fitted on the training inputs only, then a
  // basepoint knot; eval indices shift by one for the basepoint.
  std::vector<PiecewiseLinearPath> train_paths;
  train_paths.reserve(ds.train.size());
  for (const auto& td : ds.train) train_paths.push_back(td.path);
  const NormalizationStats stats = fit_normalization(train_paths);
  for (auto* split : {&ds.train, &ds.val, &ds.test}) {
    for (auto& td : *split) {
      td.path = basepoint_prepend(apply_normalization(td.path, stats));
      td.eval_knots.resize(grid.size());
      for (std::size_t j = 0; j < grid.size(); ++j) td.eval_knots[j] = grid[j] + 1;
    }
  }
  scale_targets(ds, /*zscore=*/false);
  return ds;
}

}  // namespace ews
