#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ews/engine.hpp"
#include "ews/linalg.hpp"
#include "ews/path.hpp"
#include "ews/words.hpp"

namespace ews {

// ---------------------------------------------------------------------------
// Deterministic randomness. mt19937_64 plus explicit 53-bit uniforms and a
// Box-Muller normal, so the stream does not depend on the standard library's
// distribution implementations. Every trajectory gets its own generator
// seeded from (base seed, index), making draws independent of batching and
// thread count.
// ---------------------------------------------------------------------------

std::uint64_t seed_mix(std::uint64_t a, std::uint64_t b);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  std::uint64_t raw() { return gen_(); }
  double uniform();  // [0, 1), 53-bit resolution
  double normal();   // standard normal, Box-Muller with cached spare

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// ---------------------------------------------------------------------------
// Simulators
// ---------------------------------------------------------------------------

// Brownian driver on a uniform grid over [0, t_end]; W(0) = 0. Draw order is
// step-major, channel-minor.
struct BrownianPath {
  std::vector<double> times;
  std::vector<double> values;  // (steps + 1) x channels, row-major
  int channels = 0;
};

BrownianPath simulate_brownian(std::uint64_t seed, int channels, int steps, double t_end);

// Coupled mean-reverting diffusion driven by two Brownian channels,
//   dX1 = (3 sin X2 - 0.5 X1) dt + 0.4 dW1
//   dX2 = (3 cos X1 - 0.5 X2) dt + 0.4 dW2,   X(0) = (0.5, 0.5),
// integrated by Euler-Maruyama on a uniform grid over [0, t_end].
struct SdeSample {
  std::vector<double> times;
  std::vector<double> w;  // (steps + 1) x 2 driving Brownian path
  std::vector<double> x;  // (steps + 1) x 2 solution path
};

SdeSample simulate_coupled_sde(std::uint64_t seed, int steps, double t_end);

// ---------------------------------------------------------------------------
// Learner classes: a full matrix, a positive diagonal (log-parametrized), or
// the fixed zero matrix (classical signature; readout-only).
// ---------------------------------------------------------------------------

enum class LearnerKind { full, diagonal, zero };

const char* learner_name(LearnerKind k);          // "full" / "diagonal" / "zero"
const char* learner_column(LearnerKind k);        // prediction CSV column suffix

struct LearnerParams {
  LearnerKind kind = LearnerKind::zero;
  int w = 0;
  std::vector<double> p;  // full: w*w entries; diagonal: w log-rates; zero: none

  Matrix realize() const;
};

LearnerParams init_learner(LearnerKind kind, int w, Rng& rng, double init_scale);

// ---------------------------------------------------------------------------
// Target operators for the synthetic regression study (3 channels: the time
// channel plus two Brownian channels). The rotation-coupled target conjugates
// a damped rotation block by a fixed seeded orthogonal basis; the diagonal
// target uses positive rates; the zero target is the classical signature.
// ---------------------------------------------------------------------------

enum class TargetKind { ews, efm, sig };

const char* target_name(TargetKind k);

Matrix target_operator(TargetKind kind);

// The regressed coefficient: word (2, 3) of the depth-2 tensor, i.e. the
// cross term of the two Brownian channels.
Word target_word();

// ---------------------------------------------------------------------------
// Datasets
// ---------------------------------------------------------------------------

struct TargetScaler {
  double shift = 0.0;
  double scale = 1.0;
  double apply(double y) const { return (y - shift) / scale; }
  double invert(double z) const { return z * scale + shift; }
};

TargetScaler fit_zscore(const std::vector<double>& y);
TargetScaler fit_minmax(const std::vector<double>& y);

struct TrajectoryData {
  PiecewiseLinearPath path;              // preprocessed model input
  std::vector<std::size_t> eval_knots;   // knot indices carrying labels
  std::vector<double> eval_times;        // original-unit times of those knots
  std::vector<double> targets;           // scaled labels
  std::vector<double> raw_targets;       // unscaled labels
};

struct Dataset {
  std::vector<TrajectoryData> train, val, test;
  TargetScaler scaler;
  int input_dim = 0;
};

// ---------------------------------------------------------------------------
// Ridge readout on flattened tensor features (the level-0 entry supplies the
// intercept).
// ---------------------------------------------------------------------------

struct FeatureMatrix {
  std::size_t rows = 0, cols = 0;
  std::vector<double> x;  // rows x cols
  std::vector<double> y;  // rows
};

// Appends one trajectory's feature rows/labels (features = flattened tensors
// at the trajectory's eval knots).
void append_features(const Operator& op, int depth, int M, const TrajectoryData& td,
                     FeatureMatrix& fm, int threads = 1);

struct Readout {
  std::vector<double> coef;
};

Readout fit_ridge(const FeatureMatrix& fm, double ridge);
double mse_of(const FeatureMatrix& fm, const Readout& r);
double predict_row(const Readout& r, const double* row, std::size_t cols);

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct TrainConfig {
  int depth = 2;
  int m_train = 8;    // per-segment subdivisions during training
  int m_target = 32;  // subdivisions when generating synthetic targets
  int steps = 2000;
  int batch = 4;
  double base_lr = 0.05;
  double warmup_frac = 0.1;
  double fd_step = 1e-4;
  double ridge = 1e-8;
  int eval_every = 50;
  int eval_stride = 25;
  double init_scale = 2.0;
  double divergence_factor = 50.0;
};

struct TrainOutcome {
  LearnerParams params;
  Matrix a;
  Readout readout;
  double train_rmse = 0.0, val_rmse = 0.0, test_rmse = 0.0;
  int best_step = -1;
  bool diverged = false;
  std::vector<std::complex<double>> spectrum;
};

// Gradient descent on the operator entries with central finite differences of
// the readout-refit loss: every probe refits the ridge readout on the
// minibatch features, so the gradient sees the loss after the readout has
// adapted. Checkpoints on validation RMSE; returns the best checkpoint with
// its readout refit on the full training split.
TrainOutcome train_learner(LearnerKind kind, const Dataset& data, const TrainConfig& cfg,
                           std::uint64_t seed, int threads = 1);

// Eigenvalues of a real square matrix, sorted by (re, im) descending.
std::vector<std::complex<double>> eigenvalues_sorted(const Matrix& a);

// ---------------------------------------------------------------------------
// Experiment drivers
// ---------------------------------------------------------------------------

struct ExpressivityConfig {
  int trajectories = 100;
  int steps = 1000;
  double t_end = 5.0;
  std::vector<std::uint64_t> seeds = {101, 202, 303};
  std::vector<TargetKind> targets = {TargetKind::ews, TargetKind::efm, TargetKind::sig};
  std::vector<LearnerKind> learners = {LearnerKind::full, LearnerKind::diagonal,
                                       LearnerKind::zero};
  TrainConfig train;
};

struct SdeConfig {
  int trajectories = 100;
  int steps = 1000;
  double t_end = 4.0;
  std::vector<std::uint64_t> seeds = {101, 202, 303};
  std::vector<LearnerKind> learners = {LearnerKind::full, LearnerKind::diagonal,
                                       LearnerKind::zero};
  TrainConfig train;
};

struct SeedRun {
  std::uint64_t seed = 0;
  TrainOutcome out;
  std::vector<double> test_pred;  // unscaled, aligned with the seed's test rows
};

struct LearnerResult {
  LearnerKind kind = LearnerKind::zero;
  std::vector<SeedRun> seeds;
  double mean_test_rmse = 0.0;  // across seeds, scaled units
};

struct ExperimentGroup {
  std::string label;  // target name, or "sde"
  std::vector<std::uint64_t> seeds;
  // Test rows per seed index (each seed draws its own data): one row per
  // (test trajectory, eval knot), times in original units, truth unscaled.
  std::vector<std::vector<double>> test_times;
  std::vector<std::vector<double>> test_truth;
  std::vector<LearnerResult> learners;  // fixed order: full, diagonal, zero

  const LearnerResult& learner(LearnerKind k) const;
};

struct ExperimentResult {
  std::string name;  // "expressivity" or "sde"
  std::vector<ExperimentGroup> groups;
};

// Fixed learner order used everywhere (reports, prediction columns).
inline constexpr LearnerKind kLearnerOrder[3] = {LearnerKind::full, LearnerKind::diagonal,
                                                 LearnerKind::zero};

// Builds the synthetic-target dataset for one target kind (time-augmented
// Brownian inputs; labels are the target-word coefficients of the depth-2
// weighted signature under the target operator, z-scored on the train split).
Dataset build_expressivity_dataset(const ExpressivityConfig& cfg, std::uint64_t base_seed,
                                   TargetKind target, int threads = 1);

// Builds the diffusion dataset: inputs are the time-augmented driving
// Brownian paths, min-max normalized with train-split statistics and given a
// basepoint; labels are the first solution coordinate, min-max scaled.
Dataset build_sde_dataset(const SdeConfig& cfg, std::uint64_t base_seed, int threads = 1);

ExperimentResult run_expressivity(const ExpressivityConfig& cfg, int threads = 1);
ExperimentResult run_sde(const SdeConfig& cfg, int threads = 1);

}  // namespace ews
