#pragma once

#include <string>
#include <vector>

#include "ews/flow.hpp"
#include "ews/linalg.hpp"

namespace ews {

// Piecewise-linear path: N+1 knots in R^dim at strictly increasing times.
// The clock is either a designated channel (clock_index >= 1, 1-based, that
// channel must be strictly increasing) or the time stamps themselves
// (clock_index == 0).
struct PiecewiseLinearPath {
  std::vector<double> times;  // size N+1
  std::vector<double> knots;  // row-major (N+1) x dim
  int dim = 0;
  int clock_index = 0;

  std::size_t num_knots() const { return times.size(); }
  std::size_t num_segments() const { return times.empty() ? 0 : times.size() - 1; }
  const double* knot(std::size_t i) const { return knots.data() + i * static_cast<std::size_t>(dim); }
  double* knot(std::size_t i) { return knots.data() + i * static_cast<std::size_t>(dim); }

  double clock_at(std::size_t i) const;
  double dtheta(std::size_t seg) const { return clock_at(seg + 1) - clock_at(seg); }

  void validate() const;  // shapes, finiteness, strict monotonicity of time and clock
};

PiecewiseLinearPath make_path(std::vector<double> times, std::vector<double> knots, int dim,
                              int clock_index);

// CSV with header "t,<name>,...": time stamps become channel 1 and the clock
// (clock_index = 1), so a d-column file yields a (d+1)-dimensional path.
PiecewiseLinearPath ingest_csv(const std::string& filename);

// Inverse of ingest for clock_index == 1 paths (time written once); paths
// with clock_index == 0 get their stamps written as the t column and every
// channel after it.
void export_csv(const PiecewiseLinearPath& path, const std::string& filename);

// Prepends the time stamp as channel 1 of each sample row: values is
// row-major rows x d, output dim = d + 1, clock_index = 1.
PiecewiseLinearPath time_augment(const std::vector<double>& times,
                                 const std::vector<double>& values, int d);

// Prepends a basepoint knot one time step before the first observation: all
// channels start at zero except the clock channel, which is extended
// backward by one clock gap so the clock stays strictly increasing (a lone
// observation uses a unit gap).
PiecewiseLinearPath basepoint_prepend(const PiecewiseLinearPath& path);

// Per-channel affine map onto [0,1] fitted on a collection of paths.
struct NormalizationStats {
  std::vector<double> lo, hi;  // per channel
};

NormalizationStats fit_normalization(const std::vector<PiecewiseLinearPath>& paths);
// Maps every channel through (x - lo) / (hi - lo); when the clock is a
// channel the time stamps are remapped identically so stamps and clock
// channel stay equal.
PiecewiseLinearPath apply_normalization(const PiecewiseLinearPath& path,
                                        const NormalizationStats& stats);

double total_variation(const PiecewiseLinearPath& path);           // sum of |dX|_2
double lifted_variation(const PiecewiseLinearPath& path, const Operator& op);  // sum of |B dX|_2

// The weighted increment path Z^[t] in R^w: per input segment, M Van Loan
// knots carried to the horizon t by the flow and accumulated. Output has
// clock_index = 0 and uses interpolated time stamps. The horizon must lie
// within the time span; a partial final segment is cut at t.
PiecewiseLinearPath reweighted_path(const PiecewiseLinearPath& path, const Operator& op, double t,
                                    int M);

}  // namespace ews
