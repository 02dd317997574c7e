#pragma once

#include <vector>

#include "ews/flow.hpp"
#include "ews/linalg.hpp"
#include "ews/path.hpp"
#include "ews/tensor.hpp"

namespace ews {

// Flattened linear state-space form of the weighted-signature dynamics on
// the truncated algebra (state dimension D = 1 + w + ... + w^depth):
//   dS = -L S dtheta + sum_i rho[i] S dXhat^i,  S(0) = e_empty,
// where L is the block-diagonal derivation of A and rho[i] appends letter i
// on the right (a 0/1 level-shift matrix). `step[i]` folds the clock into
// channel `clock_letter` of the lifted space: step[i] = rho[i] - [i == clock] L,
// which is the driving matrix form when the clock coincides with that lifted
// channel.
struct LncdeSystem {
  int w = 0;
  int depth = 0;
  int clock_letter = 1;  // 1-based lifted channel used by `step`
  std::size_t D = 0;
  Matrix L;
  std::vector<Matrix> rho;
  std::vector<Matrix> step;
};

// Guard: flattened dimension above this is rejected (this is an oracle and a
// diagnostic surface, not the production scan path).
inline constexpr std::size_t kMaxLncdeDim = 4000;

LncdeSystem build_lncde_matrices(const Matrix& a, int depth, int clock_letter = 1);

// Reference solver: exact per-segment matrix exponential of
// (-dtheta L + sum_i dxhat_i rho[i]) applied to the running state. Exact for
// piecewise-linear paths; used as an oracle for the scan engine.
TruncatedTensor lncde_solve(const PiecewiseLinearPath& path, const Operator& op, int depth);

}  // namespace ews
