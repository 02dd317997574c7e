#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "ews/flow.hpp"
#include "ews/linalg.hpp"

namespace ews {

// Exact weighted antiderivatives of one linear segment, sampled at M interior
// knots. With C = (dtheta/M) A, G = exp(C), Phi = int_0^1 exp(C s) ds and
// F = exp(-dtheta A), the j-th knot of the weighted increment path is
//   Z_j = R_j * dxhat,   R_j = F * (sum_{k<j} G^k) * Phi / M,   j = 1..M,
// and Z_0 = 0. The kernel stores R_j and the chord maps C_j = R_j - R_{j-1}
// so per-segment work is one batched matrix-vector apply. For diagonal A
// everything reduces to per-coordinate scalars.
struct SegmentKernel {
  int w = 0;
  int M = 0;
  double dtheta = 0.0;
  bool diagonal = false;

  // Dense case: M blocks of w*w, row-major per block.
  std::vector<double> knot_mats;
  std::vector<double> chord_mats;

  // Diagonal case: M blocks of w scalars (knot_j = diag .* dxhat).
  std::vector<double> knot_diag;
  std::vector<double> chord_diag;
};

SegmentKernel make_segment_kernel(const Operator& op, double dtheta, int M);

// Fills knots[j*w .. j*w+w) for j = 0..M (M+1 knots, knot 0 = 0) with the
// weighted increments of one segment with lifted increment dxhat.
void segment_knots(const SegmentKernel& k, const double* dxhat, std::vector<double>& knots);

// Convenience wrapper matching the kernel-free contract: returns the M+1
// knots (including the leading zero knot) for a single segment.
std::vector<double> van_loan_segment(const Operator& op, double dtheta, const double* dxhat, int M);

// Inclusive prefix products of M copies of E under a fixed balanced binary
// tree (split at floor(n/2)); used by the kernel builder and exposed for
// tests of the semigroup invariant E^{j1} E^{j2} = E^{j1+j2}.
std::vector<Matrix> prefix_powers(const Matrix& e, int M);

// Memoizes segment kernels by the exact bit pattern of dtheta; on uniform
// grids one entry serves every segment.
class SegmentKernelCache {
 public:
  SegmentKernelCache(const Operator& op, int M);
  const SegmentKernel& get(double dtheta);

 private:
  Operator op_;
  int M_;
  std::map<std::uint64_t, SegmentKernel> cache_;
};

}  // namespace ews
