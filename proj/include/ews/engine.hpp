#pragma once

#include <vector>

#include "ews/flow.hpp"
#include "ews/path.hpp"
#include "ews/tensor.hpp"
#include "ews/vanloan.hpp"

namespace ews {

// Scan element: the weighted signature tensor of a path piece together with
// its clock length, so the combine step can flow the left factor.
struct SegmentState {
  double dtheta = 0.0;
  TruncatedTensor ten;
};

// Weighted Chen combine: (dl, Tl) * (dr, Tr) = (dl + dr, D^{dr}(Tl) (x) Tr).
// Associative; identity is (0, unit). This overload builds the flow matrix on
// the fly; the engine's ScanContext uses cached flows instead.
SegmentState chen_combine(const SegmentState& left, const SegmentState& right, const Matrix& a);

// Per-scan machinery: operator, truncation depth, per-segment subdivision
// count, plus the kernel/flow caches and scratch buffers. One instance per
// thread; methods are not thread-safe.
class ScanContext {
 public:
  ScanContext(const Operator& op, int depth, int M);

  // Local weighted signature of one linear segment with clock increment
  // dtheta and raw increment dx (input dimension): the chord signatures of
  // the M Van Loan knots, folded left to right. Depth 1 and 2 take closed
  // accumulation paths; higher depths fold per-chord exponentials.
  void segment_local(double dtheta, const double* dx, TruncatedTensor& out);

  // left <- combine(left, right).
  void combine_into(SegmentState& left, const SegmentState& right);

  // combine(left, right) leaving both inputs intact.
  SegmentState combine_copy(const SegmentState& left, const SegmentState& right);

  // Flattened tensors at selected knots (strictly increasing indices into the
  // knot array), written to rows + j * total_dim(width, depth) for knot j.
  // Runs single-threaded and reuses this context's kernel and flow caches, so
  // featurization loops build one context per operator and stream any number
  // of paths through it. The path must already be validated and match the
  // operator's input dimension. Chunks between consecutive knots fold in the
  // same association as scan_ews_at, so each row equals the flattened tensor
  // scan_ews_at produces, bit for bit.
  void rows_at(const PiecewiseLinearPath& path, const std::vector<std::size_t>& knots,
               double* rows);

  const Operator& op() const { return op_; }
  int depth() const { return depth_; }
  int subdivisions() const { return m_; }

 private:
  Operator op_;
  int depth_;
  int m_;
  SegmentKernelCache kernels_;
  FlowCache flows_;
  std::vector<double> dxhat_;
  std::vector<double> chords_;
  std::vector<double> urows_;
  std::vector<double> scratch_;
  TruncatedTensor chord_exp_;
  SegmentState seg_;      // rows_at scratch: current segment
  SegmentState chunk_;    // rows_at scratch: fold between consecutive knots
  SegmentState running_;  // rows_at scratch: fold of all chunks so far
  std::vector<double> dx_;

  void local_from_kernel(const SegmentKernel& kern, TruncatedTensor& out);
  void reset_to_unit(SegmentState& s);
};

// Truncated weighted signature of the whole path: per-segment local
// signatures combined under a fixed balanced binary tree (split at the
// midpoint), so the result is independent of the thread count.
TruncatedTensor scan_ews(const PiecewiseLinearPath& path, const Operator& op, int depth, int M,
                         int threads = 1);

// Prefix variant: tensors at every knot (index 0 is the unit tensor). The
// last entry is bit-identical to scan_ews on the same inputs because the
// divide-and-conquer prefix applies combines in the same association for the
// full range.
std::vector<TruncatedTensor> scan_ews_stream(const PiecewiseLinearPath& path, const Operator& op,
                                             int depth, int M, int threads = 1);

// Tensors at selected knots (strictly increasing indices into the knot
// array). Chunks between consecutive requested knots are folded
// sequentially; intended for featurization loops where only a few knots per
// path are needed.
std::vector<TruncatedTensor> scan_ews_at(const PiecewiseLinearPath& path, const Operator& op,
                                         int depth, int M, const std::vector<std::size_t>& knots,
                                         int threads = 1);

// Growth constant for the level-norm decay bound: C = sup_h |exp(-h A)|_2
// * |B|_2 over h in [0, clock span], sampled on a uniform grid.
double decay_constant(const PiecewiseLinearPath& path, const Operator& op, int samples = 512);

}  // namespace ews
