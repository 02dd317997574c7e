#include "ews/engine.hpp"

#include <algorithm>
#include <cmath>

#include "ews/errors.hpp"
#include "ews/kernels.hpp"
#include "ews/matrix_exp.hpp"
#include "ews/parallel.hpp"

namespace ews {

SegmentState chen_combine(const SegmentState& left, const SegmentState& right, const Matrix& a) {
  SegmentState out;
  out.dtheta = left.dtheta + right.dtheta;
  out.ten = flow_apply(a, right.dtheta, left.ten);
  concat_in_place(out.ten, right.ten);
  return out;
}

ScanContext::ScanContext(const Operator& op, int depth, int m)
    : op_(op), depth_(depth), m_(m), kernels_(op, m), flows_(op, depth) {
  require(depth >= 1, "scan: depth must be >= 1");
  require(m >= 1, "scan: subdivision count must be >= 1");
  op_.validate();
  const std::size_t wz = static_cast<std::size_t>(op_.width());
  dxhat_.resize(wz);
  chords_.resize(static_cast<std::size_t>(m) * wz);
  urows_.resize(static_cast<std::size_t>(m) * wz);
  scratch_.resize(level_size(op_.width(), depth));
  if (depth >= 3) chord_exp_ = TruncatedTensor(op_.width(), depth);
}

void ScanContext::segment_local(double dtheta, const double* dx, TruncatedTensor& out) {
  if (out.dim != op_.width() || out.depth != depth_) {
    out = TruncatedTensor(op_.width(), depth_);
  }
  op_.lift(dx, dxhat_.data());
  local_from_kernel(kernels_.get(dtheta), out);
}

void ScanContext::local_from_kernel(const SegmentKernel& kern, TruncatedTensor& out) {
  const std::size_t wz = static_cast<std::size_t>(kern.w);
  const std::size_t m = static_cast<std::size_t>(kern.M);
  const auto& kops = kernels::ops();

  if (depth_ == 1) {
    // The last knot is the exact weighted increment of the whole segment.
    out.set_unit();
    double* l1 = out.levels[1].data();
    if (kern.diagonal) {
      const double* d = kern.knot_diag.data() + (m - 1) * wz;
      for (std::size_t i = 0; i < wz; ++i) l1[i] = d[i] * dxhat_[i];
    } else {
      kops.matvec(wz, wz, kern.knot_mats.data() + (m - 1) * wz * wz, dxhat_.data(), l1);
    }
    return;
  }

  // Chords of the weighted knot sequence.
  if (kern.diagonal) {
    for (std::size_t j = 0; j < m; ++j) {
      const double* d = kern.chord_diag.data() + j * wz;
      double* c = chords_.data() + j * wz;
      for (std::size_t i = 0; i < wz; ++i) c[i] = d[i] * dxhat_[i];
    }
  } else {
    kops.batch_matvec(m, wz, wz, kern.chord_mats.data(), dxhat_.data(), chords_.data());
  }

  if (depth_ == 2) {
    // Fold of chord exponentials in closed form: level 1 is the chord sum,
    // level 2 is sum_j (K_{j-1} + c_j / 2) (x) c_j with K the running sum.
    out.set_unit();
    double* l1 = out.levels[1].data();
    for (std::size_t j = 0; j < m; ++j) {
      const double* c = chords_.data() + j * wz;
      double* u = urows_.data() + j * wz;
      for (std::size_t i = 0; i < wz; ++i) {
        u[i] = l1[i] + 0.5 * c[i];
        l1[i] += c[i];
      }
    }
    kops.gram_acc(m, wz, urows_.data(), chords_.data(), out.levels[2].data());
    return;
  }

  // General depth: left fold of the truncated exponentials of the chords.
  out.set_unit();
  for (std::size_t j = 0; j < m; ++j) {
    const double* c = chords_.data() + j * wz;
    chord_exp_.levels[0][0] = 1.0;
    std::copy(c, c + wz, chord_exp_.levels[1].begin());
    for (int k = 2; k <= depth_; ++k) {
      auto& dst = chord_exp_.levels[static_cast<std::size_t>(k)];
      const auto& prev = chord_exp_.levels[static_cast<std::size_t>(k - 1)];
      std::fill(dst.begin(), dst.end(), 0.0);
      kops.scale_to(wz, 1.0 / static_cast<double>(k), c, scratch_.data());
      kops.outer_acc(prev.size(), wz, prev.data(), scratch_.data(), dst.data());
    }
    concat_in_place(out, chord_exp_);
  }
}

void ScanContext::combine_into(SegmentState& left, const SegmentState& right) {
  if (!flows_.trivial()) {
    flow_apply_in_place(flows_.get(right.dtheta), left.ten, scratch_);
  }
  concat_in_place(left.ten, right.ten);
  left.dtheta += right.dtheta;
}

SegmentState ScanContext::combine_copy(const SegmentState& left, const SegmentState& right) {
  SegmentState out;
  out.dtheta = left.dtheta;
  out.ten = left.ten;
  combine_into(out, right);
  return out;
}

void ScanContext::reset_to_unit(SegmentState& s) {
  s.dtheta = 0.0;
  if (s.ten.dim != op_.width() || s.ten.depth != depth_) {
    s.ten = TruncatedTensor(op_.width(), depth_);
  }
  s.ten.set_unit();
}

void ScanContext::rows_at(const PiecewiseLinearPath& path, const std::vector<std::size_t>& knots,
                          double* rows) {
  const std::size_t n = path.num_segments();
  if (op_.input_dim() != path.dim) {
    throw error("scan: operator input dimension (" + std::to_string(op_.input_dim()) +
                ") does not match path dimension (" + std::to_string(path.dim) + ")");
  }
  for (std::size_t j = 0; j < knots.size(); ++j) {
    require(knots[j] <= n, "scan: knot index out of range");
    require(j == 0 || knots[j] > knots[j - 1], "scan: knot indices must be strictly increasing");
  }
  dx_.resize(static_cast<std::size_t>(path.dim));
  reset_to_unit(running_);
  double* dst = rows;
  for (std::size_t j = 0; j < knots.size(); ++j) {
    reset_to_unit(chunk_);
    const std::size_t seg_lo = (j == 0) ? 0 : knots[j - 1];
    const std::size_t seg_hi = knots[j];
    for (std::size_t i = seg_lo; i < seg_hi; ++i) {
      const double* a = path.knot(i);
      const double* b = path.knot(i + 1);
      for (int c = 0; c < path.dim; ++c) dx_[static_cast<std::size_t>(c)] = b[c] - a[c];
      seg_.dtheta = path.dtheta(i);
      segment_local(seg_.dtheta, dx_.data(), seg_.ten);
      combine_into(chunk_, seg_);
    }
    combine_into(running_, chunk_);
    for (const auto& level : running_.ten.levels) {
      dst = std::copy(level.begin(), level.end(), dst);
    }
  }
}

namespace {

void validate_scan_inputs(const PiecewiseLinearPath& path, const Operator& op, int depth, int m) {
  path.validate();
  op.validate();
  if (op.input_dim() != path.dim) {
    throw error("scan: operator input dimension (" + std::to_string(op.input_dim()) +
                ") does not match path dimension (" + std::to_string(path.dim) + ")");
  }
  require(depth >= 1, "scan: depth must be >= 1");
  require(m >= 1, "scan: subdivision count must be >= 1");
}

// Map phase: local signature of every segment into its own slot, split into
// contiguous blocks with one ScanContext per block. Slot contents depend only
// on the segment, so the thread count cannot change the result.
void build_locals(const PiecewiseLinearPath& path, const Operator& op, int depth, int m,
                  int threads, std::vector<SegmentState>& states) {
  const std::size_t n = path.num_segments();
  states.resize(n);
  const int workers = threads <= 0 ? parallel::default_threads() : threads;
  const std::size_t nblocks =
      std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(workers), n));
  const std::size_t chunk = (n + nblocks - 1) / nblocks;
  parallel::parallel_for(nblocks, workers, [&](std::size_t b) {
    ScanContext ctx(op, depth, m);
    std::vector<double> dx(static_cast<std::size_t>(path.dim));
    const std::size_t lo = b * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    for (std::size_t i = lo; i < hi; ++i) {
      const double* a = path.knot(i);
      const double* bk = path.knot(i + 1);
      for (int c = 0; c < path.dim; ++c) dx[static_cast<std::size_t>(c)] = bk[c] - a[c];
      states[i].dtheta = path.dtheta(i);
      ctx.segment_local(states[i].dtheta, dx.data(), states[i].ten);
    }
  });
}

SegmentState reduce_range(std::vector<SegmentState>& states, ScanContext& ctx, std::size_t lo,
                          std::size_t hi) {
  if (hi - lo == 1) return std::move(states[lo]);
  const std::size_t mid = lo + (hi - lo) / 2;
  SegmentState left = reduce_range(states, ctx, lo, mid);
  const SegmentState right = reduce_range(states, ctx, mid, hi);
  ctx.combine_into(left, right);
  return left;
}

// Turns states[lo..hi) into inclusive prefixes of the same range. The final
// element goes through combines in exactly the association reduce_range uses,
// so prefix-then-take-last is bit-identical to the reduce.
void prefix_range(std::vector<SegmentState>& states, ScanContext& ctx, std::size_t lo,
                  std::size_t hi) {
  if (hi - lo <= 1) return;
  const std::size_t mid = lo + (hi - lo) / 2;
  prefix_range(states, ctx, lo, mid);
  prefix_range(states, ctx, mid, hi);
  const SegmentState& total_left = states[mid - 1];
  for (std::size_t i = mid; i < hi; ++i) {
    SegmentState combined = ctx.combine_copy(total_left, states[i]);
    states[i] = std::move(combined);
  }
}

}  // namespace

TruncatedTensor scan_ews(const PiecewiseLinearPath& path, const Operator& op, int depth, int M,
                         int threads) {
  validate_scan_inputs(path, op, depth, M);
  const std::size_t n = path.num_segments();
  if (n == 0) return TruncatedTensor::unit(op.width(), depth);
  std::vector<SegmentState> states;
  build_locals(path, op, depth, M, threads, states);
  ScanContext ctx(op, depth, M);
  return reduce_range(states, ctx, 0, n).ten;
}

std::vector<TruncatedTensor> scan_ews_stream(const PiecewiseLinearPath& path, const Operator& op,
                                             int depth, int M, int threads) {
  validate_scan_inputs(path, op, depth, M);
  const std::size_t n = path.num_segments();
  std::vector<TruncatedTensor> out;
  out.reserve(n + 1);
  out.push_back(TruncatedTensor::unit(op.width(), depth));
  if (n == 0) return out;
  std::vector<SegmentState> states;
  build_locals(path, op, depth, M, threads, states);
  ScanContext ctx(op, depth, M);
  prefix_range(states, ctx, 0, n);
  for (auto& s : states) out.push_back(std::move(s.ten));
  return out;
}

std::vector<TruncatedTensor> scan_ews_at(const PiecewiseLinearPath& path, const Operator& op,
                                         int depth, int M, const std::vector<std::size_t>& knots,
                                         int threads) {
  validate_scan_inputs(path, op, depth, M);
  const std::size_t n = path.num_segments();
  for (std::size_t j = 0; j < knots.size(); ++j) {
    require(knots[j] <= n, "scan_ews_at: knot index out of range");
    require(j == 0 || knots[j] > knots[j - 1], "scan_ews_at: knot indices must be strictly increasing");
  }
  const int w = op.width();
  std::vector<TruncatedTensor> out(knots.size());
  if (knots.empty()) return out;

  // Chunk totals between consecutive requested knots, folded left to right
  // (allocation-light; association differs from the balanced tree, which only
  // matters at the last float digit of the features).
  std::vector<SegmentState> chunk_totals(knots.size());
  const int workers = threads <= 0 ? parallel::default_threads() : threads;
  const std::size_t nblocks = std::max<std::size_t>(
      1, std::min<std::size_t>(static_cast<std::size_t>(workers), knots.size()));
  const std::size_t chunk = (knots.size() + nblocks - 1) / nblocks;
  parallel::parallel_for(nblocks, workers, [&](std::size_t b) {
    ScanContext ctx(op, depth, M);
    std::vector<double> dx(static_cast<std::size_t>(path.dim));
    SegmentState seg;
    const std::size_t lo = b * chunk;
    const std::size_t hi = std::min(knots.size(), lo + chunk);
    for (std::size_t j = lo; j < hi; ++j) {
      SegmentState& total = chunk_totals[j];
      total.dtheta = 0.0;
      total.ten = TruncatedTensor::unit(w, depth);
      const std::size_t seg_lo = (j == 0) ? 0 : knots[j - 1];
      const std::size_t seg_hi = knots[j];
      for (std::size_t i = seg_lo; i < seg_hi; ++i) {
        const double* a = path.knot(i);
        const double* bk = path.knot(i + 1);
        for (int c = 0; c < path.dim; ++c) dx[static_cast<std::size_t>(c)] = bk[c] - a[c];
        seg.dtheta = path.dtheta(i);
        ctx.segment_local(seg.dtheta, dx.data(), seg.ten);
        ctx.combine_into(total, seg);
      }
    }
  });

  ScanContext ctx(op, depth, M);
  SegmentState running;
  running.dtheta = 0.0;
  running.ten = TruncatedTensor::unit(w, depth);
  for (std::size_t j = 0; j < knots.size(); ++j) {
    ctx.combine_into(running, chunk_totals[j]);
    out[j] = running.ten;
  }
  return out;
}

double decay_constant(const PiecewiseLinearPath& path, const Operator& op, int samples) {
  path.validate();
  op.validate();
  require(samples >= 2, "decay_constant: need at least two samples");
  const double span = path.clock_at(path.num_knots() - 1) - path.clock_at(0);
  const double bnorm = op.b_identity ? 1.0 : spectral_norm(op.B);
  if (op.structure == OperatorStructure::zero) return bnorm;
  double best = 0.0;
  if (op.structure == OperatorStructure::diagonal) {
    // Each coordinate's factor exp(-h lambda) is monotone in h, so the sup
    // over [0, span] is attained at an endpoint.
    for (double h : {0.0, span}) {
      double m = 0.0;
      for (int i = 0; i < op.width(); ++i) {
        m = std::max(m, std::exp(-h * op.A.at(static_cast<std::size_t>(i),
                                              static_cast<std::size_t>(i))));
      }
      best = std::max(best, m);
    }
    return best * bnorm;
  }
  for (int k = 0; k < samples; ++k) {
    const double h = span * static_cast<double>(k) / static_cast<double>(samples - 1);
    best = std::max(best, spectral_norm(matrix_exp(op.A * (-h))));
  }
  return best * bnorm;
}

}  // namespace ews
