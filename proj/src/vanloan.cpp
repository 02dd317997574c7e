#include "ews/vanloan.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include "ews/errors.hpp"
#include "ews/kernels.hpp"
#include "ews/matrix_exp.hpp"

namespace ews {

namespace {

// Inclusive prefix over items[lo..hi) under combine, fixed balanced tree.
template <typename T, typename Combine>
void prefix_tree(std::vector<T>& items, std::size_t lo, std::size_t hi, const Combine& combine) {
  if (hi - lo <= 1) return;
  const std::size_t mid = lo + (hi - lo) / 2;
  prefix_tree(items, lo, mid, combine);
  prefix_tree(items, mid, hi, combine);
  const T& total_left = items[mid - 1];
  for (std::size_t i = mid; i < hi; ++i) {
    items[i] = combine(total_left, items[i]);
  }
}

struct PowerSum {
  Matrix power;  // G^j
  Matrix sum;    // I + G + ... + G^(j-1)
};

struct ScalarPowerSum {
  double power;
  double sum;
};

}  // namespace

std::vector<Matrix> prefix_powers(const Matrix& e, int m) {
  require(e.square() && e.rows >= 1, "prefix_powers: matrix must be square and nonempty");
  require(m >= 1, "prefix_powers: need at least one term");
  std::vector<Matrix> items(static_cast<std::size_t>(m), e);
  prefix_tree(items, 0, items.size(),
              [](const Matrix& l, const Matrix& r) { return l * r; });
  return items;
}

SegmentKernel make_segment_kernel(const Operator& op, double dtheta, int m) {
  require(m >= 1, "segment kernel: subdivision count must be >= 1");
  require(std::isfinite(dtheta), "segment kernel: non-finite clock increment");
  const int w = op.width();
  const std::size_t wz = static_cast<std::size_t>(w);

  SegmentKernel k;
  k.w = w;
  k.M = m;
  k.dtheta = dtheta;
  k.diagonal = (op.structure == OperatorStructure::zero ||
                op.structure == OperatorStructure::diagonal);
  const double c = dtheta / static_cast<double>(m);
  const double inv_m = 1.0 / static_cast<double>(m);

  if (k.diagonal) {
    k.knot_diag.assign(static_cast<std::size_t>(m) * wz, 0.0);
    k.chord_diag.assign(static_cast<std::size_t>(m) * wz, 0.0);
    for (int i = 0; i < w; ++i) {
      const double lam = op.A.at(static_cast<std::size_t>(i), static_cast<std::size_t>(i));
      const double cl = c * lam;
      const double g = std::exp(cl);
      const double phi = (cl == 0.0) ? 1.0 : std::expm1(cl) / cl;
      const double f = std::exp(-dtheta * lam);
      std::vector<ScalarPowerSum> items(static_cast<std::size_t>(m), ScalarPowerSum{g, 1.0});
      prefix_tree(items, 0, items.size(),
                  [](const ScalarPowerSum& l, const ScalarPowerSum& r) {
                    return ScalarPowerSum{l.power * r.power, l.sum + l.power * r.sum};
                  });
      double prev = 0.0;
      for (int j = 0; j < m; ++j) {
        const double knot = f * items[static_cast<std::size_t>(j)].sum * phi * inv_m;
        k.knot_diag[static_cast<std::size_t>(j) * wz + static_cast<std::size_t>(i)] = knot;
        k.chord_diag[static_cast<std::size_t>(j) * wz + static_cast<std::size_t>(i)] = knot - prev;
        prev = knot;
      }
    }
    return k;
  }

  // Dense path: G and Phi come out of one (2w x 2w) exponential of
  // [[C, I], [0, 0]], whose top-right block is int_0^1 exp(C s) ds.
  const Matrix cmat = op.A * c;
  Matrix block(2 * wz, 2 * wz);
  for (std::size_t i = 0; i < wz; ++i) {
    for (std::size_t j = 0; j < wz; ++j) {
      block.at(i, j) = cmat.at(i, j);
    }
    block.at(i, wz + i) = 1.0;
  }
  const Matrix eblock = matrix_exp(block);
  Matrix g(wz, wz), phi(wz, wz);
  for (std::size_t i = 0; i < wz; ++i) {
    for (std::size_t j = 0; j < wz; ++j) {
      g.at(i, j) = eblock.at(i, j);
      phi.at(i, j) = eblock.at(i, wz + j);
    }
  }
  const Matrix f = matrix_exp(op.A * (-dtheta));

  std::vector<PowerSum> items(static_cast<std::size_t>(m), PowerSum{g, Matrix::identity(wz)});
  prefix_tree(items, 0, items.size(), [](const PowerSum& l, const PowerSum& r) {
    return PowerSum{l.power * r.power, l.sum + l.power * r.sum};
  });

  k.knot_mats.assign(static_cast<std::size_t>(m) * wz * wz, 0.0);
  k.chord_mats.assign(static_cast<std::size_t>(m) * wz * wz, 0.0);
  const double* prev = nullptr;
  for (int j = 0; j < m; ++j) {
    const Matrix r = (f * (items[static_cast<std::size_t>(j)].sum * phi)) * inv_m;
    double* kd = k.knot_mats.data() + static_cast<std::size_t>(j) * wz * wz;
    double* cd = k.chord_mats.data() + static_cast<std::size_t>(j) * wz * wz;
    std::memcpy(kd, r.data.data(), wz * wz * sizeof(double));
    for (std::size_t q = 0; q < wz * wz; ++q) {
      cd[q] = (prev == nullptr) ? kd[q] : kd[q] - prev[q];
    }
    prev = kd;
  }
  return k;
}

void segment_knots(const SegmentKernel& k, const double* dxhat, std::vector<double>& knots) {
  const std::size_t wz = static_cast<std::size_t>(k.w);
  knots.assign(static_cast<std::size_t>(k.M + 1) * wz, 0.0);
  if (k.diagonal) {
    for (int j = 0; j < k.M; ++j) {
      const double* d = k.knot_diag.data() + static_cast<std::size_t>(j) * wz;
      double* out = knots.data() + static_cast<std::size_t>(j + 1) * wz;
      for (std::size_t i = 0; i < wz; ++i) out[i] = d[i] * dxhat[i];
    }
    return;
  }
  kernels::ops().batch_matvec(static_cast<std::size_t>(k.M), wz, wz, k.knot_mats.data(), dxhat,
                     knots.data() + wz);
}

std::vector<double> van_loan_segment(const Operator& op, double dtheta, const double* dxhat,
                                     int m) {
  const SegmentKernel k = make_segment_kernel(op, dtheta, m);
  std::vector<double> knots;
  segment_knots(k, dxhat, knots);
  return knots;
}

SegmentKernelCache::SegmentKernelCache(const Operator& op, int m) : op_(op), M_(m) {
  require(m >= 1, "segment kernel cache: subdivision count must be >= 1");
}

const SegmentKernel& SegmentKernelCache::get(double dtheta) {
  const std::uint64_t key = std::bit_cast<std::uint64_t>(dtheta);
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  return cache_.emplace(key, make_segment_kernel(op_, dtheta, M_)).first->second;
}

}  // namespace ews
