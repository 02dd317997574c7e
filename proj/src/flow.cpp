#include "ews/flow.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include "ews/errors.hpp"
#include "ews/kernels.hpp"
#include "ews/matrix_exp.hpp"
#include "ews/words.hpp"

namespace ews {

const char* structure_name(OperatorStructure s) {
  switch (s) {
    case OperatorStructure::zero: return "zero";
    case OperatorStructure::diagonal: return "diagonal";
    case OperatorStructure::clock_compatible: return "clock_compatible";
    case OperatorStructure::general: return "general";
  }
  return "general";
}

OperatorStructure structure_from_name(const std::string& name) {
  if (name == "zero") return OperatorStructure::zero;
  if (name == "diagonal") return OperatorStructure::diagonal;
  if (name == "clock_compatible") return OperatorStructure::clock_compatible;
  if (name == "general") return OperatorStructure::general;
  throw error("unknown operator structure '" + name +
              "' (expected zero, diagonal, clock_compatible, or general)");
}

OperatorStructure infer_structure(const Matrix& a) {
  if (a.is_zero(0.0)) return OperatorStructure::zero;
  if (a.is_diagonal(0.0)) return OperatorStructure::diagonal;
  if (check_clock_compatible(a, 1).compatible) return OperatorStructure::clock_compatible;
  return OperatorStructure::general;
}

void Operator::lift(const double* dx, double* dst) const {
  const int w = width();
  if (b_identity) {
    std::memcpy(dst, dx, static_cast<std::size_t>(w) * sizeof(double));
    return;
  }
  kernels::ops().matvec(B.rows, B.cols, B.data.data(), dx, dst);
}

void Operator::validate() const {
  require(A.square() && A.rows >= 1, "operator matrix A must be square and nonempty");
  require(A.finite(), "operator matrix A has non-finite entries");
  if (!b_identity) {
    require(B.rows == A.rows, "operator B must have as many rows as A");
    require(B.cols >= 1, "operator B must have at least one column");
    require(B.finite(), "operator matrix B has non-finite entries");
  }
  switch (structure) {
    case OperatorStructure::zero:
      require(A.is_zero(0.0), "operator tagged 'zero' has nonzero entries in A");
      break;
    case OperatorStructure::diagonal:
      require(A.is_diagonal(0.0), "operator tagged 'diagonal' has off-diagonal entries in A");
      break;
    case OperatorStructure::clock_compatible:
      require(check_clock_compatible(A, 1).compatible,
              "operator tagged 'clock_compatible' has a first row not of the form "
              "(alpha, 0, ..., 0)");
      break;
    case OperatorStructure::general:
      break;
  }
}

Operator make_operator(Matrix a) {
  Operator op;
  op.A = std::move(a);
  op.b_identity = true;
  op.structure = infer_structure(op.A);
  op.validate();
  return op;
}

Operator make_operator(Matrix a, Matrix b) {
  Operator op;
  op.A = std::move(a);
  op.B = std::move(b);
  op.b_identity = false;
  op.structure = infer_structure(op.A);
  op.validate();
  return op;
}

ClockCompatibility check_clock_compatible(const Matrix& a, int clock_index) {
  ClockCompatibility out;
  if (!a.square() || clock_index < 1 || static_cast<std::size_t>(clock_index) > a.rows) {
    return out;
  }
  const std::size_t c = static_cast<std::size_t>(clock_index - 1);
  for (std::size_t j = 0; j < a.cols; ++j) {
    if (j != c && a.at(c, j) != 0.0) return out;
  }
  out.compatible = true;
  out.alpha = a.at(c, c);
  return out;
}

namespace {

std::size_t pow_size(int w, int k) {
  std::size_t n = 1;
  for (int i = 0; i < k; ++i) n *= static_cast<std::size_t>(w);
  return n;
}

// Applies the dense matrix e to every mode of level k, ping-ponging between
// the level storage and scratch, ending back in the level storage.
void dense_flow_level(const Matrix& e, int w, int k, std::vector<double>& level,
                      std::vector<double>& scratch) {
  if (k == 0) return;
  scratch.resize(level.size());
  double* cur = level.data();
  double* tmp = scratch.data();
  const auto& kops = kernels::ops();
  for (int j = 0; j < k; ++j) {
    const std::size_t pre = pow_size(w, j);
    const std::size_t post = pow_size(w, k - 1 - j);
    kops.mode_apply(pre, static_cast<std::size_t>(w), post, e.data.data(), cur, tmp);
    std::swap(cur, tmp);
  }
  if (cur != level.data()) {
    std::memcpy(level.data(), cur, level.size() * sizeof(double));
  }
}

}  // namespace

TruncatedTensor flow_apply(const Matrix& a, double h, const TruncatedTensor& s) {
  require(a.square() && static_cast<int>(a.rows) == s.dim,
          "flow_apply: operator size does not match tensor dimension");
  require(std::isfinite(h), "flow_apply: non-finite flow time");
  TruncatedTensor out = s;
  const Matrix e = matrix_exp(a * (-h));
  std::vector<double> scratch;
  for (int k = 1; k <= out.depth; ++k) {
    dense_flow_level(e, out.dim, k, out.levels[static_cast<std::size_t>(k)], scratch);
  }
  return out;
}

Matrix derivation_block(const Matrix& a, int k) {
  require(a.square() && a.rows >= 1, "derivation_block: A must be square and nonempty");
  require(k >= 0, "derivation_block: negative level");
  const int w = static_cast<int>(a.rows);
  const std::size_t n = pow_size(w, k);
  Matrix out(n, n);
  if (k == 0) return out;  // scalar level: derivation acts as zero
  for (int j = 0; j < k; ++j) {
    const std::size_t pre = pow_size(w, j);
    const std::size_t post = pow_size(w, k - 1 - j);
    for (std::size_t p = 0; p < pre; ++p) {
      for (int ia = 0; ia < w; ++ia) {
        for (int ib = 0; ib < w; ++ib) {
          const double v = a.at(static_cast<std::size_t>(ia), static_cast<std::size_t>(ib));
          if (v == 0.0) continue;
          const std::size_t row_base = (p * static_cast<std::size_t>(w) + static_cast<std::size_t>(ia)) * post;
          const std::size_t col_base = (p * static_cast<std::size_t>(w) + static_cast<std::size_t>(ib)) * post;
          for (std::size_t q = 0; q < post; ++q) {
            out.at(row_base + q, col_base + q) += v;
          }
        }
      }
    }
  }
  return out;
}

Matrix derivation_matrix(const Matrix& a, int depth) {
  require(depth >= 0, "derivation_matrix: negative depth");
  const int w = static_cast<int>(a.rows);
  const std::size_t d = total_dim(w, depth);
  Matrix out(d, d);
  std::size_t offset = 0;
  for (int k = 0; k <= depth; ++k) {
    const Matrix blk = derivation_block(a, k);
    for (std::size_t i = 0; i < blk.rows; ++i) {
      for (std::size_t j = 0; j < blk.cols; ++j) {
        out.at(offset + i, offset + j) = blk.at(i, j);
      }
    }
    offset += blk.rows;
  }
  return out;
}

void flow_apply_in_place(const FlowEntry& f, TruncatedTensor& s, std::vector<double>& scratch) {
  if (f.diagonal) {
    const auto& kops = kernels::ops();
    for (int k = 1; k <= s.depth; ++k) {
      auto& level = s.levels[static_cast<std::size_t>(k)];
      kops.elem_mul(level.size(), f.level_scale[static_cast<std::size_t>(k)].data(), level.data());
    }
    return;
  }
  for (int k = 1; k <= s.depth; ++k) {
    dense_flow_level(f.e, s.dim, k, s.levels[static_cast<std::size_t>(k)], scratch);
  }
}

FlowCache::FlowCache(const Operator& op, int depth) : a_(op.A), depth_(depth) {
  require(depth >= 0, "FlowCache: negative depth");
  trivial_ = (op.structure == OperatorStructure::zero);
  diagonal_ = (op.structure == OperatorStructure::diagonal);
}

const FlowEntry& FlowCache::get(double h) {
  require(std::isfinite(h), "flow cache: non-finite flow time");
  const std::uint64_t key = std::bit_cast<std::uint64_t>(h);
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;

  FlowEntry entry;
  const int w = static_cast<int>(a_.rows);
  if (diagonal_ || trivial_) {
    entry.diagonal = true;
    std::vector<double> base(static_cast<std::size_t>(w));
    for (int i = 0; i < w; ++i) {
      base[static_cast<std::size_t>(i)] =
          trivial_ ? 1.0
                   : std::exp(-h * a_.at(static_cast<std::size_t>(i), static_cast<std::size_t>(i)));
    }
    entry.level_scale.resize(static_cast<std::size_t>(depth_) + 1);
    entry.level_scale[0] = {1.0};
    for (int k = 1; k <= depth_; ++k) {
      const auto& prev = entry.level_scale[static_cast<std::size_t>(k - 1)];
      auto& cur = entry.level_scale[static_cast<std::size_t>(k)];
      cur.resize(prev.size() * static_cast<std::size_t>(w));
      for (std::size_t p = 0; p < prev.size(); ++p) {
        for (int i = 0; i < w; ++i) {
          cur[p * static_cast<std::size_t>(w) + static_cast<std::size_t>(i)] =
              prev[p] * base[static_cast<std::size_t>(i)];
        }
      }
    }
  } else {
    entry.diagonal = false;
    entry.e = matrix_exp(a_ * (-h));
  }
  return cache_.emplace(key, std::move(entry)).first->second;
}

}  // namespace ews
