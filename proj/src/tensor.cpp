#include "ews/tensor.hpp"

#include <cmath>

#include "ews/errors.hpp"
#include "ews/kernels.hpp"

namespace ews {

TruncatedTensor::TruncatedTensor(int w, int n) : dim(w), depth(n) {
  require(w >= 1 && n >= 0, "TruncatedTensor: need dim >= 1, depth >= 0");
  levels.resize(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) levels[static_cast<std::size_t>(k)].assign(level_size(w, k), 0.0);
}

TruncatedTensor TruncatedTensor::unit(int w, int n) {
  TruncatedTensor t(w, n);
  t.levels[0][0] = 1.0;
  return t;
}

void TruncatedTensor::set_zero() {
  for (auto& level : levels) std::fill(level.begin(), level.end(), 0.0);
}

void TruncatedTensor::set_unit() {
  set_zero();
  levels[0][0] = 1.0;
}

bool TruncatedTensor::finite() const {
  for (const auto& level : levels)
    for (double v : level)
      if (!std::isfinite(v)) return false;
  return true;
}

bool operator==(const TruncatedTensor& a, const TruncatedTensor& b) {
  return a.dim == b.dim && a.depth == b.depth && a.levels == b.levels;
}

void concat_in_place(TruncatedTensor& a, const TruncatedTensor& b) {
  require(a.dim == b.dim && a.depth == b.depth, "concat: dimension or depth mismatch");
  const auto& k = kernels::ops();
  const double b0 = b.scalar();
  // Descending levels so that the lower levels of `a` read below are still
  // the originals when they feed level `lev`.
  for (int lev = a.depth; lev >= 0; --lev) {
    auto& dest = a.levels[static_cast<std::size_t>(lev)];
    if (b0 != 1.0)
      for (double& v : dest) v *= b0;
    for (int j = 1; j < lev; ++j) {
      const auto& left = a.levels[static_cast<std::size_t>(j)];
      const auto& right = b.levels[static_cast<std::size_t>(lev - j)];
      k.outer_acc(left.size(), right.size(), left.data(), right.data(), dest.data());
    }
    if (lev >= 1) k.axpy(dest.size(), a.scalar(), b.levels[static_cast<std::size_t>(lev)].data(), dest.data());
  }
}

TruncatedTensor concat_product(const TruncatedTensor& a, const TruncatedTensor& b) {
  TruncatedTensor c = a;
  concat_in_place(c, b);
  return c;
}

double pair(const DualElement& l, const TruncatedTensor& s) {
  double acc = 0.0;
  for (const auto& [word, coeff] : l.terms) {
    require(static_cast<int>(word.size()) <= s.depth,
            "pair: word length exceeds tensor depth");
    acc += coeff * s.levels[word.size()][word_to_index(word, s.dim)];
  }
  return acc;
}

std::vector<double> level_norms(const TruncatedTensor& s) {
  std::vector<double> out(s.levels.size());
  for (std::size_t k = 0; k < s.levels.size(); ++k) {
    double acc = 0.0;
    for (double v : s.levels[k]) acc += v * v;
    out[k] = std::sqrt(acc);
  }
  return out;
}

std::vector<double> flatten(const TruncatedTensor& s) {
  std::vector<double> out;
  out.reserve(total_dim(s.dim, s.depth));
  for (const auto& level : s.levels) out.insert(out.end(), level.begin(), level.end());
  return out;
}

TruncatedTensor unflatten(const std::vector<double>& v, int w, int n) {
  require(v.size() == total_dim(w, n), "unflatten: length does not match dim/depth");
  TruncatedTensor t(w, n);
  std::size_t pos = 0;
  for (auto& level : t.levels) {
    std::copy(v.begin() + static_cast<std::ptrdiff_t>(pos),
              v.begin() + static_cast<std::ptrdiff_t>(pos + level.size()), level.begin());
    pos += level.size();
  }
  return t;
}

}  // namespace ews
