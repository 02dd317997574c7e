#pragma once

#include <vector>

#include "ews/words.hpp"

namespace ews {

// Element of the truncated tensor algebra over R^dim, levels 0..depth stored
// dense and level-major; levels[k] is the flat row-major array of the k-th
// tensor level (dim^k entries, leftmost letter most significant).
struct TruncatedTensor {
  int dim = 0;
  int depth = 0;
  std::vector<std::vector<double>> levels;

  TruncatedTensor() = default;
  TruncatedTensor(int w, int n);  // all levels zero

  static TruncatedTensor unit(int w, int n);  // 1 in level 0

  double& scalar() { return levels[0][0]; }
  double scalar() const { return levels[0][0]; }

  void set_zero();
  void set_unit();
  bool finite() const;
};

bool operator==(const TruncatedTensor& a, const TruncatedTensor& b);

// Truncated concatenation product c_k = sum_{j=0..k} a_j (x) b_{k-j}.
TruncatedTensor concat_product(const TruncatedTensor& a, const TruncatedTensor& b);

// In-place variant: a <- a (x) b.
void concat_in_place(TruncatedTensor& a, const TruncatedTensor& b);

// <l, s>: evaluates a dual element against a tensor. Words longer than
// s.depth are rejected.
double pair(const DualElement& l, const TruncatedTensor& s);

// Frobenius norm of each level, indices 0..depth.
std::vector<double> level_norms(const TruncatedTensor& s);

// Level-major flattening, level 0 first. unflatten rejects length mismatch.
std::vector<double> flatten(const TruncatedTensor& s);
TruncatedTensor unflatten(const std::vector<double>& v, int w, int n);

}  // namespace ews
