#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ews/linalg.hpp"
#include "ews/tensor.hpp"

namespace ews {

// Structural tag for the weighting operator; the engine picks fast paths from
// it (zero: classical signature, no flows; diagonal: scalar exponentials).
enum class OperatorStructure { zero, diagonal, clock_compatible, general };

const char* structure_name(OperatorStructure s);
OperatorStructure structure_from_name(const std::string& name);

// Weighting pair (A, B): A acts on the lifted space R^w, B lifts path
// increments from R^d into R^w. B may be the identity (w == d).
struct Operator {
  Matrix A;                 // w x w
  Matrix B;                 // w x d; ignored when b_identity
  bool b_identity = true;
  OperatorStructure structure = OperatorStructure::general;

  int width() const { return static_cast<int>(A.rows); }
  int input_dim() const { return b_identity ? static_cast<int>(A.rows) : static_cast<int>(B.cols); }

  // dst[w] = B * dx (or a copy when B is the identity).
  void lift(const double* dx, double* dst) const;

  void validate() const;  // shape checks + structure tag consistency
};

Operator make_operator(Matrix a);                    // B = identity, inferred structure
Operator make_operator(Matrix a, Matrix b);          // explicit B, inferred structure
OperatorStructure infer_structure(const Matrix& a);

// Clock compatibility: row `clock_index` (1-based) of A must be
// alpha * e_{clock_index}^T exactly. Returns the decay rate alpha when
// compatible.
struct ClockCompatibility {
  bool compatible = false;
  double alpha = 0.0;
};
ClockCompatibility check_clock_compatible(const Matrix& a, int clock_index);

// Applies the flow operator D^h: every tensor factor of every level is acted
// on by exp(-h A). Level k costs k mode products.
TruncatedTensor flow_apply(const Matrix& a, double h, const TruncatedTensor& s);

// Derivation level block L^(k) = sum_{j=1..k} I^(j-1) (x) A (x) I^(k-j)
// (w^k x w^k, row-major; L^(0) = [0]).
Matrix derivation_block(const Matrix& a, int k);

// Full block-diagonal derivation matrix on the flattened algebra, levels
// 0..depth.
Matrix derivation_matrix(const Matrix& a, int depth);

// Precomputed action of exp(-h A) for one h value. For diagonal A the level
// scale arrays hold the per-word products of the scalar exponentials, so a
// flow application is one elementwise multiply per level.
struct FlowEntry {
  bool diagonal = false;
  Matrix e;                                      // dense exp(-h A)
  std::vector<std::vector<double>> level_scale;  // diagonal case, levels 0..depth
};

// Applies a prepared flow in place. `scratch` must have room for the largest
// level (dense case only).
void flow_apply_in_place(const FlowEntry& f, TruncatedTensor& s, std::vector<double>& scratch);

// Memoizes flow entries by the exact bit pattern of h. On uniform grids the
// scan needs only a handful of distinct h values, so this turns the
// per-combine matrix exponential into a table lookup.
class FlowCache {
 public:
  FlowCache(const Operator& op, int depth);
  const FlowEntry& get(double h);
  bool trivial() const { return trivial_; }  // zero structure: flows are the identity

 private:
  const Matrix a_;
  int depth_;
  bool diagonal_ = false;
  bool trivial_ = false;
  std::map<std::uint64_t, FlowEntry> cache_;
};

}  // namespace ews
