#pragma once

#include <vector>

#include "ews/flow.hpp"
#include "ews/path.hpp"

namespace ews {

// Jordan-chain weighting: a (K+1)-slot companion block with lambda on the
// diagonal and -1 on the subdiagonal turns the depth-1 weighted signature of
// a scalar channel into the memory-kernel integrals
//   S^m_t = int_0^t exp(-lambda (t-s)) (t-s)^m / m!  dx_s,   m = 0..K.
Matrix chain_block(double lambda, int K);

// Weighting pair for a forced-oscillator readout over the input (t, x, u):
// one clock slot plus one chain per signal channel, A = blockdiag(lambda_t,
// chain(lambda_x), chain(lambda_u)), B routing t, x, u into the slot heads.
struct DuffingOperator {
  double lambda_t = 0.0;
  double lambda_x = 0.0;
  double lambda_u = 0.0;
  int K = 0;
  Operator op;  // A is (2K+3)^2, B is (2K+3) x 3
};

DuffingOperator build_duffing_operator(double lambda_t, double lambda_x, double lambda_u, int K);

// Chain coordinates of a scalar path x at every knot: row-major
// (num_knots) x (K+1), computed with the depth-1 scan under chain_block.
std::vector<double> jordan_chain_coords(const std::vector<double>& times,
                                        const std::vector<double>& x, double lambda, int K);

// Increment reconstruction from chain coordinates:
//   x_t - x_{t0} ~ sum_m lambda^m S^m_t, with remainder bounded by
//   var_1(x; [t0, t]) * (lambda (t - t0))^(K+1) / (K+1)!.
struct DuffingReconstruction {
  std::vector<double> times;
  int K = 0;
  std::vector<double> coords;  // (num_knots) x (K+1)
  std::vector<double> approx;
  std::vector<double> truth;
  std::vector<double> bound;
};

DuffingReconstruction reconstruct_from_chain(const std::vector<double>& times,
                                             const std::vector<double>& x, double lambda, int K);

// Fourth-order Runge-Kutta trajectory of the forced Duffing oscillator
//   x'' + delta x' + alpha x + beta x^3 = gamma cos(omega t)
// on a uniform grid; returns x at the grid points (x(0) = x0, x'(0) = v0).
struct DuffingParams {
  double delta = 0.3;
  double alpha = -1.0;
  double beta = 1.0;
  double gamma = 0.37;
  double omega = 1.2;
  double x0 = 1.0;
  double v0 = 0.0;
};

std::vector<double> simulate_duffing(const DuffingParams& params, double t_end, int steps);

}  // namespace ews
