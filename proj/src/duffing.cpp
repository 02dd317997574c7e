#include "ews/duffing.hpp"

#include <cmath>

#include "ews/engine.hpp"
#include "ews/errors.hpp"

namespace ews {

Matrix chain_block(double lambda, int K) {
  require(K >= 0, "chain_block: K must be >= 0");
  const std::size_t n = static_cast<std::size_t>(K) + 1;
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    a.at(i, i) = lambda;
    if (i + 1 < n) a.at(i + 1, i) = -1.0;
  }
  return a;
}

DuffingOperator build_duffing_operator(double lambda_t, double lambda_x, double lambda_u, int K) {
  require(K >= 0, "duffing operator: K must be >= 0");
  const std::size_t n = static_cast<std::size_t>(K) + 1;
  const std::size_t w = 2 * n + 1;
  Matrix a(w, w);
  a.at(0, 0) = lambda_t;
  const Matrix cx = chain_block(lambda_x, K);
  const Matrix cu = chain_block(lambda_u, K);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      a.at(1 + i, 1 + j) = cx.at(i, j);
      a.at(1 + n + i, 1 + n + j) = cu.at(i, j);
    }
  }
  Matrix b(w, 3);
  b.at(0, 0) = 1.0;      // t drives the clock slot
  b.at(1, 1) = 1.0;      // x enters the head of its chain
  b.at(1 + n, 2) = 1.0;  // u enters the head of its chain

  DuffingOperator out;
  out.lambda_t = lambda_t;
  out.lambda_x = lambda_x;
  out.lambda_u = lambda_u;
  out.K = K;
  out.op = make_operator(std::move(a), std::move(b));
  return out;
}

std::vector<double> jordan_chain_coords(const std::vector<double>& times,
                                        const std::vector<double>& x, double lambda, int K) {
  require(times.size() == x.size(), "chain coords: times and values differ in length");
  require(!times.empty(), "chain coords: empty path");
  require(K >= 0, "chain coords: K must be >= 0");
  const std::size_t n = static_cast<std::size_t>(K) + 1;

  Matrix b(n, 1);
  b.at(0, 0) = 1.0;
  const Operator op = make_operator(chain_block(lambda, K), std::move(b));
  const PiecewiseLinearPath path = make_path(times, x, 1, 0);

  // Depth 1 is exact for any subdivision count; M = 1 keeps the kernel
  // build minimal.
  const auto stream = scan_ews_stream(path, op, 1, 1);
  std::vector<double> out(times.size() * n, 0.0);
  for (std::size_t i = 0; i < stream.size(); ++i) {
    const auto& l1 = stream[i].levels[1];
    for (std::size_t m = 0; m < n; ++m) out[i * n + m] = l1[m];
  }
  return out;
}

DuffingReconstruction reconstruct_from_chain(const std::vector<double>& times,
                                             const std::vector<double>& x, double lambda, int K) {
  require(lambda >= 0.0, "reconstruction: decay rate must be nonnegative");
  DuffingReconstruction rec;
  rec.times = times;
  rec.K = K;
  rec.coords = jordan_chain_coords(times, x, lambda, K);
  const std::size_t n = static_cast<std::size_t>(K) + 1;

  double log_fact = 0.0;  // log (K+1)!
  for (int m = 2; m <= K + 1; ++m) log_fact += std::log(static_cast<double>(m));

  rec.approx.resize(times.size());
  rec.truth.resize(times.size());
  rec.bound.resize(times.size());
  double var1 = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (i > 0) var1 += std::abs(x[i] - x[i - 1]);
    double acc = 0.0;
    double lp = 1.0;
    for (std::size_t m = 0; m < n; ++m) {
      acc += lp * rec.coords[i * n + m];
      lp *= lambda;
    }
    rec.approx[i] = acc;
    rec.truth[i] = x[i] - x[0];
    const double z = lambda * (times[i] - times[0]);
    rec.bound[i] = (z <= 0.0) ? 0.0
                              : var1 * std::exp(static_cast<double>(K + 1) * std::log(z) - log_fact);
  }
  return rec;
}

std::vector<double> simulate_duffing(const DuffingParams& p, double t_end, int steps) {
  require(steps >= 1, "duffing simulation: need at least one step");
  require(t_end > 0.0, "duffing simulation: horizon must be positive");
  const double h = t_end / static_cast<double>(steps);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  double x = p.x0, v = p.v0;
  out.push_back(x);
  const auto fx = [](double vv) { return vv; };
  const auto fv = [&](double tt, double xx, double vv) {
    return p.gamma * std::cos(p.omega * tt) - p.delta * vv - p.alpha * xx - p.beta * xx * xx * xx;
  };
  for (int s = 0; s < steps; ++s) {
    const double t = h * static_cast<double>(s);
    const double k1x = fx(v), k1v = fv(t, x, v);
    const double k2x = fx(v + 0.5 * h * k1v), k2v = fv(t + 0.5 * h, x + 0.5 * h * k1x, v + 0.5 * h * k1v);
    const double k3x = fx(v + 0.5 * h * k2v), k3v = fv(t + 0.5 * h, x + 0.5 * h * k2x, v + 0.5 * h * k2v);
    const double k4x = fx(v + h * k3v), k4v = fv(t + h, x + h * k3x, v + h * k3v);
    x += (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
    v += (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    out.push_back(x);
  }
  return out;
}

}  // namespace ews
