#include "ews/lncde.hpp"

#include "ews/errors.hpp"
#include "ews/matrix_exp.hpp"
#include "ews/words.hpp"

namespace ews {

LncdeSystem build_lncde_matrices(const Matrix& a, int depth, int clock_letter) {
  require(a.square() && a.rows >= 1, "lncde: A must be square and nonempty");
  require(depth >= 1, "lncde: depth must be >= 1");
  const int w = static_cast<int>(a.rows);
  require(clock_letter >= 1 && clock_letter <= w, "lncde: clock letter out of range");
  const std::size_t d = total_dim(w, depth);
  require(d <= kMaxLncdeDim,
          "lncde: flattened dimension " + std::to_string(d) + " exceeds the guard (" +
              std::to_string(kMaxLncdeDim) + ")");

  LncdeSystem sys;
  sys.w = w;
  sys.depth = depth;
  sys.clock_letter = clock_letter;
  sys.D = d;
  sys.L = derivation_matrix(a, depth);

  // Level offsets into the flattened state.
  std::vector<std::size_t> offset(static_cast<std::size_t>(depth) + 2, 0);
  for (int k = 0; k <= depth; ++k) {
    offset[static_cast<std::size_t>(k) + 1] =
        offset[static_cast<std::size_t>(k)] + level_size(w, k);
  }

  sys.rho.assign(static_cast<std::size_t>(w), Matrix(d, d));
  for (int letter = 1; letter <= w; ++letter) {
    Matrix& r = sys.rho[static_cast<std::size_t>(letter - 1)];
    for (int k = 0; k < depth; ++k) {
      const std::size_t nk = level_size(w, k);
      for (std::size_t u = 0; u < nk; ++u) {
        const std::size_t row = offset[static_cast<std::size_t>(k) + 1] +
                                u * static_cast<std::size_t>(w) +
                                static_cast<std::size_t>(letter - 1);
        const std::size_t col = offset[static_cast<std::size_t>(k)] + u;
        r.at(row, col) = 1.0;
      }
    }
  }

  sys.step.reserve(static_cast<std::size_t>(w));
  for (int letter = 1; letter <= w; ++letter) {
    Matrix m = sys.rho[static_cast<std::size_t>(letter - 1)];
    if (letter == clock_letter) m = m - sys.L;
    sys.step.push_back(std::move(m));
  }
  return sys;
}

TruncatedTensor lncde_solve(const PiecewiseLinearPath& path, const Operator& op, int depth) {
  path.validate();
  op.validate();
  require(op.input_dim() == path.dim,
          "lncde: operator input dimension does not match path dimension");
  const int w = op.width();
  const LncdeSystem sys = build_lncde_matrices(op.A, depth);

  std::vector<double> state(sys.D, 0.0);
  state[0] = 1.0;  // e_empty

  std::vector<double> dx(static_cast<std::size_t>(path.dim));
  std::vector<double> dxhat(static_cast<std::size_t>(w));
  for (std::size_t s = 0; s + 1 < path.num_knots(); ++s) {
    const double* a = path.knot(s);
    const double* b = path.knot(s + 1);
    for (int c = 0; c < path.dim; ++c) dx[static_cast<std::size_t>(c)] = b[c] - a[c];
    op.lift(dx.data(), dxhat.data());

    Matrix g = sys.L * (-path.dtheta(s));
    for (int i = 0; i < w; ++i) {
      const double coeff = dxhat[static_cast<std::size_t>(i)];
      if (coeff == 0.0) continue;
      const Matrix& r = sys.rho[static_cast<std::size_t>(i)];
      for (std::size_t q = 0; q < g.data.size(); ++q) g.data[q] += coeff * r.data[q];
    }
    const Matrix e = matrix_exp(g);
    std::vector<double> next(sys.D, 0.0);
    for (std::size_t i = 0; i < sys.D; ++i) {
      double acc = 0.0;
      const double* row = e.data.data() + i * sys.D;
      for (std::size_t j = 0; j < sys.D; ++j) acc += row[j] * state[j];
      next[i] = acc;
    }
    state = std::move(next);
  }
  return unflatten(state, w, depth);
}

}  // namespace ews
