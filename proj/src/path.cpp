#include "ews/path.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "ews/errors.hpp"
#include "ews/fmt.hpp"
#include "ews/kernels.hpp"
#include "ews/matrix_exp.hpp"
#include "ews/vanloan.hpp"

namespace ews {

double PiecewiseLinearPath::clock_at(std::size_t i) const {
  if (clock_index == 0) return times[i];
  return knots[i * static_cast<std::size_t>(dim) + static_cast<std::size_t>(clock_index - 1)];
}

void PiecewiseLinearPath::validate() const {
  require(dim >= 1, "path: dimension must be >= 1");
  require(!times.empty(), "path: needs at least one knot");
  require(knots.size() == times.size() * static_cast<std::size_t>(dim),
          "path: knot array size does not match (num_knots x dim)");
  require(clock_index >= 0 && clock_index <= dim,
          "path: clock_index must be 0 (time stamps) or a channel in 1..dim");
  for (double t : times) require(std::isfinite(t), "path: non-finite time stamp");
  for (double v : knots) require(std::isfinite(v), "path: non-finite knot value");
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    if (!(times[i + 1] > times[i])) {
      throw error("path: time stamps must be strictly increasing (violation at knot " +
                  std::to_string(i + 1) + ")");
    }
  }
  if (clock_index >= 1) {
    for (std::size_t i = 0; i + 1 < times.size(); ++i) {
      if (!(clock_at(i + 1) > clock_at(i))) {
        throw error("path: clock channel must be strictly increasing (violation at knot " +
                    std::to_string(i + 1) + ")");
      }
    }
  }
}

PiecewiseLinearPath make_path(std::vector<double> times, std::vector<double> knots, int dim,
                              int clock_index) {
  PiecewiseLinearPath p;
  p.times = std::move(times);
  p.knots = std::move(knots);
  p.dim = dim;
  p.clock_index = clock_index;
  p.validate();
  return p;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace

PiecewiseLinearPath ingest_csv(const std::string& filename) {
  std::ifstream in(filename);
  require(in.good(), "cannot open CSV file '" + filename + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(strip_cr(line));
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  require(lines.size() >= 2, filename + ": expected a header line and at least one data row");

  const auto header = split_csv_line(lines[0]);
  require(header.size() >= 2,
          filename + ": header must be 't' followed by at least one channel name");
  require(trim(header[0]) == "t", filename + ": first header column must be 't'");
  const int d = static_cast<int>(header.size()) - 1;

  PiecewiseLinearPath p;
  p.dim = d + 1;
  p.clock_index = 1;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const std::string where = filename + ":row " + std::to_string(r + 1);
    require(!trim(lines[r]).empty(), where + ": empty row");
    const auto fields = split_csv_line(lines[r]);
    require(fields.size() == header.size(),
            where + ": expected " + std::to_string(header.size()) + " fields, found " +
                std::to_string(fields.size()));
    const double t =
        parse_double_token(fields[0].data(), fields[0].data() + fields[0].size(), where);
    p.times.push_back(t);
    p.knots.push_back(t);  // time is channel 1 and the clock
    for (std::size_t c = 1; c < fields.size(); ++c) {
      p.knots.push_back(
          parse_double_token(fields[c].data(), fields[c].data() + fields[c].size(), where));
    }
  }
  p.validate();
  return p;
}

void export_csv(const PiecewiseLinearPath& path, const std::string& filename) {
  path.validate();
  std::ofstream out(filename);
  require(out.good(), "cannot open '" + filename + "' for writing");
  const bool drop_first = (path.clock_index == 1);
  const int first_channel = drop_first ? 1 : 0;
  out << "t";
  for (int c = first_channel; c < path.dim; ++c) {
    out << ",x" << (c - first_channel + 1);
  }
  out << "\n";
  for (std::size_t i = 0; i < path.num_knots(); ++i) {
    out << fmt17(path.times[i]);
    const double* row = path.knot(i);
    for (int c = first_channel; c < path.dim; ++c) {
      out << "," << fmt17(row[c]);
    }
    out << "\n";
  }
  require(out.good(), "write to '" + filename + "' failed");
}

PiecewiseLinearPath time_augment(const std::vector<double>& times,
                                 const std::vector<double>& values, int d) {
  require(d >= 1, "time_augment: need at least one value channel");
  require(!times.empty(), "time_augment: empty time grid");
  require(values.size() == times.size() * static_cast<std::size_t>(d),
          "time_augment: value array size does not match (rows x d)");
  PiecewiseLinearPath p;
  p.dim = d + 1;
  p.clock_index = 1;
  p.times = times;
  p.knots.reserve(times.size() * static_cast<std::size_t>(d + 1));
  for (std::size_t i = 0; i < times.size(); ++i) {
    p.knots.push_back(times[i]);
    for (int c = 0; c < d; ++c) {
      p.knots.push_back(values[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(c)]);
    }
  }
  p.validate();
  return p;
}

PiecewiseLinearPath basepoint_prepend(const PiecewiseLinearPath& path) {
  path.validate();
  const bool single = path.num_knots() == 1;
  const double tgap = single ? 1.0 : path.times[1] - path.times[0];
  PiecewiseLinearPath p;
  p.dim = path.dim;
  p.clock_index = path.clock_index;
  p.times.reserve(path.times.size() + 1);
  p.times.push_back(path.times[0] - tgap);
  p.times.insert(p.times.end(), path.times.begin(), path.times.end());
  p.knots.assign(static_cast<std::size_t>(path.dim), 0.0);
  if (path.clock_index >= 1) {
    const double cgap = single ? 1.0 : path.clock_at(1) - path.clock_at(0);
    p.knots[static_cast<std::size_t>(path.clock_index - 1)] = path.clock_at(0) - cgap;
  }
  p.knots.insert(p.knots.end(), path.knots.begin(), path.knots.end());
  p.validate();
  return p;
}

NormalizationStats fit_normalization(const std::vector<PiecewiseLinearPath>& paths) {
  require(!paths.empty(), "normalization: no paths to fit");
  const int dim = paths.front().dim;
  NormalizationStats stats;
  stats.lo.assign(static_cast<std::size_t>(dim), 0.0);
  stats.hi.assign(static_cast<std::size_t>(dim), 0.0);
  bool first = true;
  for (const auto& p : paths) {
    require(p.dim == dim, "normalization: paths have mixed dimensions");
    for (std::size_t i = 0; i < p.num_knots(); ++i) {
      const double* row = p.knot(i);
      for (int c = 0; c < dim; ++c) {
        const std::size_t cz = static_cast<std::size_t>(c);
        if (first) {
          stats.lo[cz] = row[c];
          stats.hi[cz] = row[c];
        } else {
          if (row[c] < stats.lo[cz]) stats.lo[cz] = row[c];
          if (row[c] > stats.hi[cz]) stats.hi[cz] = row[c];
        }
      }
      first = false;
    }
  }
  return stats;
}

PiecewiseLinearPath apply_normalization(const PiecewiseLinearPath& path,
                                        const NormalizationStats& stats) {
  path.validate();
  require(stats.lo.size() == static_cast<std::size_t>(path.dim) && stats.hi.size() == stats.lo.size(),
          "normalization: stats dimension does not match path dimension");
  for (int c = 0; c < path.dim; ++c) {
    const std::size_t cz = static_cast<std::size_t>(c);
    require(stats.hi[cz] > stats.lo[cz],
            "normalization: channel " + std::to_string(c + 1) + " is constant on the fit data");
  }
  PiecewiseLinearPath p = path;
  for (std::size_t i = 0; i < p.num_knots(); ++i) {
    double* row = p.knot(i);
    for (int c = 0; c < p.dim; ++c) {
      const std::size_t cz = static_cast<std::size_t>(c);
      row[c] = (row[c] - stats.lo[cz]) / (stats.hi[cz] - stats.lo[cz]);
    }
  }
  if (p.clock_index >= 1) {
    // Keep time stamps equal to the (remapped) clock channel.
    const std::size_t cz = static_cast<std::size_t>(p.clock_index - 1);
    for (std::size_t i = 0; i < p.num_knots(); ++i) {
      p.times[i] = (p.times[i] - stats.lo[cz]) / (stats.hi[cz] - stats.lo[cz]);
    }
  }
  p.validate();
  return p;
}

double total_variation(const PiecewiseLinearPath& path) {
  double acc = 0.0;
  for (std::size_t s = 0; s + 1 < path.num_knots(); ++s) {
    const double* a = path.knot(s);
    const double* b = path.knot(s + 1);
    double seg = 0.0;
    for (int c = 0; c < path.dim; ++c) {
      const double d = b[c] - a[c];
      seg += d * d;
    }
    acc += std::sqrt(seg);
  }
  return acc;
}

double lifted_variation(const PiecewiseLinearPath& path, const Operator& op) {
  if (op.b_identity) {
    require(op.width() == path.dim, "lifted_variation: operator width does not match path dimension");
    return total_variation(path);
  }
  require(op.input_dim() == path.dim, "lifted_variation: operator input does not match path dimension");
  const int w = op.width();
  std::vector<double> dx(static_cast<std::size_t>(path.dim));
  std::vector<double> dxhat(static_cast<std::size_t>(w));
  double acc = 0.0;
  for (std::size_t s = 0; s + 1 < path.num_knots(); ++s) {
    const double* a = path.knot(s);
    const double* b = path.knot(s + 1);
    for (int c = 0; c < path.dim; ++c) dx[static_cast<std::size_t>(c)] = b[c] - a[c];
    op.lift(dx.data(), dxhat.data());
    double seg = 0.0;
    for (int c = 0; c < w; ++c) seg += dxhat[static_cast<std::size_t>(c)] * dxhat[static_cast<std::size_t>(c)];
    acc += std::sqrt(seg);
  }
  return acc;
}

PiecewiseLinearPath reweighted_path(const PiecewiseLinearPath& path, const Operator& op, double t,
                                    int M) {
  path.validate();
  op.validate();
  require(op.input_dim() == path.dim,
          "reweighted_path: operator input dimension does not match path dimension");
  require(M >= 1, "reweighted_path: subdivision count must be >= 1");
  require(t >= path.times.front() && t <= path.times.back(),
          "reweighted_path: horizon lies outside the path's time span");
  const int w = op.width();
  const std::size_t wz = static_cast<std::size_t>(w);

  // Segments fully before t, plus an optional partial segment cut at t.
  std::size_t full = 0;
  while (full + 1 < path.num_knots() && path.times[full + 1] <= t) ++full;
  const bool partial = (path.times[full] < t);

  PiecewiseLinearPath out;
  out.dim = w;
  out.clock_index = 0;
  out.times.push_back(path.times[0]);
  out.knots.assign(wz, 0.0);

  const double theta_t = [&] {
    if (!partial) return path.clock_at(full);
    const double a = (t - path.times[full]) / (path.times[full + 1] - path.times[full]);
    return path.clock_at(full) + a * (path.dtheta(full));
  }();

  SegmentKernelCache kernels(op, M);
  std::vector<double> carry(wz, 0.0);
  std::vector<double> dx(static_cast<std::size_t>(path.dim));
  std::vector<double> dxhat(wz);
  std::vector<double> local;
  std::vector<double> flowed(wz);

  const std::size_t nseg = full + (partial ? 1 : 0);
  for (std::size_t s = 0; s < nseg; ++s) {
    const bool cut = partial && (s == full);
    const double t0 = path.times[s];
    const double t1 = cut ? t : path.times[s + 1];
    const double frac = cut ? (t - path.times[s]) / (path.times[s + 1] - path.times[s]) : 1.0;
    const double dth = path.dtheta(s) * frac;
    const double* a = path.knot(s);
    const double* b = path.knot(s + 1);
    for (int c = 0; c < path.dim; ++c) {
      dx[static_cast<std::size_t>(c)] = (b[c] - a[c]) * frac;
    }
    op.lift(dx.data(), dxhat.data());

    const SegmentKernel& kern = kernels.get(dth);
    segment_knots(kern, dxhat.data(), local);

    // Carry each local knot (weighted to the segment end) to the horizon t.
    const double h = theta_t - (path.clock_at(s) + dth);
    Matrix f;
    std::vector<double> fdiag;
    const bool diag = (op.structure == OperatorStructure::zero ||
                       op.structure == OperatorStructure::diagonal);
    if (diag) {
      fdiag.resize(wz);
      for (std::size_t i = 0; i < wz; ++i) {
        const double lam = (op.structure == OperatorStructure::zero) ? 0.0 : op.A.at(i, i);
        fdiag[i] = std::exp(-h * lam);
      }
    } else {
      f = matrix_exp(op.A * (-h));
    }
    for (int j = 1; j <= M; ++j) {
      const double* z = local.data() + static_cast<std::size_t>(j) * wz;
      if (diag) {
        for (std::size_t i = 0; i < wz; ++i) flowed[i] = fdiag[i] * z[i];
      } else {
        kernels::ops().matvec(wz, wz, f.data.data(), z, flowed.data());
      }
      out.times.push_back(t0 + (t1 - t0) * (static_cast<double>(j) / static_cast<double>(M)));
      for (std::size_t i = 0; i < wz; ++i) out.knots.push_back(carry[i] + flowed[i]);
    }
    for (std::size_t i = 0; i < wz; ++i) {
      carry[i] = out.knots[out.knots.size() - wz + i];
    }
  }
  out.validate();
  return out;
}

}  // namespace ews
