// ews — exponentially weighted signatures of piecewise-linear paths.
//
// Subcommands: compute, dump-derivation, dump-lncde, experiment, duffing,
// selftest. Every file-producing run writes a <out>.manifest.json alongside
// its outputs; all numeric output carries 17 significant digits.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ews/duffing.hpp"
#include "ews/engine.hpp"
#include "ews/errors.hpp"
#include "ews/experiments.hpp"
#include "ews/flow.hpp"
#include "ews/fmt.hpp"
#include "ews/jsonio.hpp"
#include "ews/kernels.hpp"
#include "ews/lncde.hpp"
#include "ews/manifest.hpp"
#include "ews/matrix_exp.hpp"
#include "ews/parallel.hpp"
#include "ews/path.hpp"
#include "ews/tensor.hpp"
#include "ews/vanloan.hpp"
#include "ews/version.hpp"
#include "ews/words.hpp"

namespace {

using namespace ews;

// ---------------------------------------------------------------------------
// Shared plumbing

struct GlobalOpts {
  int threads = 0;  // 0 = all available cores
  std::string kernels = "auto";
};

// Flag-logic misuse (as opposed to bad data) maps to exit code 2.
void usage_require(bool ok, const std::string& what) {
  if (!ok) throw usage_error(what);
}

void apply_kernel_choice(const std::string& choice) {
  if (choice == "auto") {
    kernels::set_variant_auto();
  } else if (choice == "scalar") {
    kernels::set_variant(kernels::Variant::scalar);
  } else if (choice == "avx2") {
    require(kernels::avx2_supported(), "avx2 kernels are not available in this build/CPU");
    kernels::set_variant(kernels::Variant::avx2);
  } else {
    throw usage_error("unknown kernel variant \"" + choice + "\" (scalar, avx2 or auto)");
  }
}

// Collects written outputs and emits the manifest next to the primary output.
class OutputCollector {
 public:
  explicit OutputCollector(std::string command) : command_(std::move(command)) {
    start_ = std::chrono::steady_clock::now();
  }

  void write(const std::string& path, const std::string& content) {
    manifest::write_text_file(path, content);
    files_.push_back({path, manifest::sha256_hex(content)});
  }

  void finish(const std::string& primary_out, const std::string& config_json,
              const std::vector<std::uint64_t>& seeds) {
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    manifest::write_text_file(
        primary_out + ".manifest.json",
        manifest::run_manifest_json(command_, config_json, seeds, secs, files_));
  }

 private:
  std::string command_;
  std::chrono::steady_clock::time_point start_;
  std::vector<manifest::OutputFile> files_;
};

std::string command_line(int argc, char** argv) {
  std::string cmd = "ews";
  for (int i = 1; i < argc; ++i) {
    cmd += ' ';
    cmd += argv[i];
  }
  return cmd;
}

std::vector<double> parse_double_list(const std::string& csv, const std::string& what) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    std::size_t comma = csv.find(',', pos);
    if (comma == std::string::npos) comma = csv.size();
    out.push_back(parse_double_token(csv.data() + pos, csv.data() + comma, what));
    pos = comma + 1;
  }
  return out;
}

Matrix parse_square_matrix_flag(const std::string& csv, int dim, const std::string& flag) {
  const auto vals = parse_double_list(csv, flag);
  const auto need = static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim);
  require(vals.size() == need,
          flag + ": expected " + std::to_string(need) + " comma-separated values, got " +
              std::to_string(vals.size()));
  return Matrix(static_cast<std::size_t>(dim), static_cast<std::size_t>(dim), vals);
}

std::string strip_json_suffix(const std::string& path) {
  const std::string suffix = ".json";
  if (path.size() > suffix.size() &&
      path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0) {
    return path.substr(0, path.size() - suffix.size());
  }
  return path;
}

// ---------------------------------------------------------------------------
// compute

struct ComputeOpts {
  std::string input;
  std::string operator_file;
  int depth = 0;
  int substeps = 32;
  int clock = 1;
  bool efm = false;
  bool signature = false;
  bool stream = false;
  bool check_convergence = false;
  std::string out;
};

double tensor_deviation(const TruncatedTensor& a, const TruncatedTensor& b) {
  double dev = 0.0;
  for (int k = 0; k <= a.depth; ++k) {
    const auto& la = a.levels[static_cast<std::size_t>(k)];
    const auto& lb = b.levels[static_cast<std::size_t>(k)];
    for (std::size_t i = 0; i < la.size(); ++i) {
      const double scale = 1.0 + std::max(std::fabs(la[i]), std::fabs(lb[i]));
      dev = std::max(dev, std::fabs(la[i] - lb[i]) / scale);
    }
  }
  return dev;
}

int run_compute(const ComputeOpts& o, const GlobalOpts& g, const std::string& cmdline) {
  usage_require(!(o.efm && o.signature), "--efm and --signature are mutually exclusive");
  usage_require(o.depth >= 1, "--depth must be >= 1");
  usage_require(o.substeps >= 1, "--substeps must be >= 1");

  PiecewiseLinearPath path = ingest_csv(o.input);
  if (o.clock != 1) {
    path.clock_index = o.clock;
    path.validate();
  }

  Operator op;
  if (o.signature) {
    usage_require(o.operator_file.empty(), "--signature replaces --operator; pass only one");
    op = make_operator(Matrix(static_cast<std::size_t>(path.dim), static_cast<std::size_t>(path.dim)));
  } else {
    usage_require(!o.operator_file.empty(), "compute needs --operator FILE (or --signature)");
    op = jsonio::parse_operator_json(manifest::read_text_file(o.operator_file), o.operator_file);
    if (o.efm) {
      require(op.structure == OperatorStructure::zero ||
                  op.structure == OperatorStructure::diagonal,
              "--efm requires a diagonal weighting operator");
    }
  }

  OutputCollector outputs(cmdline);
  std::string payload;
  TruncatedTensor final_tensor;
  if (o.stream) {
    const auto stream = scan_ews_stream(path, op, o.depth, o.substeps, g.threads);
    std::vector<double> clocks(stream.size());
    for (std::size_t i = 0; i < stream.size(); ++i) clocks[i] = path.clock_at(i);
    payload = jsonio::tensor_stream_json(clocks, stream);
    final_tensor = stream.back();
  } else {
    final_tensor = scan_ews(path, op, o.depth, o.substeps, g.threads);
    payload = jsonio::tensor_json(final_tensor);
  }
  outputs.write(o.out, payload);

  if (o.check_convergence) {
    const TruncatedTensor refined = scan_ews(path, op, o.depth, 2 * o.substeps, g.threads);
    std::printf("convergence: max scaled deviation %s between %d and %d subdivisions\n",
                fmt17(tensor_deviation(final_tensor, refined)).c_str(), o.substeps,
                2 * o.substeps);
  }

  std::string config = "{\"input\":\"" + manifest::json_escape(o.input) + "\",\"operator\":";
  config += o.signature ? std::string("\"signature\"")
                        : "\"" + manifest::json_escape(o.operator_file) + "\"";
  config += ",\"depth\":" + std::to_string(o.depth);
  config += ",\"substeps\":" + std::to_string(o.substeps);
  config += ",\"clock\":" + std::to_string(o.clock);
  config += ",\"efm\":" + std::string(o.efm ? "true" : "false");
  config += ",\"stream\":" + std::string(o.stream ? "true" : "false");
  config += ",\"check_convergence\":" + std::string(o.check_convergence ? "true" : "false");
  config += ",\"threads\":" + std::to_string(g.threads);
  config += ",\"kernels\":\"" + g.kernels + "\"}";
  outputs.finish(o.out, config, {});
  return 0;
}

// ---------------------------------------------------------------------------
// dump-derivation / dump-lncde

struct DumpOpts {
  int dim = 0;
  int depth = 0;
  int clock = 1;
  std::string a_csv;
  std::string out;
};

int run_dump(const DumpOpts& o, bool full_system, const std::string& cmdline) {
  usage_require(o.dim >= 1, "--dim must be >= 1");
  usage_require(o.depth >= 1, "--depth must be >= 1");
  const Matrix a = parse_square_matrix_flag(o.a_csv, o.dim, "--A");

  std::string payload;
  if (full_system) {
    const LncdeSystem sys = build_lncde_matrices(a, o.depth, o.clock);
    payload = jsonio::lncde_json(a, sys);
  } else {
    payload = jsonio::matrix_json(derivation_block(a, o.depth));
  }

  if (o.out.empty()) {
    std::printf("%s\n", payload.c_str());
    return 0;
  }
  OutputCollector outputs(cmdline);
  outputs.write(o.out, payload);
  std::string config = "{\"dim\":" + std::to_string(o.dim) +
                       ",\"depth\":" + std::to_string(o.depth) +
                       ",\"clock\":" + std::to_string(o.clock) + ",\"A\":";
  {
    std::string mat;
    const auto vals = parse_double_list(o.a_csv, "--A");
    mat += '[';
    for (std::size_t i = 0; i < vals.size(); ++i) {
      if (i) mat += ',';
      mat += fmt17(vals[i]);
    }
    mat += ']';
    config += mat;
  }
  config += '}';
  outputs.finish(o.out, config, {});
  return 0;
}

// ---------------------------------------------------------------------------
// experiment

struct ExperimentOpts {
  std::string mode;  // expressivity | sde
  std::string config_file;
  std::string target;   // optional restriction
  std::string learner;  // optional restriction
  std::string out;
};

int run_experiment(const ExperimentOpts& o, const GlobalOpts& g, const std::string& cmdline) {
  OutputCollector outputs(cmdline);
  const std::string stem = strip_json_suffix(o.out);

  ExperimentResult res;
  std::string config_json;
  std::vector<std::uint64_t> seeds;
  if (o.mode == "expressivity") {
    ExpressivityConfig cfg;
    if (!o.config_file.empty()) {
      cfg = jsonio::parse_expressivity_config(manifest::read_text_file(o.config_file),
                                              o.config_file);
    }
    if (!o.target.empty()) cfg.targets = {jsonio::parse_target_kind(o.target)};
    if (!o.learner.empty()) cfg.learners = {jsonio::parse_learner_kind(o.learner)};
    config_json = jsonio::expressivity_config_json(cfg);
    seeds = cfg.seeds;
    res = run_expressivity(cfg, g.threads);
  } else {
    usage_require(o.target.empty(), "--target applies to the expressivity experiment only");
    SdeConfig cfg;
    if (!o.config_file.empty()) {
      cfg = jsonio::parse_sde_config(manifest::read_text_file(o.config_file), o.config_file);
    }
    if (!o.learner.empty()) cfg.learners = {jsonio::parse_learner_kind(o.learner)};
    config_json = jsonio::sde_config_json(cfg);
    seeds = cfg.seeds;
    res = run_sde(cfg, g.threads);
  }

  outputs.write(o.out, jsonio::experiment_report_json(res, config_json));
  for (const auto& group : res.groups) {
    const std::string csv_path = (res.groups.size() == 1 && o.mode == "sde")
                                     ? stem + ".predictions.csv"
                                     : stem + "." + group.label + ".predictions.csv";
    outputs.write(csv_path, jsonio::predictions_csv(group));
  }
  outputs.finish(o.out, config_json, seeds);
  return 0;
}

// ---------------------------------------------------------------------------
// duffing

struct DuffingOpts {
  std::string input;
  bool demo = false;
  double lambda = 1.0;
  int K = 4;
  double t_end = 20.0;
  int steps = 2000;
  std::string out;
};

int run_duffing(const DuffingOpts& o, const std::string& cmdline) {
  usage_require(o.K >= 0 && o.K <= 16, "--K must lie in [0, 16]");
  usage_require(o.demo != !o.input.empty(), "pass exactly one of --input FILE or --demo");

  std::vector<double> times, x;
  if (o.demo) {
    usage_require(o.steps >= 1 && o.t_end > 0.0, "--steps and --t-end must be positive");
    x = simulate_duffing(DuffingParams{}, o.t_end, o.steps);
    times.resize(x.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
      times[i] = o.t_end * static_cast<double>(i) / static_cast<double>(o.steps);
    }
  } else {
    const PiecewiseLinearPath path = ingest_csv(o.input);
    require(path.dim == 2, o.input + ": expected a single value column (header t,x)");
    times = path.times;
    x.resize(path.num_knots());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = path.knot(i)[1];
  }

  const DuffingReconstruction rec = reconstruct_from_chain(times, x, o.lambda, o.K);
  OutputCollector outputs(cmdline);
  outputs.write(o.out, jsonio::duffing_chain_csv(rec));

  std::string config = "{\"lambda\":" + fmt17(o.lambda) + ",\"K\":" + std::to_string(o.K);
  if (o.demo) {
    config += ",\"demo\":true,\"t_end\":" + fmt17(o.t_end) + ",\"steps\":" + std::to_string(o.steps);
  } else {
    config += ",\"input\":\"" + manifest::json_escape(o.input) + "\"";
  }
  config += '}';
  outputs.finish(o.out, config, {});
  return 0;
}

// ---------------------------------------------------------------------------
// selftest

struct SelftestState {
  int failures = 0;
  void check(const std::string& name, bool ok, const std::string& detail = "") {
    if (detail.empty()) {
      std::printf("%s  %s\n", ok ? "ok" : "FAIL", name.c_str());
    } else {
      std::printf("%s  %s (%s)\n", ok ? "ok" : "FAIL", name.c_str(), detail.c_str());
    }
    if (!ok) ++failures;
  }
};

Matrix random_matrix(Rng& rng, int w, double scale) {
  Matrix a(static_cast<std::size_t>(w), static_cast<std::size_t>(w));
  for (auto& v : a.data) v = scale * rng.normal();
  return a;
}

PiecewiseLinearPath random_time_augmented_path(Rng& rng, int channels, int segments,
                                               double t_end) {
  std::vector<double> times(static_cast<std::size_t>(segments) + 1);
  std::vector<double> knots;
  const int dim = channels + 1;
  knots.assign(times.size() * static_cast<std::size_t>(dim), 0.0);
  std::vector<double> walk(static_cast<std::size_t>(channels), 0.0);
  for (std::size_t i = 0; i < times.size(); ++i) {
    times[i] = t_end * static_cast<double>(i) / static_cast<double>(segments);
    knots[i * static_cast<std::size_t>(dim)] = times[i];
    for (int c = 0; c < channels; ++c) {
      if (i > 0) walk[static_cast<std::size_t>(c)] += 0.4 * rng.normal();
      knots[i * static_cast<std::size_t>(dim) + static_cast<std::size_t>(c) + 1] =
          walk[static_cast<std::size_t>(c)];
    }
  }
  return make_path(std::move(times), std::move(knots), dim, 1);
}

double max_abs_coeff(const TruncatedTensor& t) {
  double m = 0.0;
  for (const auto& lv : t.levels) {
    for (double v : lv) m = std::max(m, std::fabs(v));
  }
  return m;
}

double word_coeff(const TruncatedTensor& t, const Word& word) {
  if (word.empty()) return t.scalar();
  const int k = static_cast<int>(word.size());
  return t.levels[static_cast<std::size_t>(k)][word_to_index(word, t.dim)];
}

int run_selftest(const GlobalOpts& g) {
  SelftestState st;
  Rng rng(20240817u);

  {  // matrix exponential: exp(A) exp(-A) = I
    double worst = 0.0;
    for (int rep = 0; rep < 3; ++rep) {
      const Matrix a = random_matrix(rng, 4, 0.8);
      const Matrix prod = matrix_exp(a) * matrix_exp(-1.0 * a);
      for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
          worst = std::max(worst, std::fabs(prod.at(i, j) - (i == j ? 1.0 : 0.0)));
        }
      }
    }
    st.check("matrix exponential inverse", worst <= 1e-12, "residual " + fmt17(worst));
  }

  {  // kernel variants bit-identical
    if (!kernels::avx2_supported()) {
      st.check("kernel variants agree", true, "scalar only, nothing to compare");
    } else {
      const auto& sc = kernels::scalar_ops();
      const auto& vx = kernels::avx2_ops();
      const std::size_t n = 37, rows = 7, cols = 9;
      std::vector<double> x(n), y1(n), y2(n), mat(rows * cols), v(cols), o1(rows), o2(rows);
      for (auto& t : x) t = rng.normal();
      for (auto& t : mat) t = rng.normal();
      for (auto& t : v) t = rng.normal();
      for (std::size_t i = 0; i < n; ++i) y1[i] = y2[i] = rng.normal();
      sc.axpy(n, 1.7, x.data(), y1.data());
      vx.axpy(n, 1.7, x.data(), y2.data());
      sc.matvec(rows, cols, mat.data(), v.data(), o1.data());
      vx.matvec(rows, cols, mat.data(), v.data(), o2.data());
      bool same = y1 == y2 && o1 == o2;
      st.check("kernel variants agree", same);
    }
  }

  {  // combine of half scans equals the one-shot scan
    double worst = 0.0;
    for (int rep = 0; rep < 5; ++rep) {
      const auto path = random_time_augmented_path(rng, 2, 12, 2.0);
      const Operator op = make_operator(random_matrix(rng, 3, 0.5));
      const std::size_t cut = 5;
      std::vector<double> lt(path.times.begin(), path.times.begin() + cut + 1);
      std::vector<double> lk(path.knots.begin(), path.knots.begin() + (cut + 1) * 3);
      std::vector<double> rt(path.times.begin() + cut, path.times.end());
      std::vector<double> rk(path.knots.begin() + cut * 3, path.knots.end());
      const auto left = make_path(std::move(lt), std::move(lk), 3, 1);
      const auto right = make_path(std::move(rt), std::move(rk), 3, 1);

      SegmentState ls{left.clock_at(left.num_knots() - 1) - left.clock_at(0),
                      scan_ews(left, op, 3, 64, g.threads)};
      SegmentState rs{right.clock_at(right.num_knots() - 1) - right.clock_at(0),
                      scan_ews(right, op, 3, 64, g.threads)};
      const SegmentState glued = chen_combine(ls, rs, op.A);
      const TruncatedTensor whole = scan_ews(path, op, 3, 64, g.threads);
      const double scale = std::max(1.0, max_abs_coeff(whole));
      for (int k = 0; k <= 3; ++k) {
        const auto& la = glued.ten.levels[static_cast<std::size_t>(k)];
        const auto& lb = whole.levels[static_cast<std::size_t>(k)];
        for (std::size_t i = 0; i < la.size(); ++i) {
          worst = std::max(worst, std::fabs(la[i] - lb[i]) / scale);
        }
      }
    }
    st.check("two-interval combine matches one-shot scan", worst <= 1e-10,
             "residual " + fmt17(worst));
  }

  {  // shuffle identity on scan outputs
    const auto path = random_time_augmented_path(rng, 1, 10, 1.5);
    const Operator op = make_operator(random_matrix(rng, 2, 0.6));
    const TruncatedTensor s = scan_ews(path, op, 4, 64, g.threads);
    double worst = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
      const int lu = 1 + static_cast<int>(rng.uniform() * 2.0);
      const int lv = 1 + static_cast<int>(rng.uniform() * (3.0 - lu));
      Word u(static_cast<std::size_t>(lu)), v(static_cast<std::size_t>(lv));
      for (auto& letter : u) letter = 1 + static_cast<int>(rng.uniform() * 2.0);
      for (auto& letter : v) letter = 1 + static_cast<int>(rng.uniform() * 2.0);
      const double lhs = word_coeff(s, u) * word_coeff(s, v);
      double rhs = 0.0;
      for (const auto& [word, coeff] : shuffle_words(u, v)) {
        rhs += static_cast<double>(coeff) * word_coeff(s, word);
      }
      worst = std::max(worst, std::fabs(lhs - rhs) / std::max(1.0, std::fabs(lhs)));
    }
    st.check("shuffle identity on scan output", worst <= 1e-9, "residual " + fmt17(worst));
  }

  {  // factorial decay bound
    bool ok = true;
    for (int rep = 0; rep < 5 && ok; ++rep) {
      const auto path = random_time_augmented_path(rng, 2, 15, 2.0);
      const Operator op = make_operator(random_matrix(rng, 3, 0.5));
      const TruncatedTensor s = scan_ews(path, op, 4, 32, g.threads);
      const double c = decay_constant(path, op);
      const double v = total_variation(path);
      const auto norms = level_norms(s);
      double fact = 1.0;
      for (int n = 1; n <= 4; ++n) {
        fact *= n;
        if (norms[static_cast<std::size_t>(n)] >
            std::pow(c * v, n) / fact * (1.0 + 1e-12) + 1e-300) {
          ok = false;
        }
      }
    }
    st.check("factorial decay bound", ok);
  }

  {  // segment endpoint independent of subdivision count
    const Operator op = make_operator(random_matrix(rng, 3, 0.7));
    std::vector<double> dxhat(3);
    for (auto& t : dxhat) t = rng.normal();
    const auto coarse = van_loan_segment(op, 0.9, dxhat.data(), 3);
    const auto fine = van_loan_segment(op, 0.9, dxhat.data(), 64);
    double worst = 0.0;
    for (int i = 0; i < 3; ++i) {
      worst = std::max(worst, std::fabs(coarse[static_cast<std::size_t>(3 * 3 + i)] -
                                        fine[static_cast<std::size_t>(64 * 3 + i)]));
    }
    st.check("segment endpoint stable under subdivision", worst <= 1e-12,
             "residual " + fmt17(worst));
  }

  {  // flattened linear system agrees with the scan
    const auto path = random_time_augmented_path(rng, 1, 8, 1.0);
    const Operator op = make_operator(random_matrix(rng, 2, 0.6));
    const TruncatedTensor a = scan_ews(path, op, 3, 4096, g.threads);
    const TruncatedTensor b = lncde_solve(path, op, 3);
    const double scale = std::max(1.0, max_abs_coeff(b));
    double worst = 0.0;
    for (int k = 0; k <= 3; ++k) {
      const auto& la = a.levels[static_cast<std::size_t>(k)];
      const auto& lb = b.levels[static_cast<std::size_t>(k)];
      for (std::size_t i = 0; i < la.size(); ++i) {
        worst = std::max(worst, std::fabs(la[i] - lb[i]) / scale);
      }
    }
    st.check("flattened linear dynamics agree with scan", worst <= 1e-8,
             "residual " + fmt17(worst));
  }

  {  // determinism across thread counts and streaming
    const auto path = random_time_augmented_path(rng, 2, 40, 3.0);
    const Operator op = make_operator(random_matrix(rng, 3, 0.4));
    const TruncatedTensor one = scan_ews(path, op, 3, 16, 1);
    const TruncatedTensor four = scan_ews(path, op, 3, 16, 4);
    const auto stream = scan_ews_stream(path, op, 3, 16, 3);
    st.check("outputs independent of thread count", one == four);
    st.check("streaming scan ends at the one-shot value", stream.back() == one);
  }

  if (st.failures == 0) {
    std::printf("selftest: all checks passed\n");
    return 0;
  }
  std::printf("selftest: %d check(s) FAILED\n", st.failures);
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exponentially weighted signatures of piecewise-linear paths"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--threads", g.threads, "worker threads (0 = all cores)")
      ->capture_default_str();
  app.add_option("--kernels", g.kernels, "kernel variant: scalar, avx2 or auto")
      ->check(CLI::IsMember({"scalar", "avx2", "auto"}))
      ->capture_default_str();

  ComputeOpts co;
  auto* compute = app.add_subcommand("compute", "weighted signature of a CSV path");
  compute->add_option("--input", co.input, "path CSV (header t,x1,...,xd)")->required();
  compute->add_option("--depth", co.depth, "truncation depth")->required();
  compute->add_option("--operator", co.operator_file, "weighting operator JSON");
  compute->add_flag("--efm", co.efm, "require a diagonal (fading-memory) operator");
  compute->add_flag("--signature", co.signature, "use the zero operator (classical signature)");
  compute->add_flag("--stream", co.stream, "emit the running tensor at every knot");
  compute->add_option("--substeps", co.substeps, "per-segment subdivisions")
      ->capture_default_str();
  compute->add_option("--clock", co.clock, "clock channel (1 = time stamps column)")
      ->capture_default_str();
  compute->add_flag("--check-convergence", co.check_convergence,
                    "rerun with doubled subdivisions and report the deviation");
  compute->add_option("--out", co.out, "output tensor JSON")->required();

  DumpOpts ddo;
  auto* dump_deriv = app.add_subcommand("dump-derivation", "derivation block on one tensor level");
  dump_deriv->add_option("--dim", ddo.dim, "alphabet size w")->required();
  dump_deriv->add_option("--depth", ddo.depth, "tensor level k")->required();
  dump_deriv->add_option("--A", ddo.a_csv, "w*w operator entries, comma-separated row-major")
      ->required();
  dump_deriv->add_option("--out", ddo.out, "output JSON (stdout when omitted)");

  DumpOpts dlo;
  auto* dump_lncde = app.add_subcommand(
      "dump-lncde", "flattened linear-CDE matrices (derivation, raising and step maps)");
  dump_lncde->add_option("--dim", dlo.dim, "alphabet size w")->required();
  dump_lncde->add_option("--depth", dlo.depth, "truncation depth")->required();
  dump_lncde->add_option("--A", dlo.a_csv, "w*w operator entries, comma-separated row-major")
      ->required();
  dump_lncde->add_option("--clock", dlo.clock, "1-based clock letter")->capture_default_str();
  dump_lncde->add_option("--out", dlo.out, "output JSON (stdout when omitted)");

  ExperimentOpts eo;
  auto* experiment = app.add_subcommand("experiment", "regression studies with trained operators");
  experiment->add_option("mode", eo.mode, "expressivity or sde")
      ->required()
      ->check(CLI::IsMember({"expressivity", "sde"}));
  experiment->add_option("--config", eo.config_file, "experiment config JSON");
  experiment->add_option("--target", eo.target, "expressivity target: ews, efm or signature");
  experiment->add_option("--learner", eo.learner, "restrict to one learner: ews, efm or signature");
  experiment->add_option("--out", eo.out, "output report JSON")->required();

  DuffingOpts duo;
  auto* duffing = app.add_subcommand("duffing", "polynomial-exponential chain reconstruction");
  duffing->add_option("--input", duo.input, "trajectory CSV (header t,x)");
  duffing->add_flag("--demo", duo.demo, "use a built-in forced-oscillator trajectory");
  duffing->add_option("--lambda-x", duo.lambda, "chain decay rate (>= 0)")->capture_default_str();
  duffing->add_option("--K", duo.K, "chain depth")->capture_default_str();
  duffing->add_option("--t-end", duo.t_end, "demo horizon")->capture_default_str();
  duffing->add_option("--steps", duo.steps, "demo grid steps")->capture_default_str();
  duffing->add_option("--out", duo.out, "output chain CSV")->required();

  auto* selftest = app.add_subcommand("selftest", "run the built-in consistency checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const std::string cmdline = command_line(argc, argv);
  try {
    apply_kernel_choice(g.kernels);
    if (*compute) return run_compute(co, g, cmdline);
    if (*dump_deriv) return run_dump(ddo, /*full_system=*/false, cmdline);
    if (*dump_lncde) return run_dump(dlo, /*full_system=*/true, cmdline);
    if (*experiment) return run_experiment(eo, g, cmdline);
    if (*duffing) return run_duffing(duo, cmdline);
    if (*selftest) return run_selftest(g);
    throw usage_error("no subcommand selected");
  } catch (const usage_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
