#include "ews/jsonio.hpp"

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include <json.hpp>

#include "ews/errors.hpp"
#include "ews/fmt.hpp"
#include "ews/version.hpp"

namespace ews::jsonio {

namespace {

using nlohmann::json;

// Doubles print with 17 significant digits; non-finite values (possible in
// diagnostics of a diverged run) become null so reports always parse.
std::string num(double v) { return std::isfinite(v) ? fmt17(v) : std::string("null"); }

void append_doubles(std::string& out, const std::vector<double>& v) {
  out += '[';
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += num(v[i]);
  }
  out += ']';
}

void append_matrix(std::string& out, const Matrix& m) {
  out += "{\"rows\":" + std::to_string(m.rows) + ",\"cols\":" + std::to_string(m.cols) +
         ",\"data\":";
  append_doubles(out, m.data);
  out += '}';
}

void append_tensor_levels(std::string& out, const TruncatedTensor& t) {
  out += "\"levels\":[";
  for (int k = 0; k <= t.depth; ++k) {
    if (k) out += ',';
    append_doubles(out, t.levels[static_cast<std::size_t>(k)]);
  }
  out += ']';
}

// --- strict parsing helpers ----------------------------------------------

void check_keys(const json& obj, const std::string& what,
                std::initializer_list<const char*> allowed) {
  require(obj.is_object(), what + ": expected a JSON object");
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        ok = true;
        break;
      }
    }
    require(ok, what + ": unknown key \"" + item.key() + "\"");
  }
}

double get_num(const json& obj, const std::string& what, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  require(v.is_number(), what + ": \"" + key + "\" must be a number");
  return v.get<double>();
}

int get_int(const json& obj, const std::string& what, const char* key, int fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  require(v.is_number_integer(), what + ": \"" + key + "\" must be an integer");
  return v.get<int>();
}

std::vector<double> get_double_array(const json& v, const std::string& what, const char* key) {
  require(v.is_array(), what + ": \"" + std::string(key) + "\" must be an array");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& e : v) {
    require(e.is_number(), what + ": \"" + std::string(key) + "\" must contain numbers only");
    out.push_back(e.get<double>());
  }
  return out;
}

Matrix parse_matrix(const json& v, const std::string& what, const char* key) {
  const std::string ctx = what + ": \"" + key + "\"";
  check_keys(v, ctx, {"rows", "cols", "data"});
  require(v.contains("rows") && v.contains("cols") && v.contains("data"),
          ctx + " needs rows, cols and data");
  const int rows = get_int(v, ctx, "rows", -1);
  const int cols = get_int(v, ctx, "cols", -1);
  require(rows >= 1 && cols >= 1, ctx + ": rows and cols must be positive");
  std::vector<double> data = get_double_array(v.at("data"), ctx, "data");
  require(data.size() == static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols),
          ctx + ": data length must equal rows*cols");
  return Matrix(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols), std::move(data));
}

json parse_text(const std::string& text, const std::string& what) {
  json root = json::parse(text, nullptr, /*allow_exceptions=*/false);
  require(!root.is_discarded(), what + ": invalid JSON");
  return root;
}

TrainConfig parse_train_config(const json& v, const std::string& what) {
  const std::string ctx = what + ": \"train\"";
  check_keys(v, ctx,
             {"depth", "m_train", "m_target", "steps", "batch", "base_lr", "warmup_frac",
              "fd_step", "ridge", "eval_every", "eval_stride", "init_scale",
              "divergence_factor"});
  TrainConfig cfg;
  cfg.depth = get_int(v, ctx, "depth", cfg.depth);
  cfg.m_train = get_int(v, ctx, "m_train", cfg.m_train);
  cfg.m_target = get_int(v, ctx, "m_target", cfg.m_target);
  cfg.steps = get_int(v, ctx, "steps", cfg.steps);
  cfg.batch = get_int(v, ctx, "batch", cfg.batch);
  cfg.base_lr = get_num(v, ctx, "base_lr", cfg.base_lr);
  cfg.warmup_frac = get_num(v, ctx, "warmup_frac", cfg.warmup_frac);
  cfg.fd_step = get_num(v, ctx, "fd_step", cfg.fd_step);
  cfg.ridge = get_num(v, ctx, "ridge", cfg.ridge);
  cfg.eval_every = get_int(v, ctx, "eval_every", cfg.eval_every);
  cfg.eval_stride = get_int(v, ctx, "eval_stride", cfg.eval_stride);
  cfg.init_scale = get_num(v, ctx, "init_scale", cfg.init_scale);
  cfg.divergence_factor = get_num(v, ctx, "divergence_factor", cfg.divergence_factor);
  require(cfg.depth >= 1 && cfg.m_train >= 1 && cfg.m_target >= 1, ctx + ": depths/subdivisions must be >= 1");
  require(cfg.steps >= 1 && cfg.batch >= 1 && cfg.eval_every >= 1 && cfg.eval_stride >= 1,
          ctx + ": counts must be >= 1");
  require(cfg.fd_step > 0.0 && cfg.ridge >= 0.0 && cfg.base_lr > 0.0, ctx + ": bad step sizes");
  return cfg;
}

std::vector<std::uint64_t> parse_seeds(const json& obj, const std::string& what,
                                       std::vector<std::uint64_t> fallback) {
  if (!obj.contains("seeds")) return fallback;
  const json& v = obj.at("seeds");
  require(v.is_array() && !v.empty(), what + ": \"seeds\" must be a non-empty array");
  std::vector<std::uint64_t> out;
  for (const auto& e : v) {
    require(e.is_number_unsigned() || (e.is_number_integer() && e.get<std::int64_t>() >= 0),
            what + ": seeds must be non-negative integers");
    out.push_back(e.get<std::uint64_t>());
  }
  return out;
}

void append_train_config(std::string& out, const TrainConfig& c) {
  out += "{\"depth\":" + std::to_string(c.depth);
  out += ",\"m_train\":" + std::to_string(c.m_train);
  out += ",\"m_target\":" + std::to_string(c.m_target);
  out += ",\"steps\":" + std::to_string(c.steps);
  out += ",\"batch\":" + std::to_string(c.batch);
  out += ",\"base_lr\":" + num(c.base_lr);
  out += ",\"warmup_frac\":" + num(c.warmup_frac);
  out += ",\"fd_step\":" + num(c.fd_step);
  out += ",\"ridge\":" + num(c.ridge);
  out += ",\"eval_every\":" + std::to_string(c.eval_every);
  out += ",\"eval_stride\":" + std::to_string(c.eval_stride);
  out += ",\"init_scale\":" + num(c.init_scale);
  out += ",\"divergence_factor\":" + num(c.divergence_factor);
  out += '}';
}

void append_seeds(std::string& out, const std::vector<std::uint64_t>& seeds) {
  out += "\"seeds\":[";
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(seeds[i]);
  }
  out += ']';
}

const char* target_label(TargetKind k) {
  switch (k) {
    case TargetKind::ews: return "ews";
    case TargetKind::efm: return "efm";
    case TargetKind::sig: return "signature";
  }
  return "signature";
}

}  // namespace

std::string matrix_json(const Matrix& m) {
  std::string out;
  append_matrix(out, m);
  return out;
}

std::string operator_json(const Operator& op) {
  std::string out = "{\"A\":";
  append_matrix(out, op.A);
  out += ",\"B\":";
  if (op.b_identity) {
    out += "\"identity\"";
  } else {
    append_matrix(out, op.B);
  }
  out += ",\"structure\":\"";
  out += structure_name(op.structure);
  out += "\"}";
  return out;
}

std::string tensor_json(const TruncatedTensor& t) {
  std::string out = "{\"dim\":" + std::to_string(t.dim) + ",\"depth\":" + std::to_string(t.depth) +
                    ",";
  append_tensor_levels(out, t);
  out += '}';
  return out;
}

std::string tensor_stream_json(const std::vector<double>& clocks,
                               const std::vector<TruncatedTensor>& tensors) {
  require(clocks.size() == tensors.size(), "tensor stream: clock/tensor count mismatch");
  require(!tensors.empty(), "tensor stream: empty");
  std::string out = "{\"dim\":" + std::to_string(tensors[0].dim) +
                    ",\"depth\":" + std::to_string(tensors[0].depth) + ",\"stream\":[";
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    if (i) out += ',';
    out += "{\"clock\":" + num(clocks[i]) + ",";
    append_tensor_levels(out, tensors[i]);
    out += '}';
  }
  out += "]}";
  return out;
}

std::string normalization_json(const NormalizationStats& stats) {
  std::string out = "{\"min\":";
  append_doubles(out, stats.lo);
  out += ",\"max\":";
  append_doubles(out, stats.hi);
  out += '}';
  return out;
}

std::string lncde_json(const Matrix& a, const LncdeSystem& sys) {
  std::string out = "{\"dim\":" + std::to_string(sys.w) + ",\"depth\":" + std::to_string(sys.depth) +
                    ",\"clock\":" + std::to_string(sys.clock_letter) +
                    ",\"flat_dim\":" + std::to_string(sys.D) + ",\"derivation_blocks\":[";
  for (int k = 1; k <= sys.depth; ++k) {
    if (k > 1) out += ',';
    append_matrix(out, derivation_block(a, k));
  }
  out += "],\"derivation\":";
  append_matrix(out, sys.L);
  out += ",\"rho\":[";
  for (std::size_t i = 0; i < sys.rho.size(); ++i) {
    if (i) out += ',';
    append_matrix(out, sys.rho[i]);
  }
  out += "],\"step\":[";
  for (std::size_t i = 0; i < sys.step.size(); ++i) {
    if (i) out += ',';
    append_matrix(out, sys.step[i]);
  }
  out += "]}";
  return out;
}

std::string expressivity_config_json(const ExpressivityConfig& cfg) {
  std::string out = "{\"trajectories\":" + std::to_string(cfg.trajectories) +
                    ",\"steps\":" + std::to_string(cfg.steps) + ",\"t_end\":" + num(cfg.t_end) + ",";
  append_seeds(out, cfg.seeds);
  out += ",\"targets\":[";
  for (std::size_t i = 0; i < cfg.targets.size(); ++i) {
    if (i) out += ',';
    out += '"';
    out += target_label(cfg.targets[i]);
    out += '"';
  }
  out += "],\"learners\":[";
  for (std::size_t i = 0; i < cfg.learners.size(); ++i) {
    if (i) out += ',';
    out += '"';
    out += learner_label(cfg.learners[i]);
    out += '"';
  }
  out += "],\"train\":";
  append_train_config(out, cfg.train);
  out += '}';
  return out;
}

std::string sde_config_json(const SdeConfig& cfg) {
  std::string out = "{\"trajectories\":" + std::to_string(cfg.trajectories) +
                    ",\"steps\":" + std::to_string(cfg.steps) + ",\"t_end\":" + num(cfg.t_end) + ",";
  append_seeds(out, cfg.seeds);
  out += ",\"learners\":[";
  for (std::size_t i = 0; i < cfg.learners.size(); ++i) {
    if (i) out += ',';
    out += '"';
    out += learner_label(cfg.learners[i]);
    out += '"';
  }
  out += "],\"train\":";
  append_train_config(out, cfg.train);
  out += '}';
  return out;
}

std::string experiment_report_json(const ExperimentResult& res, const std::string& config_json) {
  std::string out = "{\"experiment\":\"" + res.name + "\",\"tool_version\":\"" +
                    std::string(kToolVersion) + "\",\"config\":" + config_json + ",\"groups\":[";
  for (std::size_t gi = 0; gi < res.groups.size(); ++gi) {
    const ExperimentGroup& g = res.groups[gi];
    if (gi) out += ',';
    out += "{\"label\":\"" + g.label + "\",";
    append_seeds(out, g.seeds);
    out += ",\"learners\":[";
    for (std::size_t li = 0; li < g.learners.size(); ++li) {
      const LearnerResult& lr = g.learners[li];
      if (li) out += ',';
      out += "{\"kind\":\"";
      out += learner_label(lr.kind);
      out += "\",\"mean_test_rmse\":" + num(lr.mean_test_rmse) + ",\"runs\":[";
      for (std::size_t si = 0; si < lr.seeds.size(); ++si) {
        const SeedRun& run = lr.seeds[si];
        if (si) out += ',';
        out += "{\"seed\":" + std::to_string(run.seed);
        out += ",\"train_rmse\":" + num(run.out.train_rmse);
        out += ",\"val_rmse\":" + num(run.out.val_rmse);
        out += ",\"test_rmse\":" + num(run.out.test_rmse);
        out += ",\"best_step\":" + std::to_string(run.out.best_step);
        out += ",\"diverged\":";
        out += run.out.diverged ? "true" : "false";
        out += ",\"operator\":";
        append_matrix(out, run.out.a);
        out += ",\"spectrum\":[";
        for (std::size_t ei = 0; ei < run.out.spectrum.size(); ++ei) {
          if (ei) out += ',';
          out += "{\"re\":" + num(run.out.spectrum[ei].real()) +
                 ",\"im\":" + num(run.out.spectrum[ei].imag()) + '}';
        }
        out += "]}";
      }
      out += "]}";
    }
    out += "]}";
  }
  out += "]}";
  return out;
}

std::string predictions_csv(const ExperimentGroup& group) {
  std::string out = "seed,t,truth,pred_ews,pred_efm,pred_sig\n";
  const LearnerResult* byCol[3] = {nullptr, nullptr, nullptr};
  for (const auto& lr : group.learners) {
    switch (lr.kind) {
      case LearnerKind::full: byCol[0] = &lr; break;
      case LearnerKind::diagonal: byCol[1] = &lr; break;
      case LearnerKind::zero: byCol[2] = &lr; break;
    }
  }
  for (std::size_t si = 0; si < group.seeds.size(); ++si) {
    const auto& times = group.test_times[si];
    const auto& truth = group.test_truth[si];
    for (std::size_t r = 0; r < times.size(); ++r) {
      out += std::to_string(group.seeds[si]);
      out += ',' + fmt17(times[r]) + ',' + fmt17(truth[r]);
      for (const LearnerResult* lr : byCol) {
        out += ',';
        if (lr != nullptr) out += fmt17(lr->seeds[si].test_pred[r]);
      }
      out += '\n';
    }
  }
  return out;
}

std::string duffing_chain_csv(const DuffingReconstruction& rec) {
  std::string out = "t";
  for (int m = 0; m <= rec.K; ++m) out += ",S" + std::to_string(m);
  out += ",approx,truth,bound\n";
  const std::size_t width = static_cast<std::size_t>(rec.K) + 1;
  for (std::size_t i = 0; i < rec.times.size(); ++i) {
    out += fmt17(rec.times[i]);
    for (std::size_t m = 0; m < width; ++m) out += ',' + fmt17(rec.coords[i * width + m]);
    out += ',' + fmt17(rec.approx[i]) + ',' + fmt17(rec.truth[i]) + ',' + fmt17(rec.bound[i]);
    out += '\n';
  }
  return out;
}

Operator parse_operator_json(const std::string& text, const std::string& what) {
  const json root = parse_text(text, what);
  check_keys(root, what, {"A", "B", "structure"});
  require(root.contains("A"), what + ": missing \"A\"");
  Matrix a = parse_matrix(root.at("A"), what, "A");
  require(a.square(), what + ": \"A\" must be square");

  Operator op;
  op.A = std::move(a);
  op.b_identity = true;
  if (root.contains("B") && !(root.at("B").is_string() && root.at("B") == "identity")) {
    op.B = parse_matrix(root.at("B"), what, "B");
    op.b_identity = false;
    require(op.B.rows == op.A.rows, what + ": \"B\" must have as many rows as \"A\"");
  }
  if (root.contains("structure")) {
    const json& s = root.at("structure");
    require(s.is_string(), what + ": \"structure\" must be a string");
    op.structure = structure_from_name(s.get<std::string>());
    op.validate();
  } else {
    op.structure = infer_structure(op.A);
  }
  require(op.A.finite() && (op.b_identity || op.B.finite()), what + ": entries must be finite");
  return op;
}

TruncatedTensor parse_tensor_json(const std::string& text, const std::string& what) {
  const json root = parse_text(text, what);
  check_keys(root, what, {"dim", "depth", "levels"});
  const int dim = get_int(root, what, "dim", -1);
  const int depth = get_int(root, what, "depth", -1);
  require(dim >= 1 && depth >= 0, what + ": dim must be >= 1 and depth >= 0");
  require(root.contains("levels") && root.at("levels").is_array(),
          what + ": \"levels\" must be an array");
  const json& levels = root.at("levels");
  require(levels.size() == static_cast<std::size_t>(depth) + 1,
          what + ": expected depth+1 level arrays");
  TruncatedTensor t(dim, depth);
  for (int k = 0; k <= depth; ++k) {
    auto lv = get_double_array(levels[static_cast<std::size_t>(k)], what, "levels");
    require(lv.size() == t.levels[static_cast<std::size_t>(k)].size(),
            what + ": level " + std::to_string(k) + " has the wrong length");
    t.levels[static_cast<std::size_t>(k)] = std::move(lv);
  }
  return t;
}

ExpressivityConfig parse_expressivity_config(const std::string& text, const std::string& what) {
  const json root = parse_text(text, what);
  check_keys(root, what, {"trajectories", "steps", "t_end", "seeds", "targets", "learners", "train"});
  ExpressivityConfig cfg;
  cfg.trajectories = get_int(root, what, "trajectories", cfg.trajectories);
  cfg.steps = get_int(root, what, "steps", cfg.steps);
  cfg.t_end = get_num(root, what, "t_end", cfg.t_end);
  cfg.seeds = parse_seeds(root, what, cfg.seeds);
  if (root.contains("targets")) {
    const json& v = root.at("targets");
    require(v.is_array() && !v.empty(), what + ": \"targets\" must be a non-empty array");
    cfg.targets.clear();
    for (const auto& e : v) {
      require(e.is_string(), what + ": targets must be strings");
      cfg.targets.push_back(parse_target_kind(e.get<std::string>()));
    }
  }
  if (root.contains("learners")) {
    const json& v = root.at("learners");
    require(v.is_array() && !v.empty(), what + ": \"learners\" must be a non-empty array");
    cfg.learners.clear();
    for (const auto& e : v) {
      require(e.is_string(), what + ": learners must be strings");
      cfg.learners.push_back(parse_learner_kind(e.get<std::string>()));
    }
  }
  if (root.contains("train")) cfg.train = parse_train_config(root.at("train"), what);
  require(cfg.trajectories >= 3, what + ": need at least 3 trajectories to split");
  require(cfg.steps >= 1 && cfg.t_end > 0.0, what + ": steps and t_end must be positive");
  return cfg;
}

SdeConfig parse_sde_config(const std::string& text, const std::string& what) {
  const json root = parse_text(text, what);
  check_keys(root, what, {"trajectories", "steps", "t_end", "seeds", "learners", "train"});
  SdeConfig cfg;
  cfg.trajectories = get_int(root, what, "trajectories", cfg.trajectories);
  cfg.steps = get_int(root, what, "steps", cfg.steps);
  cfg.t_end = get_num(root, what, "t_end", cfg.t_end);
  cfg.seeds = parse_seeds(root, what, cfg.seeds);
  if (root.contains("learners")) {
    const json& v = root.at("learners");
    require(v.is_array() && !v.empty(), what + ": \"learners\" must be a non-empty array");
    cfg.learners.clear();
    for (const auto& e : v) {
      require(e.is_string(), what + ": learners must be strings");
      cfg.learners.push_back(parse_learner_kind(e.get<std::string>()));
    }
  }
  if (root.contains("train")) cfg.train = parse_train_config(root.at("train"), what);
  require(cfg.trajectories >= 3, what + ": need at least 3 trajectories to split");
  require(cfg.steps >= 1 && cfg.t_end > 0.0, what + ": steps and t_end must be positive");
  return cfg;
}

LearnerKind parse_learner_kind(const std::string& s) {
  if (s == "ews" || s == "full") return LearnerKind::full;
  if (s == "efm" || s == "diagonal") return LearnerKind::diagonal;
  if (s == "signature" || s == "sig" || s == "zero") return LearnerKind::zero;
  throw usage_error("unknown learner \"" + s + "\" (expected ews, efm or signature)");
}

TargetKind parse_target_kind(const std::string& s) {
  if (s == "ews") return TargetKind::ews;
  if (s == "efm") return TargetKind::efm;
  if (s == "signature" || s == "sig") return TargetKind::sig;
  throw usage_error("unknown target \"" + s + "\" (expected ews, efm or signature)");
}

const char* learner_label(LearnerKind k) {
  switch (k) {
    case LearnerKind::full: return "ews";
    case LearnerKind::diagonal: return "efm";
    case LearnerKind::zero: return "signature";
  }
  return "signature";
}

}  // namespace ews::jsonio
