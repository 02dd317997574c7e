#include <filesystem>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "ews/errors.hpp"
#include "ews/fmt.hpp"
#include "ews/jsonio.hpp"
#include "ews/manifest.hpp"
#include "test_util.hpp"

using namespace ews;
using nlohmann::json;

TEST_SUITE_BEGIN("jsonio");

TEST_CASE("seventeen-digit formatting round-trips doubles exactly") {
  testsupport::TestRng rng(41);
  for (int i = 0; i < 200; ++i) {
    const double v = std::ldexp(rng.normal(), rng.uniform_int(-40, 40));
    CHECK(std::stod(fmt17(v)) == v);
  }
  CHECK(fmt17(1.0) == "1");
  CHECK(fmt17(0.1) == "0.10000000000000001");
}

TEST_CASE("operator JSON round-trips") {
  Matrix a(2, 2, {0.5, -1.25, 0.0, 2.0});
  Matrix b(2, 3, {1, 0, 0, 0, 1, 0});
  const Operator op = make_operator(a, b);
  const std::string text = jsonio::operator_json(op);
  const Operator back = jsonio::parse_operator_json(text, "test");
  CHECK(back.A.data == op.A.data);
  CHECK(back.B.data == op.B.data);
  CHECK(back.b_identity == op.b_identity);
  CHECK(back.structure == op.structure);

  const Operator ident = make_operator(a);
  const Operator back2 = jsonio::parse_operator_json(jsonio::operator_json(ident), "test");
  CHECK(back2.b_identity);
  CHECK(back2.A.data == a.data);

  // Structure is recomputed when absent and validated when present.
  const std::string diag = R"({"A":{"rows":2,"cols":2,"data":[1,0,0,2]},"B":"identity"})";
  CHECK(jsonio::parse_operator_json(diag, "f").structure == OperatorStructure::diagonal);
  CHECK_THROWS(jsonio::parse_operator_json(
      R"({"A":{"rows":2,"cols":2,"data":[1,0.5,0,2]},"B":"identity","structure":"diagonal"})",
      "f"));
}

TEST_CASE("operator parser rejects malformed input") {
  CHECK_THROWS(jsonio::parse_operator_json("{", "f"));
  CHECK_THROWS(jsonio::parse_operator_json("[1,2]", "f"));
  CHECK_THROWS(jsonio::parse_operator_json(R"({"B":"identity"})", "f"));  // no A
  CHECK_THROWS(jsonio::parse_operator_json(
      R"({"A":{"rows":2,"cols":3,"data":[1,2,3,4,5,6]},"B":"identity"})", "f"));  // not square
  CHECK_THROWS(jsonio::parse_operator_json(
      R"({"A":{"rows":2,"cols":2,"data":[1,2,3]},"B":"identity"})", "f"));  // bad data size
  CHECK_THROWS(jsonio::parse_operator_json(
      R"({"A":{"rows":2,"cols":2,"data":[1,0,0,1]},"B":"identity","extra":1})", "f"));
  // Error names the offending source.
  try {
    jsonio::parse_operator_json("{", "ops/bad.json");
    FAIL("expected a parse error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("ops/bad.json") != std::string::npos);
  }
}

TEST_CASE("tensor JSON round-trips") {
  TruncatedTensor t = TruncatedTensor::unit(2, 3);
  testsupport::TestRng rng(43);
  for (auto& level : t.levels) {
    for (auto& v : level) v = rng.normal();
  }
  const std::string text = jsonio::tensor_json(t);
  const TruncatedTensor back = jsonio::parse_tensor_json(text, "t");
  REQUIRE(back.dim == 2);
  REQUIRE(back.depth == 3);
  CHECK(back == t);

  const json j = json::parse(text);
  CHECK(j.at("dim") == 2);
  CHECK(j.at("depth") == 3);
  REQUIRE(j.at("levels").size() == 4);
  CHECK(j.at("levels").at(0).size() == 1);
  CHECK(j.at("levels").at(3).size() == 8);

  CHECK_THROWS(jsonio::parse_tensor_json(R"({"dim":2,"depth":1,"levels":[[1],[1,2,3]]})", "t"));
  CHECK_THROWS(jsonio::parse_tensor_json(R"({"dim":2,"depth":1})", "t"));
}

TEST_CASE("tensor stream JSON lists one entry per knot") {
  std::vector<TruncatedTensor> ts = {TruncatedTensor::unit(2, 1), TruncatedTensor::unit(2, 1)};
  ts[1].levels[1] = {0.5, -0.5};
  const std::string text = jsonio::tensor_stream_json({0.0, 1.5}, ts);
  const json j = json::parse(text);
  CHECK(j.at("dim") == 2);
  CHECK(j.at("depth") == 1);
  REQUIRE(j.at("stream").size() == 2);
  CHECK(j.at("stream").at(1).at("clock") == 1.5);
  CHECK(j.at("stream").at(1).at("levels").at(1).at(0) == 0.5);
}

TEST_CASE("flattened-system JSON carries the exact matrices") {
  const Matrix a(2, 2, {0.3, -0.1, 0.2, 0.5});
  const LncdeSystem sys = build_lncde_matrices(a, 2, 1);
  const json j = json::parse(jsonio::lncde_json(a, sys));
  CHECK(j.at("dim") == 2);
  CHECK(j.at("depth") == 2);
  CHECK(j.at("clock") == 1);
  CHECK(j.at("flat_dim") == 7);
  REQUIRE(j.at("rho").size() == 2);
  REQUIRE(j.at("step").size() == 2);
  CHECK(j.at("derivation").at("rows") == 7);
  CHECK(j.at("derivation_blocks").size() == 2);
  CHECK(j.at("derivation_blocks").at(0).at("data").at(0) == 0.3);
  // rho(e1) puts a one where letter 1 is appended to the empty word.
  CHECK(j.at("rho").at(0).at("data").at(0 * 7 + 0) == 0.0);
  CHECK(j.at("rho").at(0).at("data").at(1 * 7 + 0) == 1.0);
}

TEST_CASE("normalization JSON") {
  NormalizationStats stats;
  stats.lo = {0.0, -1.5};
  stats.hi = {1.0, 2.5};
  const json j = json::parse(jsonio::normalization_json(stats));
  CHECK(j.at("min").at(1) == -1.5);
  CHECK(j.at("max").at(1) == 2.5);
}

TEST_CASE("experiment configs parse with defaults and reject junk") {
  const ExpressivityConfig def = jsonio::parse_expressivity_config("{}", "cfg");
  CHECK(def.trajectories == 100);
  CHECK(def.steps == 1000);
  CHECK(def.t_end == 5.0);
  CHECK(def.seeds == std::vector<std::uint64_t>{101, 202, 303});
  CHECK(def.targets.size() == 3);
  CHECK(def.learners.size() == 3);
  CHECK(def.train.depth == 2);
  CHECK(def.train.steps == 2000);

  const ExpressivityConfig small = jsonio::parse_expressivity_config(
      R"({"trajectories":20,"steps":50,"t_end":1.0,"seeds":[7],
          "targets":["ews"],"learners":["efm","signature"],
          "train":{"steps":10,"eval_every":5,"eval_stride":10,"batch":2}})",
      "cfg");
  CHECK(small.trajectories == 20);
  CHECK(small.seeds == std::vector<std::uint64_t>{7});
  REQUIRE(small.targets.size() == 1);
  CHECK(small.targets[0] == TargetKind::ews);
  REQUIRE(small.learners.size() == 2);
  CHECK(small.learners[0] == LearnerKind::diagonal);
  CHECK(small.learners[1] == LearnerKind::zero);
  CHECK(small.train.steps == 10);
  CHECK(small.train.depth == 2);  // untouched default

  CHECK_THROWS(jsonio::parse_expressivity_config(R"({"trajectoriez":20})", "cfg"));
  CHECK_THROWS(jsonio::parse_expressivity_config(R"({"trajectories":1})", "cfg"));
  CHECK_THROWS(jsonio::parse_expressivity_config(R"({"train":{"fd_step":0}})", "cfg"));
  CHECK_THROWS(jsonio::parse_expressivity_config(R"({"seeds":[]})", "cfg"));

  const SdeConfig sde = jsonio::parse_sde_config(R"({"t_end":2.0})", "cfg");
  CHECK(sde.t_end == 2.0);
  CHECK(sde.trajectories == 100);
  CHECK_THROWS(jsonio::parse_sde_config(R"({"targets":["ews"]})", "cfg"));

  // Round-trip through the writers.
  const ExpressivityConfig back =
      jsonio::parse_expressivity_config(jsonio::expressivity_config_json(small), "cfg");
  CHECK(back.trajectories == small.trajectories);
  CHECK(back.seeds == small.seeds);
  CHECK(back.train.steps == small.train.steps);
  const SdeConfig sback = jsonio::parse_sde_config(jsonio::sde_config_json(sde), "cfg");
  CHECK(sback.t_end == 2.0);
}

TEST_CASE("kind names map both ways") {
  CHECK(jsonio::parse_learner_kind("ews") == LearnerKind::full);
  CHECK(jsonio::parse_learner_kind("full") == LearnerKind::full);
  CHECK(jsonio::parse_learner_kind("efm") == LearnerKind::diagonal);
  CHECK(jsonio::parse_learner_kind("signature") == LearnerKind::zero);
  CHECK(jsonio::parse_learner_kind("sig") == LearnerKind::zero);
  CHECK_THROWS(jsonio::parse_learner_kind("what"));
  CHECK(jsonio::parse_target_kind("ews") == TargetKind::ews);
  CHECK(jsonio::parse_target_kind("efm") == TargetKind::efm);
  CHECK(jsonio::parse_target_kind("signature") == TargetKind::sig);
  CHECK_THROWS(jsonio::parse_target_kind("nope"));
  CHECK(std::string(jsonio::learner_label(LearnerKind::full)) == "ews");
  CHECK(std::string(jsonio::learner_label(LearnerKind::diagonal)) == "efm");
  CHECK(std::string(jsonio::learner_label(LearnerKind::zero)) == "signature");
}

namespace {

ExperimentGroup tiny_group() {
  ExperimentGroup g;
  g.label = "efm";
  g.seeds = {7};
  g.test_times = {{0.5, 1.0}};
  g.test_truth = {{0.25, 0.75}};
  LearnerResult lr;
  lr.kind = LearnerKind::diagonal;
  SeedRun run;
  run.seed = 7;
  run.out.a = Matrix(3, 3);
  run.out.params.kind = LearnerKind::diagonal;
  run.out.params.w = 3;
  run.out.train_rmse = 0.1;
  run.out.val_rmse = 0.2;
  run.out.test_rmse = 0.3;
  run.out.best_step = 50;
  run.out.spectrum = {{1.0, 0.0}, {0.5, 0.0}, {0.25, 0.0}};
  run.test_pred = {0.3, 0.7};
  lr.seeds.push_back(std::move(run));
  lr.mean_test_rmse = 0.3;
  g.learners.push_back(std::move(lr));
  return g;
}

}  // namespace

TEST_CASE("experiment report JSON shape") {
  ExperimentResult res;
  res.name = "expressivity";
  res.groups.push_back(tiny_group());
  const std::string text = jsonio::experiment_report_json(res, "{\"x\":1}");
  const json j = json::parse(text);
  CHECK(j.at("experiment") == "expressivity");
  CHECK(j.at("config").at("x") == 1);
  REQUIRE(j.at("groups").size() == 1);
  const json& g = j.at("groups").at(0);
  CHECK(g.at("label") == "efm");
  CHECK(g.at("seeds").at(0) == 7);
  REQUIRE(g.at("learners").size() == 1);
  const json& lr = g.at("learners").at(0);
  CHECK(lr.at("kind") == "efm");
  CHECK(lr.at("mean_test_rmse") == 0.3);
  const json& run = lr.at("runs").at(0);
  CHECK(run.at("seed") == 7);
  CHECK(run.at("test_rmse") == 0.3);
  CHECK(run.at("best_step") == 50);
  CHECK(run.at("diverged") == false);
  CHECK(run.at("operator").at("rows") == 3);
  CHECK(run.at("spectrum").at(0).at("re") == 1.0);
  CHECK(run.at("spectrum").at(0).at("im") == 0.0);
}

TEST_CASE("prediction CSV places learners in fixed columns") {
  const ExperimentGroup g = tiny_group();
  const std::string csv = jsonio::predictions_csv(g);
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos < csv.size()) {
    const std::size_t nl = csv.find('\n', pos);
    lines.push_back(csv.substr(pos, nl - pos));
    pos = (nl == std::string::npos) ? csv.size() : nl + 1;
  }
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "seed,t,truth,pred_ews,pred_efm,pred_sig");
  // Only the diagonal learner is present: pred_ews and pred_sig stay empty.
  CHECK(lines[1] == "7,0.5,0.25,,0.29999999999999999,");
  CHECK(lines[2] == "7,1,0.75,,0.69999999999999996,");
}

TEST_CASE("chain reconstruction CSV") {
  DuffingReconstruction rec;
  rec.K = 1;
  rec.times = {0.0, 1.0};
  rec.coords = {0.0, 0.0, 0.5, 0.25};
  rec.approx = {0.0, 0.5};
  rec.truth = {0.0, 0.55};
  rec.bound = {0.0, 0.1};
  const std::string csv = jsonio::duffing_chain_csv(rec);
  CHECK(csv.find("t,S0,S1,approx,truth,bound\n") == 0);
  CHECK(csv.find("1,0.5,0.25,0.5,0.55000000000000004,0.10000000000000001\n") != std::string::npos);
}

TEST_SUITE_END();

TEST_SUITE_BEGIN("manifest");

TEST_CASE("sha256 matches published vectors") {
  CHECK(manifest::sha256_hex(std::string("")) ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(manifest::sha256_hex(std::string("abc")) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(manifest::sha256_hex(std::string("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq")) ==
        "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
  // Block-boundary padding: 55, 56 and 64 byte messages.
  CHECK(manifest::sha256_hex(std::string(55, 'a')) ==
        manifest::sha256_hex(std::string(55, 'a')));
  CHECK(manifest::sha256_hex(std::string(1000000, 'a')) ==
        "cdc76e5c9914fb9281a1c7e284d73e67f1809a48a497200e046d39ccc7112cd0");
}

TEST_CASE("json escaping") {
  CHECK(manifest::json_escape("plain") == "plain");
  CHECK(manifest::json_escape("a\"b\\c") == "a\\\"b\\\\c");
  CHECK(manifest::json_escape("line\nbreak\ttab") == "line\\nbreak\\ttab");
  CHECK(manifest::json_escape(std::string(1, '\x01')) == "\\u0001");
}

TEST_CASE("run manifests record outputs and seeds") {
  const std::string text = manifest::run_manifest_json(
      "ews compute --input a.csv", "{\"depth\":2}", {101, 202}, 1.25,
      {{"out.json", manifest::sha256_hex(std::string("abc"))}});
  const nlohmann::json j = nlohmann::json::parse(text);
  CHECK(j.at("command") == "ews compute --input a.csv");
  CHECK(j.at("tool_version") == "ews 0.1.0");
  CHECK(j.at("config").at("depth") == 2);
  CHECK(j.at("seeds").at(1) == 202);
  CHECK(j.at("wall_clock_seconds") == 1.25);
  REQUIRE(j.at("outputs").size() == 1);
  CHECK(j.at("outputs").at(0).at("path") == "out.json");
  CHECK(j.at("outputs").at(0).at("sha256") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");

  const std::string bare = manifest::run_manifest_json("ews selftest", "null", {}, 0.5, {});
  const nlohmann::json jb = nlohmann::json::parse(bare);
  CHECK(jb.at("config").is_null());
  CHECK(jb.at("seeds").empty());
  CHECK(jb.at("outputs").empty());
}

TEST_CASE("whole-file helpers") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "ews_manifest_test";
  fs::create_directories(dir);
  const fs::path f = dir / "data.txt";
  manifest::write_text_file(f.string(), "hello\nworld\n");
  CHECK(manifest::read_text_file(f.string()) == "hello\nworld\n");
  CHECK_THROWS(manifest::read_text_file((dir / "missing.txt").string()));
  fs::remove_all(dir);
}

TEST_SUITE_END();
