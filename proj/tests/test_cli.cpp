// End-to-end tests driving the installed binary. The test runner passes the
// binary's location through the EWS_TOOL environment variable; every case
// degrades to a skip when it is unset so the suite can run standalone.
#include <cstdlib>
#include <filesystem>
#include <string>

#include <sys/wait.h>

#include <doctest.h>
#include <json.hpp>

#include "ews/manifest.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
  int code = -1;
  std::string out;  // stdout + stderr, merged
};

const char* tool_path() { return std::getenv("EWS_TOOL"); }

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "ews_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

RunResult run_tool(const std::string& args, const fs::path& dir) {
  const fs::path capture = dir / "capture.txt";
  const std::string cmd =
      std::string("\"") + tool_path() + "\" " + args + " >" + capture.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  RunResult r;
  REQUIRE(status != -1);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = ews::manifest::read_text_file(capture.string());
  return r;
}

void write_file(const fs::path& p, const std::string& content) {
  ews::manifest::write_text_file(p.string(), content);
}

constexpr const char* kTwoKnotCsv = "t,x1,x2\n0,0,0\n1,0.5,-0.25\n";

#define REQUIRE_TOOL()                                   \
  do {                                                   \
    if (tool_path() == nullptr) {                        \
      MESSAGE("EWS_TOOL not set; skipping binary test"); \
      return;                                            \
    }                                                    \
  } while (0)

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("version flag") {
  REQUIRE_TOOL();
  const auto dir = fresh_dir("version");
  const RunResult r = run_tool("--version", dir);
  CHECK(r.code == 0);
  CHECK(r.out.find("ews 0.1.0") != std::string::npos);
}

TEST_CASE("classical signature of a straight segment") {
  REQUIRE_TOOL();
  const auto dir = fresh_dir("compute_sig");
  write_file(dir / "path.csv", kTwoKnotCsv);
  const fs::path out = dir / "tensor.json";
  const RunResult r = run_tool("compute --input " + (dir / "path.csv").string() +
                                   " --depth 2 --signature --out " + out.string(),
                               dir);
  REQUIRE(r.code == 0);

  const json t = json::parse(ews::manifest::read_text_file(out.string()));
  CHECK(t.at("dim") == 3);
  CHECK(t.at("depth") == 2);
  // exp of the increment (1, 0.5, -0.25): level 1 is the increment itself,
  // level 2 its half outer square.
  const double dx[3] = {1.0, 0.5, -0.25};
  for (int i = 0; i < 3; ++i) {
    CHECK(double(t.at("levels").at(1).at(i)) == doctest::Approx(dx[i]).epsilon(1e-12));
    for (int j = 0; j < 3; ++j) {
      CHECK(double(t.at("levels").at(2).at(3 * i + j)) ==
            doctest::Approx(dx[i] * dx[j] / 2.0).epsilon(1e-12));
    }
  }

  // The manifest sits next to the output and hashes it faithfully.
  const json m = json::parse(ews::manifest::read_text_file(out.string() + ".manifest.json"));
  REQUIRE(m.at("outputs").size() == 1);
  CHECK(m.at("outputs").at(0).at("path") == out.string());
  CHECK(m.at("outputs").at(0).at("sha256") ==
        ews::manifest::sha256_hex(ews::manifest::read_text_file(out.string())));
  CHECK(m.at("config").at("depth") == 2);
  CHECK(m.at("command").is_string());
}

TEST_CASE("streaming emission and convergence report") {
  REQUIRE_TOOL();
  const auto dir = fresh_dir("compute_stream");
  write_file(dir / "path.csv", "t,x1\n0,0\n0.5,1\n1,0.25\n");
  const fs::path out = dir / "stream.json";
  const RunResult r =
      run_tool("compute --input " + (dir / "path.csv").string() +
                   " --depth 2 --signature --stream --check-convergence --out " + out.string(),
               dir);
  REQUIRE(r.code == 0);
  CHECK(r.out.find("convergence: max scaled deviation") != std::string::npos);
  const json s = json::parse(ews::manifest::read_text_file(out.string()));
  REQUIRE(s.at("stream").size() == 3);
  CHECK(s.at("stream").at(0).at("clock") == 0.0);
  CHECK(double(s.at("stream").at(0).at("levels").at(1).at(0)) == 0.0);  // unit tensor
  CHECK(s.at("stream").at(2).at("clock") == 1.0);
}

TEST_CASE("weighting operator file with the fading-memory guard") {
  REQUIRE_TOOL();
  const auto dir = fresh_dir("compute_efm");
  write_file(dir / "path.csv", kTwoKnotCsv);
  write_file(dir / "diag.json",
             R"({"A":{"rows":3,"cols":3,"data":[0.5,0,0,0,0.25,0,0,0,1.0]},"B":"identity"})");
  write_file(dir / "dense.json",
             R"({"A":{"rows":3,"cols":3,"data":[0.5,1,0,0,0.25,0,0,0,1.0]},"B":"identity"})");

  const RunResult ok = run_tool("compute --input " + (dir / "path.csv").string() +
                                    " --depth 2 --efm --operator " + (dir / "diag.json").string() +
                                    " --out " + (dir / "a.json").string(),
                                dir);
  CHECK(ok.code == 0);

  const RunResult bad = run_tool("compute --input " + (dir / "path.csv").string() +
                                     " --depth 2 --efm --operator " + (dir / "dense.json").string() +
                                     " --out " + (dir / "b.json").string(),
                                 dir);
  CHECK(bad.code == 1);
  CHECK(bad.out.find("diagonal") != std::string::npos);
}

TEST_CASE("matrix dumps print to stdout") {
  REQUIRE_TOOL();
  const auto dir = fresh_dir("dumps");
  const RunResult sys = run_tool("dump-lncde --dim 2 --depth 2 --A 0.3,-0.1,0.2,0.5", dir);
  REQUIRE(sys.code == 0);
  const json j = json::parse(sys.out);
  CHECK(j.at("flat_dim") == 7);
  CHECK(j.at("derivation").at("rows") == 7);
  REQUIRE(j.at("rho").size() == 2);

  const RunResult blk = run_tool("dump-derivation --dim 2 --depth 2 --A 1,0,0,2", dir);
  REQUIRE(blk.code == 0);
  const json b = json::parse(blk.out);
  CHECK(b.at("rows") == 4);
  CHECK(b.at("data").at(0) == 2.0);  // 2a for a diagonal (1,2) operator
}

TEST_CASE("exit codes distinguish usage from computation failures") {
  REQUIRE_TOOL();
  const auto dir = fresh_dir("exit_codes");
  write_file(dir / "path.csv", kTwoKnotCsv);

  CHECK(run_tool("compute --bogus-flag", dir).code == 2);   // unknown option
  CHECK(run_tool("", dir).code == 2);                       // missing subcommand
  CHECK(run_tool("compute --input " + (dir / "path.csv").string() +
                     " --depth 2 --signature --efm --out " + (dir / "x.json").string(),
                 dir)
            .code == 2);  // contradictory flags
  CHECK(run_tool("compute --input " + (dir / "nope.csv").string() +
                     " --depth 2 --signature --out " + (dir / "x.json").string(),
                 dir)
            .code == 1);  // missing data file
  write_file(dir / "bad.csv", "t,x1\n0,0\n1\n");  // short row
  const RunResult bad_csv = run_tool(
      "compute --input " + (dir / "bad.csv").string() + " --depth 2 --signature --out " +
          (dir / "x.json").string(),
      dir);
  CHECK(bad_csv.code == 1);
  CHECK(bad_csv.out.find("bad.csv:row 3") != std::string::npos);
}

TEST_CASE("experiment run produces report, predictions and manifest") {
  REQUIRE_TOOL();
  const auto dir = fresh_dir("experiment");
  write_file(dir / "cfg.json",
             R"({"trajectories":10,"steps":30,"t_end":1.0,"seeds":[5],
                 "targets":["efm"],"learners":["signature"],
                 "train":{"steps":2,"eval_every":1,"eval_stride":10,
                          "m_target":4,"m_train":2,"batch":2}})");
  const fs::path out = dir / "report.json";
  const RunResult r = run_tool("experiment expressivity --config " + (dir / "cfg.json").string() +
                                   " --out " + out.string(),
                               dir);
  REQUIRE(r.code == 0);

  const json rep = json::parse(ews::manifest::read_text_file(out.string()));
  CHECK(rep.at("experiment") == "expressivity");
  CHECK(rep.at("config").at("trajectories") == 10);
  REQUIRE(rep.at("groups").size() == 1);
  CHECK(rep.at("groups").at(0).at("label") == "efm");
  REQUIRE(rep.at("groups").at(0).at("learners").size() == 1);
  const json& lr = rep.at("groups").at(0).at("learners").at(0);
  CHECK(lr.at("kind") == "signature");
  CHECK(lr.at("runs").at(0).at("seed") == 5);
  CHECK(lr.at("runs").at(0).at("diverged") == false);

  const std::string csv =
      ews::manifest::read_text_file((dir / "report.efm.predictions.csv").string());
  CHECK(csv.rfind("seed,t,truth,pred_ews,pred_efm,pred_sig\n", 0) == 0);
  CHECK(csv.find("\n5,") != std::string::npos);

  const json m = json::parse(ews::manifest::read_text_file(out.string() + ".manifest.json"));
  REQUIRE(m.at("outputs").size() == 2);
  CHECK(m.at("seeds").at(0) == 5);
  CHECK(m.at("config").at("train").at("steps") == 2);
}

TEST_CASE("chain reconstruction demo") {
  REQUIRE_TOOL();
  const auto dir = fresh_dir("duffing");
  const fs::path out = dir / "chain.csv";
  const RunResult r = run_tool(
      "duffing --demo --lambda-x 0.5 --K 2 --t-end 2 --steps 100 --out " + out.string(), dir);
  REQUIRE(r.code == 0);
  const std::string csv = ews::manifest::read_text_file(out.string());
  CHECK(csv.rfind("t,S0,S1,S2,approx,truth,bound\n", 0) == 0);
  std::size_t rows = 0;
  for (char c : csv) rows += (c == '\n') ? 1 : 0;
  CHECK(rows == 102);  // header + 101 knots
  CHECK(fs::exists(out.string() + ".manifest.json"));

  CHECK(run_tool("duffing --demo --lambda-x -1 --K 2 --out " + out.string(), dir).code == 1);
  CHECK(run_tool("duffing --demo --K 40 --out " + out.string(), dir).code == 2);
}

TEST_CASE("built-in consistency checks pass") {
  REQUIRE_TOOL();
  const auto dir = fresh_dir("selftest");
  const RunResult r = run_tool("selftest", dir);
  CHECK(r.code == 0);
  CHECK(r.out.find("all checks passed") != std::string::npos);
}

TEST_SUITE_END();
