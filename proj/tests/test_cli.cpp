#include <catch_amalgamated.hpp>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "evenproj/suites.hpp"

using namespace evenproj;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run lab(const std::string& args) {
  const std::string cmd = std::string(EVENPROJ_LAB) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::array<char, 4096> buf{};
  size_t got = 0;
  while ((got = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), got);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string fixture(const std::string& name) { return std::string(EVENPROJ_FIXTURES) + "/" + name; }

fs::path scratch(const std::string& name, const std::string& content) {
  const fs::path dir = fs::temp_directory_path() / "evenproj-cli-test";
  fs::create_directories(dir);
  const fs::path p = dir / name;
  std::ofstream(p) << content;
  return p;
}

}  // namespace

TEST_CASE("empty fixture list prints the empty report") {
  const fs::path empty = scratch("empty.json", "[]");
  const Run r = lab("suite theorem2 --fixtures " + empty.string());
  CHECK(r.code == 0);
  CHECK(r.out == "{\"cases\": [], \"summary\": {\"pass\": 0, \"fail\": 0}}\n");
}

TEST_CASE("usage errors exit with 2") {
  CHECK(lab("").code == 2);
  CHECK(lab("suite nonsense").code == 2);
  CHECK(lab("--n-levels 32,24 suite eta").code == 2);
  CHECK(lab("--n-levels 24,x suite eta").code == 2);
  CHECK(lab("--format xml suite eta").code == 2);
  CHECK(lab("index").code == 2);
  CHECK(lab("index --triple /nonexistent/triple.json").code == 2);
  const fs::path broken = scratch("broken.json", "{\"name\": ");
  CHECK(lab("index --triple " + broken.string()).code == 2);
  const fs::path missing = scratch("missing.json", "{\"name\": \"x\", \"a\": {\"n\": 1, \"a_plus\": [[0, [[1]], [[0]]]]}}");
  CHECK(lab("index --triple " + missing.string()).code == 2);
}

TEST_CASE("help exits cleanly") { CHECK(lab("--help").code == 0); }

TEST_CASE("passing and failing suites set the exit code") {
  CHECK(lab("suite theorem2 --fixtures " + fixture("triples.json")).code == 0);
  Json t = io::read_file(fixture("triple-convention.json"));
  t["expected"]["ind_a"] = 5;
  const fs::path wrong = scratch("wrong.json", t.dump());
  const Run r = lab("suite theorem2 --fixtures " + wrong.string());
  CHECK(r.code == 1);
  const Json j = Json::parse(r.out);
  CHECK(j["summary"]["fail"] == 1);
  CHECK(j["cases"][0]["checks"]["ind_a_expected"] == false);
}

TEST_CASE("numerical failures in single commands produce error JSON") {
  Json t = io::read_file(fixture("triple-convention.json"));
  // 1 + z vanishes at x = pi
  t["a"]["a_plus"] = Json::parse("[[0, [[1.0]], [[0.0]]], [1, [[1.0]], [[0.0]]]]");
  const fs::path bad = scratch("nonelliptic.json", t.dump());
  const Run r = lab("index --triple " + bad.string());
  CHECK(r.code == 1);
  const Json j = Json::parse(r.out);
  CHECK(j.contains("error"));
  CHECK(j["error"] == "not elliptic");
}

TEST_CASE("single commands on the bundled fixtures") {
  Run r = lab("index --triple " + fixture("triple-convention.json"));
  CHECK(r.code == 0);
  CHECK(Json::parse(r.out)["ind_a"] == -1);
  r = lab("d-dim --projection " + fixture("projection-spectral.json"));
  CHECK(r.code == 0);
  CHECK(Json::parse(r.out)["d"] == "-1/1");
  r = lab("d-dim --chi 2 --projection " + fixture("projection-spectral.json"));
  CHECK(Json::parse(r.out)["d"] == "1/1");
  r = lab("eta --model " + fixture("model-n2.json"));
  CHECK(r.code == 0);
  CHECK(std::abs(Json::parse(r.out)["eta_reduced"].get<double>()) < 1e-6);
  r = lab("sf --family " + fixture("family-shift.json") + " --samples 32");
  CHECK(r.code == 0);
  CHECK(Json::parse(r.out)["sf_tracking"] == 1);
  r = lab("bvp index --problem " + fixture("problem-laplace-dirichlet-removed.json"));
  CHECK(r.code == 0);
  CHECK(Json::parse(r.out)["index"] == 1);
  r = lab("bvp verify-thm5 --problem " + fixture("problem-dt5.json"));
  CHECK(r.code == 0);
  CHECK(Json::parse(r.out)["equal"] == true);
  r = lab("symbol validate " + fixture("symbol-z.json"));
  CHECK(r.code == 0);
  CHECK(Json::parse(r.out)["ind_t"] == -1);
}

TEST_CASE("reduce writes the homotopy traces") {
  const fs::path trace = fs::temp_directory_path() / "evenproj-cli-test" / "trace.json";
  fs::remove(trace);
  const Run r = lab("bvp reduce --problem " + fixture("problem-laplace-dirichlet-removed.json") + " --emit-trace " + trace.string());
  CHECK(r.code == 0);
  REQUIRE(fs::exists(trace));
  const Json t = io::read_file(trace.string());
  REQUIRE(t["traces"].size() >= 3);
  for (const auto& step : t["traces"]) CHECK(step["params"].size() == 11);
}

TEST_CASE("--out writes the same bytes as stdout") {
  const fs::path out = fs::temp_directory_path() / "evenproj-cli-test" / "eta.json";
  const Run direct = lab("suite eta --fixtures " + fixture("models.json"));
  const Run to_file = lab("--out " + out.string() + " suite eta --fixtures " + fixture("models.json"));
  CHECK(to_file.out.empty());
  std::ifstream f(out, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  CHECK(ss.str() == direct.out);
}

TEST_CASE("CSV output has the fixed leading columns") {
  const Run r = lab("--format csv suite sf --fixtures " + fixture("family-shift.json"));
  CHECK(r.code == 0);
  CHECK(r.out.rfind("suite,name,pass,error,", 0) == 0);
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 2);
}

TEST_CASE("repeated runs are byte-identical") {
  const Run a = lab("suite prop4"), b = lab("suite prop4");
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
}

TEST_CASE("report JSON round trip") {
  Report r;
  CaseResult c;
  c.suite = "eta";
  c.name = "demo";
  c.inputs = {{"q", {{0.0, 0.0, 1.0}}}};
  c.computed = {{"eta", 0.5}, {"nested", {{"k", 2}}}};
  c.checks = {{"ok", true}};
  finalize(c);
  r.cases.push_back(c);
  CaseResult e = c;
  e.name = "aborted";
  e.error = "NearZero: eigenvalue 1e-10";
  finalize(e);
  r.cases.push_back(e);
  const Json j = report_to_json(r);
  const Report back = report_from_json(Json::parse(to_compact(j)));
  CHECK(to_compact(report_to_json(back)) == to_compact(j));
  CHECK(back.passed() == 1);
  CHECK(back.failed() == 1);
}

TEST_CASE("symbols, triples and problems round trip through JSON") {
  for (const auto& f : builtin_triples()) {
    const Json j = io::triple_to_json(f.spec);
    const TripleSpec back = io::parse_triple(Json::parse(j.dump()));
    CHECK(io::triple_to_json(back).dump() == j.dump());
  }
  for (const auto& f : builtin_reductions()) {
    const Json j = problem_json(f.spec);
    CHECK(problem_json(io::parse_problem(Json::parse(j.dump()))).dump() == j.dump());
  }
}

TEST_CASE("dense projections round trip through base64") {
  const ProjectionOperator p = io::parse_projection(io::read_file(fixture("projection-spectral.json")));
  const Json j = io::projection_to_json(p);
  const ProjectionOperator back = io::parse_projection(Json::parse(j.dump()));
  CHECK((back.matrix() - p.matrix()).norm() == 0.0);
  CHECK(back.even == p.even);
  CHECK(d_dimension(back) == d_dimension(p));
}

TEST_CASE("parse errors carry a JSON pointer") {
  try {
    io::parse_triple(Json::parse("{\"a\": {\"n\": 1, \"a_plus\": [[0, [[1]]]]}, \"p1\": {}, \"p2\": {}}"), "x.json#");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Parse);
    CHECK(std::string(e.what()).find("x.json#/a/a_plus/0") != std::string::npos);
  }
}
