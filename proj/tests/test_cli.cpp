// Copyright 2026 The cos2phi Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "cos2phi/cli.hpp"
#include "cos2phi/errors.hpp"

using namespace cos2phi;
using namespace cos2phi::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("cos2phi-test-" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> small(const std::string& sub, const fs::path& out) {
  return {"cos2phi", sub, "--out", out.string(), "--set", "truncation.N0=3", "--set",
          "truncation.p0=3", "--set", "truncation.q0=10"};
}

json data_of(const fs::path& p) { return json::parse(slurp(p))["data"]; }

std::vector<std::string> data_lines(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  for (std::string l; std::getline(ss, l);)
    if (!l.empty() && l[0] != '#') out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("configuration schema") {
  const json d = default_config();
  CHECK(d["truncation"]["N0"] == 7);
  CHECK(merge_config(json()) == d);
  CHECK_THROWS_AS(merge_config(json{{"circuit", {{"eps_Q", 1.0}}}}), DomainError);
  CHECK_THROWS_AS(merge_config(json{{"circuit", {{"eps_J", "big"}}}}), DomainError);
  CHECK_THROWS_AS(merge_config(json{{"truncation", {{"N0", 7.5}}}}), DomainError);
  CHECK_THROWS_AS(merge_config(json{{"schema_version", 99}}), DomainError);
  json c = d;
  apply_override(c, "circuit.delta_L=0.3");
  CHECK(c["circuit"]["delta_L"] == 0.3);
  apply_override(c, "sweep.disorder_kind=J");
  CHECK(c["sweep"]["disorder_kind"] == "J");
  CHECK_THROWS_AS(apply_override(c, "nonsense"), DomainError);
  CHECK_THROWS_AS(apply_override(c, "circuit.nope=1"), DomainError);
  const RunConfig r = load_config(c);
  CHECK(r.params.delta_L == 0.3);
  CHECK(r.channels.size() == 8);
  CHECK(r.hash().size() == 64);
  json bad = d;
  bad["solver"]["backend"] = "magic";
  CHECK_THROWS_AS(load_config(bad), DomainError);
}

TEST_CASE("sha256 and number formatting") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(fmt(0.1) == "0.10000000000000001");
  CHECK(std::stod(fmt(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(fmt(1.0 / 0.0) == "inf");
}

TEST_CASE("checksummed CSV detects tampering") {
  CsvTable t({"a", "b"});
  t.row({"1", "2"}).row({"3", "4"});
  const std::string s = t.render({"spectrum", "abc"});
  CHECK(verify_csv(s));
  std::string edited = s;
  edited[edited.size() - 2] = '5';
  CHECK_FALSE(verify_csv(edited));
  CHECK_FALSE(verify_csv("a,b\n1,2\n"));
  CHECK_THROWS(t.row({"1"}));
}

TEST_CASE("solution serialization round trip") {
  EigenSolution s;
  s.energies = Eigen::VectorXd::LinSpaced(3, -1.0, 1.0);
  s.vectors = Eigen::MatrixXcd::Random(7, 3);
  s.residuals = {1e-12, 2e-12, 3e-12};
  s.fingerprint = 42;
  s.meta.backend = "dense";
  s.meta.kernels = "scalar";
  std::stringstream ss;
  write_solution(ss, s);
  const EigenSolution r = read_solution(ss);
  CHECK(r.energies == s.energies);
  CHECK(r.vectors == s.vectors);
  CHECK(r.residuals == s.residuals);
  CHECK(r.meta.backend == "dense");
  std::stringstream junk("not a solution");
  CHECK_THROWS_AS(read_solution(junk), ResourceError);
}

TEST_CASE("spectrum over three flux points, cached re-run") {
  const fs::path out = scratch("spectrum");
  auto args = small("spectrum", out);
  for (const char* s : {"sweep.phi_ext.start=3.0", "sweep.phi_ext.stop=3.3", "sweep.phi_ext.points=3"}) {
    args.push_back("--set");
    args.push_back(s);
  }
  REQUIRE(run(args) == 0);
  const std::string csv = slurp(out / "spectrum.csv");
  CHECK(verify_csv(csv));
  CHECK(csv.find("# config_sha256: ") != std::string::npos);
  const auto lines = data_lines(csv);
  REQUIRE(lines.size() == 4);
  CHECK(lines[0].rfind("phi_ext,N_g,E0", 0) == 0);
  double prev = -1e9;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const double x = std::stod(lines[i].substr(0, lines[i].find(',')));
    CHECK(x > prev);
    prev = x;
  }
  CHECK(data_of(out / "run_log.json")["diagonalizations"] == 3);

  REQUIRE(run(args) == 0);
  const json log = data_of(out / "run_log.json");
  CHECK(log["diagonalizations"] == 0);
  CHECK(log["cache_hits"] == 3);
  CHECK(slurp(out / "spectrum.csv") == csv);

  // Independent uncached run elsewhere reproduces the bytes.
  const fs::path other = scratch("spectrum-2");
  auto a2 = args;
  a2[3] = other.string();
  a2.push_back("--no-cache");
  REQUIRE(run(a2) == 0);
  CHECK(slurp(other / "spectrum.csv") == csv);
  CHECK_FALSE(fs::exists(other / "cache"));
}

TEST_CASE("config file and environment output root") {
  const fs::path dir = scratch("cfg");
  fs::create_directories(dir);
  {
    std::ofstream os(dir / "run.json");
    os << R"({"truncation": {"N0": 3, "p0": 2, "q0": 6}, "solver": {"levels": 4}})";
  }
  const fs::path root = dir / "env-root";
  setenv(kOutputRootEnv, root.string().c_str(), 1);
  CHECK(run({"cos2phi", "matrix-elements", "--config", (dir / "run.json").string()}) == 0);
  unsetenv(kOutputRootEnv);
  CHECK(fs::exists(root / "matrix_elements.csv"));
  CHECK(verify_csv(slurp(root / "matrix_elements.csv")));
  {
    std::ofstream os(dir / "bad.json");
    os << R"({"truncation": {"N1": 3}})";
  }
  CHECK(run({"cos2phi", "spectrum", "--config", (dir / "bad.json").string(), "--out",
             (dir / "x").string()}) == 1);
  CHECK(run({"cos2phi", "spectrum", "--config", (dir / "missing.json").string()}) == 1);
}

TEST_CASE("exit codes") {
  const fs::path out = scratch("codes");
  CHECK(run({"cos2phi", "--version"}) == 0);
  CHECK(run({"cos2phi", "frobnicate"}) == 1);
  CHECK(run({"cos2phi"}) == 1);
  auto bad = small("spectrum", out);
  bad.push_back("--set");
  bad.push_back("circuit.eps_J=-1");
  CHECK(run(bad) == 1);
  auto nc = small("instanton", out);
  nc.push_back("--set");
  nc.push_back("instanton.max_rounds=1");
  CHECK(run(nc) == 2);
  auto jobs = small("spectrum", out);
  jobs.push_back("--jobs");
  jobs.push_back("0");
  CHECK(run(jobs) == 1);
}

TEST_CASE("each subcommand writes checksummed artifacts") {
  const fs::path out = scratch("all");
  const std::vector<std::pair<std::string, std::vector<std::string>>> cases{
      {"wavefunctions", {"charge.csv", "phase.csv", "states.json"}},
      {"matrix-elements", {"matrix_elements.csv", "matrix_elements.json"}},
      {"disorder", {"disorder.csv"}},
      {"mathieu", {"mathieu.csv"}},
      {"converge", {"ladder.csv", "ladder.json"}},
      {"instanton", {"path.csv", "instanton.json"}},
  };
  for (const auto& [sub, files] : cases) {
    auto args = small(sub, out);
    args.insert(args.end(), {"--set", "sweep.disorder_values=[0,0.2]", "--set",
                             "converge.ladder=[[3,3,10],[4,3,10]]", "--set",
                             "wavefunctions.phi_points=9", "--set", "wavefunctions.varphi_points=9",
                             "--set", "mathieu.ratios=[40,50]"});
    CAPTURE(sub);
    REQUIRE(run(args) == 0);
    for (const auto& f : files) {
      CAPTURE(f);
      REQUIRE(fs::exists(out / f));
      const std::string text = slurp(out / f);
      if (f.ends_with(".csv")) {
        CHECK(verify_csv(text));
      } else {
        const json j = json::parse(text);
        CHECK(j["provenance"]["code_version"] == version());
        CHECK(j["provenance"]["data_sha256"] == sha256_hex(j["data"].dump()));
      }
    }
  }
  const auto rows = data_lines(slurp(out / "disorder.csv"));
  CHECK(rows.size() == 3);
  CHECK(rows[0] == "delta,delta_E,abs_delta_E,epsilon,unresolved,N0,p0,q0,flags");
}
