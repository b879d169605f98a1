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

#pragma once

#include <atomic>
#include <filesystem>
#include <mutex>
#include <string>
#include <vector>

#include "json.hpp"

#include "cos2phi/analysis.hpp"
#include "cos2phi/coherence.hpp"

namespace cos2phi::cli {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kOutputRootEnv = "COS2PHI_OUT";
const char* version();

// Every accepted key with its default value.
json default_config();

// Overlays `user` on the defaults. Keys absent from the defaults, type
// mismatches and a wrong schema_version raise DomainError.
json merge_config(const json& user);

// `path=value` with a dotted path; value parsed as JSON, else taken as a string.
void apply_override(json& cfg, const std::string& assignment);

std::string sha256_hex(const std::string& data);

struct RunConfig {
  json tree;
  CircuitParams params;
  BiasPoint bias;
  BasisTruncation trunc;
  PhysicalConstants constants;
  std::vector<NoiseChannel> channels;
  Index levels = 6;
  double tolerance = 1e-10;
  SolverOptions solver;
  std::filesystem::path out_dir;
  bool cache = true;
  std::filesystem::path cache_dir;
  int jobs = 1;

  // SHA-256 of the merged tree without the output, cache and jobs keys.
  std::string hash() const;
};

RunConfig load_config(const json& merged);

// Content-addressed store of eigen solutions, keyed by everything that
// determines the result. Counts solves and hits for the run log.
class SolutionCache {
 public:
  SolutionCache(std::filesystem::path dir, bool enabled, double tol, SolverOptions opts);

  EigenSolution get(const CircuitParams& p, const BiasPoint& b, const BasisTruncation& t, Index k);
  Diagonalizer diagonalizer();

  long diagonalizations() const { return solves_; }
  long hits() const { return hits_; }
  std::string key(const CircuitParams& p, const BiasPoint& b, const BasisTruncation& t,
                  Index k) const;

 private:
  std::filesystem::path dir_;
  bool enabled_;
  double tol_;
  SolverOptions opts_;
  std::atomic<long> solves_{0};
  std::atomic<long> hits_{0};
  std::mutex io_;
};

void write_solution(std::ostream& os, const EigenSolution& s);
EigenSolution read_solution(std::istream& is);

struct Provenance {
  std::string subcommand;
  std::string config_hash;
};

// CSV preceded by "# key: value" provenance lines. The final comment line
// holds the SHA-256 of every line after the comments.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns);
  CsvTable& row(const std::vector<std::string>& cells);
  std::string render(const Provenance& p) const;
  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> columns_;
  std::vector<std::string> rows_;
};

// 17 significant digits; "inf"/"nan" spelled out.
std::string fmt(double v);

// Recomputes the data checksum of a rendered CSV. False if it is missing or
// does not match.
bool verify_csv(const std::string& text);

json provenance_json(const Provenance& p);
std::string render_json(const json& data, const Provenance& p);

struct Outcome {
  std::vector<std::filesystem::path> files;
};

Outcome run_subcommand(const std::string& name, const RunConfig& cfg, SolutionCache& cache);
const std::vector<std::string>& subcommands();

// Full command line. Returns the process exit code: 0 success, 1 domain or
// usage error, 2 numerical non-convergence.
int run(int argc, char** argv);
int run(const std::vector<std::string>& args);

}  // namespace cos2phi::cli
