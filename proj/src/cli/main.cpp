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

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "cos2phi/cli.hpp"
#include "cos2phi/errors.hpp"

namespace cos2phi::cli {
namespace {

void diagnostic(const std::string& level, const std::string& kind, const std::string& message,
                int code) {
  json d{{"level", level}, {"kind", kind}, {"message", message}};
  if (code >= 0) d["exit_code"] = code;
  std::cerr << d.dump() << "\n";
}

json read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot read config file '" + path + "'");
  try {
    return json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw DomainError("config file '" + path + "' is not valid JSON: " + e.what());
  }
}

struct Flags {
  std::string config;
  std::string out;
  std::vector<std::string> set;
  int jobs = 0;
  bool no_cache = false;
  bool print_config = false;
};

int execute(const std::string& sub, const Flags& f) {
  json tree = merge_config(f.config.empty() ? json() : read_config_file(f.config));
  for (const auto& s : f.set) apply_override(tree, s);
  if (!f.out.empty()) tree["output"]["directory"] = f.out;
  if (f.jobs > 0) tree["jobs"] = f.jobs;
  if (f.no_cache) tree["cache"]["enabled"] = false;
  if (f.print_config) {
    std::cout << tree.dump(2) << "\n";
    return 0;
  }
  const RunConfig cfg = load_config(tree);
  if (cfg.params.semiclassical_warning()) {
    diagnostic("warning", "domain", "z = eps_L/eps_J >= 0.3; semiclassical reductions degrade", -1);
  }
  SolutionCache cache(cfg.cache_dir, cfg.cache, cfg.tolerance, cfg.solver);
  const Outcome o = run_subcommand(sub, cfg, cache);

  json files = json::array();
  for (const auto& p : o.files) files.push_back(p.filename().string());
  const json log{{"diagonalizations", cache.diagonalizations()},
                 {"cache_hits", cache.hits()},
                 {"cache_enabled", cfg.cache},
                 {"files", files}};
  std::filesystem::create_directories(cfg.out_dir);
  std::ofstream os(cfg.out_dir / "run_log.json", std::ios::trunc);
  os << render_json(log, {sub, cfg.hash()});
  std::cout << log.dump() << "\n";
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"cos2phi: spectra, wavefunctions and coherence of the cos 2phi qubit", "cos2phi"};
  app.require_subcommand(0, 1);
  bool show_version = false;
  app.add_flag("--version", show_version, "Print the version and exit");

  Flags f;
  std::vector<std::pair<std::string, CLI::App*>> subs;
  for (const auto& name : subcommands()) {
    CLI::App* s = app.add_subcommand(name, "Run the " + name + " workflow");
    s->add_option("--config", f.config, "JSON configuration file");
    s->add_option("--out", f.out, "Output directory");
    s->add_option("--set", f.set, "Override a config value, key.path=value")->take_all();
    s->add_option("--jobs", f.jobs, "Worker threads for sweeps")->check(CLI::PositiveNumber);
    s->add_flag("--no-cache", f.no_cache, "Ignore and do not write the solution cache");
    s->add_flag("--print-config", f.print_config, "Print the merged configuration and exit");
    subs.emplace_back(name, s);
  }

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();  // program name
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    diagnostic("error", "usage", e.what(), 1);
    return 1;
  }
  if (show_version) {
    std::cout << "cos2phi " << version() << "\n";
    return 0;
  }
  const auto it = std::find_if(subs.begin(), subs.end(),
                               [](const auto& p) { return p.second->parsed(); });
  if (it == subs.end()) {
    std::cerr << app.help();
    diagnostic("error", "usage", "a subcommand is required", 1);
    return 1;
  }
  try {
    return execute(it->first, f);
  } catch (const ConvergenceError& e) {
    diagnostic("error", e.kind(), e.what(), 2);
    return 2;
  } catch (const Error& e) {
    diagnostic("error", e.kind(), e.what(), 1);
    return 1;
  } catch (const json::exception& e) {
    diagnostic("error", "domain", e.what(), 1);
    return 1;
  } catch (const std::exception& e) {
    diagnostic("error", "internal", e.what(), 1);
    return 1;
  }
}

int run(int argc, char** argv) { return run(std::vector<std::string>(argv, argv + argc)); }

}  // namespace cos2phi::cli
