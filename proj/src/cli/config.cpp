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

#include <openssl/evp.h>

#include <cstdlib>
#include <iomanip>
#include <sstream>

#include "cos2phi/cli.hpp"
#include "cos2phi/errors.hpp"

#ifndef COS2PHI_VERSION
#define COS2PHI_VERSION "0.0.0"
#endif

namespace cos2phi::cli {

const char* version() { return COS2PHI_VERSION; }

json default_config() {
  json c;
  c["schema_version"] = kSchemaVersion;
  c["circuit"] = {{"eps_J", 15.0}, {"eps_C", 2.0},   {"eps_L", 1.0},   {"x", 0.02},
                  {"delta_J", 0.0}, {"delta_C", 0.0}, {"delta_A", 0.0}, {"delta_L", 0.0}};
  c["bias"] = {{"phi_ext", kPi}, {"N_g", 0.0}};
  c["truncation"] = {{"N0", 7}, {"p0", 7}, {"q0", 30}, {"max_dim", 4000000}};
  c["solver"] = {{"levels", 6},           {"tolerance", 1e-10},         {"backend", "auto"},
                 {"dense_threshold", 1200}, {"seed", 0x5eed2f1},        {"max_restarts", 2000}};
  c["temperature"] = 0.016;
  c["constants"] = {{"gap_kelvin", 2.1}};
  c["sweep"] = {
      {"phi_ext", {{"start", kPi}, {"stop", kPi}, {"points", 1}}},
      {"phi_ext_values", json::array()},
      {"N_g_points", 11},
      {"disorder_kind", "L"},
      {"disorder_values", json::array({0.0, 0.3, 0.6, 0.9})},
  };
  c["channels"] = {
      {"capacitive", {{"enabled", true}, {"Q", 1e6}, {"reference_GHz", 6.0}, {"exponent", 0.7}}},
      {"inductive", {{"enabled", true}, {"Q", 500e6}, {"reference_GHz", 0.5}}},
      {"purcell", {{"enabled", true}, {"Q", 1e6}, {"reference_GHz", 6.0}, {"exponent", 0.7}}},
      {"quasiparticle", {{"enabled", true}, {"x_qp", 3.3e-6}}},
      {"charge", {{"enabled", true}, {"sqrt_A_Ng", 1e-4}}},
      {"flux", {{"enabled", true}, {"sqrt_A_over_2pi", 3e-6}}},
      {"shot", {{"enabled", true}, {"n_th_over_Qcap", 1e-7}}},
      {"critical_current", {{"enabled", true}, {"sqrt_A_rel", 5e-7}}},
  };
  c["coherence"] = {{"adaptive_epsilon_basis", true}, {"delta_L_values", json::array()}};
  c["wavefunctions"] = {{"states", 4}, {"phi_points", 65}, {"varphi_points", 65},
                        {"varphi_min", -kPi}, {"varphi_max", 3.0 * kPi}};
  c["instanton"] = {{"points", 513}, {"eps_b", 1e-3}, {"max_rounds", 60}, {"action_tol", 1e-8}};
  c["mathieu"] = {{"E_C", 1.0},
                  {"ratios", json::array({40.0, 50.0, 60.0, 70.0, 80.0})},
                  {"levels", json::array({0, 1, 2})},
                  {"N0", 40},
                  {"N_g_points", 41}};
  c["converge"] = {{"ladder", json::array({json::array({7, 7, 30}), json::array({9, 9, 40}),
                                           json::array({9, 14, 40})})},
                   {"levels", 4},
                   {"tolerance", 1e-4}};
  c["output"] = {{"directory", ""}};
  c["cache"] = {{"enabled", true}, {"directory", ""}};
  c["jobs"] = 1;
  return c;
}

namespace {

bool same_kind(const json& a, const json& b) {
  if (a.is_number() && b.is_number()) {
    return !(a.is_number_integer() && b.is_number_float() &&
             b.get<double>() != static_cast<double>(static_cast<long long>(b.get<double>())));
  }
  return a.type() == b.type();
}

void overlay(json& base, const json& user, const std::string& path) {
  if (!user.is_object()) throw DomainError("config section '" + path + "' must be an object");
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (!base.contains(it.key())) throw DomainError("unknown config key '" + key + "'");
    json& slot = base[it.key()];
    if (slot.is_object()) {
      overlay(slot, it.value(), key);
    } else if (!same_kind(slot, it.value())) {
      throw DomainError("config key '" + key + "' expects " + std::string(slot.type_name()) +
                        ", got " + it.value().type_name());
    } else {
      slot = it.value();
    }
  }
}

}  // namespace

json merge_config(const json& user) {
  json c = default_config();
  if (user.is_null()) return c;
  if (user.contains("schema_version") && user["schema_version"] != kSchemaVersion) {
    throw DomainError("unsupported schema_version " + user["schema_version"].dump() +
                      " (expected " + std::to_string(kSchemaVersion) + ")");
  }
  overlay(c, user, "");
  return c;
}

void apply_override(json& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw DomainError("override '" + assignment + "' is not of the form key=value");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  json patch = value;
  std::vector<std::string> parts;
  std::stringstream ss(path);
  for (std::string p; std::getline(ss, p, '.');) parts.push_back(p);
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
    json wrap = json::object();
    wrap[*it] = patch;
    patch = wrap;
  }
  json merged = cfg;
  overlay(merged, patch, "");
  cfg = merged;
}

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int n = 0;
  if (EVP_Digest(data.data(), data.size(), md, &n, EVP_sha256(), nullptr) != 1) {
    throw InternalError("SHA-256 failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < n; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

std::string RunConfig::hash() const {
  json t = tree;
  for (const char* k : {"output", "cache", "jobs"}) t.erase(k);
  return sha256_hex(t.dump());
}

RunConfig load_config(const json& t) {
  RunConfig r;
  r.tree = t;
  const json& c = t["circuit"];
  r.params.eps_J = c["eps_J"];
  r.params.eps_C = c["eps_C"];
  r.params.eps_L = c["eps_L"];
  r.params.x = c["x"];
  r.params.delta_J = c["delta_J"];
  r.params.delta_C = c["delta_C"];
  r.params.delta_A = c["delta_A"];
  r.params.delta_L = c["delta_L"];
  r.params.validate();
  r.bias.phi_ext = t["bias"]["phi_ext"];
  r.bias.N_g = t["bias"]["N_g"];
  r.bias.validate();
  const json& tr = t["truncation"];
  r.trunc.N0 = tr["N0"];
  r.trunc.p0 = tr["p0"];
  r.trunc.q0 = tr["q0"];
  r.trunc.max_dim = tr["max_dim"];
  r.trunc.validate();
  const json& s = t["solver"];
  r.levels = s["levels"];
  if (r.levels < 2) throw DomainError("solver.levels must be >= 2");
  r.tolerance = s["tolerance"];
  if (!(r.tolerance > 0)) throw DomainError("solver.tolerance must be positive");
  const std::string be = s["backend"];
  if (be == "auto") r.solver.backend = Backend::Auto;
  else if (be == "dense") r.solver.backend = Backend::Dense;
  else if (be == "krylov") r.solver.backend = Backend::Krylov;
  else throw DomainError("solver.backend must be auto, dense or krylov");
  r.solver.dense_threshold = s["dense_threshold"];
  r.solver.seed = s["seed"];
  r.solver.max_restarts = s["max_restarts"];
  r.constants.T = t["temperature"];
  r.constants.gap = static_cast<double>(t["constants"]["gap_kelvin"]) * r.constants.kB;
  r.constants.validate();

  const json& ch = t["channels"];
  auto add = [&](ChannelKind k, const json& j, double amp, double ref, double ex) {
    NoiseChannel n{k, j["enabled"], amp, ref, ex};
    n.validate();
    r.channels.push_back(n);
  };
  add(ChannelKind::Capacitive, ch["capacitive"], ch["capacitive"]["Q"],
      ch["capacitive"]["reference_GHz"], ch["capacitive"]["exponent"]);
  add(ChannelKind::Inductive, ch["inductive"], ch["inductive"]["Q"],
      ch["inductive"]["reference_GHz"], 0.0);
  add(ChannelKind::Purcell, ch["purcell"], ch["purcell"]["Q"], ch["purcell"]["reference_GHz"],
      ch["purcell"]["exponent"]);
  add(ChannelKind::Quasiparticle, ch["quasiparticle"], ch["quasiparticle"]["x_qp"], 0.0, 0.0);
  add(ChannelKind::Charge, ch["charge"], ch["charge"]["sqrt_A_Ng"], 0.0, 0.0);
  add(ChannelKind::Flux, ch["flux"], ch["flux"]["sqrt_A_over_2pi"], 0.0, 0.0);
  add(ChannelKind::Shot, ch["shot"], ch["shot"]["n_th_over_Qcap"], 0.0, 0.0);
  add(ChannelKind::CriticalCurrent, ch["critical_current"], ch["critical_current"]["sqrt_A_rel"],
      0.0, 0.0);

  std::string out = t["output"]["directory"];
  if (out.empty()) {
    const char* env = std::getenv(kOutputRootEnv);
    out = env != nullptr && *env != '\0' ? env : "cos2phi-out";
  }
  r.out_dir = out;
  r.cache = t["cache"]["enabled"];
  const std::string cd = t["cache"]["directory"];
  r.cache_dir = cd.empty() ? r.out_dir / "cache" : std::filesystem::path(cd);
  r.jobs = t["jobs"];
  if (r.jobs < 1) throw DomainError("jobs must be >= 1");
  return r;
}

}  // namespace cos2phi::cli
