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

#include <cmath>
#include <fstream>
#include <map>

#include "cos2phi/cli.hpp"
#include "cos2phi/errors.hpp"
#include "cos2phi/instanton.hpp"
#include "cos2phi/mathieu.hpp"

namespace cos2phi::cli {
namespace {

struct Context {
  const std::string& name;
  const RunConfig& cfg;
  SolutionCache& cache;
  Outcome out;

  Provenance prov() const { return {name, cfg.hash()}; }
  SweepOptions sweep() { return {cfg.jobs, cache.diagonalizer()}; }

  void write(const std::string& file, const std::string& text) {
    std::filesystem::create_directories(cfg.out_dir);
    const auto path = cfg.out_dir / file;
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw ResourceError("cannot write " + path.string());
    os << text;
    if (!os) throw ResourceError("write failed for " + path.string());
    out.files.push_back(path);
  }
  void csv(const std::string& file, const CsvTable& t) { write(file, t.render(prov())); }
  void json_file(const std::string& file, const json& data) {
    write(file, render_json(data, prov()));
  }
};

std::string fmt_bool(bool b) { return b ? "1" : "0"; }

std::string join(const std::vector<std::string>& v, char sep) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += sep;
    s += v[i];
  }
  return s;
}

std::vector<double> flux_grid(const json& sweep) {
  if (!sweep["phi_ext_values"].empty()) {
    return sweep["phi_ext_values"].get<std::vector<double>>();
  }
  const json& g = sweep["phi_ext"];
  const int n = g["points"];
  if (n < 1) throw DomainError("sweep.phi_ext.points must be >= 1");
  if (n == 1) return {g["start"].get<double>()};
  return uniform_grid(g["start"], g["stop"], n);
}

std::vector<double> ng_grid(const json& sweep) {
  const int n = sweep["N_g_points"];
  if (n < 2) throw DomainError("sweep.N_g_points must be >= 2");
  return uniform_grid(0.0, 1.0, n);
}

json trunc_json(const BasisTruncation& t) {
  return {{"N0", t.N0}, {"p0", t.p0}, {"q0", t.q0}, {"dim", t.dim()}};
}

json labels_json(const std::vector<StateLabel>& labels, const Eigen::VectorXd& E) {
  json a = json::array();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto& l = labels[i];
    a.push_back({{"index", i},
                 {"energy", E(static_cast<Index>(i))},
                 {"label", l.str()},
                 {"parity", l.parity},
                 {"parity_expectation", l.parity_expectation},
                 {"photon_number", l.photon_number},
                 {"confidence", l.confidence},
                 {"ambiguous", l.ambiguous}});
  }
  return a;
}

// Infinite values are not representable in JSON.
json num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  return v;
}

void spectrum(Context& c) {
  const auto grid = flux_grid(c.cfg.tree["sweep"]);
  const SweepResult r =
      flux_sweep(c.cfg.params, grid, c.cfg.bias.N_g, c.cfg.levels, c.cfg.trunc, c.sweep());
  std::vector<std::string> cols{"phi_ext", "N_g"};
  for (Index j = 0; j < r.k; ++j) cols.push_back("E" + std::to_string(j));
  for (Index j = 1; j < r.k; ++j) cols.push_back("E" + std::to_string(j) + "-E0");
  for (Index j = 0; j < r.k; ++j) cols.push_back("label" + std::to_string(j));
  CsvTable t(cols);
  for (const auto& row : r.rows) {
    std::vector<std::string> cells{fmt(row.x), fmt(c.cfg.bias.N_g)};
    for (Index j = 0; j < r.k; ++j) cells.push_back(fmt(row.energies(j)));
    for (Index j = 1; j < r.k; ++j) cells.push_back(fmt(row.energies(j) - row.energies(0)));
    for (const auto& l : row.labels) cells.push_back(l.str());
    t.row(cells);
  }
  c.csv("spectrum.csv", t);
}

void wavefunctions(Context& c) {
  const json& w = c.cfg.tree["wavefunctions"];
  const int states = w["states"];
  if (states < 1 || states > c.cfg.levels) {
    throw DomainError("wavefunctions.states must lie in [1, solver.levels]");
  }
  const int np = w["phi_points"], nv = w["varphi_points"];
  if (np < 2 || nv < 2) throw DomainError("wavefunction grids need at least two points");
  const EigenSolution sol = c.cache.get(c.cfg.params, c.cfg.bias, c.cfg.trunc, c.cfg.levels);
  const auto labels = label_states(sol, c.cfg.bias, c.cfg.trunc);

  std::vector<std::string> cols{"N"};
  for (int s = 0; s < states; ++s) {
    cols.push_back("re_psi" + std::to_string(s));
    cols.push_back("im_psi" + std::to_string(s));
  }
  std::vector<Eigen::VectorXcd> charge;
  for (int s = 0; s < states; ++s) {
    charge.push_back(wavefunction_charge(sol, s, c.cfg.params, c.cfg.bias, c.cfg.trunc));
  }
  CsvTable tc(cols);
  for (int N = -c.cfg.trunc.N0; N <= c.cfg.trunc.N0; ++N) {
    std::vector<std::string> cells{std::to_string(N)};
    for (const auto& v : charge) {
      const cplx a = v(N + c.cfg.trunc.N0);
      cells.push_back(fmt(a.real()));
      cells.push_back(fmt(a.imag()));
    }
    tc.row(cells);
  }
  c.csv("charge.csv", tc);

  PhaseGrid g{uniform_grid(-kPi, kPi, np), uniform_grid(w["varphi_min"], w["varphi_max"], nv)};
  std::vector<Eigen::MatrixXcd> phase;
  for (int s = 0; s < states; ++s) {
    phase.push_back(wavefunction_phase(sol, s, c.cfg.params, c.cfg.bias, c.cfg.trunc, g));
  }
  cols[0] = "varphi";
  cols.insert(cols.begin(), "phi");
  CsvTable tp(cols);
  for (int i = 0; i < np; ++i) {
    for (int j = 0; j < nv; ++j) {
      std::vector<std::string> cells{fmt(g.phi[i]), fmt(g.varphi[j])};
      for (const auto& m : phase) {
        cells.push_back(fmt(m(i, j).real()));
        cells.push_back(fmt(m(i, j).imag()));
      }
      tp.row(cells);
    }
  }
  c.csv("phase.csv", tp);
  std::vector<StateLabel> shown(labels.begin(), labels.begin() + states);
  c.json_file("states.json", {{"bias", {{"phi_ext", c.cfg.bias.phi_ext}, {"N_g", c.cfg.bias.N_g}}},
                              {"truncation", trunc_json(c.cfg.trunc)},
                              {"states", labels_json(shown, sol.energies.head(states))}});
}

void matrix_elements(Context& c) {
  const EigenSolution sol = c.cache.get(c.cfg.params, c.cfg.bias, c.cfg.trunc, c.cfg.levels);
  const auto labels = label_states(sol, c.cfg.bias, c.cfg.trunc);
  const Primitives P = build_primitives(c.cfg.trunc, c.cfg.params);
  const std::map<std::string, const Operator*> ops{{"eta", &P.eta}, {"phi", &P.phi}};
  std::map<std::string, MatrixElements> sub, full;
  for (const auto& [name, op] : ops) {
    sub[name] = normalized_matrix_elements(sol, *op, 0, MatrixElementNorm::Subspace);
    full[name] = normalized_matrix_elements(sol, *op, 0, MatrixElementNorm::Operator);
  }
  CsvTable t({"state", "label", "energy", "eta_subspace", "eta_operator", "phi_subspace",
              "phi_operator"});
  for (Index s = 0; s < sol.size(); ++s) {
    const auto i = static_cast<std::size_t>(s);
    t.row({std::to_string(s), labels[i].str(), fmt(sol.energies(s)), fmt(sub["eta"].values[i]),
           fmt(full["eta"].values[i]), fmt(sub["phi"].values[i]), fmt(full["phi"].values[i])});
  }
  c.csv("matrix_elements.csv", t);
  json summary;
  for (const auto& [name, op] : ops) {
    summary[name] = {{"subspace_norm", sub[name].norm},
                     {"operator_norm", full[name].norm},
                     {"completeness", full[name].completeness}};
  }
  summary["ground"] = labels[0].str();
  c.json_file("matrix_elements.json", summary);
}

void disorder(Context& c) {
  const json& s = c.cfg.tree["sweep"];
  const DisorderKind kind = disorder_kind_from(s["disorder_kind"]);
  const auto deltas = s["disorder_values"].get<std::vector<double>>();
  const SweepResult r =
      disorder_sweep(c.cfg.params, kind, deltas, c.cfg.trunc, ng_grid(s), c.sweep());
  CsvTable t({"delta", "delta_E", "abs_delta_E", "epsilon", "unresolved", "N0", "p0", "q0",
              "flags"});
  for (const auto& row : r.rows) {
    const bool unresolved =
        std::find(row.flags.begin(), row.flags.end(), "unresolved") != row.flags.end();
    t.row({fmt(row.x), fmt(row.scalars.at("delta_E")), fmt(row.scalars.at("abs_delta_E")),
           fmt(row.scalars.at("epsilon")), fmt_bool(unresolved), std::to_string(row.trunc.N0),
           std::to_string(row.trunc.p0), std::to_string(row.trunc.q0), join(row.flags, ';')});
  }
  c.csv("disorder.csv", t);
}

void coherence(Context& c) {
  CoherenceOptions o;
  o.N_g = ng_grid(c.cfg.tree["sweep"]);
  o.adaptive_epsilon_basis = c.cfg.tree["coherence"]["adaptive_epsilon_basis"];
  o.levels = c.cfg.levels;
  o.sweep = c.sweep();
  const CoherenceReport r =
      full_report(c.cfg.params, c.cfg.bias, c.cfg.trunc, c.cfg.channels, c.cfg.constants, o);
  CsvTable t({"channel", "process", "enabled", "time_ms", "rate_per_ms", "matrix_element",
              "sentinel", "note"});
  json chans = json::array();
  for (const auto& ch : r.channels) {
    const char* proc = is_relaxation(ch.kind) ? "T1" : "Tphi";
    t.row({to_string(ch.kind), proc, fmt_bool(ch.enabled), fmt(ch.time_ms), fmt(ch.rate_per_ms),
           fmt(ch.matrix_element), fmt_bool(ch.sentinel), ch.note});
    chans.push_back({{"channel", to_string(ch.kind)},
                     {"process", proc},
                     {"enabled", ch.enabled},
                     {"time_ms", num(ch.time_ms)},
                     {"rate_per_ms", ch.rate_per_ms},
                     {"matrix_element", ch.matrix_element},
                     {"sentinel", ch.sentinel},
                     {"note", ch.note}});
  }
  t.row({"total", "T1", "1", fmt(r.T1_ms), fmt(1.0 / r.T1_ms), "", "0", ""});
  t.row({"total", "Tphi", "1", fmt(r.Tphi_ms), fmt(1.0 / r.Tphi_ms), "", "0", ""});
  t.row({"total", "T2", "1", fmt(r.T2_ms), fmt(1.0 / r.T2_ms), "", "0", ""});
  c.csv("coherence.csv", t);
  const auto sweep = c.cfg.tree["coherence"]["delta_L_values"].get<std::vector<double>>();
  if (!sweep.empty()) {
    std::vector<std::string> sc{"delta_L"};
    for (const auto& ch : r.channels) sc.push_back(std::string(to_string(ch.kind)) + "_ms");
    for (const char* n : {"T1_ms", "Tphi_ms", "T2_ms", "epsilon", "chi"}) sc.push_back(n);
    CsvTable ts(sc);
    for (double d : sweep) {
      CircuitParams p = c.cfg.params;
      p.delta_L = d;
      const CoherenceReport q =
          full_report(p, c.cfg.bias, c.cfg.trunc, c.cfg.channels, c.cfg.constants, o);
      std::vector<std::string> cells{fmt(d)};
      for (const auto& ch : q.channels) cells.push_back(fmt(ch.time_ms));
      for (double v : {q.T1_ms, q.Tphi_ms, q.T2_ms, q.epsilon, q.chi}) cells.push_back(fmt(v));
      ts.row(cells);
    }
    c.csv("coherence_sweep.csv", ts);
  }
  c.json_file("coherence.json",
              {{"channels", chans},
               {"T1_ms", num(r.T1_ms)},
               {"Tphi_ms", num(r.Tphi_ms)},
               {"T2_ms", num(r.T2_ms)},
               {"delta_E_GHz", r.delta_E},
               {"epsilon_GHz", r.epsilon},
               {"epsilon_unresolved", r.epsilon_unresolved},
               {"chi_GHz", r.chi},
               {"plasmon_GHz", r.plasmon},
               {"flux_curvature", {{"value", r.curvature.value},
                                   {"step", r.curvature.step},
                                   {"halvings", r.curvature.halvings}}},
               {"critical_current_slope", {{"value", r.current_slope.value},
                                           {"step", r.current_slope.step},
                                           {"halvings", r.current_slope.halvings}}},
               {"temperature_K", r.temperature},
               {"truncation", trunc_json(r.trunc)},
               {"epsilon_truncation", trunc_json(r.epsilon_trunc)}});
}

void instanton(Context& c) {
  const json& j = c.cfg.tree["instanton"];
  InstantonOptions o;
  o.points = j["points"];
  o.eps_b = j["eps_b"];
  o.max_rounds = j["max_rounds"];
  o.action_tol = j["action_tol"];
  const InstantonPath p = solve_instanton(c.cfg.params, c.cfg.bias, o);
  CsvTable t({"tau_ns", "phi", "varphi", "theta"});
  for (const auto& s : p.samples) {
    t.row({fmt(s.tau), fmt(s.q(0)), fmt(s.q(1)), fmt(s.q(2))});
  }
  c.csv("path.csv", t);
  const double z = c.cfg.params.z();
  auto coeffs = [](const EffectiveParams& e) {
    return json{{"c1", e.c1}, {"c2", e.c2}, {"c3", e.c3}, {"c4", e.c4}, {"kinetic", e.kinetic}};
  };
  const auto approx = reduce_to_effective(c.cfg.params, c.cfg.bias, PathSource::Approx);
  const auto numeric = reduce_to_effective(c.cfg.params, c.cfg.bias, PathSource::Numeric, &p);
  json ends = json::array();
  for (const auto& e : p.endpoints) ends.push_back({e(0), e(1), e(2)});
  c.json_file("instanton.json", {{"action", p.action},
                                 {"solver_residual", p.solver_residual},
                                 {"energy_residual", p.energy_residual},
                                 {"endpoint_speed", p.endpoint_speed},
                                 {"horizon_ns", p.horizon},
                                 {"eps_b", p.eps_b},
                                 {"rounds", p.rounds},
                                 {"residual_history", p.residual_history},
                                 {"endpoints", ends},
                                 {"path_deviation", path_deviation(p, c.cfg.bias, z)},
                                 {"z", z},
                                 {"approx", coeffs(approx)},
                                 {"numeric", coeffs(numeric)}});
}

void mathieu(Context& c) {
  const json& m = c.cfg.tree["mathieu"];
  const double E_C = m["E_C"];
  const int N0 = m["N0"], pts = m["N_g_points"];
  CsvTable t({"ratio", "k", "eps_exact", "eps_asymptotic", "relative_error",
              "boundary_population"});
  for (double ratio : m["ratios"].get<std::vector<double>>()) {
    for (int k : m["levels"].get<std::vector<int>>()) {
      ToyParams tp{ratio * E_C, E_C, 0.0, N0};
      tp.validate();
      const DispersionResult d = exact_dispersion(tp, k, pts);
      const double a = asymptotic_epsilon(tp.E_J, E_C, k);
      t.row({fmt(ratio), std::to_string(k), fmt(d.eps_k), fmt(a),
             fmt(std::abs(std::abs(d.eps_k) - std::abs(a)) / std::abs(a)),
             fmt(d.boundary_population)});
    }
  }
  c.csv("mathieu.csv", t);
}

void converge(Context& c) {
  const json& j = c.cfg.tree["converge"];
  std::vector<BasisTruncation> ladder;
  for (const auto& l : j["ladder"]) {
    if (!l.is_array() || l.size() != 3) throw DomainError("converge.ladder entries are [N0, p0, q0]");
    BasisTruncation t = c.cfg.trunc;
    t.N0 = l[0];
    t.p0 = l[1];
    t.q0 = l[2];
    t.validate();
    if (!ladder.empty()) {
      const auto& a = ladder.back();
      if (t.N0 < a.N0 || t.p0 < a.p0 || t.q0 < a.q0) {
        throw DomainError("convergence ladder levels must not shrink in any dimension");
      }
    }
    ladder.push_back(t);
  }
  if (ladder.size() < 2) throw DomainError("convergence ladder needs at least two levels");
  const Index k = j["levels"];
  const double tol = j["tolerance"];
  std::vector<std::string> cols{"N0", "p0", "q0", "dim"};
  for (Index i = 0; i < k; ++i) cols.push_back("E" + std::to_string(i));
  for (Index i = 0; i < k; ++i) cols.push_back("dE" + std::to_string(i));
  cols.push_back("max_abs_dE");
  CsvTable t(cols);
  Eigen::VectorXd prev;
  double last = 0;
  for (const auto& tr : ladder) {
    const EigenSolution s = c.cache.get(c.cfg.params, c.cfg.bias, tr, k);
    std::vector<std::string> cells{std::to_string(tr.N0), std::to_string(tr.p0),
                                   std::to_string(tr.q0), std::to_string(tr.dim())};
    for (Index i = 0; i < k; ++i) cells.push_back(fmt(s.energies(i)));
    for (Index i = 0; i < k; ++i) cells.push_back(prev.size() ? fmt(s.energies(i) - prev(i)) : "");
    last = prev.size() ? (s.energies - prev).cwiseAbs().maxCoeff() : 0.0;
    cells.push_back(prev.size() ? fmt(last) : "");
    t.row(cells);
    prev = s.energies;
  }
  c.csv("ladder.csv", t);
  c.json_file("ladder.json", {{"tolerance", tol}, {"final_max_abs_dE", last},
                              {"converged", last < tol}});
}

using Handler = void (*)(Context&);

const std::vector<std::pair<std::string, Handler>>& table() {
  static const std::vector<std::pair<std::string, Handler>> t{
      {"spectrum", spectrum},     {"wavefunctions", wavefunctions},
      {"matrix-elements", matrix_elements}, {"disorder", disorder},
      {"coherence", coherence},   {"instanton", instanton},
      {"mathieu", mathieu},       {"converge", converge}};
  return t;
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [n, h] : table()) v.push_back(n);
    return v;
  }();
  return names;
}

Outcome run_subcommand(const std::string& name, const RunConfig& cfg, SolutionCache& cache) {
  for (const auto& [n, h] : table()) {
    if (n != name) continue;
    Context c{name, cfg, cache, {}};
    h(c);
    return c.out;
  }
  throw UsageError("unknown subcommand '" + name + "'");
}

}  // namespace cos2phi::cli
