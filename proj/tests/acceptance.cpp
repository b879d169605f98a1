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


// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include "cos2phi/analysis.hpp"
#include "cos2phi/coherence.hpp"
#include "cos2phi/eigensolver.hpp"
#include "cos2phi/errors.hpp"
#include "cos2phi/hamiltonians.hpp"
#include "cos2phi/instanton.hpp"
#include "cos2phi/mathieu.hpp"
#include "cos2phi/model.hpp"

using namespace cos2phi;

namespace {

const BasisTruncation kTrunc{7, 14, 30};
constexpr Index kLevels = 6;

struct Line {
  std::string id;
  bool pass = false;
  std::string detail;
};
std::vector<Line> g_lines;

void report(const std::string& id, bool pass, const std::string& detail) {
  g_lines.push_back({id, pass, detail});
  std::printf("%s %s  %s\n", id.c_str(), pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
}

std::string f(const char* fmt, double a, double b = 0, double c = 0, double d = 0) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, a, b, c, d);
  return buf;
}

bool within(double v, double target, double rel) { return std::abs(v / target - 1.0) <= rel; }
bool factor2(double v, double target) { return v >= 0.5 * target && v <= 2.0 * target; }

// Every criterion shares one memoized diagonalizer.
class Memo {
 public:
  Diagonalizer fn() {
    return [this](const CircuitParams& p, const BiasPoint& b, const BasisTruncation& t, Index k) {
      std::ostringstream key;
      key.precision(17);
      key << p.eps_J << ' ' << p.eps_C << ' ' << p.eps_L << ' ' << p.x << ' ' << p.delta_J << ' '
          << p.delta_C << ' ' << p.delta_A << ' ' << p.delta_L << ' ' << b.phi_ext << ' ' << b.N_g
          << ' ' << t.N0 << ' ' << t.p0 << ' ' << t.q0 << ' ' << k;
      {
        std::lock_guard<std::mutex> lock(mu_);
        const auto it = cache_.find(key.str());
        if (it != cache_.end()) return it->second;
      }
      EigenSolution s = base_(p, b, t, k);
      std::lock_guard<std::mutex> lock(mu_);
      ++solves_;
      return cache_.emplace(key.str(), std::move(s)).first->second;
    };
  }
  int solves() const { return solves_; }

 private:
  Diagonalizer base_ = direct_diagonalizer();
  std::map<std::string, EigenSolution> cache_;
  std::mutex mu_;
  int solves_ = 0;
};

Memo g_memo;

template <class F>
void guarded(const std::string& id, F&& body) {
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body();
  } catch (const std::exception& e) {
    report(id, false, std::string("error: ") + e.what());
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("   (%s took %.1f s)\n", id.c_str(), s);
}

struct Reference {
  EigenSolution sol;
  std::vector<StateLabel> labels;
};

const Reference& reference() {
  static const Reference r = [] {
    Reference x;
    const BiasPoint b{kPi, 0.0};
    x.sol = g_memo.fn()(CircuitParams{}, b, kTrunc, kLevels);
    x.labels = label_states(x.sol, b, kTrunc);
    return x;
  }();
  return r;
}

double at(const Reference& r, int m, Fluxon fl) {
  const int i = find_state(r.labels, m, fl);
  if (i < 0) throw DomainError(std::string("state |") + std::to_string(m) + to_string(fl) + "> missing");
  return r.sol.energies(i);
}

void c1_c2() {
  guarded("C1", [] {
    const Reference& r = reference();
    const double wp = at(r, 1, Fluxon::Plus) - at(r, 0, Fluxon::Plus);
    const double wm = at(r, 1, Fluxon::Minus) - at(r, 0, Fluxon::Minus);
    report("C1", within(wp, 0.8, 0.05) && within(wm, 0.8, 0.05),
           f("plasmon spacing %.5f GHz (+), %.5f GHz (-); target 0.8 +/- 5%%", wp, wm));
  });
  guarded("C2", [] {
    const Reference& r = reference();
    const double wp = at(r, 1, Fluxon::Plus) - at(r, 0, Fluxon::Plus);
    const double s = at(r, 0, Fluxon::Minus) - at(r, 0, Fluxon::Plus);
    report("C2", std::abs(s) < 1e-2 * wp,
           f("E(0-) - E(0+) = %.4e GHz, bound %.4e GHz", s, 1e-2 * wp));
  });
}

void c3() {
  guarded("C3", [] {
    const std::vector<double> ratios{40, 50, 60, 70, 80};
    double worst = 0;
    std::vector<double> xs, ys, ys_bare;
    std::string rows;
    for (double q : ratios) {
      const ToyParams tp{q, 1.0, 0.0, 40};
      const DispersionResult ex = exact_dispersion(tp, 0);
      const DispersionResult as = asymptotic_dispersion(tp, 0);
      const double rel = std::abs(ex.eps_k / as.eps_k - 1.0);
      worst = std::max(worst, rel);
      xs.push_back(std::sqrt(q));
      ys.push_back(std::log(std::abs(ex.eps_k)));
      ys_bare.push_back(std::log(std::abs(ex.eps_k)) - 0.75 * std::log(2.0 * q));
      rows += f(" %.0f:%.4f", q, rel);
    }
    auto slope = [&](const std::vector<double>& y) {
      const double n = double(xs.size());
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += y[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * y[i];
      }
      return (n * sxy - sx * sy) / (n * sxx - sx * sx);
    };
    const double s = slope(ys);
    const double s_bare = slope(ys_bare);
    const bool ok = worst <= 0.05 && within(s, -std::sqrt(2.0), 0.05);
    report("C3", ok,
           "relative error by EJ/EC" + rows + f("; worst %.4f (bound 0.05); log|eps0| slope %.4f "
                                                "vs %.4f +/- 5%% (prefactor removed: %.4f)",
                                                worst, s, -std::sqrt(2.0), s_bare));
  });
}

void c4() {
  guarded("C4", [] {
    std::vector<double> grid;
    for (double d : {-0.1, -0.075, -0.05, -0.025, 0.025, 0.05, 0.075, 0.1}) grid.push_back(kPi + d);
    SweepOptions o;
    o.diagonalize = g_memo.fn();
    const CircuitParams p;
    const FluxonSlope fs = fluxon_slope(flux_sweep(p, grid, 0.0, kLevels, kTrunc, o));
    const double target = 32.0 / (3.0 * kPi) * p.eps_L;
    report("C4", within(fs.slope, target, 0.2),
           f("fluxon slope %.4f GHz/rad vs %.4f +/- 20%% (per pi of phi_ext: %.3f GHz vs 32/3 = %.3f)",
             fs.slope, target, fs.slope * kPi, 32.0 / 3.0 * p.eps_L));
  });
}

void c5_c6() {
  guarded("C5", [] {
    const CircuitParams p;
    const BiasPoint b{kPi, 0.0};
    const double z = p.z();
    const EffectiveParams e = reduce_to_effective(p, b, PathSource::Approx);
    const double c2 = -p.eps_J * (1.0 - 1.25 * z + z * z * (81.0 - 2.0 * kPi * kPi) / 48.0);
    const double c4 = -p.eps_L * (1.0 / 12.0 - 17.0 * z / 72.0);
    const bool ok = within(e.c2, c2, 0.005) && within(e.c4, c4, 0.05) && std::abs(e.c1) <= 1e-10 &&
                    std::abs(e.c3) <= 1e-10;
    report("C5", ok,
           f("c2 %.6f vs %.6f, c4 %.6f vs %.6f", e.c2, c2, e.c4, c4) +
               f("; |c1| %.2e, |c3| %.2e (bound 1e-10)", std::abs(e.c1), std::abs(e.c3)));
  });
  guarded("C6", [] {
    const CircuitParams p;
    const BiasPoint b{kPi, 0.0};
    const InstantonPath path = solve_instanton(p, b);
    const double dev = path_deviation(path, b, p.z());
    report("C6", dev <= 0.15,
           f("interior path deviation %.4f rad (bound 0.15); action %.5f, rounds %.0f", dev,
             path.action, path.rounds));
  });
}

void c7() {
  guarded("C7", [] {
    const Reference& r = reference();
    const Primitives P = build_primitives(kTrunc, CircuitParams{});
    const int g = find_state(r.labels, 0, Fluxon::Plus);
    const int e = find_state(r.labels, 0, Fluxon::Minus);
    const int p1 = find_state(r.labels, 1, Fluxon::Plus);
    if (g < 0 || e < 0 || p1 < 0) throw DomainError("qubit states not labeled");
    const MatrixElements eta = normalized_matrix_elements(r.sol, P.eta, g);
    const MatrixElements phi = normalized_matrix_elements(r.sol, P.phi, g);
    const double eq = eta.values[std::size_t(e)], e1 = eta.values[std::size_t(p1)];
    const double pq = phi.values[std::size_t(e)];

    const BasisTruncation small{2, 3, 6};
    SolverOptions o;
    o.backend = Backend::Dense;
    const EigenSolution full =
        direct_diagonalizer(1e-10, o)(CircuitParams{}, {kPi, 0.0}, small, small.dim());
    const Primitives Ps = build_primitives(small, CircuitParams{});
    double worst = 0;
    for (const HermitianOperator* op : {&Ps.eta, &Ps.phi}) {
      const MatrixElements m = normalized_matrix_elements(full, *op, 0, MatrixElementNorm::Operator);
      worst = std::max(worst, std::abs(m.completeness - 1.0));
    }
    const bool ok = eq < 1e-6 && e1 > 0.9 && pq > 0.9 && worst <= 1e-6;
    report("C7", ok,
           f("|eta_qubit|^2 %.2e (<1e-6), |eta_1+|^2 %.4f (>0.9), |phi_qubit|^2 %.4f (>0.9)", eq, e1,
             pq) +
               f("; completeness defect %.2e at dim %.0f (bound 1e-6)", worst, double(small.dim())));
  });
}

void c8() {
  guarded("C8", [] {
    double worst = 0;
    std::string rows;
    for (double dl : {0.0, 0.3, 0.6, 0.9}) {
      CircuitParams p;
      p.delta_L = dl;
      const BiasPoint b{kPi, 0.0};
      const EigenSolution s = g_memo.fn()(p, b, kTrunc, kLevels);
      const auto labels = label_states(s, b, kTrunc);
      const auto me = quasiparticle_matrix_elements(s, qubit_pair(s, labels), p, b, kTrunc);
      const double m = std::max(me[0], me[1]);
      worst = std::max(worst, m);
      rows += f(" dL=%.1f:%.2e", dl, m);
    }
    report("C8", worst < 1e-8, "normalized |<0+|sin(phi_i/2)|0->|^2" + rows + " (bound 1e-8)");
  });
}

CoherenceReport coherence_at(double dl) {
  CircuitParams p;
  p.delta_L = dl;
  CoherenceOptions o;
  o.levels = kLevels;
  o.sweep.diagonalize = g_memo.fn();
  return full_report(p, {kPi, 0.0}, kTrunc, default_channels(), PhysicalConstants{}, o);
}

const CoherenceReport& report_at(double dl) {
  static std::map<double, CoherenceReport> cache;
  auto it = cache.find(dl);
  if (it == cache.end()) it = cache.emplace(dl, coherence_at(dl)).first;
  return it->second;
}

void c9() {
  guarded("C9", [] {
    const CoherenceReport& r0 = report_at(0.0);
    const CoherenceReport& r6 = report_at(0.6);
    struct Item {
      const char* name;
      double value, target;
      bool ok;
    };
    const double ind = r0.get(ChannelKind::Inductive).time_ms;
    const double ch0 = r0.get(ChannelKind::Charge).time_ms;
    const double ch6 = r6.get(ChannelKind::Charge).time_ms;
    const double fl = r0.get(ChannelKind::Flux).time_ms;
    const double sh = r0.get(ChannelKind::Shot).time_ms;
    const double cc = r0.get(ChannelKind::CriticalCurrent).time_ms;
    const ChannelResult& pu0 = r0.get(ChannelKind::Purcell);
    const double pu6 = r6.get(ChannelKind::Purcell).time_ms;
    const std::vector<Item> items{
        {"inductive T1(0)", ind, 0.61, within(ind, 0.61, 0.25)},
        {"charge Tphi(0)", ch0, 0.0037, within(ch0, 0.0037, 0.25)},
        {"charge Tphi(0.6)", ch6, 74, factor2(ch6, 74)},
        {"flux Tphi(0)", fl, 0.022, factor2(fl, 0.022)},
        {"shot Tphi(0)", sh, 4.6, factor2(sh, 4.6)},
        {"critical-current Tphi(0)", cc, 210, factor2(cc, 210)},
        {"purcell T1(0.6)", pu6, 380, factor2(pu6, 380)},
    };
    bool ok = pu0.sentinel && std::isinf(pu0.time_ms);
    std::string d = std::string("purcell T1(0) ") + (ok ? "inf (sentinel)" : f("%.4g ms", pu0.time_ms));
    for (const auto& it : items) {
      ok = ok && it.ok;
      d += "; " + std::string(it.name) + f(" %.4g ms vs %.4g", it.value, it.target) +
           (it.ok ? "" : " [out of band]");
    }
    report("C9", ok, d + " (ms)");
  });
}

void c10() {
  guarded("C10", [] {
    SweepOptions o;
    o.diagonalize = g_memo.fn();
    const SweepResult s = disorder_sweep(CircuitParams{}, DisorderKind::L, {0.0, 0.3, 0.6, 0.9},
                                         kTrunc, uniform_grid(0.0, 1.0, 11), o);
    const auto eps = s.column("epsilon");
    const auto de = s.column("delta_E");
    bool mono = true;
    for (std::size_t i = 1; i < eps.size(); ++i) {
      mono = mono && eps[i] < eps[i - 1] && de[i] > de[i - 1];
    }
    const double supp = eps.front() / eps.back();
    std::string d;
    for (std::size_t i = 0; i < eps.size(); ++i) {
      const auto& row = s.rows[i];
      d += f("dL=%.1f eps=%.3e dE=%.3e", row.x, eps[i], de[i]);
      d += f(" (%.0f,%.0f,%.0f)", row.trunc.N0, row.trunc.p0, row.trunc.q0);
      for (const auto& fl : row.flags) d += " [" + fl + "]";
      d += "; ";
    }
    report("C10", mono && supp >= 1e6,
           d + f("suppression %.3e (bound 1e6), monotone ", supp) + (mono ? "yes" : "no"));
  });
}

void c11() {
  guarded("C11", [] {
    const double chi = report_at(0.0).chi * 1e3;
    report("C11", factor2(std::abs(chi), 20.0),
           f("chi/2pi %.3f MHz; |chi| target 20 MHz within x2", chi));
  });
}

void c12() {
  guarded("C12", [] {
    std::vector<std::string> failed;
    auto need = [&](bool c, const std::string& what) {
      if (!c) failed.push_back(what);
    };
    const CircuitParams p0;
    const BasisTruncation t{3, 4, 8};

    // Hermiticity for every disorder kind.
    for (auto k : {DisorderKind::J, DisorderKind::C, DisorderKind::A, DisorderKind::L}) {
      const CircuitParams pk = with_disorder(p0, k, 0.3);
      const HermitianOperator H = full_hamiltonian(pk, {2.3, 0.2}, t);
      need(H.hermiticity_defect() <= 1e-12 * H.max_abs(), std::string("hermiticity ") + to_string(k));
    }
    // Parity commutation at pi.
    {
      const HermitianOperator H = full_hamiltonian(p0, {kPi, 0.3}, t);
      const HermitianOperator P = parity_operator(t);
      need(H.commutator(P).max_abs() <= 1e-10 * H.max_abs(), "parity commutator");
    }
    auto spectrum = [](const Operator& H) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H.dense(), Eigen::EigenvaluesOnly);
      return Eigen::VectorXd(es.eigenvalues());
    };
    // Flux and offset-charge periodicity.
    for (double phi : {kPi, 2.2}) {
      const Eigen::VectorXd a = spectrum(full_hamiltonian(p0, {phi, 0.3}, t));
      const Eigen::VectorXd b = spectrum(full_hamiltonian(p0, {phi + 4 * kPi, 0.3}, t));
      need((a - b).cwiseAbs().maxCoeff() <= 1e-9, "flux periodicity");
    }
    {
      const BasisTruncation w{15, 4, 8};
      const Eigen::VectorXd a = spectrum(full_hamiltonian(p0, {kPi, 0.2}, w));
      const Eigen::VectorXd b = spectrum(full_hamiltonian(p0, {kPi, 1.2}, w));
      need((a.head(8) - b.head(8)).cwiseAbs().maxCoeff() <= 1e-9, "charge periodicity");
    }
    // Variational monotonicity along each truncation dimension.
    {
      auto ground = [&](BasisTruncation b) {
        return lowest_eigenpairs(full_hamiltonian(p0, {kPi, 0.1}, b), 1, 1e-11).energies(0);
      };
      const BasisTruncation base{3, 3, 10};
      for (int axis = 0; axis < 3; ++axis) {
        double prev = ground(base);
        for (int step = 1; step <= 3; ++step) {
          BasisTruncation b = base;
          (axis == 0 ? b.N0 : axis == 1 ? b.p0 : b.q0) += (axis == 2 ? 4 : 1) * step;
          const double e = ground(b);
          need(e <= prev + 1e-10, "variational monotonicity axis " + std::to_string(axis));
          prev = e;
        }
      }
    }
    // Backend equivalence below dim 2000.
    for (const BasisTruncation& b : {BasisTruncation{2, 3, 10}, BasisTruncation{4, 5, 14}}) {
      const HermitianOperator H = full_hamiltonian(with_disorder(p0, DisorderKind::A, 0.2), {2.9, 0.1}, b);
      SolverOptions d, k;
      d.backend = Backend::Dense;
      k.backend = Backend::Krylov;
      const EigenSolution sd = lowest_eigenpairs(H, 6, 1e-10, d);
      const EigenSolution sk = lowest_eigenpairs(H, 6, 1e-10, k);
      need((sd.energies - sk.energies).cwiseAbs().maxCoeff() <= 1e-8, "backend equivalence");
    }
    // Displaced cosine, closed form vs quadrature, interior block.
    for (int p : {7, 30, 60}) {
      for (double zpf : {0.5, 2.0, 3.0}) {
        for (double off : {0.0, 1.1, kPi}) {
          const Eigen::MatrixXcd L = displaced_cosine(zpf, off, p, TrigMethod::Laguerre).dense();
          const Eigen::MatrixXcd Q = displaced_cosine(zpf, off, p, TrigMethod::Quadrature).dense();
          const int m = std::max(1, int(std::floor(0.9 * (p + 1))));
          need((L - Q).topLeftCorner(m, m).cwiseAbs().maxCoeff() <= 1e-9, "displaced cosine");
        }
      }
    }
    std::string d = failed.empty() ? "hermiticity, parity, periodicity, variational, backend, "
                                     "displaced cosine all within tolerance"
                                   : "failed:";
    for (const auto& s : failed) d += " " + s;
    report("C12", failed.empty(), d);
  });
}

}  // namespace

int main() {
  std::printf("cos2phi acceptance, truncation (%d,%d,%d), %d levels\n", kTrunc.N0, kTrunc.p0,
              kTrunc.q0, int(kLevels));
  c12();
  c3();
  c5_c6();
  c1_c2();
  c7();
  c4();
  c8();
  c9();
  c11();
  c10();
  int fails = 0;
  std::printf("\nsummary (%d diagonalizations):\n", g_memo.solves());
  std::sort(g_lines.begin(), g_lines.end(), [](const Line& a, const Line& b) {
    return std::stoi(a.id.substr(1)) < std::stoi(b.id.substr(1));
  });
  for (const auto& l : g_lines) {
    std::printf("  %-4s %s\n", l.id.c_str(), l.pass ? "PASS" : "FAIL");
    fails += l.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria pass\n", int(g_lines.size()) - fails, g_lines.size());
  return fails == 0 ? 0 : 1;
}
