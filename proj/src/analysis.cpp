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

#include "cos2phi/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include "cos2phi/errors.hpp"
#include "cos2phi/instanton.hpp"

namespace cos2phi {
namespace {

struct Layout {
  int N0, na, nb;
  Index idx(int N, int p, int q) const {
    return (static_cast<Index>(N + N0) * na + p) * nb + q;
  }
};

Layout layout(const BasisTruncation& t, const EigenSolution& sol) {
  if (sol.vectors.rows() != t.dim()) {
    throw UsageError("eigenvectors do not match truncation " + t.str());
  }
  return {t.N0, t.p0 + 1, t.q0 + 1};
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads and rethrows the first
// failure annotated with its grid index.
template <class Fn>
void parallel_for(std::size_t n, int jobs, Fn fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int t = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
  std::vector<std::thread> pool;
  for (int w = 1; w < t; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i]) continue;
    const std::string at = " (grid index " + std::to_string(i) + ")";
    try {
      std::rethrow_exception(errors[i]);
    } catch (const ConvergenceError& e) {
      throw ConvergenceError(e.what() + at, e.residuals());
    } catch (const DomainError& e) {
      throw DomainError(e.what() + at);
    } catch (const UsageError& e) {
      throw UsageError(e.what() + at);
    }
  }
}

Diagonalizer pick(const SweepOptions& o) {
  return o.diagonalize ? o.diagonalize : direct_diagonalizer();
}

bool symmetric_point(const BiasPoint& b) {
  const double r = std::remainder(b.phi_ext - kPi, 2.0 * kPi);
  return std::abs(r) < 1e-12;
}

bool excluded_point(const BiasPoint& b) {
  return std::abs(std::remainder(b.phi_ext, 2.0 * kPi)) < 1e-12;
}

// B_{Np} = Σ_q c_{Npq} ⟨θ = 0|q⟩
Eigen::MatrixXcd theta_projection(const Eigen::VectorXcd& c, const Layout& L, double theta_zpf) {
  const Eigen::VectorXd chi = oscillator_wavefunctions(0.0, theta_zpf, L.nb - 1);
  Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero(2 * L.N0 + 1, L.na);
  for (int N = -L.N0; N <= L.N0; ++N)
    for (int p = 0; p < L.na; ++p) {
      cplx s = 0;
      for (int q = 0; q < L.nb; ++q) s += c(L.idx(N, p, q)) * chi(q);
      B(N + L.N0, p) = s;
    }
  return B;
}

template <class V>
void fix_phase(V& v, double rel) {
  const double mx = v.cwiseAbs().maxCoeff();
  for (Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) >= rel * mx) {
      v *= std::conj(v(i)) / std::abs(v(i));
      return;
    }
  }
}

}  // namespace

const char* to_string(Fluxon f) {
  switch (f) {
    case Fluxon::Plus: return "+";
    case Fluxon::Minus: return "-";
    case Fluxon::Filled: return "•";
    case Fluxon::Hollow: return "∘";
    case Fluxon::Unlabeled: return "?";
  }
  return "?";
}

std::string StateLabel::str() const {
  if (fluxon == Fluxon::Unlabeled) return "unlabeled";
  return "|" + std::to_string(m) + to_string(fluxon) + "⟩";
}

std::vector<StateLabel> label_states(const EigenSolution& sol, const BiasPoint& bias,
                                     const BasisTruncation& trunc) {
  const Layout L = layout(trunc, sol);
  const bool sym = symmetric_point(bias);
  const bool excluded = excluded_point(bias);
  std::vector<StateLabel> out(static_cast<std::size_t>(sol.size()));
  for (Index s = 0; s < sol.size(); ++s) {
    double pe = 0, nb = 0;
    for (int N = -L.N0; N <= L.N0; ++N)
      for (int p = 0; p < L.na; ++p)
        for (int q = 0; q < L.nb; ++q) {
          const double w = std::norm(sol.vectors(L.idx(N, p, q), s));
          pe += ((N + p) % 2 == 0 ? w : -w);
          nb += w * q;
        }
    StateLabel& l = out[s];
    l.parity_expectation = pe;
    l.parity = pe >= 0 ? 1 : -1;
    l.photon_number = nb;
  }
  if (out.empty()) return out;
  // The b mode is dressed by the charge coupling, so photon numbers are read
  // relative to the lowest state.
  const double shift = out.front().photon_number;
  int rank[2] = {0, 0};
  std::map<int, int> seen;
  for (auto& l : out) {
    const double rel = l.photon_number - shift;
    const int m_nb = static_cast<int>(std::lround(rel));
    const double c_nb = std::clamp(1.0 - 2.0 * std::abs(rel - m_nb), 0.0, 1.0);
    if (excluded) {
      l.m = m_nb;
      l.confidence = c_nb;
      l.fluxon = Fluxon::Unlabeled;
    } else if (sym) {
      l.m = rank[l.parity > 0 ? 0 : 1]++;
      l.confidence = std::abs(l.parity_expectation) * (l.m == m_nb ? 1.0 : c_nb);
      l.fluxon = l.parity > 0 ? Fluxon::Plus : Fluxon::Minus;
    } else {
      l.m = m_nb;
      l.confidence = c_nb;
      const int n = seen[l.m]++;
      l.fluxon = n == 0 ? Fluxon::Hollow : (n == 1 ? Fluxon::Filled : Fluxon::Unlabeled);
      if (n > 1) l.confidence = 0;
    }
  }
  for (auto& l : out) l.ambiguous = l.confidence < 0.7;
  return out;
}

int find_state(const std::vector<StateLabel>& labels, int m, Fluxon f) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const StateLabel& l = labels[i];
    if (l.m != m) continue;
    Fluxon g = l.fluxon;
    if (g == Fluxon::Plus) g = Fluxon::Hollow;
    if (g == Fluxon::Minus) g = Fluxon::Filled;
    Fluxon want = f;
    if (want == Fluxon::Plus) want = Fluxon::Hollow;
    if (want == Fluxon::Minus) want = Fluxon::Filled;
    if (g == want) return static_cast<int>(i);
  }
  return -1;
}

Diagonalizer direct_diagonalizer(double tol, SolverOptions opts) {
  return [tol, opts](const CircuitParams& p, const BiasPoint& b, const BasisTruncation& t,
                     Index k) {
    const HermitianOperator H = full_hamiltonian(p, b, t);
    const HermitianOperator P = parity_operator(t);
    SolverOptions o = opts;
    o.gauge = &P;
    return lowest_eigenpairs(H, k, tol, o);
  };
}

std::vector<double> SweepResult::grid() const {
  std::vector<double> g;
  for (const auto& r : rows) g.push_back(r.x);
  return g;
}

std::vector<double> SweepResult::column(const std::string& name) const {
  std::vector<double> out;
  for (const auto& r : rows) {
    auto it = r.scalars.find(name);
    if (it == r.scalars.end()) throw UsageError("sweep has no column " + name);
    out.push_back(it->second);
  }
  return out;
}

namespace {

void require_monotone(const std::vector<double>& g) {
  if (g.empty()) throw DomainError("empty sweep grid");
  for (std::size_t i = 1; i < g.size(); ++i) {
    if (!(g[i] > g[i - 1])) throw DomainError("sweep grid must be strictly increasing");
  }
}

}  // namespace

SweepResult flux_sweep(const CircuitParams& params, const std::vector<double>& grid,
                       double N_g, Index k, const BasisTruncation& trunc,
                       const SweepOptions& opts) {
  require_monotone(grid);
  params.validate();
  trunc.validate();
  const Diagonalizer diag = pick(opts);
  SweepResult out;
  out.axis = "phi_ext";
  out.k = k;
  out.params = params;
  out.rows.resize(grid.size());
  parallel_for(grid.size(), opts.jobs, [&](std::size_t i) {
    BiasPoint b{grid[i], N_g};
    const EigenSolution s = diag(params, b, trunc, k);
    SweepRow& r = out.rows[i];
    r.x = grid[i];
    r.energies = s.energies;
    r.labels = label_states(s, b, trunc);
    r.trunc = trunc;
    r.meta = s.meta;
    for (Index j = 1; j < s.size(); ++j) {
      r.scalars["E" + std::to_string(j) + "-E0"] = s.energies(j) - s.energies(0);
    }
    for (const auto& l : r.labels)
      if (l.ambiguous) {
        r.flags.push_back("ambiguous_label");
        break;
      }
  });
  return out;
}

FluxonSlope fluxon_slope(const SweepResult& sweep) {
  FluxonSlope f;
  for (const auto& r : sweep.rows) {
    const double off = std::abs(r.x - kPi);
    if (off < 1e-9) continue;
    const int g = find_state(r.labels, 0, Fluxon::Hollow);
    const int e = find_state(r.labels, 0, Fluxon::Filled);
    if (g < 0 || e < 0) throw DomainError("fluxon pair not labeled at phi_ext = " + std::to_string(r.x));
    f.offsets.push_back(off);
    f.transitions.push_back(r.energies(e) - r.energies(g));
  }
  const std::size_t n = f.offsets.size();
  if (n < 2) throw DomainError("fluxon slope needs two off-symmetric points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += f.offsets[i];
    sy += f.transitions[i];
    sxx += f.offsets[i] * f.offsets[i];
    sxy += f.offsets[i] * f.transitions[i];
  }
  const double den = n * sxx - sx * sx;
  if (std::abs(den) < 1e-300) throw DomainError("fluxon slope needs distinct offsets");
  f.slope = (n * sxy - sx * sy) / den;
  f.intercept = (sy - f.slope * sx) / n;
  return f;
}

ChargeDispersion charge_dispersion(const CircuitParams& params, double phi_ext,
                                   const BasisTruncation& trunc, const std::vector<double>& N_g,
                                   const SweepOptions& opts) {
  require_monotone(N_g);
  if (N_g.front() > 0.0 || N_g.back() < 1.0) {
    throw DomainError("charge dispersion grid must cover [0, 1]");
  }
  const auto zero = std::find(N_g.begin(), N_g.end(), 0.0);
  if (zero == N_g.end()) throw DomainError("charge dispersion grid must contain Ng = 0");
  const Diagonalizer diag = pick(opts);
  ChargeDispersion cd;
  cd.N_g = N_g;
  cd.splitting.resize(N_g.size());
  parallel_for(N_g.size(), opts.jobs, [&](std::size_t i) {
    const EigenSolution s = diag(params, BiasPoint{phi_ext, N_g[i]}, trunc, 2);
    cd.splitting[i] = s.energies(1) - s.energies(0);
  });
  cd.delta_E = cd.splitting[static_cast<std::size_t>(zero - N_g.begin())];
  const auto [mn, mx] = std::minmax_element(cd.splitting.begin(), cd.splitting.end());
  cd.epsilon = *mx - *mn;
  cd.unresolved = cd.epsilon < kUnresolvedEpsilon;
  return cd;
}

BasisTruncation disorder_truncation(DisorderKind kind, double delta, const BasisTruncation& base) {
  BasisTruncation t = base;
  if (kind != DisorderKind::L) return t;
  if (delta >= 0.75) {
    t.N0 = std::max(t.N0, 16);
    t.p0 = std::max(t.p0, 12);
    t.q0 = std::max(t.q0, 70);
  } else if (delta >= 0.45) {
    t.N0 = std::max(t.N0, 12);
    t.p0 = std::max(t.p0, 14);
    t.q0 = std::max(t.q0, 50);
  }
  return t;
}

SweepResult disorder_sweep(const CircuitParams& params, DisorderKind kind,
                           const std::vector<double>& deltas, const BasisTruncation& base,
                           const std::vector<double>& N_g, const SweepOptions& opts) {
  require_monotone(deltas);
  if (deltas.front() < 0.0 || deltas.back() > 0.9) {
    throw DomainError("disorder grid must lie in [0, 0.9]");
  }
  SweepResult out;
  out.axis = std::string("delta_") + to_string(kind);
  out.k = 2;
  out.params = params;
  for (double d : deltas) {
    const CircuitParams p = with_disorder(params, kind, d);
    const BasisTruncation t = disorder_truncation(kind, d, base);
    const ChargeDispersion cd = charge_dispersion(p, kPi, t, N_g, opts);
    SweepRow r;
    r.x = d;
    r.trunc = t;
    r.scalars["delta_E"] = cd.delta_E;
    r.scalars["abs_delta_E"] = std::abs(cd.delta_E);
    r.scalars["epsilon"] = cd.epsilon;
    if (cd.unresolved) r.flags.push_back("unresolved");
    if (!out.rows.empty()) {
      const auto& prev = out.rows.back().scalars;
      if (!(cd.epsilon < prev.at("epsilon"))) r.flags.push_back("eps_not_decreasing");
      if (!(std::abs(cd.delta_E) > prev.at("abs_delta_E"))) r.flags.push_back("dE_not_increasing");
    }
    out.rows.push_back(std::move(r));
  }
  return out;
}

Eigen::VectorXd oscillator_wavefunctions(double x, double zpf, int nmax) {
  Eigen::VectorXd f(nmax + 1);
  const double xi = x / (std::sqrt(2.0) * zpf);
  f(0) = std::pow(kPi, -0.25) / std::sqrt(std::sqrt(2.0) * zpf) * std::exp(-0.5 * xi * xi);
  if (nmax >= 1) f(1) = std::sqrt(2.0) * xi * f(0);
  for (int n = 2; n <= nmax; ++n) {
    f(n) = std::sqrt(2.0 / n) * xi * f(n - 1) - std::sqrt((n - 1.0) / n) * f(n - 2);
  }
  return f;
}

Eigen::MatrixXcd wavefunction_phase(const EigenSolution& sol, Index state,
                                    const CircuitParams& params, const BiasPoint& bias,
                                    const BasisTruncation& trunc, const PhaseGrid& grid) {
  const Layout L = layout(trunc, sol);
  if (state < 0 || state >= sol.size()) throw DomainError("state index out of range");
  if (grid.phi.empty() || grid.varphi.empty()) throw DomainError("empty wavefunction grid");
  const ModeScales sc = ModeScales::from(params);
  const Eigen::MatrixXcd B = theta_projection(sol.vectors.col(state), L, sc.theta_zpf);
  const Index nv = static_cast<Index>(grid.varphi.size());
  Eigen::MatrixXcd A(2 * L.N0 + 1, nv);
  for (Index j = 0; j < nv; ++j) {
    const Eigen::VectorXd chi =
        oscillator_wavefunctions(grid.varphi[j] - bias.phi_ext, sc.phi_zpf, L.na - 1);
    A.col(j) = B * chi.cast<cplx>();
  }
  const Index np = static_cast<Index>(grid.phi.size());
  Eigen::MatrixXcd F(np, 2 * L.N0 + 1);
  for (Index i = 0; i < np; ++i)
    for (int N = -L.N0; N <= L.N0; ++N)
      F(i, N + L.N0) = std::polar(1.0 / std::sqrt(2.0 * kPi), N * grid.phi[i]);
  Eigen::MatrixXcd psi = F * A;
  const double dphi = np > 1 ? grid.phi[1] - grid.phi[0] : 1.0;
  const double dvar = nv > 1 ? grid.varphi[1] - grid.varphi[0] : 1.0;
  const double norm = std::sqrt(psi.squaredNorm() * std::abs(dphi * dvar));
  if (norm == 0.0) throw DomainError("wavefunction vanishes on the grid");
  psi /= norm;
  Eigen::Map<Eigen::VectorXcd> flat(psi.data(), psi.size());
  // Scan in row-major order so "first" follows phi, then varphi.
  Eigen::MatrixXcd rm = psi.transpose();
  Eigen::Map<Eigen::VectorXcd> scan(rm.data(), rm.size());
  const double mx = scan.cwiseAbs().maxCoeff();
  for (Index i = 0; i < scan.size(); ++i) {
    if (std::abs(scan(i)) >= 1e-3 * mx) {
      flat *= std::conj(scan(i)) / std::abs(scan(i));
      break;
    }
  }
  return psi;
}

Eigen::VectorXcd wavefunction_charge(const EigenSolution& sol, Index state,
                                     const CircuitParams& params, const BiasPoint& bias,
                                     const BasisTruncation& trunc, ChargeProjection mode) {
  const Layout L = layout(trunc, sol);
  if (state < 0 || state >= sol.size()) throw DomainError("state index out of range");
  const int nc = 2 * L.N0 + 1;
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(nc);
  const Eigen::VectorXcd v = sol.vectors.col(state);
  if (mode == ChargeProjection::Marginal) {
    for (int N = -L.N0; N <= L.N0; ++N) {
      double w = 0;
      cplx big = 0;
      for (int p = 0; p < L.na; ++p)
        for (int q = 0; q < L.nb; ++q) {
          const cplx a = v(L.idx(N, p, q));
          w += std::norm(a);
          if (std::abs(a) > std::abs(big)) big = a;
        }
      c(N + L.N0) = big == cplx(0) ? cplx(0) : std::sqrt(w) * big / std::abs(big);
    }
  } else {
    const ModeScales sc = ModeScales::from(params);
    const Eigen::MatrixXcd B = theta_projection(v, L, sc.theta_zpf);
    const int M = 8 * nc + 64;
    for (int j = 0; j < M; ++j) {
      const double phi = 2.0 * kPi * j / M;
      const double x = path_approx(phi, bias, params.z()) - bias.phi_ext;
      const Eigen::VectorXcd a = B * oscillator_wavefunctions(x, sc.phi_zpf, L.na - 1).cast<cplx>();
      cplx f = 0;
      for (int N = -L.N0; N <= L.N0; ++N) f += std::polar(1.0, N * phi) * a(N + L.N0);
      for (int N = -L.N0; N <= L.N0; ++N) c(N + L.N0) += f * std::polar(1.0 / M, -N * phi);
    }
  }
  const double n = c.norm();
  if (n == 0.0) throw DomainError("charge wavefunction vanishes");
  c /= n;
  fix_phase(c, 1e-3);
  return c;
}

MatrixElements normalized_matrix_elements(const EigenSolution& sol, const Operator& op,
                                          Index ground, MatrixElementNorm mode) {
  if (op.dim() != sol.vectors.rows()) throw UsageError("operator and eigenvectors differ in dimension");
  if (ground < 0 || ground >= sol.size()) throw DomainError("ground index out of range");
  const Eigen::VectorXcd og = op.apply(Eigen::VectorXcd(sol.vectors.col(ground)));
  const Eigen::VectorXcd amp = sol.vectors.adjoint() * og;
  const double full = og.squaredNorm();
  const double sub = amp.squaredNorm();
  MatrixElements me;
  me.mode = mode;
  me.norm = mode == MatrixElementNorm::Subspace ? sub : full;
  me.completeness = full > 0 ? sub / full : 0.0;
  for (Index i = 0; i < amp.size(); ++i) {
    me.values.push_back(me.norm > 0 ? std::norm(amp(i)) / me.norm : 0.0);
  }
  return me;
}

double dispersive_shift(const EigenSolution& sol, const std::vector<StateLabel>& labels) {
  const int g0 = find_state(labels, 0, Fluxon::Hollow);
  const int e0 = find_state(labels, 0, Fluxon::Filled);
  const int g1 = find_state(labels, 1, Fluxon::Hollow);
  const int e1 = find_state(labels, 1, Fluxon::Filled);
  if (g0 < 0 || e0 < 0 || g1 < 0 || e1 < 0) {
    throw DomainError("dispersive shift needs labeled |0±⟩ and |1±⟩ states");
  }
  const auto& E = sol.energies;
  return (E(e1) - E(e0)) - (E(g1) - E(g0));
}

}  // namespace cos2phi
