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

#include "cos2phi/coherence.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>
#include <numbers>

#include "cos2phi/errors.hpp"

namespace cos2phi {
namespace {

constexpr double kGHz = 2.0 * kPi * 1e9;  // GHz → rad/s

double positive_only(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(what) + " must be positive");
  return v;
}

double time_from_rate(double rate_per_s) {
  const double per_ms = rate_per_s * 1e-3;
  return per_ms < kSentinelRate ? kInfiniteTime : 1.0 / per_ms;
}

double coth(double u) { return 1.0 / std::tanh(u); }

struct Element {
  Operator op;
  double energy_GHz;
};

// |⟨e|O|g⟩|², and the same normalized by ⟨g|O†O|g⟩.
std::pair<double, double> transition(const Operator& op, const Eigen::VectorXcd& g,
                                     const Eigen::VectorXcd& e) {
  const Eigen::VectorXcd og = op.apply(g);
  const double raw = std::norm(e.dot(og));
  const double full = og.squaredNorm();
  return {raw, full > 0 ? raw / full : 0.0};
}

// (C ⊗ A ⊗ I)·v with v laid out as charge-major, then a, then b.
Eigen::VectorXcd apply_kron(const Eigen::MatrixXcd& C, const Eigen::MatrixXcd& A,
                            const Eigen::VectorXcd& v, Index nb) {
  const Eigen::MatrixXcd K = Eigen::kroneckerProduct(C, A).eval();
  using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMat> V(v.data(), K.cols(), nb);
  RowMat W = K * V;
  return Eigen::Map<Eigen::VectorXcd>(W.data(), W.size());
}

// ⟨N|f(φ)|M⟩ by quadrature over φ ∈ [0, 4π).
Eigen::MatrixXcd charge_function(int N0, double (*f)(double)) {
  const int nc = 2 * N0 + 1;
  const int Q = 4 * nc + 16;
  Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(nc, nc);
  for (int j = 0; j < Q; ++j) {
    const double phi = 4.0 * kPi * j / Q;
    const double w = f(phi) / Q;
    for (int N = -N0; N <= N0; ++N)
      for (int M = -N0; M <= N0; ++M) C(N + N0, M + N0) += w * std::polar(1.0, (M - N) * phi);
  }
  return C;
}

}  // namespace

const char* to_string(ChannelKind k) {
  switch (k) {
    case ChannelKind::Capacitive: return "capacitive";
    case ChannelKind::Inductive: return "inductive";
    case ChannelKind::Purcell: return "purcell";
    case ChannelKind::Quasiparticle: return "quasiparticle";
    case ChannelKind::Charge: return "charge";
    case ChannelKind::Flux: return "flux";
    case ChannelKind::Shot: return "shot";
    case ChannelKind::CriticalCurrent: return "critical_current";
  }
  return "?";
}

ChannelKind channel_kind_from(const std::string& s) {
  for (ChannelKind k : {ChannelKind::Capacitive, ChannelKind::Inductive, ChannelKind::Purcell,
                        ChannelKind::Quasiparticle, ChannelKind::Charge, ChannelKind::Flux,
                        ChannelKind::Shot, ChannelKind::CriticalCurrent}) {
    if (s == to_string(k)) return k;
  }
  throw DomainError("unknown noise channel '" + s + "'");
}

bool is_relaxation(ChannelKind k) {
  return k == ChannelKind::Capacitive || k == ChannelKind::Inductive ||
         k == ChannelKind::Purcell || k == ChannelKind::Quasiparticle;
}

void NoiseChannel::validate() const {
  if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) {
    throw DomainError(std::string("channel ") + to_string(kind) + ": amplitude must be >= 0");
  }
  const bool needs_ref = kind == ChannelKind::Capacitive || kind == ChannelKind::Inductive ||
                         kind == ChannelKind::Purcell;
  if (needs_ref && !(reference_GHz > 0.0)) {
    throw DomainError(std::string("channel ") + to_string(kind) + ": reference frequency must be > 0");
  }
}

std::vector<NoiseChannel> default_channels() {
  return {
      {ChannelKind::Capacitive, true, 1e6, 6.0, 0.7},
      {ChannelKind::Inductive, true, 500e6, 0.5, 0.0},
      {ChannelKind::Purcell, true, 1e6, 6.0, 0.7},
      {ChannelKind::Quasiparticle, true, 3.3e-6, 0.0, 0.0},
      {ChannelKind::Charge, true, 1e-4, 0.0, 0.0},
      {ChannelKind::Flux, true, 3e-6, 0.0, 0.0},
      {ChannelKind::Shot, true, 1e-7, 0.0, 0.0},
      {ChannelKind::CriticalCurrent, true, 5e-7, 0.0, 0.0},
  };
}

const NoiseChannel& channel(const std::vector<NoiseChannel>& chans, ChannelKind k) {
  for (const auto& c : chans)
    if (c.kind == k) return c;
  throw DomainError(std::string("channel ") + to_string(k) + " not configured");
}

double q_cap(double omega, double nominal, double reference_GHz, double exponent) {
  if (omega == 0.0) throw DomainError("q_cap: omega must be nonzero");
  return nominal * std::pow(reference_GHz * kGHz / std::abs(omega), exponent);
}

double q_ind(double omega, const PhysicalConstants& pc, double nominal, double reference_GHz) {
  if (omega == 0.0) throw DomainError("q_ind: omega must be nonzero");
  positive_only(pc.T, "temperature");
  auto ks = [](double x) { return std::cyl_bessel_k(0.0, x) * std::sinh(x); };
  const double xr = pc.hbar * reference_GHz * kGHz / (2.0 * pc.kB * pc.T);
  const double x = pc.hbar * std::abs(omega) / (2.0 * pc.kB * pc.T);
  return nominal * ks(xr) / ks(x);
}

double detailed_balance(double omega, const PhysicalConstants& pc) {
  positive_only(pc.T, "temperature");
  return coth(pc.hbar * std::abs(omega) / (2.0 * pc.kB * pc.T));
}

QubitPair qubit_pair(const EigenSolution& sol, const std::vector<StateLabel>& labels) {
  const int g = find_state(labels, 0, Fluxon::Hollow);
  const int e = find_state(labels, 0, Fluxon::Filled);
  if (g < 0 || e < 0) throw DomainError("qubit states |0∘⟩, |0•⟩ are not labeled");
  return {g, e, sol.energies(e) - sol.energies(g)};
}

namespace {

// {|⟨e|sin(φ_i/2)|g⟩|², normalized} for i = ±.
std::array<std::pair<double, double>, 2> qp_elements(const EigenSolution& sol, const QubitPair& q,
                                                     const CircuitParams& params,
                                                     const BiasPoint& bias,
                                                     const BasisTruncation& trunc) {
  const ModeScales sc = ModeScales::from(params);
  const Index nb = trunc.q0 + 1;
  const Eigen::VectorXcd g = sol.vectors.col(q.ground);
  const Eigen::VectorXcd e = sol.vectors.col(q.excited);
  const Eigen::MatrixXcd ch = charge_function(trunc.N0, [](double p) { return std::cos(0.5 * p); });
  const Eigen::MatrixXcd sh = charge_function(trunc.N0, [](double p) { return std::sin(0.5 * p); });
  const Eigen::MatrixXcd c1 = charge_function(trunc.N0, [](double p) { return std::cos(p); });
  const Eigen::MatrixXcd s1 = charge_function(trunc.N0, [](double p) { return std::sin(p); });
  // ϕ = φext + φzpf(a + a†)
  auto trig = [&](double frac, bool sine) {
    return Eigen::MatrixXcd(
        displaced_trig(frac * sc.phi_zpf, frac * bias.phi_ext, trunc.p0, sine).cast<cplx>());
  };
  const Eigen::MatrixXcd s4 = trig(0.25, true), c4 = trig(0.25, false);
  const Eigen::MatrixXcd s2 = trig(0.5, true), c2 = trig(0.5, false);
  std::array<std::pair<double, double>, 2> out{};
  for (int i = 0; i < 2; ++i) {
    const double sgn = i == 0 ? 1.0 : -1.0;
    // sin(ϕ/4 ± φ/2) and cos(ϕ/2 ± φ)
    const Eigen::VectorXcd sg = apply_kron(ch, s4, g, nb) + sgn * apply_kron(sh, c4, g, nb);
    const double num = std::norm(e.dot(sg));
    const Eigen::VectorXcd cg = apply_kron(c1, c2, g, nb) - sgn * apply_kron(s1, s2, g, nb);
    const double den = 0.5 * (1.0 - g.dot(cg).real());
    out[i] = {num, den > 0 ? num / den : 0.0};
  }
  return out;
}

}  // namespace

std::array<double, 2> quasiparticle_matrix_elements(const EigenSolution& sol, const QubitPair& q,
                                                    const CircuitParams& params,
                                                    const BiasPoint& bias,
                                                    const BasisTruncation& trunc) {
  const auto e = qp_elements(sol, q, params, bias, trunc);
  return {e[0].second, e[1].second};
}

ChannelResult t1_channel(ChannelKind kind, const EigenSolution& sol,
                         const std::vector<StateLabel>& labels, const CircuitParams& params,
                         const BiasPoint& bias, const BasisTruncation& trunc,
                         const PhysicalConstants& pc, const NoiseChannel& chan) {
  if (!is_relaxation(kind)) throw UsageError("t1_channel called with a dephasing channel");
  pc.validate();
  chan.validate();
  const QubitPair q = qubit_pair(sol, labels);
  const double omega = std::abs(q.splitting_GHz) * kGHz;
  const double bal = detailed_balance(omega, pc);
  const Eigen::VectorXcd g = sol.vectors.col(q.ground);
  const Eigen::VectorXcd e = sol.vectors.col(q.excited);
  ChannelResult r;
  r.kind = kind;
  double rate = 0.0;

  if (kind == ChannelKind::Quasiparticle) {
    const auto me = qp_elements(sol, q, params, bias, trunc);
    const double dJ = params.junction_asymmetry();
    const double x = pc.hbar * omega / (2.0 * pc.kB * pc.T);
    for (int i = 0; i < 2; ++i) {
      r.matrix_element = std::max(r.matrix_element, me[i].second);
      if (me[i].second < kSentinelMatrixElement) continue;
      const double EJ = pc.h * params.eps_J * (i == 0 ? 1.0 + dJ : 1.0 - dJ) * 1e9;
      const double ReY = std::sqrt(2.0 / kPi) * (8.0 * EJ / (pc.R_K * pc.gap)) *
                         std::pow(2.0 * pc.gap / (pc.hbar * omega), 1.5) * chan.amplitude *
                         std::sqrt(x) * std::cyl_bessel_k(0.0, x) * std::sinh(x);
      rate += 8.0 * pc.phi0() * pc.phi0() * omega / pc.hbar * ReY * me[i].first * bal;
    }
    r.note = "sin(phi_i/2) evaluated on the 4pi double cover";
  } else {
    const Primitives P = build_primitives(trunc, params);
    std::vector<Element> elems;
    double Q = 0.0;
    if (kind == ChannelKind::Capacitive) {
      const double dC = params.capacitive_asymmetry();
      const Operator Nt = P.N - P.eta;
      elems.push_back({P.n + cplx(0.5) * Nt, 8.0 * params.eps_C / (1.0 + dC)});
      elems.push_back({P.n - cplx(0.5) * Nt, 8.0 * params.eps_C / (1.0 - dC)});
      Q = q_cap(omega, chan.amplitude, chan.reference_GHz, chan.exponent);
    } else if (kind == ChannelKind::Inductive) {
      const double dL = params.delta_L;
      elems.push_back({cplx(-0.5) * P.phi + P.theta, params.eps_L / (1.0 + dL)});
      elems.push_back({cplx(-0.5) * P.phi - P.theta, params.eps_L / (1.0 - dL)});
      Q = q_ind(omega, pc, chan.amplitude, chan.reference_GHz);
    } else {
      elems.push_back({P.eta, 8.0 * params.x * params.eps_C});
      Q = q_cap(omega, chan.amplitude, chan.reference_GHz, chan.exponent);
    }
    for (const auto& el : elems) {
      const auto [raw, norm] = transition(el.op, g, e);
      r.matrix_element = std::max(r.matrix_element, norm);
      if (norm < kSentinelMatrixElement) continue;
      rate += 2.0 * el.energy_GHz * kGHz * raw / Q * bal;
    }
  }
  r.time_ms = time_from_rate(rate);
  r.sentinel = std::isinf(r.time_ms);
  r.rate_per_ms = r.sentinel ? 0.0 : 1.0 / r.time_ms;
  return r;
}

double tphi_charge(double epsilon_GHz) {
  if (epsilon_GHz < 0.0) throw DomainError("charge dispersion must be >= 0");
  const double e = std::numbers::e;
  return time_from_rate(kPi / (4.0 * e * e) * epsilon_GHz * kGHz);
}

namespace {

double splitting(const Diagonalizer& diag, const CircuitParams& p, const BiasPoint& b,
                 const BasisTruncation& t) {
  const EigenSolution s = diag(p, b, t, 2);
  return s.energies(1) - s.energies(0);
}

template <class Est>
DerivativeEstimate richardson(Est estimate, double h0, double rel, int max_halvings, int order,
                              const char* what) {
  DerivativeEstimate d;
  double h = h0;
  double prev_coarse = estimate(h);
  double prev_extrap = std::numeric_limits<double>::quiet_NaN();
  const double f = std::pow(2.0, order);
  for (int i = 1; i <= max_halvings; ++i) {
    h *= 0.5;
    const double fine = estimate(h);
    const double ex = (f * fine - prev_coarse) / (f - 1.0);
    d.history.push_back(ex);
    d.halvings = i;
    d.step = h;
    d.value = ex;
    if (std::isfinite(prev_extrap) && std::abs(ex - prev_extrap) <= rel * std::abs(ex)) return d;
    prev_extrap = ex;
    prev_coarse = fine;
  }
  throw ConvergenceError(std::string(what) + " did not converge after " +
                             std::to_string(max_halvings) + " step halvings",
                         d.history);
}

}  // namespace

DerivativeEstimate flux_curvature(const CircuitParams& params, const BiasPoint& bias,
                                  const BasisTruncation& trunc, const Diagonalizer& diag,
                                  double h0, double rel, int max_halvings) {
  const double center = splitting(diag, params, bias, trunc);
  auto est = [&](double h) {
    const double up = splitting(diag, params, {bias.phi_ext + h, bias.N_g}, trunc);
    const double dn = splitting(diag, params, {bias.phi_ext - h, bias.N_g}, trunc);
    return (up - 2.0 * center + dn) / (h * h);
  };
  return richardson(est, h0, rel, max_halvings, 2, "flux curvature");
}

DerivativeEstimate critical_current_slope(const CircuitParams& params, const BiasPoint& bias,
                                          const BasisTruncation& trunc, const Diagonalizer& diag,
                                          double h0, double rel, int max_halvings) {
  auto est = [&](double h) {
    CircuitParams up = params, dn = params;
    up.eps_J *= 1.0 + h;
    dn.eps_J *= 1.0 - h;
    return (splitting(diag, up, bias, trunc) - splitting(diag, dn, bias, trunc)) /
           (2.0 * h * params.eps_J);
  };
  return richardson(est, h0, rel, max_halvings, 2, "critical-current slope");
}

double tphi_flux(double curvature, double sqrt_A_over_2pi) {
  const double a = 2.0 * kPi * sqrt_A_over_2pi;
  return time_from_rate(a * a * std::abs(curvature) * kGHz);
}

double tphi_critical_current(double slope, double sqrt_A_rel, double eps_J) {
  return time_from_rate(sqrt_A_rel * eps_J * std::abs(slope) * kGHz);
}

double tphi_shot(double chi_GHz, double omega_p_GHz, const PhysicalConstants& pc,
                 double q_nominal, double q_reference_GHz, double q_exponent) {
  positive_only(omega_p_GHz, "plasmon frequency");
  if (chi_GHz == 0.0 || pc.T <= 0.0) return kInfiniteTime;
  const double wp = omega_p_GHz * kGHz;
  const double nth = 1.0 / std::expm1(pc.hbar * wp / (pc.kB * pc.T));
  const double kappa = wp / q_cap(wp, q_nominal, q_reference_GHz, q_exponent);
  const double chi = chi_GHz * kGHz;
  return time_from_rate(nth * kappa * chi * chi / (chi * chi + kappa * kappa));
}

const ChannelResult& CoherenceReport::get(ChannelKind k) const {
  for (const auto& c : channels)
    if (c.kind == k) return c;
  throw UsageError(std::string("report has no channel ") + to_string(k));
}

void combine(CoherenceReport& r) {
  double r1 = 0.0, rphi = 0.0;
  for (const auto& c : r.channels) {
    if (!c.enabled || c.sentinel) continue;
    (is_relaxation(c.kind) ? r1 : rphi) += c.rate_per_ms;
  }
  r.T1_ms = r1 > 0 ? 1.0 / r1 : kInfiniteTime;
  r.Tphi_ms = rphi > 0 ? 1.0 / rphi : kInfiniteTime;
  const double r2 = 0.5 * r1 + rphi;
  r.T2_ms = r2 > 0 ? 1.0 / r2 : kInfiniteTime;
}

CoherenceReport full_report(const CircuitParams& params, const BiasPoint& bias,
                            const BasisTruncation& trunc, const std::vector<NoiseChannel>& channels,
                            const PhysicalConstants& pc, const CoherenceOptions& opts) {
  params.validate();
  bias.validate();
  pc.validate();
  for (const auto& c : channels) c.validate();
  const Diagonalizer diag = opts.sweep.diagonalize ? opts.sweep.diagonalize : direct_diagonalizer();
  CoherenceReport rep;
  rep.params = params;
  rep.bias = bias;
  rep.trunc = trunc;
  rep.temperature = pc.T;
  rep.epsilon_trunc = trunc;

  const EigenSolution sol = diag(params, bias, trunc, opts.levels);
  const auto labels = label_states(sol, bias, trunc);
  rep.delta_E = qubit_pair(sol, labels).splitting_GHz;

  auto finish = [](ChannelResult r) {
    r.sentinel = std::isinf(r.time_ms);
    r.rate_per_ms = r.sentinel ? 0.0 : 1.0 / r.time_ms;
    return r;
  };

  for (const auto& c : channels) {
    ChannelResult r;
    r.kind = c.kind;
    r.enabled = c.enabled;
    if (!c.enabled) {
      r.note = "disabled";
      rep.channels.push_back(r);
      continue;
    }
    switch (c.kind) {
      case ChannelKind::Capacitive:
      case ChannelKind::Inductive:
      case ChannelKind::Purcell:
      case ChannelKind::Quasiparticle:
        r = t1_channel(c.kind, sol, labels, params, bias, trunc, pc, c);
        break;
      case ChannelKind::Charge: {
        if (opts.adaptive_epsilon_basis) {
          rep.epsilon_trunc = disorder_truncation(DisorderKind::L, params.delta_L, trunc);
        }
        const ChargeDispersion cd =
            charge_dispersion(params, bias.phi_ext, rep.epsilon_trunc, opts.N_g, opts.sweep);
        rep.epsilon = cd.epsilon;
        rep.epsilon_unresolved = cd.unresolved;
        r.time_ms = tphi_charge(cd.epsilon);
        if (cd.unresolved) r.note = "epsilon below 1e-9 GHz (unresolved)";
        r = finish(r);
        break;
      }
      case ChannelKind::Flux:
        rep.curvature = flux_curvature(params, bias, trunc, diag);
        r.time_ms = tphi_flux(rep.curvature.value, c.amplitude);
        r = finish(r);
        break;
      case ChannelKind::Shot: {
        rep.chi = dispersive_shift(sol, labels);
        const int g0 = find_state(labels, 0, Fluxon::Hollow);
        const int g1 = find_state(labels, 1, Fluxon::Hollow);
        rep.plasmon = sol.energies(g1) - sol.energies(g0);
        NoiseChannel cap = default_channels().front();
        for (const auto& k : channels)
          if (k.kind == ChannelKind::Capacitive) cap = k;
        r.time_ms = tphi_shot(rep.chi, rep.plasmon, pc, cap.amplitude, cap.reference_GHz, cap.exponent);
        r = finish(r);
        break;
      }
      case ChannelKind::CriticalCurrent:
        rep.current_slope = critical_current_slope(params, bias, trunc, diag);
        r.time_ms = tphi_critical_current(rep.current_slope.value, c.amplitude, params.eps_J);
        r = finish(r);
        break;
    }
    r.enabled = true;
    rep.channels.push_back(r);
  }
  combine(rep);
  return rep;
}

}  // namespace cos2phi
