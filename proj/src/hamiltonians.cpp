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

#include "cos2phi/hamiltonians.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>
#include <sstream>
#include <vector>

#include "cos2phi/errors.hpp"

namespace cos2phi {
namespace {

const cplx kI(0.0, 1.0);

SparseMatrix diag_range(Index n, double scale) {
  SparseMatrix m(n, n);
  std::vector<Eigen::Triplet<cplx>> t;
  for (Index i = 0; i < n; ++i) {
    if (i != 0) t.emplace_back(i, i, scale * static_cast<double>(i));
  }
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

SparseMatrix dense_to_sparse(const Eigen::MatrixXd& d) {
  SparseMatrix m = d.cast<cplx>().sparseView(1.0, 0.0);
  m.makeCompressed();
  return m;
}

// Single-mode factors shared by the full Hamiltonian and its perturbations.
struct Factors {
  SparseMatrix ic, ia, ib;
  SparseMatrix charge;      // N − Ng
  SparseMatrix cos_phi, sin_phi;
  SparseMatrix eta, eta2;   // θ-mode
  SparseMatrix theta;
  SparseMatrix phi_a, n_a;  // ϕ-mode
  SparseMatrix num_a, num_b;
};

Factors make_factors(const BasisTruncation& t, const ModeScales& s, double Ng) {
  Factors f;
  f.ic = to_complex(identity_factor(t.charge_dim()));
  f.ia = to_complex(identity_factor(t.p0 + 1));
  f.ib = to_complex(identity_factor(t.q0 + 1));
  f.charge = to_complex(charge_number(t.N0)) - Ng * f.ic;
  const SparseMatrix up = to_complex(charge_shift(t.N0, 1));
  const SparseMatrix dn = to_complex(charge_shift(t.N0, -1));
  f.cos_phi = 0.5 * (up + dn);
  f.sin_phi = (-0.5 * kI) * (up - dn);
  const SparseMatrix am = to_complex(annihilation(t.p0));
  const SparseMatrix bm = to_complex(annihilation(t.q0));
  const SparseMatrix amd = am.adjoint();
  const SparseMatrix bmd = bm.adjoint();
  f.eta = (kI * s.eta_zpf) * (bmd - bm);
  {
    const SparseMatrix b1 = to_complex(annihilation(t.q0 + 1));
    const SparseMatrix e1 = (kI * s.eta_zpf) * (SparseMatrix(b1.adjoint()) - b1);
    f.eta2 = SparseMatrix((e1 * e1).pruned().topLeftCorner(t.q0 + 1, t.q0 + 1));
  }
  f.theta = s.theta_zpf * (bm + bmd);
  f.phi_a = s.phi_zpf * (am + amd);
  f.n_a = (kI / (2.0 * s.phi_zpf)) * (amd - am);
  f.num_a = diag_range(t.p0 + 1, 1.0);
  f.num_b = diag_range(t.q0 + 1, 1.0);
  return f;
}

SparseMatrix junction_term(const CircuitParams& p, const BiasPoint& bias,
                           const BasisTruncation& t, const Factors& f, const ModeScales& s) {
  const Eigen::MatrixXd ca = displaced_trig(0.5 * s.phi_zpf, 0.5 * bias.phi_ext, t.p0, false);
  return (-2.0 * p.eps_J) * kron3(f.cos_phi, dense_to_sparse(ca), f.ib);
}

SparseMatrix junction_asymmetry_term(double eps_J, double dJ, const BiasPoint& bias,
                                     const BasisTruncation& t, const Factors& f,
                                     const ModeScales& s) {
  const Eigen::MatrixXd sa = displaced_trig(0.5 * s.phi_zpf, 0.5 * bias.phi_ext, t.p0, true);
  return (2.0 * eps_J * dJ) * kron3(f.sin_phi, dense_to_sparse(sa), f.ib);
}

SparseMatrix capacitive_asymmetry_term(double eps_C, double dC, const BasisTruncation& t,
                                       const Factors& f) {
  (void)t;
  // n ⊗ (N − Ng − η)
  SparseMatrix nq = kron3(f.charge, f.n_a, f.ib) - kron3(f.ic, f.n_a, f.eta);
  return (-8.0 * eps_C * dC / (1.0 - dC * dC)) * nq;
}

SparseMatrix inductive_slope(double eps_L, const Factors& f) {
  return eps_L * kron3(f.ic, f.phi_a, f.theta);
}

std::string dressing_text(const ModeScales& s) {
  std::ostringstream os;
  os.precision(17);
  os << "eps_C_junction=" << s.eps_C_junction << " eps_L_eff=" << s.eps_L_eff
     << " phi_zpf=" << s.phi_zpf << " eta_zpf=" << s.eta_zpf;
  return os.str();
}

}  // namespace

void ToyParams::validate() const {
  if (!(E_J >= 0) || !(E_C > 0) || N0_toy < 1 || !std::isfinite(N_g)) {
    throw DomainError("invalid toy-model parameters");
  }
}

HermitianOperator toy_hamiltonian(const ToyParams& tp) {
  tp.validate();
  const Index n = 2 * tp.N0_toy + 1;
  std::vector<Eigen::Triplet<cplx>> t;
  for (Index i = 0; i < n; ++i) {
    const double N = static_cast<double>(i - tp.N0_toy);
    t.emplace_back(i, i, 4.0 * tp.E_C * (N - tp.N_g) * (N - tp.N_g));
    if (tp.E_J != 0.0 && i + 2 < n) {
      t.emplace_back(i, i + 2, -0.5 * tp.E_J);
      t.emplace_back(i + 2, i, -0.5 * tp.E_J);
    }
  }
  SparseMatrix m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  return HermitianOperator(Operator(std::move(m), mode_fingerprint('t', tp.N0_toy)));
}

HermitianOperator full_hamiltonian(const CircuitParams& params, const BiasPoint& bias,
                                   const BasisTruncation& trunc) {
  return full_hamiltonian(params, bias, trunc, true);
}

HermitianOperator full_hamiltonian(const CircuitParams& p, const BiasPoint& bias,
                                   const BasisTruncation& t, bool with_dis) {
  p.validate();
  bias.validate();
  t.validate();
  const ModeScales s = ModeScales::from(p);
  const Factors f = make_factors(t, s, bias.N_g);

  SparseMatrix h = s.omega_a * kron3(f.ic, f.num_a, f.ib);
  h += s.omega_b * kron3(f.ic, f.ia, f.num_b);
  const SparseMatrix q2 = (f.charge * f.charge).pruned();
  SparseMatrix kin = kron3(q2, f.ia, f.ib);
  kin -= 2.0 * kron3(f.charge, f.ia, f.eta);
  kin += kron3(f.ic, f.ia, f.eta2);
  h += (2.0 * s.eps_C_junction) * kin;
  h += junction_term(p, bias, t, f, s);

  if (with_dis) {
    const double dJ = p.junction_asymmetry();
    const double dC = p.capacitive_asymmetry();
    if (dJ != 0.0) h += junction_asymmetry_term(p.eps_J, dJ, bias, t, f, s);
    if (dC != 0.0) h += capacitive_asymmetry_term(p.eps_C, dC, t, f);
    if (p.delta_L != 0.0) {
      const double dl = p.delta_L;
      h += (dl / (1.0 - dl * dl)) * inductive_slope(p.eps_L, f);
    }
  }
  h.prune(cplx(0.0, 0.0));
  return HermitianOperator(Operator(std::move(h), t.fingerprint()));
}

HermitianOperator parity_operator(const BasisTruncation& t) {
  t.validate();
  SparseMatrix m = kron3(to_complex(charge_parity(t.N0)), to_complex(fock_parity(t.p0)),
                         to_complex(identity_factor(t.q0 + 1)));
  return HermitianOperator(Operator(std::move(m), t.fingerprint()));
}

const char* to_string(DisorderKind k) {
  switch (k) {
    case DisorderKind::J: return "J";
    case DisorderKind::C: return "C";
    case DisorderKind::A: return "A";
    case DisorderKind::L: return "L";
  }
  return "?";
}

DisorderKind disorder_kind_from(const std::string& s) {
  if (s == "J" || s == "j") return DisorderKind::J;
  if (s == "C" || s == "c") return DisorderKind::C;
  if (s == "A" || s == "a") return DisorderKind::A;
  if (s == "L" || s == "l") return DisorderKind::L;
  throw DomainError("unknown disorder kind '" + s + "' (expected J, C, A or L)");
}

CircuitParams with_disorder(CircuitParams p, DisorderKind kind, double delta) {
  p.delta_J = p.delta_C = p.delta_A = p.delta_L = 0.0;
  switch (kind) {
    case DisorderKind::J: p.delta_J = delta; break;
    case DisorderKind::C: p.delta_C = delta; break;
    case DisorderKind::A: p.delta_A = delta; break;
    case DisorderKind::L: p.delta_L = delta; break;
  }
  return p;
}

DisorderTerm disorder_perturbation(DisorderKind kind, const CircuitParams& p,
                                   const BiasPoint& bias, const BasisTruncation& t) {
  double delta = 0.0;
  switch (kind) {
    case DisorderKind::J: delta = p.delta_J; break;
    case DisorderKind::C: delta = p.delta_C; break;
    case DisorderKind::A: delta = p.delta_A; break;
    case DisorderKind::L: delta = p.delta_L; break;
  }
  if (!(delta >= 0.0 && delta < 1.0)) throw DomainError("disorder parameter must lie in [0, 1)");
  bias.validate();
  t.validate();
  const ModeScales s = ModeScales::from(p);
  const Factors f = make_factors(t, s, bias.N_g);
  SparseMatrix h(t.dim(), t.dim());
  std::string meta;
  if (delta != 0.0) {
    switch (kind) {
      case DisorderKind::J:
        h = junction_asymmetry_term(p.eps_J, delta, bias, t, f, s);
        meta = "no dressing";
        break;
      case DisorderKind::C:
        h = capacitive_asymmetry_term(p.eps_C, delta, t, f);
        meta = "junction charging energy dressed: " + dressing_text(s);
        break;
      case DisorderKind::A:
        h = junction_asymmetry_term(p.eps_J, delta, bias, t, f, s) +
            capacitive_asymmetry_term(p.eps_C, delta, t, f);
        meta = "junction charging energy dressed: " + dressing_text(s);
        break;
      case DisorderKind::L:
        h = (delta / (1.0 - delta * delta)) * inductive_slope(p.eps_L, f);
        meta = "inductive energy dressed: " + dressing_text(s);
        break;
    }
  } else {
    meta = "zero";
  }
  h.prune(cplx(0.0, 0.0));
  return DisorderTerm{Operator(std::move(h), t.fingerprint()), s, meta};
}

Operator inductive_coupling_slope(const CircuitParams& p, const BasisTruncation& t) {
  t.validate();
  const ModeScales s = ModeScales::from(p);
  const Factors f = make_factors(t, s, 0.0);
  return Operator(inductive_slope(p.eps_L, f), t.fingerprint());
}

EffectiveParams effective_coefficients(const CircuitParams& p, const BiasPoint& bias,
                                       EffectiveOrder order) {
  p.validate();
  const double z = p.z();
  if (!(z < 0.3)) throw DomainError("effective Hamiltonian requires z = eps_L/eps_J < 0.3");
  EffectiveParams e;
  e.z = z;
  e.phi_ext_folded = bias.phi_ext_folded();
  const double d = kPi - e.phi_ext_folded;
  if (order == EffectiveOrder::Leading) {
    e.kinetic = 1.0 / (4.0 * (1.0 - z));
    e.c1 = -(16.0 / (3.0 * kPi)) * p.eps_L * d;
    e.c2 = -p.eps_J * (1.0 - 1.25 * z);
  } else {
    e.kinetic = 0.5 / (1.0 + 1.0 / ((1.0 + z) * (1.0 + z)));
    e.c1 = -p.eps_L * (16.0 / (3.0 * kPi) - 56.0 * z / (9.0 * kPi)) * d;
    e.c2 = -p.eps_J *
           (1.0 - 1.25 * z + (81.0 - 2.0 * kPi * kPi - 6.0 * d * d) * z * z / 48.0);
    e.c3 = p.eps_L * (16.0 / (45.0 * kPi) - 88.0 * z / (75.0 * kPi)) * d;
    e.c4 = -p.eps_L * (1.0 / 12.0 - 17.0 * z / 72.0);
  }
  return e;
}

std::pair<HermitianOperator, EffectiveParams> effective_hamiltonian(
    const CircuitParams& p, const BiasPoint& bias, EffectiveOrder order,
    const EffectiveTruncation& et) {
  const EffectiveParams e = effective_coefficients(p, bias, order);
  BasisTruncation t{et.N0, 0, et.q0};
  t.validate();
  const ModeScales s = ModeScales::from(CircuitParams{p.eps_J, p.eps_C, p.eps_L, p.x});
  const Factors f = make_factors(t, s, bias.N_g);
  auto two = [&](const SparseMatrix& c, const SparseMatrix& b) {
    SparseMatrix m = Eigen::kroneckerProduct(c, b).eval();
    return m;
  };
  const SparseMatrix q2 = (f.charge * f.charge).pruned();
  SparseMatrix kin = two(q2, f.ib) - 2.0 * two(f.charge, f.eta) + two(f.ic, f.eta2);
  SparseMatrix h = (4.0 * p.eps_C * e.kinetic) * kin;
  h += s.omega_b * two(f.ic, f.num_b);
  const double c[4] = {e.c1, e.c2, e.c3, e.c4};
  for (int k = 1; k <= 4; ++k) {
    if (c[k - 1] == 0.0) continue;
    const SparseMatrix ck = to_complex(charge_shift(t.N0, k)) + to_complex(charge_shift(t.N0, -k));
    h += (0.5 * c[k - 1]) * two(ck, f.ib);
  }
  h.prune(cplx(0.0, 0.0));
  const std::uint64_t fp = hash_mix(t.fingerprint(), 0xeffULL);
  return {HermitianOperator(Operator(std::move(h), fp)), e};
}

ParitySectors parity_sector_hamiltonians(const CircuitParams& p, const BiasPoint& bias,
                                         const EffectiveTruncation& et) {
  if (std::abs(bias.phi_ext_folded() - kPi) > 1e-12) {
    throw DomainError("parity-sector form is only defined at phi_ext = pi");
  }
  const EffectiveParams e = effective_coefficients(p, bias, EffectiveOrder::Leading);
  const int M = (et.N0 + 1) / 2;
  BasisTruncation t{M, 0, et.q0};
  t.validate();
  const ModeScales s = ModeScales::from(CircuitParams{p.eps_J, p.eps_C, p.eps_L, p.x});
  const Factors f = make_factors(t, s, 0.0);
  auto sector = [&](int k) {
    // 2Ñ + k − Ng
    SparseMatrix q = 2.0 * to_complex(charge_number(M)) + (k - bias.N_g) * f.ic;
    SparseMatrix q2 = (q * q).pruned();
    SparseMatrix kin = SparseMatrix(Eigen::kroneckerProduct(q2, f.ib)) -
                       2.0 * SparseMatrix(Eigen::kroneckerProduct(q, f.eta)) +
                       SparseMatrix(Eigen::kroneckerProduct(f.ic, f.eta2));
    SparseMatrix h = (4.0 * p.eps_C * e.kinetic) * kin;
    h += s.omega_b * SparseMatrix(Eigen::kroneckerProduct(f.ic, f.num_b));
    h += (0.5 * e.c2) * SparseMatrix(Eigen::kroneckerProduct(
                            SparseMatrix(f.cos_phi * 2.0), f.ib));
    h.prune(cplx(0.0, 0.0));
    return HermitianOperator(Operator(std::move(h), hash_mix(t.fingerprint(), 0x5ecULL)));
  };
  NormalModeReport r;
  r.plasmon = std::sqrt(16.0 * p.x * p.eps_L * p.eps_C);
  r.self_resonance = std::sqrt(8.0 * p.eps_J * p.eps_C);
  r.quartic = -p.eps_J / 24.0;
  r.coupling_ratio = p.z();
  return ParitySectors{sector(0), sector(1), r};
}

}  // namespace cos2phi
