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
#include <cmath>
#include <set>

#include "doctest.h"

#include "cos2phi/analysis.hpp"
#include "cos2phi/errors.hpp"
#include "cos2phi/mathieu.hpp"

using namespace cos2phi;

namespace {

const BasisTruncation kBase{7, 7, 30};

struct Reference {
  EigenSolution sol;
  std::vector<StateLabel> labels;
};

const Reference& reference() {
  static const Reference r = [] {
    Reference x;
    x.sol = direct_diagonalizer()(CircuitParams{}, {kPi, 0.0}, kBase, 6);
    x.labels = label_states(x.sol, {kPi, 0.0}, kBase);
    return x;
  }();
  return r;
}

}  // namespace

TEST_CASE("labels at the symmetric point") {
  const auto& [sol, labels] = reference();
  std::set<std::string> first;
  for (int i = 0; i < 4; ++i) first.insert(labels[std::size_t(i)].str());
  CHECK(first == std::set<std::string>{"|0+⟩", "|0-⟩", "|1+⟩", "|1-⟩"});
  CHECK(labels[0].str() == "|0+⟩");
  CHECK(std::abs(labels[0].parity_expectation - 1.0) < 1e-6);
  for (const auto& l : labels) {
    CHECK((l.fluxon == Fluxon::Plus || l.fluxon == Fluxon::Minus));
    CHECK(l.parity == (l.fluxon == Fluxon::Plus ? 1 : -1));
    CHECK_FALSE(l.ambiguous);
  }
  const double pair = sol.energies(find_state(labels, 1, Fluxon::Plus)) - sol.energies(0);
  CHECK(pair > 0.6);
  CHECK(pair < 1.0);
  CHECK(find_state(labels, 0, Fluxon::Hollow) == 0);
  CHECK(find_state(labels, 7, Fluxon::Plus) == -1);
}

TEST_CASE("labels off the symmetric point") {
  // Detuning below the plasmon: doublets stay ordered.
  const BiasPoint b{0.97 * kPi, 0.0};
  const EigenSolution s = direct_diagonalizer()(CircuitParams{}, b, kBase, 6);
  const auto labels = label_states(s, b, kBase);
  for (int i = 0; i < 6; ++i) {
    CAPTURE(i);
    const auto& l = labels[std::size_t(i)];
    CHECK(l.m == i / 2);
    CHECK(l.fluxon == (i % 2 == 0 ? Fluxon::Hollow : Fluxon::Filled));
  }
  // Detuning above the plasmon: each branch is still its own ladder.
  const BiasPoint far{0.9 * kPi, 0.0};
  const EigenSolution f = direct_diagonalizer()(CircuitParams{}, far, kBase, 8);
  const auto fl = label_states(f, far, kBase);
  for (Fluxon br : {Fluxon::Hollow, Fluxon::Filled}) {
    std::vector<double> e;
    for (int m = 0; m < 3; ++m) {
      const int i = find_state(fl, m, br);
      if (i < 0) break;
      e.push_back(f.energies(i));
    }
    REQUIRE(e.size() >= 2);
    for (std::size_t k = 1; k < e.size(); ++k) {
      CHECK(e[k] > e[k - 1]);
      CHECK(std::abs(e[k] - e[k - 1] - 0.77) < 0.1);
    }
  }
  CHECK(f.energies(find_state(fl, 0, Fluxon::Filled)) - f.energies(0) > 0.8);
  const BiasPoint zero{2.0 * kPi, 0.0};
  const EigenSolution z = direct_diagonalizer()(CircuitParams{}, zero, {3, 3, 8}, 4);
  for (const auto& l : label_states(z, zero, {3, 3, 8})) CHECK(l.str() == "unlabeled");
}

TEST_CASE("flux sweep") {
  const std::vector<double> grid{kPi - 0.05, kPi, kPi + 0.05};
  const SweepResult r = flux_sweep(CircuitParams{}, grid, 0.0, 6, kBase);
  REQUIRE(r.rows.size() == 3);
  CHECK(r.grid() == grid);
  const auto e1 = r.column("E1-E0");
  CHECK(e1[1] < 1e-2 * r.rows[1].scalars.at("E2-E0"));
  // Plasmon branch nearly flux independent.
  for (const auto& row : r.rows) {
    const int g = find_state(row.labels, 0, Fluxon::Hollow);
    const int p = find_state(row.labels, 1, Fluxon::Hollow);
    const double w = row.energies(p) - row.energies(g);
    const double ref = reference().sol.energies(find_state(reference().labels, 1, Fluxon::Plus)) -
                       reference().sol.energies(0);
    CHECK(w == doctest::Approx(ref).epsilon(0.02));
    WARN_MESSAGE(std::abs(w / 0.8 - 1.0) <= 0.02, "plasmon " << w << " GHz");
  }
  const auto& mid = r.rows[1];
  CHECK((mid.energies - reference().sol.energies).cwiseAbs().maxCoeff() < 1e-9);

  SweepOptions two;
  two.jobs = 2;
  const SweepResult p = flux_sweep(CircuitParams{}, grid, 0.0, 6, kBase, two);
  for (std::size_t i = 0; i < 3; ++i) CHECK(p.rows[i].energies == r.rows[i].energies);

  // χ is even about the symmetric point.
  const double chl = dispersive_shift(EigenSolution{r.rows[0].energies, {}, {}, 0, {}},
                                      r.rows[0].labels);
  const double chr = dispersive_shift(EigenSolution{r.rows[2].energies, {}, {}, 0, {}},
                                      r.rows[2].labels);
  CHECK(chl == doctest::Approx(chr).epsilon(1e-6));
}

TEST_CASE("sweep errors carry the grid index") {
  SweepOptions o;
  o.diagonalize = [](const CircuitParams& p, const BiasPoint& b, const BasisTruncation& t,
                      Index k) {
    if (b.phi_ext > 1.0) throw ConvergenceError("boom");
    return direct_diagonalizer()(p, b, t, k);
  };
  try {
    flux_sweep(CircuitParams{}, {0.5, 2.0}, 0.0, 2, {2, 2, 2}, o);
    FAIL("expected an error");
  } catch (const ConvergenceError& e) {
    CHECK(std::string(e.what()).find("grid index 1") != std::string::npos);
  }
}

TEST_CASE("charge dispersion") {
  const CircuitParams p;
  // Wide charge basis: the N → 1 − N symmetry at Ng = ½ needs the edge to be irrelevant.
  const BasisTruncation t{12, 4, 10};
  const auto grid = uniform_grid(0.0, 1.0, 11);
  const ChargeDispersion d = charge_dispersion(p, kPi, t, grid);
  CHECK(d.epsilon >= 0);
  const auto [mn, mx] = std::minmax_element(d.splitting.begin(), d.splitting.end());
  CHECK(d.epsilon == doctest::Approx(*mx - *mn).epsilon(1e-12));
  CHECK(d.delta_E == d.splitting.front());
  // The swing closes at Ng = ½ at δ = 0.
  CHECK(d.splitting[5] < 1e-3 * d.delta_E);
  CHECK_THROWS_AS(charge_dispersion(p, kPi, t, {0.2, 0.5, 1.0}), DomainError);
  CHECK_THROWS_AS(charge_dispersion(p, kPi, t, {0.0, 0.5}), DomainError);
}

TEST_CASE("disorder sweeps") {
  const CircuitParams p;
  const BasisTruncation t{5, 7, 20};
  const std::vector<double> ng{0.0, 0.5, 1.0};
  std::map<DisorderKind, SweepResult> r;
  for (auto k : {DisorderKind::J, DisorderKind::C, DisorderKind::A, DisorderKind::L}) {
    r[k] = disorder_sweep(p, k, {0.0, 0.05, 0.2}, t, ng);
  }
  for (auto& [k, s] : r) {
    CHECK(s.rows[0].scalars.at("epsilon") == r[DisorderKind::L].rows[0].scalars.at("epsilon"));
    CHECK(s.rows[0].scalars.at("delta_E") == r[DisorderKind::L].rows[0].scalars.at("delta_E"));
  }
  const double eL = r[DisorderKind::L].rows[2].scalars.at("epsilon");
  for (auto k : {DisorderKind::J, DisorderKind::C, DisorderKind::A}) {
    CHECK(eL < r[k].rows[2].scalars.at("epsilon"));
  }
  auto slope = [&](DisorderKind k) {
    const auto& rows = r[k].rows;
    return (rows[1].scalars.at("delta_E") - rows[0].scalars.at("delta_E")) / 0.05;
  };
  MESSAGE("initial dE slopes: A " << slope(DisorderKind::A) << ", L " << slope(DisorderKind::L));
  CHECK(slope(DisorderKind::A) == doctest::Approx(slope(DisorderKind::L)).epsilon(0.25));
  CHECK_THROWS_AS(disorder_sweep(p, DisorderKind::L, {0.95}, t, ng), DomainError);

  const BasisTruncation big = disorder_truncation(DisorderKind::L, 0.9, kBase);
  CHECK(big.N0 >= 16);
  CHECK(disorder_truncation(DisorderKind::J, 0.9, kBase).same_basis(kBase));
}

TEST_CASE("phase-space wavefunctions") {
  const auto& [sol, labels] = reference();
  const CircuitParams p;
  const BiasPoint b{kPi, 0.0};
  const PhaseGrid g{uniform_grid(-kPi, kPi, 65), uniform_grid(-kPi, 3.0 * kPi, 129)};
  const double dphi = g.phi[1] - g.phi[0], dvar = g.varphi[1] - g.varphi[0];
  for (Index s = 0; s < 4; ++s) {
    const Eigen::MatrixXcd w = wavefunction_phase(sol, s, p, b, kBase, g);
    CHECK(w.squaredNorm() * dphi * dvar == doctest::Approx(1.0).epsilon(1e-9));
  }
  EigenSolution rotated = sol;
  rotated.vectors.col(1) *= std::polar(1.0, 0.8);
  const Eigen::MatrixXcd a = wavefunction_phase(sol, 1, p, b, kBase, g);
  const Eigen::MatrixXcd c = wavefunction_phase(rotated, 1, p, b, kBase, g);
  CHECK((a.cwiseAbs() - c.cwiseAbs()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("charge wavefunctions have the labeled parity support") {
  const auto& [sol, labels] = reference();
  const CircuitParams p;
  const BiasPoint b{kPi, 0.0};
  for (Index s = 0; s < 6; ++s) {
    const Eigen::VectorXcd c = wavefunction_charge(sol, s, p, b, kBase);
    CHECK(c.squaredNorm() == doctest::Approx(1.0).epsilon(1e-9));
    const int parity = labels[std::size_t(s)].parity;
    double wrong = 0;
    for (int N = -kBase.N0; N <= kBase.N0; ++N) {
      const bool even = N % 2 == 0;
      if (even != (parity > 0)) wrong = std::max(wrong, std::abs(c(N + kBase.N0)));
    }
    CAPTURE(s);
    CHECK(wrong < 1e-8);
  }
  // |1±⟩ envelopes change sign once across the allowed charges.
  for (Fluxon f : {Fluxon::Plus, Fluxon::Minus}) {
    const int s = find_state(labels, 1, f);
    const Eigen::VectorXcd c = wavefunction_charge(sol, s, p, b, kBase);
    const int start = f == Fluxon::Plus ? 0 : 1;
    int changes = 0;
    double prev = 0;
    for (int N = -kBase.N0 + ((kBase.N0 + start) % 2); N <= kBase.N0; N += 2) {
      const double v = c(N + kBase.N0).real();
      if (std::abs(v) < 1e-3) continue;
      if (prev != 0 && (v > 0) != (prev > 0)) ++changes;
      prev = v;
    }
    CHECK(changes == 1);
  }
}

TEST_CASE("oscillator wavefunctions are orthonormal") {
  const double zpf = 1.3;
  const int nmax = 8;
  const int M = 4001;
  const double L = 14.0 * zpf, dx = 2 * L / (M - 1);
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(nmax + 1, nmax + 1);
  for (int i = 0; i < M; ++i) {
    const Eigen::VectorXd v = oscillator_wavefunctions(-L + i * dx, zpf, nmax);
    gram += v * v.transpose() * dx;
  }
  CHECK((gram - Eigen::MatrixXd::Identity(nmax + 1, nmax + 1)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("normalized matrix elements and selection rules") {
  const auto& [sol, labels] = reference();
  const Primitives P = build_primitives(kBase, CircuitParams{});
  const int e0 = find_state(labels, 0, Fluxon::Minus);
  const int p1 = find_state(labels, 1, Fluxon::Plus);
  const MatrixElements eta = normalized_matrix_elements(sol, P.eta);
  const MatrixElements phi = normalized_matrix_elements(sol, P.phi);
  CHECK(eta.values[std::size_t(e0)] < 1e-6);
  CHECK(eta.values[std::size_t(p1)] > 0.9);
  CHECK(phi.values[std::size_t(e0)] > 0.9);
  CHECK(std::abs(P.eta.matrix_element(sol.vector(e0), sol.vector(0))) < 1e-8);
  CHECK(std::abs(P.phi.matrix_element(sol.vector(e0), sol.vector(0))) > 1e-3);
  for (double v : eta.values) CHECK(v >= 0);
  const MatrixElements op = normalized_matrix_elements(sol, P.phi, 0, MatrixElementNorm::Operator);
  CHECK(op.completeness <= 1.0 + 1e-12);
  MESSAGE("phi operator-normalized qubit element " << op.values[std::size_t(e0)]);
}

TEST_CASE("completeness over a full eigenbasis") {
  const BasisTruncation t{2, 3, 6};
  SolverOptions o;
  o.backend = Backend::Dense;
  const EigenSolution full = direct_diagonalizer(1e-10, o)(CircuitParams{}, {kPi, 0.0}, t, t.dim());
  const Primitives P = build_primitives(t, CircuitParams{});
  for (const HermitianOperator* op : {&P.eta, &P.phi}) {
    const MatrixElements m = normalized_matrix_elements(full, *op, 0, MatrixElementNorm::Operator);
    double sum = 0;
    for (double v : m.values) {
      CHECK(v >= 0);
      sum += v;
    }
    CHECK(std::abs(sum - 1.0) < 1e-6);
    CHECK(std::abs(m.completeness - 1.0) < 1e-6);
    const MatrixElements s = normalized_matrix_elements(full, *op, 0, MatrixElementNorm::Subspace);
    for (std::size_t i = 0; i < s.values.size(); ++i) CHECK(std::abs(s.values[i] - m.values[i]) < 1e-9);
  }
}

TEST_CASE("dispersive shift needs the four labeled states") {
  const auto& [sol, labels] = reference();
  const double chi = dispersive_shift(sol, labels);
  CHECK(chi < 0);
  std::vector<StateLabel> two(labels.begin(), labels.begin() + 2);
  CHECK_THROWS_AS(dispersive_shift(sol, two), DomainError);
}
