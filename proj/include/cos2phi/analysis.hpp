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

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "cos2phi/eigensolver.hpp"
#include "cos2phi/hamiltonians.hpp"

namespace cos2phi {

enum class Fluxon { Plus, Minus, Filled, Hollow, Unlabeled };
// "+", "-", "•", "∘", "?"
const char* to_string(Fluxon f);

struct StateLabel {
  int m = 0;
  Fluxon fluxon = Fluxon::Unlabeled;
  int parity = 1;
  double parity_expectation = 0;
  double photon_number = 0;
  double confidence = 0;
  bool ambiguous = false;

  std::string str() const;
};

// Parity is the sign of ⟨(−1)^N (−1)^{a†a}⟩. At φext = π (mod 2π) m is the
// rank inside the parity chain and the fluxon symbol carries the parity.
// Elsewhere m is round(⟨b†b⟩ − ⟨b†b⟩_0) and the lower member of each m pair
// is ∘, the upper •.
std::vector<StateLabel> label_states(const EigenSolution& sol, const BiasPoint& bias,
                                     const BasisTruncation& trunc);

// Index of the state with plasmon number m and the given fluxon symbol. At
// φext = π, Hollow matches + and Filled matches −. Returns −1 when absent.
int find_state(const std::vector<StateLabel>& labels, int m, Fluxon f);

// Diagonalizes one point. The CLI swaps in a caching implementation.
using Diagonalizer = std::function<EigenSolution(const CircuitParams&, const BiasPoint&,
                                                 const BasisTruncation&, Index k)>;

// Builds the full Hamiltonian and solves with the parity operator as gauge.
Diagonalizer direct_diagonalizer(double tol = 1e-10, SolverOptions opts = {});

struct SweepRow {
  double x = 0;
  Eigen::VectorXd energies;
  std::vector<StateLabel> labels;
  std::map<std::string, double> scalars;
  BasisTruncation trunc;
  SolverMetadata meta;
  std::vector<std::string> flags;
};

struct SweepResult {
  std::string axis;
  Index k = 0;
  CircuitParams params;
  std::vector<SweepRow> rows;

  std::vector<double> grid() const;
  std::vector<double> column(const std::string& name) const;
};

struct SweepOptions {
  int jobs = 1;
  Diagonalizer diagonalize;
};

// Transition energies E_i − E_0 as scalars "E1-E0", "E2-E0", ...
SweepResult flux_sweep(const CircuitParams& params, const std::vector<double>& phi_ext_grid,
                       double N_g, Index k, const BasisTruncation& trunc,
                       const SweepOptions& opts = {});

// Least-squares slope of the fluxon transition E(0•) − E(0∘) against |φext − π|,
// in GHz per radian.
struct FluxonSlope {
  double slope = 0;
  double intercept = 0;
  std::vector<double> offsets;
  std::vector<double> transitions;
};
FluxonSlope fluxon_slope(const SweepResult& sweep);

struct ChargeDispersion {
  // E1 − E0 at Ng = 0.
  double delta_E = 0;
  // max − min of E1 − E0 over the grid.
  double epsilon = 0;
  std::vector<double> N_g;
  std::vector<double> splitting;
  bool unresolved = false;
};

constexpr double kUnresolvedEpsilon = 1e-9;

ChargeDispersion charge_dispersion(const CircuitParams& params, double phi_ext,
                                   const BasisTruncation& trunc, const std::vector<double>& N_g,
                                   const SweepOptions& opts = {});

// Basis used for the charge dispersion at a given disorder. Large δL shrinks
// ε below the truncation floor of the default basis.
BasisTruncation disorder_truncation(DisorderKind kind, double delta, const BasisTruncation& base);

// Scalars "delta_E", "epsilon"; flags "unresolved", "eps_not_decreasing",
// "dE_not_increasing".
SweepResult disorder_sweep(const CircuitParams& params, DisorderKind kind,
                           const std::vector<double>& deltas, const BasisTruncation& base,
                           const std::vector<double>& N_g, const SweepOptions& opts = {});

struct PhaseGrid {
  std::vector<double> phi;
  std::vector<double> varphi;
};

// ⟨φ, ϕ, θ = 0|ψ⟩ normalized on the grid, first sizeable sample real-positive.
// Rows follow phi, columns follow varphi.
Eigen::MatrixXcd wavefunction_phase(const EigenSolution& sol, Index state,
                                    const CircuitParams& params, const BiasPoint& bias,
                                    const BasisTruncation& trunc, const PhaseGrid& grid);

enum class ChargeProjection { Path, Marginal };

// ⟨N|ψ⟩ for N ∈ [−N0, N0], unit norm. Path: ψ evaluated along the approximate
// instanton path at θ = 0 and Fourier transformed in φ. Marginal: the
// N-resolved weight √Σ|c_Npq|² with the phase of the largest component.
Eigen::VectorXcd wavefunction_charge(const EigenSolution& sol, Index state,
                                     const CircuitParams& params, const BiasPoint& bias,
                                     const BasisTruncation& trunc,
                                     ChargeProjection mode = ChargeProjection::Path);

// Oscillator eigenfunctions ⟨x|n⟩ for n = 0..nmax where x = zpf·(a + a†).
Eigen::VectorXd oscillator_wavefunctions(double x, double zpf, int nmax);

enum class MatrixElementNorm { Subspace, Operator };

struct MatrixElements {
  // |⟨ψ|O|ground⟩|² / norm for every computed state ψ.
  std::vector<double> values;
  double norm = 0;
  // Σ over the computed states divided by ⟨g|O†O|g⟩.
  double completeness = 0;
  MatrixElementNorm mode = MatrixElementNorm::Subspace;
};

MatrixElements normalized_matrix_elements(const EigenSolution& sol, const Operator& op,
                                          Index ground = 0,
                                          MatrixElementNorm mode = MatrixElementNorm::Subspace);

// [E(1−) − E(0−)] − [E(1+) − E(0+)] in GHz, using ∘/• off the symmetric point.
double dispersive_shift(const EigenSolution& sol, const std::vector<StateLabel>& labels);

}  // namespace cos2phi
