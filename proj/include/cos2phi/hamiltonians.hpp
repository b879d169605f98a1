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

#include <string>
#include <utility>

#include "cos2phi/model.hpp"

namespace cos2phi {

struct ToyParams {
  double E_J = 50.0;
  double E_C = 1.0;
  double N_g = 0.0;
  int N0_toy = 40;
  void validate() const;
};

// 4E_C(N − N_g)² − E_J cos 2φ on N ∈ [−N0_toy, N0_toy].
HermitianOperator toy_hamiltonian(const ToyParams& tp);

HermitianOperator full_hamiltonian(const CircuitParams& params, const BiasPoint& bias,
                                   const BasisTruncation& trunc);

// Returns the unperturbed part only when `with_disorder` is false; the
// dressed mode scales are still used.
HermitianOperator full_hamiltonian(const CircuitParams& params, const BiasPoint& bias,
                                   const BasisTruncation& trunc, bool with_disorder);

// diag((−1)^N) ⊗ (−1)^{a†a} ⊗ I
HermitianOperator parity_operator(const BasisTruncation& trunc);

enum class DisorderKind { J, C, A, L };
const char* to_string(DisorderKind k);
DisorderKind disorder_kind_from(const std::string& s);
// Copy of `base` with only the given kind of disorder set to delta.
CircuitParams with_disorder(CircuitParams base, DisorderKind kind, double delta);

struct DisorderTerm {
  Operator op;
  ModeScales dressing;
  // Human-readable record of the coefficient dressing.
  std::string metadata;
};

// H′ for the requested kind, reading δ from the matching params field.
DisorderTerm disorder_perturbation(DisorderKind kind, const CircuitParams& params,
                                   const BiasPoint& bias, const BasisTruncation& trunc);

// εL (ϕ − φext) θ built with the dressed zero-point amplitudes of `params`.
Operator inductive_coupling_slope(const CircuitParams& params, const BasisTruncation& trunc);

struct EffectiveParams {
  double z = 0;
  double c1 = 0, c2 = 0, c3 = 0, c4 = 0;
  double kinetic = 0;
  double phi_ext_folded = 0;
};

enum class EffectiveOrder { Leading, Extended };

EffectiveParams effective_coefficients(const CircuitParams& params, const BiasPoint& bias,
                                       EffectiveOrder order);

struct EffectiveTruncation {
  int N0 = 20;
  int q0 = 30;
};

// Operator on charge ⊗ θ-mode.
std::pair<HermitianOperator, EffectiveParams> effective_hamiltonian(
    const CircuitParams& params, const BiasPoint& bias, EffectiveOrder order,
    const EffectiveTruncation& trunc = {});

struct NormalModeReport {
  double plasmon = 0;          // √(16 x εL εC)
  double self_resonance = 0;   // √(8 εJ εC)
  double quartic = 0;          // −εJ/24
  double coupling_ratio = 0;   // z in (φ̃n + z θn)⁴
};

struct ParitySectors {
  HermitianOperator plus;
  HermitianOperator minus;
  NormalModeReport modes;
};

// Only defined at φext = π.
ParitySectors parity_sector_hamiltonians(const CircuitParams& params, const BiasPoint& bias,
                                         const EffectiveTruncation& trunc = {});

}  // namespace cos2phi
