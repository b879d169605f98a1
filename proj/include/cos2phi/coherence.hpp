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

#include <array>
#include <limits>
#include <string>
#include <vector>

#include "cos2phi/analysis.hpp"
#include "cos2phi/mathieu.hpp"

namespace cos2phi {

// Times are in ms; angular frequencies in rad/s.
inline constexpr double kInfiniteTime = std::numeric_limits<double>::infinity();
inline constexpr double kSentinelMatrixElement = 1e-10;
inline constexpr double kSentinelRate = 1e-12;  // per ms

enum class ChannelKind {
  Capacitive,
  Inductive,
  Purcell,
  Quasiparticle,
  Charge,
  Flux,
  Shot,
  CriticalCurrent
};
const char* to_string(ChannelKind k);
ChannelKind channel_kind_from(const std::string& s);
bool is_relaxation(ChannelKind k);

struct NoiseChannel {
  ChannelKind kind = ChannelKind::Capacitive;
  bool enabled = true;
  // Q for capacitive/inductive/purcell, x_qp for quasiparticle, √A_Ng for
  // charge, √A_φext/2π for flux, n_th/Q_cap for shot, √A_εJ/εJ for critical
  // current.
  double amplitude = 0;
  // Frequency (GHz) at which a quality factor is nominal; 0 when unused.
  double reference_GHz = 0;
  double exponent = 0;
  void validate() const;
};

std::vector<NoiseChannel> default_channels();
const NoiseChannel& channel(const std::vector<NoiseChannel>& chans, ChannelKind k);

// Q_cap·(ω_ref/|ω|)^exponent
double q_cap(double omega, double nominal = 1e6, double reference_GHz = 6.0,
             double exponent = 0.7);
// Q_ind·K0(x_ref) sinh(x_ref)/(K0(x) sinh(x)), x = ħ|ω|/2k_BT.
double q_ind(double omega, const PhysicalConstants& pc, double nominal = 500e6,
             double reference_GHz = 0.5);
// coth(ħω/2k_BT) = [S(ω) + S(−ω)] / [S(ω) − S(−ω)] for a thermal bath.
double detailed_balance(double omega, const PhysicalConstants& pc);

struct QubitPair {
  Index ground = 0;
  Index excited = 1;
  double splitting_GHz = 0;
};
QubitPair qubit_pair(const EigenSolution& sol, const std::vector<StateLabel>& labels);

struct ChannelResult {
  ChannelKind kind = ChannelKind::Capacitive;
  bool enabled = true;
  double time_ms = kInfiniteTime;
  double rate_per_ms = 0;
  // Largest normalized |⟨e|O|g⟩|² over the channel's elements.
  double matrix_element = 0;
  bool sentinel = false;
  std::string note;
};

// Relaxation channels from a labeled solution at the given truncation.
ChannelResult t1_channel(ChannelKind kind, const EigenSolution& sol,
                         const std::vector<StateLabel>& labels, const CircuitParams& params,
                         const BiasPoint& bias, const BasisTruncation& trunc,
                         const PhysicalConstants& pc, const NoiseChannel& chan);

// Normalized |⟨e|sin(φ_i/2)|g⟩|² for junction i = ±, φ_i = ϕ/2 ± φ.
std::array<double, 2> quasiparticle_matrix_elements(const EigenSolution& sol, const QubitPair& q,
                                                    const CircuitParams& params,
                                                    const BiasPoint& bias,
                                                    const BasisTruncation& trunc);

double tphi_charge(double epsilon_GHz);

struct DerivativeEstimate {
  double value = 0;
  double step = 0;
  int halvings = 0;
  std::vector<double> history;
};

// ∂²ΔE/∂φext² with Richardson step halving from h0 until successive
// estimates agree to `rel`.
DerivativeEstimate flux_curvature(const CircuitParams& params, const BiasPoint& bias,
                                  const BasisTruncation& trunc, const Diagonalizer& diag,
                                  double h0 = 1e-2, double rel = 0.01, int max_halvings = 24);
// ∂ΔE/∂εJ with both junctions scaled together, relative step h0.
DerivativeEstimate critical_current_slope(const CircuitParams& params, const BiasPoint& bias,
                                          const BasisTruncation& trunc, const Diagonalizer& diag,
                                          double h0 = 1e-3, double rel = 0.01,
                                          int max_halvings = 10);

double tphi_flux(double curvature_GHz_per_rad2, double sqrt_A_over_2pi);
double tphi_critical_current(double slope, double sqrt_A_rel, double eps_J);
double tphi_shot(double chi_GHz, double omega_p_GHz, const PhysicalConstants& pc,
                 double q_nominal = 1e6, double q_reference_GHz = 6.0, double q_exponent = 0.7);

struct CoherenceOptions {
  std::vector<double> N_g = uniform_grid(0.0, 1.0, 11);
  // Enlarge the basis for the charge dispersion at large δL.
  bool adaptive_epsilon_basis = true;
  Index levels = 6;
  SweepOptions sweep;
};

struct CoherenceReport {
  std::vector<ChannelResult> channels;
  double T1_ms = kInfiniteTime;
  double Tphi_ms = kInfiniteTime;
  double T2_ms = kInfiniteTime;
  CircuitParams params;
  BiasPoint bias;
  BasisTruncation trunc;
  BasisTruncation epsilon_trunc;
  double temperature = 0;
  double delta_E = 0;
  double epsilon = 0;
  bool epsilon_unresolved = false;
  double chi = 0;
  double plasmon = 0;
  DerivativeEstimate curvature;
  DerivativeEstimate current_slope;

  const ChannelResult& get(ChannelKind k) const;
};

CoherenceReport full_report(const CircuitParams& params, const BiasPoint& bias,
                            const BasisTruncation& trunc, const std::vector<NoiseChannel>& channels,
                            const PhysicalConstants& pc, const CoherenceOptions& opts = {});

// Combines per-channel results: 1/T2 = 1/(2T1) + 1/Tφ.
void combine(CoherenceReport& r);

}  // namespace cos2phi
