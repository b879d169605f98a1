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

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <cstdint>
#include <numbers>
#include <string>

namespace cos2phi {

using cplx = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;
using RealSparse = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Index = Eigen::Index;

inline constexpr double kPi = std::numbers::pi;

// Energies are frequencies E/h in GHz throughout.
struct CircuitParams {
  double eps_J = 15.0;
  double eps_C = 2.0;
  double eps_L = 1.0;
  double x = 0.02;
  double delta_J = 0.0;
  double delta_C = 0.0;
  double delta_A = 0.0;
  double delta_L = 0.0;

  double z() const { return eps_L / eps_J; }
  bool semiclassical_warning() const { return z() >= 0.3; }
  // Area disorder enters as equal junction and capacitive disorder.
  double junction_asymmetry() const { return delta_A != 0.0 ? delta_A : delta_J; }
  double capacitive_asymmetry() const { return delta_A != 0.0 ? delta_A : delta_C; }
  void validate() const;
};

struct BiasPoint {
  double phi_ext = kPi;
  double N_g = 0.0;

  void validate() const;
  // |φext − 4π·round(φext/4π)|
  double phi_ext_folded() const;
  double N_g_reduced() const;
  double phi_ext_mod_4pi() const;
};

struct BasisTruncation {
  int N0 = 7;
  int p0 = 7;
  int q0 = 30;
  // Not part of the fingerprint.
  std::size_t max_dim = 4'000'000;

  Index charge_dim() const { return 2 * N0 + 1; }
  Index dim() const {
    return charge_dim() * static_cast<Index>(p0 + 1) * static_cast<Index>(q0 + 1);
  }
  void validate() const;
  std::uint64_t fingerprint() const;
  bool same_basis(const BasisTruncation& o) const {
    return N0 == o.N0 && p0 == o.p0 && q0 == o.q0;
  }
  std::string str() const;
};

struct PhysicalConstants {
  double h = 6.62607015e-34;
  double hbar = 6.62607015e-34 / (2.0 * kPi);
  double kB = 1.380649e-23;
  double e = 1.602176634e-19;
  double R_K = 6.62607015e-34 / (1.602176634e-19 * 1.602176634e-19);
  double gap = 2.1 * 1.380649e-23;
  double T = 0.016;

  double phi0() const { return hbar / (2.0 * e); }
  void validate() const;
};

// Oscillator coefficients after the disorder dressing.
struct ModeScales {
  double eps_C_junction;  // εC/(1−δC²)
  double eps_L_eff;       // εL/(1−δL²)
  double omega_a;         // √(8 εC_junction εL_eff)
  double omega_b;         // √(16 x εC εL_eff)
  double phi_zpf;         // (8 εC_junction/εL_eff)^{1/4}
  double eta_zpf;         // ½ (εL_eff/(x εC))^{1/4}
  double theta_zpf;       // 1/(2 ηzpf)

  static ModeScales from(const CircuitParams& p);
};

std::uint64_t hash_mix(std::uint64_t h, std::uint64_t v);
std::uint64_t hash_double(std::uint64_t h, double v);

class Operator {
 public:
  Operator() = default;
  Operator(SparseMatrix m, std::uint64_t fingerprint);

  static Operator zero(Index dim, std::uint64_t fingerprint);
  static Operator identity(Index dim, std::uint64_t fingerprint);

  Index dim() const { return m_.rows(); }
  std::uint64_t fingerprint() const { return fp_; }
  const SparseMatrix& matrix() const { return m_; }
  Index nonzeros() const { return m_.nonZeros(); }

  Operator adjoint() const;
  Operator& operator+=(const Operator& o);
  Operator& operator-=(const Operator& o);
  Operator& operator*=(cplx s);
  friend Operator operator+(Operator a, const Operator& b) { return a += b; }
  friend Operator operator-(Operator a, const Operator& b) { return a -= b; }
  friend Operator operator*(cplx s, Operator a) { return a *= s; }
  friend Operator operator*(const Operator& a, const Operator& b);
  Operator commutator(const Operator& o) const;

  double max_abs() const;
  double hermiticity_defect() const;
  bool is_hermitian(double rel_tol = 1e-12) const;
  Eigen::MatrixXcd dense() const;

  void apply(const cplx* x, cplx* y) const;
  Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const;
  cplx matrix_element(const Eigen::VectorXcd& bra, const Eigen::VectorXcd& ket) const;

 protected:
  void require_same_basis(const Operator& o) const;

  SparseMatrix m_;
  std::uint64_t fp_ = 0;
};

// An Operator whose hermiticity has been verified at construction.
class HermitianOperator : public Operator {
 public:
  HermitianOperator() = default;
  explicit HermitianOperator(Operator op, double rel_tol = 1e-12);
};

struct Primitives {
  BasisTruncation trunc;
  ModeScales scales;
  HermitianOperator N;        // Cooper-pair number on the island
  HermitianOperator cos_phi;  // ½(e^{iφ} + e^{−iφ})
  HermitianOperator sin_phi;
  Operator a, a_dag, b, b_dag;
  HermitianOperator eta;      // i ηzpf (b† − b)
  HermitianOperator theta;    // θzpf (b + b†)
  HermitianOperator phi;      // ϕ − φext = φzpf (a + a†)
  HermitianOperator n;        // i (a† − a)/(2 φzpf)
  HermitianOperator identity;
};

// Single-mode factors.
RealSparse charge_number(int N0);
// e^{ikφ} on the charge lattice: |N⟩ → |N+k⟩.
RealSparse charge_shift(int N0, int k);
RealSparse annihilation(int nmax);
RealSparse identity_factor(Index n);
RealSparse fock_parity(int nmax);
RealSparse charge_parity(int N0);

// Embeds charge ⊗ ϕ-mode ⊗ θ-mode factors into the full space.
SparseMatrix kron3(const SparseMatrix& charge, const SparseMatrix& amode,
                   const SparseMatrix& bmode);
SparseMatrix to_complex(const RealSparse& m);

Primitives build_primitives(const BasisTruncation& trunc, const CircuitParams& params);

enum class TrigMethod { Laguerre, Quadrature };

// cos or sin of λ(a + a†) + phase on the (nmax+1)-dim Fock space.
Eigen::MatrixXd displaced_trig(double lambda, double phase, int nmax, bool sine,
                               TrigMethod method = TrigMethod::Laguerre);

// cos[½·phi_zpf·(a† + a) + ½·offset]
HermitianOperator displaced_cosine(double phi_zpf, double offset, int p0,
                                   TrigMethod method = TrigMethod::Laguerre);

std::uint64_t mode_fingerprint(char mode, int nmax);

}  // namespace cos2phi
