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

#include "cos2phi/model.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <bit>
#include <cmath>
#include <sstream>
#include <vector>

#include "cos2phi/errors.hpp"
#include "cos2phi/kernels.hpp"

namespace cos2phi {

void CircuitParams::validate() const {
  if (!(eps_J > 0) || !(eps_C > 0) || !(eps_L > 0) || !(x > 0)) {
    throw DomainError("circuit energies and x must be positive");
  }
  for (double d : {delta_J, delta_C, delta_A, delta_L}) {
    if (!(d >= 0.0 && d < 1.0)) throw DomainError("disorder parameters must lie in [0, 1)");
  }
  if (delta_A != 0.0 && (delta_J != 0.0 || delta_C != 0.0)) {
    throw DomainError("delta_A cannot be combined with delta_J or delta_C");
  }
}

void BiasPoint::validate() const {
  if (!std::isfinite(phi_ext) || !std::isfinite(N_g)) {
    throw DomainError("bias point must be finite");
  }
}

double BiasPoint::phi_ext_folded() const {
  return std::abs(phi_ext - 4.0 * kPi * std::round(phi_ext / (4.0 * kPi)));
}

double BiasPoint::N_g_reduced() const { return N_g - std::floor(N_g); }

double BiasPoint::phi_ext_mod_4pi() const {
  const double p = std::fmod(phi_ext, 4.0 * kPi);
  return p < 0 ? p + 4.0 * kPi : p;
}

void BasisTruncation::validate() const {
  if (N0 < 1 || p0 < 0 || q0 < 0) throw DomainError("invalid basis truncation " + str());
  const double d = static_cast<double>(2 * N0 + 1) * (p0 + 1) * (q0 + 1);
  if (d > static_cast<double>(max_dim)) {
    throw ResourceError("basis dimension " + std::to_string(static_cast<long long>(d)) +
                        " exceeds cap " + std::to_string(max_dim));
  }
}

std::uint64_t hash_mix(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  h ^= h >> 31;
  h *= 0xbf58476d1ce4e5b9ULL;
  return h ^ (h >> 29);
}

std::uint64_t hash_double(std::uint64_t h, double v) {
  return hash_mix(h, std::bit_cast<std::uint64_t>(v));
}

std::uint64_t BasisTruncation::fingerprint() const {
  std::uint64_t h = 0xc05f1ULL;
  h = hash_mix(h, static_cast<std::uint64_t>(N0));
  h = hash_mix(h, static_cast<std::uint64_t>(p0));
  h = hash_mix(h, static_cast<std::uint64_t>(q0));
  return h;
}

std::string BasisTruncation::str() const {
  std::ostringstream os;
  os << "(" << N0 << "," << p0 << "," << q0 << ")";
  return os.str();
}

void PhysicalConstants::validate() const {
  for (double v : {h, hbar, kB, e, R_K, gap, T}) {
    if (!(v > 0)) throw DomainError("physical constants and temperature must be positive");
  }
}

ModeScales ModeScales::from(const CircuitParams& p) {
  const double dc = p.capacitive_asymmetry();
  const double dl = p.delta_L;
  ModeScales s{};
  s.eps_C_junction = p.eps_C / (1.0 - dc * dc);
  s.eps_L_eff = p.eps_L / (1.0 - dl * dl);
  s.omega_a = std::sqrt(8.0 * s.eps_C_junction * s.eps_L_eff);
  s.omega_b = std::sqrt(16.0 * p.x * p.eps_C * s.eps_L_eff);
  s.phi_zpf = std::pow(8.0 * s.eps_C_junction / s.eps_L_eff, 0.25);
  s.eta_zpf = 0.5 * std::pow(s.eps_L_eff / (p.x * p.eps_C), 0.25);
  s.theta_zpf = 0.5 / s.eta_zpf;
  return s;
}

Operator::Operator(SparseMatrix m, std::uint64_t fingerprint)
    : m_(std::move(m)), fp_(fingerprint) {
  if (m_.rows() != m_.cols()) throw InternalError("operator must be square");
  m_.makeCompressed();
}

Operator Operator::zero(Index dim, std::uint64_t fingerprint) {
  return Operator(SparseMatrix(dim, dim), fingerprint);
}

Operator Operator::identity(Index dim, std::uint64_t fingerprint) {
  SparseMatrix m(dim, dim);
  m.setIdentity();
  return Operator(std::move(m), fingerprint);
}

void Operator::require_same_basis(const Operator& o) const {
  if (fp_ != o.fp_ || dim() != o.dim()) {
    throw UsageError("operators built on different bases cannot be combined");
  }
}

Operator Operator::adjoint() const {
  SparseMatrix t = m_.adjoint();
  return Operator(std::move(t), fp_);
}

Operator& Operator::operator+=(const Operator& o) {
  require_same_basis(o);
  m_ += o.m_;
  m_.makeCompressed();
  return *this;
}

Operator& Operator::operator-=(const Operator& o) {
  require_same_basis(o);
  m_ -= o.m_;
  m_.makeCompressed();
  return *this;
}

Operator& Operator::operator*=(cplx s) {
  m_ *= s;
  return *this;
}

Operator operator*(const Operator& a, const Operator& b) {
  a.require_same_basis(b);
  SparseMatrix p = (a.m_ * b.m_).pruned();
  return Operator(std::move(p), a.fp_);
}

Operator Operator::commutator(const Operator& o) const {
  return (*this) * o - o * (*this);
}

double Operator::max_abs() const {
  double mx = 0.0;
  for (Index k = 0; k < m_.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(m_, k); it; ++it) mx = std::max(mx, std::abs(it.value()));
  }
  return mx;
}

double Operator::hermiticity_defect() const {
  SparseMatrix d = m_ - SparseMatrix(m_.adjoint());
  double mx = 0.0;
  for (Index k = 0; k < d.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(d, k); it; ++it) mx = std::max(mx, std::abs(it.value()));
  }
  return mx;
}

bool Operator::is_hermitian(double rel_tol) const {
  return hermiticity_defect() <= rel_tol * std::max(max_abs(), 1e-300);
}

Eigen::MatrixXcd Operator::dense() const { return Eigen::MatrixXcd(m_); }

void Operator::apply(const cplx* x, cplx* y) const {
  static_assert(sizeof(SparseMatrix::StorageIndex) == sizeof(int));
  kernels::active().spmv(static_cast<std::size_t>(m_.rows()), m_.outerIndexPtr(),
                         m_.innerIndexPtr(), m_.valuePtr(), x, y);
}

Eigen::VectorXcd Operator::apply(const Eigen::VectorXcd& x) const {
  if (x.size() != dim()) throw UsageError("vector length does not match operator dimension");
  Eigen::VectorXcd y(dim());
  apply(x.data(), y.data());
  return y;
}

cplx Operator::matrix_element(const Eigen::VectorXcd& bra, const Eigen::VectorXcd& ket) const {
  const Eigen::VectorXcd hk = apply(ket);
  return kernels::active().dotc(static_cast<std::size_t>(dim()), bra.data(), hk.data());
}

HermitianOperator::HermitianOperator(Operator op, double rel_tol) : Operator(std::move(op)) {
  if (!is_hermitian(rel_tol)) {
    throw InternalError("assembled operator is not Hermitian (defect " +
                        std::to_string(hermiticity_defect()) + ")");
  }
}

RealSparse charge_number(int N0) {
  const Index n = 2 * N0 + 1;
  RealSparse m(n, n);
  std::vector<Eigen::Triplet<double>> t;
  for (Index i = 0; i < n; ++i) t.emplace_back(i, i, static_cast<double>(i - N0));
  m.setFromTriplets(t.begin(), t.end());
  m.prune(0.0);
  return m;
}

RealSparse charge_shift(int N0, int k) {
  const Index n = 2 * N0 + 1;
  RealSparse m(n, n);
  std::vector<Eigen::Triplet<double>> t;
  for (Index col = 0; col < n; ++col) {
    const Index row = col + k;
    if (row >= 0 && row < n) t.emplace_back(row, col, 1.0);
  }
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

RealSparse annihilation(int nmax) {
  const Index n = nmax + 1;
  RealSparse m(n, n);
  std::vector<Eigen::Triplet<double>> t;
  for (Index i = 1; i < n; ++i) t.emplace_back(i - 1, i, std::sqrt(static_cast<double>(i)));
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

RealSparse identity_factor(Index n) {
  RealSparse m(n, n);
  m.setIdentity();
  return m;
}

RealSparse fock_parity(int nmax) {
  const Index n = nmax + 1;
  RealSparse m(n, n);
  std::vector<Eigen::Triplet<double>> t;
  for (Index i = 0; i < n; ++i) t.emplace_back(i, i, (i % 2 == 0) ? 1.0 : -1.0);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

RealSparse charge_parity(int N0) {
  const Index n = 2 * N0 + 1;
  RealSparse m(n, n);
  std::vector<Eigen::Triplet<double>> t;
  for (Index i = 0; i < n; ++i) t.emplace_back(i, i, ((i - N0) % 2 == 0) ? 1.0 : -1.0);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

SparseMatrix to_complex(const RealSparse& m) { return m.cast<cplx>(); }

SparseMatrix kron3(const SparseMatrix& charge, const SparseMatrix& amode,
                   const SparseMatrix& bmode) {
  SparseMatrix ab = Eigen::kroneckerProduct(amode, bmode).eval();
  SparseMatrix full = Eigen::kroneckerProduct(charge, ab).eval();
  full.prune(cplx(0.0, 0.0));
  full.makeCompressed();
  return full;
}

Primitives build_primitives(const BasisTruncation& trunc, const CircuitParams& params) {
  trunc.validate();
  params.validate();
  const ModeScales s = ModeScales::from(params);
  const std::uint64_t fp = trunc.fingerprint();
  const cplx I(0.0, 1.0);

  const SparseMatrix ic = to_complex(identity_factor(trunc.charge_dim()));
  const SparseMatrix ia = to_complex(identity_factor(trunc.p0 + 1));
  const SparseMatrix ib = to_complex(identity_factor(trunc.q0 + 1));
  const SparseMatrix na = to_complex(charge_number(trunc.N0));
  const SparseMatrix up = to_complex(charge_shift(trunc.N0, 1));
  const SparseMatrix dn = to_complex(charge_shift(trunc.N0, -1));
  const SparseMatrix am = to_complex(annihilation(trunc.p0));
  const SparseMatrix bm = to_complex(annihilation(trunc.q0));
  const SparseMatrix amd = am.adjoint();
  const SparseMatrix bmd = bm.adjoint();

  auto op = [&](const SparseMatrix& c, const SparseMatrix& a, const SparseMatrix& b) {
    return Operator(kron3(c, a, b), fp);
  };
  SparseMatrix cosm = 0.5 * (up + dn);
  SparseMatrix sinm = (-0.5 * I) * (up - dn);
  SparseMatrix etam = (I * s.eta_zpf) * (bmd - bm);
  SparseMatrix thetam = s.theta_zpf * (bm + bmd);
  SparseMatrix phim = s.phi_zpf * (am + amd);
  SparseMatrix nm = (I / (2.0 * s.phi_zpf)) * (amd - am);

  return Primitives{
      trunc,
      s,
      HermitianOperator(op(na, ia, ib)),
      HermitianOperator(op(cosm, ia, ib)),
      HermitianOperator(op(sinm, ia, ib)),
      op(ic, am, ib),
      op(ic, amd, ib),
      op(ic, ia, bm),
      op(ic, ia, bmd),
      HermitianOperator(op(ic, ia, etam)),
      HermitianOperator(op(ic, ia, thetam)),
      HermitianOperator(op(ic, phim, ib)),
      HermitianOperator(op(ic, nm, ib)),
      HermitianOperator(op(ic, ia, ib)),
  };
}

namespace {

Eigen::MatrixXd trig_laguerre(double lambda, double phase, int nmax, bool sine) {
  const int n = nmax + 1;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  const double x = lambda * lambda;
  std::vector<double> lag(n);
  for (int d = 0; d < n; ++d) {
    const double tr = sine ? std::sin(phase + d * kPi / 2.0) : std::cos(phase + d * kPi / 2.0);
    if (lambda == 0.0) {
      if (d == 0) out.diagonal().setConstant(tr);
      continue;
    }
    // L_k^{(d)}(x) for k = 0 .. n-1-d
    const int kmax = n - 1 - d;
    lag[0] = 1.0;
    if (kmax >= 1) lag[1] = 1.0 + d - x;
    for (int k = 1; k < kmax; ++k) {
      lag[k + 1] = ((2.0 * k + 1.0 + d - x) * lag[k] - (k + d) * lag[k - 1]) / (k + 1.0);
    }
    for (int k = 0; k <= kmax; ++k) {
      const int m = k + d;
      const double logpre = 0.5 * (std::lgamma(k + 1.0) - std::lgamma(m + 1.0)) +
                            d * std::log(lambda) - 0.5 * x;
      const double v = std::exp(logpre) * lag[k] * tr;
      out(m, k) = v;
      out(k, m) = v;
    }
  }
  return out;
}

Eigen::MatrixXd trig_quadrature(double lambda, double phase, int nmax, bool sine) {
  const int n = nmax + 1;
  const int big = 2 * n + 64;
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(big, big);
  for (int i = 1; i < big; ++i) X(i - 1, i) = X(i, i - 1) = std::sqrt(static_cast<double>(i));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(X);
  Eigen::VectorXd f(big);
  for (int i = 0; i < big; ++i) {
    const double arg = lambda * es.eigenvalues()(i) + phase;
    f(i) = sine ? std::sin(arg) : std::cos(arg);
  }
  const Eigen::MatrixXd U = es.eigenvectors().topRows(n);
  return U * f.asDiagonal() * U.transpose();
}

}  // namespace

Eigen::MatrixXd displaced_trig(double lambda, double phase, int nmax, bool sine,
                               TrigMethod method) {
  if (nmax < 0) throw DomainError("Fock truncation must be non-negative");
  return method == TrigMethod::Laguerre ? trig_laguerre(lambda, phase, nmax, sine)
                                        : trig_quadrature(lambda, phase, nmax, sine);
}

std::uint64_t mode_fingerprint(char mode, int nmax) {
  return hash_mix(hash_mix(0x5eedULL, static_cast<std::uint64_t>(mode)),
                  static_cast<std::uint64_t>(nmax));
}

HermitianOperator displaced_cosine(double phi_zpf, double offset, int p0, TrigMethod method) {
  if (!(phi_zpf >= 0.0)) throw DomainError("phi_zpf must be non-negative");
  const Eigen::MatrixXd c = displaced_trig(0.5 * phi_zpf, 0.5 * offset, p0, false, method);
  SparseMatrix m = c.cast<cplx>().sparseView(1.0, 0.0);
  return HermitianOperator(Operator(std::move(m), mode_fingerprint('a', p0)));
}

}  // namespace cos2phi
