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

#include "cos2phi/eigensolver.hpp"

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "cos2phi/errors.hpp"
#include "cos2phi/hamiltonians.hpp"
#include "cos2phi/kernels.hpp"

namespace cos2phi {

const char* to_string(Backend b) {
  switch (b) {
    case Backend::Auto: return "auto";
    case Backend::Dense: return "dense";
    case Backend::Krylov: return "krylov";
  }
  return "?";
}

namespace {

using kernels::KernelTable;

std::vector<double> explicit_residuals(const Operator& H, const Eigen::VectorXd& e,
                                       const Eigen::MatrixXcd& X) {
  std::vector<double> r(e.size());
  Eigen::VectorXcd w(H.dim());
  for (Index i = 0; i < e.size(); ++i) {
    H.apply(X.col(i).data(), w.data());
    w -= e(i) * X.col(i);
    r[i] = w.norm();
  }
  return r;
}

void fix_phase(Eigen::MatrixXcd& X) {
  for (Index c = 0; c < X.cols(); ++c) {
    const double mx = X.col(c).cwiseAbs().maxCoeff();
    for (Index i = 0; i < X.rows(); ++i) {
      const double a = std::abs(X(i, c));
      if (a >= 1e-3 * mx) {
        X.col(c) *= std::conj(X(i, c)) / a;
        break;
      }
    }
  }
}

EigenSolution dense_solve(const Operator& H, Index k) {
  const Index n = H.dim();
  Eigen::MatrixXcd A = H.dense();
  Eigen::VectorXd w(n);
  Eigen::MatrixXcd Z(n, k);
  std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(n));
  lapack_int found = 0;
  const lapack_int info = LAPACKE_zheevr(
      LAPACK_COL_MAJOR, 'V', 'I', 'U', static_cast<lapack_int>(n), A.data(),
      static_cast<lapack_int>(n), 0.0, 0.0, 1, static_cast<lapack_int>(k), 0.0, &found,
      w.data(), Z.data(), static_cast<lapack_int>(n), isuppz.data());
  if (info != 0 || found != k) {
    throw ConvergenceError("dense eigensolver failed (info " + std::to_string(info) + ")");
  }
  EigenSolution s;
  s.energies = w.head(k);
  s.vectors = Z;
  s.meta.backend = "dense";
  return s;
}

struct KrylovOut {
  Eigen::VectorXd theta;
  Eigen::MatrixXcd X;
  std::vector<double> bounds;
  int restarts = 0;
  int iterations = 0;
  long matvecs = 0;
  bool converged = false;
};

// Thick-restart Lanczos with full reorthogonalization. When `deflate` is
// given the iteration runs on its orthogonal complement.
KrylovOut thick_restart(const Operator& H, Index k, double tol, Index m, int max_restarts,
                        std::uint64_t seed, const Eigen::MatrixXcd* deflate) {
  const KernelTable& kt = kernels::active();
  const Index n = H.dim();
  const std::size_t un = static_cast<std::size_t>(n);
  Eigen::MatrixXcd V(n, m + 1);
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXcd w(n);
  KrylovOut out;

  auto project_out = [&](cplx* v) {
    if (deflate == nullptr) return;
    for (int pass = 0; pass < 2; ++pass) {
      for (Index c = 0; c < deflate->cols(); ++c) {
        const cplx h = kt.dotc(un, deflate->col(c).data(), v);
        kt.axpy(un, -h, deflate->col(c).data(), v);
      }
    }
  };

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  auto random_into = [&](Index col) {
    for (Index i = 0; i < n; ++i) V(i, col) = cplx(gauss(rng), gauss(rng));
    project_out(V.col(col).data());
    for (int pass = 0; pass < 2; ++pass) {
      for (Index c = 0; c < col; ++c) {
        const cplx h = kt.dotc(un, V.col(c).data(), V.col(col).data());
        kt.axpy(un, -h, V.col(c).data(), V.col(col).data());
      }
    }
    const double nv = kt.nrm2(un, V.col(col).data());
    kt.scal(un, cplx(1.0 / nv, 0.0), V.col(col).data());
  };

  random_into(0);
  Index l = 0;
  double hnorm = 0.0;
  for (int restart = 0; restart <= max_restarts; ++restart) {
    out.restarts = restart;
    double beta = 0.0;
    for (Index j = l; j < m; ++j) {
      H.apply(V.col(j).data(), w.data());
      ++out.matvecs;
      ++out.iterations;
      project_out(w.data());
      double alpha = 0.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (Index c = 0; c <= j; ++c) {
          const cplx h = kt.dotc(un, V.col(c).data(), w.data());
          if (c == j) alpha += h.real();
          kt.axpy(un, -h, V.col(c).data(), w.data());
        }
      }
      T(j, j) = alpha;
      hnorm = std::max(hnorm, std::abs(alpha));
      beta = kt.nrm2(un, w.data());
      if (beta <= 1e-13 * std::max(hnorm, 1.0)) {
        beta = 0.0;
        random_into(j + 1);
      } else {
        std::copy(w.data(), w.data() + n, V.col(j + 1).data());
        kt.scal(un, cplx(1.0 / beta, 0.0), V.col(j + 1).data());
      }
      if (j + 1 < m) T(j, j + 1) = T(j + 1, j) = beta;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    const Eigen::VectorXd& theta = es.eigenvalues();
    const Eigen::MatrixXd& S = es.eigenvectors();
    out.bounds.assign(static_cast<std::size_t>(k), 0.0);
    bool all = true;
    for (Index i = 0; i < k; ++i) {
      out.bounds[i] = std::abs(beta * S(m - 1, i));
      if (out.bounds[i] > tol) all = false;
    }
    if (all || restart == max_restarts) {
      out.theta = theta.head(k);
      out.X = V.leftCols(m) * S.leftCols(k).cast<cplx>();
      out.converged = all;
      return out;
    }
    l = std::min<Index>(m - 2, k + (m - k) / 2);
    Eigen::MatrixXcd R = V.leftCols(m) * S.leftCols(l).cast<cplx>();
    V.leftCols(l) = R;
    V.col(l) = V.col(m);
    T.setZero();
    for (Index i = 0; i < l; ++i) {
      T(i, i) = theta(i);
      T(i, l) = T(l, i) = beta * S(m - 1, i);
    }
  }
  return out;
}

EigenSolution krylov_solve(const HermitianOperator& H, Index k, double tol,
                           const SolverOptions& o) {
  const Index n = H.dim();
  Index m = o.krylov_dim > 0 ? o.krylov_dim : std::max<Index>(2 * k + 24, k + 64);
  m = std::min(m, n - 1);
  if (m < k + 2) return dense_solve(H, k);

  KrylovOut r = thick_restart(H, k, tol, m, o.max_restarts, o.seed, nullptr);
  if (!r.converged) {
    throw ConvergenceError("Krylov solver did not converge within " +
                               std::to_string(o.max_restarts) + " restarts",
                           r.bounds);
  }
  long matvecs = r.matvecs;
  int restarts = r.restarts;
  int iterations = r.iterations;
  if (o.multiplicity_check) {
    const Index mc = std::min<Index>(64, n - k - 1);
    for (Index guard = 0; guard < k && mc >= 3; ++guard) {
      KrylovOut c = thick_restart(H, 1, std::max(tol, 1e-7), mc, o.max_restarts,
                                  o.seed ^ 0x9e3779b97f4a7c15ULL, &r.X);
      matvecs += c.matvecs;
      if (!c.converged || c.theta(0) >= r.theta(k - 1) - 1e-7) break;
      c = thick_restart(H, 1, tol, mc, o.max_restarts, o.seed ^ 0x9e3779b97f4a7c15ULL, &r.X);
      matvecs += c.matvecs;
      if (!c.converged) break;
      r.theta(k - 1) = c.theta(0);
      r.X.col(k - 1) = c.X.col(0);
      std::vector<Index> idx(k);
      std::iota(idx.begin(), idx.end(), 0);
      std::sort(idx.begin(), idx.end(), [&](Index a, Index b) { return r.theta(a) < r.theta(b); });
      Eigen::VectorXd th(k);
      Eigen::MatrixXcd X(n, k);
      for (Index i = 0; i < k; ++i) {
        th(i) = r.theta(idx[i]);
        X.col(i) = r.X.col(idx[i]);
      }
      r.theta = th;
      r.X = X;
    }
  }
  EigenSolution s;
  s.energies = r.theta;
  s.vectors = r.X;
  s.meta.backend = "krylov";
  s.meta.restarts = restarts;
  s.meta.iterations = iterations;
  s.meta.matvecs = matvecs;
  return s;
}

}  // namespace

void fix_degenerate_gauge(EigenSolution& sol, const HermitianOperator& sym, double window) {
  if (sym.fingerprint() != sol.fingerprint || sym.dim() != sol.vectors.rows()) {
    throw UsageError("gauge operator was built on a different basis");
  }
  const Index k = sol.size();
  Index start = 0;
  while (start < k) {
    Index end = start + 1;
    while (end < k && sol.energies(end) - sol.energies(end - 1) <= window) ++end;
    const Index g = end - start;
    if (g > 1) {
      Eigen::MatrixXcd Q = sol.vectors.middleCols(start, g);
      Eigen::HouseholderQR<Eigen::MatrixXcd> qr(Q);
      Q = qr.householderQ() * Eigen::MatrixXcd::Identity(Q.rows(), g);
      Eigen::MatrixXcd PQ(Q.rows(), g);
      for (Index c = 0; c < g; ++c) PQ.col(c) = sym.apply(Eigen::VectorXcd(Q.col(c)));
      Eigen::MatrixXcd M = Q.adjoint() * PQ;
      M = 0.5 * (M + M.adjoint()).eval();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M);
      // Larger symmetry eigenvalue first.
      Eigen::MatrixXcd U = es.eigenvectors().rowwise().reverse();
      sol.vectors.middleCols(start, g) = Q * U;
    }
    start = end;
  }
  fix_phase(sol.vectors);
}

EigenSolution lowest_eigenpairs(const HermitianOperator& H, Index k, double tol,
                                const SolverOptions& o) {
  if (k < 1 || k > H.dim()) throw DomainError("requested eigenpair count out of range");
  if (!(tol > 0)) throw DomainError("tolerance must be positive");
  if (o.gauge != nullptr && o.gauge->fingerprint() != H.fingerprint()) {
    throw UsageError("gauge operator was built on a different basis");
  }
  Backend b = o.backend;
  if (b == Backend::Auto) b = H.dim() <= o.dense_threshold ? Backend::Dense : Backend::Krylov;
  EigenSolution s = b == Backend::Dense ? dense_solve(H, k) : krylov_solve(H, k, tol, o);
  s.fingerprint = H.fingerprint();
  s.meta.tolerance = tol;
  s.meta.seed = o.seed;
  s.meta.kernels = kernels::active().name;
  fix_phase(s.vectors);
  if (o.gauge != nullptr) fix_degenerate_gauge(s, *o.gauge, o.degeneracy_window);
  s.residuals = explicit_residuals(H, s.energies, s.vectors);
  for (double r : s.residuals) {
    if (r > 10.0 * tol + 1e-12 * std::max(1.0, s.energies.cwiseAbs().maxCoeff())) {
      throw ConvergenceError("eigenpair residual above tolerance after solve", s.residuals);
    }
  }
  return s;
}

LadderReport convergence_ladder(const CircuitParams& params, const BiasPoint& bias,
                                const std::vector<BasisTruncation>& levels, Index k,
                                double tolerance, const SolverOptions& opts) {
  if (levels.size() < 2) throw DomainError("convergence ladder needs at least two levels");
  for (std::size_t i = 1; i < levels.size(); ++i) {
    const auto& a = levels[i - 1];
    const auto& b = levels[i];
    if (b.N0 < a.N0 || b.p0 < a.p0 || b.q0 < a.q0) {
      throw DomainError("convergence ladder levels must not shrink in any dimension");
    }
  }
  LadderReport rep;
  rep.tolerance = tolerance;
  for (const auto& t : levels) {
    const HermitianOperator H = full_hamiltonian(params, bias, t);
    const EigenSolution s = lowest_eigenpairs(H, k, 1e-9, opts);
    LadderLevel lv{t, t.dim(), s.energies, {}};
    if (!rep.levels.empty()) lv.deltas = s.energies - rep.levels.back().energies;
    rep.levels.push_back(std::move(lv));
  }
  rep.converged = rep.levels.back().deltas.cwiseAbs().maxCoeff() < tolerance;
  return rep;
}

}  // namespace cos2phi
