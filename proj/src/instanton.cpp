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

#include "cos2phi/instanton.hpp"

#include <ceres/ceres.h>

#include <algorithm>
#include <cmath>
#include <iomanip>

#include "cos2phi/errors.hpp"

namespace cos2phi {
namespace {

// ħ in GHz·ns when energies are E/h in GHz.
constexpr double kHbar = 1.0 / (2.0 * kPi);

struct Coeffs {
  double eL, c, eJ, dJ, phie;
};

Coeffs coeffs(const CircuitParams& p, const BiasPoint& b) {
  const double dl = p.delta_L;
  return {p.eps_L / (1.0 - dl * dl), p.eps_L * dl / (1.0 - dl * dl), p.eps_J,
          p.junction_asymmetry(), b.phi_ext};
}

}  // namespace

double potential(const CircuitParams& p, const BiasPoint& b, const Point3& q) {
  const Coeffs k = coeffs(p, b);
  const double u = q(1) - k.phie;
  return k.eL * (0.25 * u * u + q(2) * q(2)) + k.c * u * q(2) -
         2.0 * k.eJ * std::cos(q(0)) * std::cos(0.5 * q(1)) +
         2.0 * k.eJ * k.dJ * std::sin(q(0)) * std::sin(0.5 * q(1));
}

PotentialValue potential_full(const CircuitParams& p, const BiasPoint& b, const Point3& q) {
  const Coeffs k = coeffs(p, b);
  const double u = q(1) - k.phie;
  const double cf = std::cos(q(0)), sf = std::sin(q(0));
  const double ch = std::cos(0.5 * q(1)), sh = std::sin(0.5 * q(1));
  PotentialValue v;
  v.energy = potential(p, b, q);
  v.gradient(0) = 2.0 * k.eJ * (sf * ch + k.dJ * cf * sh);
  v.gradient(1) = 0.5 * k.eL * u + k.c * q(2) + k.eJ * (cf * sh + k.dJ * sf * ch);
  v.gradient(2) = 2.0 * k.eL * q(2) + k.c * u;
  v.hessian.setZero();
  v.hessian(0, 0) = 2.0 * k.eJ * (cf * ch - k.dJ * sf * sh);
  v.hessian(0, 1) = v.hessian(1, 0) = k.eJ * (-sf * sh + k.dJ * cf * ch);
  v.hessian(1, 1) = 0.5 * k.eL + 0.5 * k.eJ * (cf * ch - k.dJ * sf * sh);
  v.hessian(1, 2) = v.hessian(2, 1) = k.c;
  v.hessian(2, 2) = 2.0 * k.eL;
  return v;
}

Eigen::Matrix3d mass_matrix(const CircuitParams& p) {
  const double ix = 1.0 / p.x;
  Eigen::Matrix3d m;
  m << 2.0 + ix, 0.0, ix, 0.0, 0.5, 0.0, ix, 0.0, ix;
  return (kHbar * kHbar / (8.0 * p.eps_C)) * m;
}

double path_approx(double phi, const BiasPoint& bias, double z) {
  const double f = std::abs(phi - 2.0 * kPi * std::round(phi / (2.0 * kPi)));
  return (2.0 * f + z * bias.phi_ext) / (1.0 + z);
}

namespace {

Minimum newton_minimum(const CircuitParams& p, const BiasPoint& b, Point3 q) {
  Minimum m;
  for (int it = 0; it < 200; ++it) {
    const PotentialValue v = potential_full(p, b, q);
    m.iterations = it;
    if (v.gradient.norm() <= 1e-12) break;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(v.hessian);
    Eigen::Vector3d lam = es.eigenvalues().cwiseAbs().cwiseMax(1e-3);
    Eigen::Vector3d step =
        -es.eigenvectors() * (lam.cwiseInverse().asDiagonal() * (es.eigenvectors().transpose() * v.gradient));
    double t = 1.0;
    while (t > 1e-8 && potential(p, b, q + t * step) > v.energy + 1e-4 * t * v.gradient.dot(step)) t *= 0.5;
    q += t * step;
  }
  const PotentialValue v = potential_full(p, b, q);
  m.q = q;
  m.energy = v.energy;
  m.gradient_norm = v.gradient.norm();
  m.hessian_eigenvalues = Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(v.hessian).eigenvalues();
  if (m.gradient_norm > 1e-8 || m.hessian_eigenvalues.minCoeff() <= 0.0) {
    throw ConvergenceError("potential minimum search failed near (" + std::to_string(q(0)) + ", " +
                           std::to_string(q(1)) + ", " + std::to_string(q(2)) +
                           "): gradient " + std::to_string(m.gradient_norm));
  }
  return m;
}

}  // namespace

std::array<Minimum, 2> find_minima(const CircuitParams& p, const BiasPoint& b) {
  p.validate();
  const double z = p.z();
  const Point3 a0(0.0, path_approx(0.0, b, z), 0.0);
  const Point3 b0(kPi, path_approx(kPi, b, z), 0.0);
  return {newton_minimum(p, b, a0), newton_minimum(p, b, b0)};
}

namespace {

class JacobiAction final : public ceres::FirstOrderFunction {
 public:
  JacobiAction(const CircuitParams& p, const BiasPoint& b, const Point3& qa, const Point3& qb,
               double e0, int segments)
      : p_(p), b_(b), qa_(qa), qb_(qb), e0_(e0), k_(segments), M_(mass_matrix(p)) {}

  int NumParameters() const override { return 3 * (k_ - 1); }

  Point3 node(const double* x, int i) const {
    if (i == 0) return qa_;
    if (i == k_) return qb_;
    return Point3(x[3 * (i - 1)], x[3 * (i - 1) + 1], x[3 * (i - 1) + 2]);
  }

  bool Evaluate(const double* x, double* cost, double* grad) const override {
    return evaluate(x, cost, grad, true);
  }

  // Jacobi action; `spacing` adds w̄ Σ (L_{i+1} − L_i)²/L̄, zero on an equal-arclength mesh.
  bool evaluate(const double* x, double* cost, double* grad, bool spacing) const {
    double s = 0.0;
    const int n = NumParameters();
    if (grad != nullptr) std::fill(grad, grad + n, 0.0);
    std::vector<double> len(k_), wt(k_);
    std::vector<Eigen::Vector3d> dlen(k_);
    Point3 prev = node(x, 0);
    for (int i = 0; i < k_; ++i) {
      const Point3 next = node(x, i + 1);
      const Point3 d = next - prev;
      const Point3 mid = 0.5 * (prev + next);
      const PotentialValue v = potential_full(p_, b_, mid);
      const double du = std::max(v.energy - e0_, 1e-16);
      const double w = std::sqrt(2.0 * du);
      const Eigen::Vector3d Md = M_ * d;
      len[i] = std::sqrt(std::max(d.dot(Md), 1e-300));
      wt[i] = w;
      dlen[i] = Md / len[i];
      s += w * len[i];
      if (grad != nullptr) {
        const Eigen::Vector3d gw = (0.5 * len[i] / w) * v.gradient;
        const Eigen::Vector3d gl = w * dlen[i];
        if (i >= 1) add(grad, i, gw - gl);
        if (i + 1 <= k_ - 1) add(grad, i + 1, gw + gl);
      }
      prev = next;
    }
    if (spacing) {
      double ltot = 0.0, wsum = 0.0;
      for (int i = 0; i < k_; ++i) {
        ltot += len[i];
        wsum += wt[i];
      }
      const double lbar = ltot / k_;
      const double kappa = wsum / k_ / lbar;
      for (int i = 0; i + 1 < k_; ++i) {
        const double r = len[i + 1] - len[i];
        s += kappa * r * r;
        if (grad != nullptr) {
          const double f = 2.0 * kappa * r;
          // ∂L_i/∂q_{i+1} = +dlen_i, ∂L_i/∂q_i = −dlen_i.
          if (i + 1 <= k_ - 1) add(grad, i + 1, f * (-dlen[i + 1]) - f * dlen[i]);
          if (i + 2 <= k_ - 1) add(grad, i + 2, f * dlen[i + 1]);
          if (i >= 1) add(grad, i, f * dlen[i]);
        }
      }
    }
    *cost = s;
    return true;
  }

 private:
  void add(double* grad, int node_index, const Eigen::Vector3d& g) const {
    for (int c = 0; c < 3; ++c) grad[3 * (node_index - 1) + c] += g(c);
  }

  CircuitParams p_;
  BiasPoint b_;
  Point3 qa_, qb_;
  double e0_;
  int k_;
  Eigen::Matrix3d M_;
};

std::vector<double> metric_lengths(const std::vector<Point3>& q, const Eigen::Matrix3d& M) {
  std::vector<double> c(q.size(), 0.0);
  for (std::size_t i = 1; i < q.size(); ++i) {
    const Point3 d = q[i] - q[i - 1];
    c[i] = c[i - 1] + std::sqrt(d.dot(M * d));
  }
  return c;
}

std::vector<Point3> reparametrize(const std::vector<Point3>& q, const Eigen::Matrix3d& M) {
  const std::vector<double> c = metric_lengths(q, M);
  const std::size_t n = q.size();
  std::vector<Point3> out(n);
  out.front() = q.front();
  out.back() = q.back();
  std::size_t j = 1;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double s = c.back() * static_cast<double>(i) / static_cast<double>(n - 1);
    while (j + 1 < n && c[j] < s) ++j;
    const double span = c[j] - c[j - 1];
    const double t = span > 0 ? (s - c[j - 1]) / span : 0.0;
    out[i] = (1.0 - t) * q[j - 1] + t * q[j];
  }
  return out;
}

}  // namespace

InstantonPath solve_instanton(const CircuitParams& p, const BiasPoint& b,
                              const InstantonOptions& o) {
  if (!(p.z() < 0.3)) throw DomainError("instanton solve requires z = eps_L/eps_J < 0.3");
  if (o.points < 5) throw DomainError("instanton mesh needs at least 5 points");
  const auto mins = find_minima(p, b);
  const Point3 qa = o.reverse ? mins[1].q : mins[0].q;
  const Point3 qb = o.reverse ? mins[0].q : mins[1].q;
  const double e0 = std::max(mins[0].energy, mins[1].energy);
  const int K = o.points - 1;
  const Eigen::Matrix3d M = mass_matrix(p);

  std::vector<Point3> q(o.points);
  for (int i = 0; i <= K; ++i) {
    const double t = static_cast<double>(i) / K;
    const double phi = (1.0 - t) * qa(0) + t * qb(0);
    q[i] = Point3(phi, path_approx(phi, b, p.z()), 0.0);
  }
  q.front() = qa;
  q.back() = qb;
  q = reparametrize(q, M);

  InstantonPath out;
  out.eps_b = o.eps_b;
  out.endpoints = {qa, qb};
  auto* fn = new JacobiAction(p, b, qa, qb, e0, K);
  ceres::GradientProblem problem(fn);
  ceres::GradientProblemSolver::Options opts;
  opts.line_search_direction_type = ceres::LBFGS;
  opts.max_num_iterations = 2000;
  opts.function_tolerance = 1e-15;
  opts.gradient_tolerance = 1e-14;
  opts.parameter_tolerance = 1e-15;
  opts.logging_type = ceres::SILENT;
  std::vector<double> x(3 * (K - 1));
  double last = 0.0;
  bool done = false;
  for (int round = 0; round < o.max_rounds; ++round) {
    for (int i = 1; i < K; ++i)
      for (int c = 0; c < 3; ++c) x[3 * (i - 1) + c] = q[i](c);
    ceres::GradientProblemSolver::Summary summary;
    ceres::Solve(opts, problem, x.data(), &summary);
    for (int i = 1; i < K; ++i) q[i] = fn->node(x.data(), i);
    q = reparametrize(q, M);
    for (int i = 1; i < K; ++i)
      for (int c = 0; c < 3; ++c) x[3 * (i - 1) + c] = q[i](c);
    double s = 0.0;
    std::vector<double> g(x.size());
    fn->evaluate(x.data(), &s, g.data(), false);
    double res = 0.0;
    for (int i = 1; i < K; ++i) {
      Eigen::Vector3d gi(g[3 * (i - 1)], g[3 * (i - 1) + 1], g[3 * (i - 1) + 2]);
      Eigen::Vector3d t = (q[i + 1] - q[i - 1]);
      const double h = 0.5 * t.norm();
      t.normalize();
      gi -= gi.dot(t) * t;
      res = std::max(res, gi.norm() / h);
    }
    out.residual_history.push_back(res);
    out.rounds = round + 1;
    out.action = s;
    if (round > 0 && std::abs(s - last) <= o.action_tol * s) {
      done = true;
      break;
    }
    last = s;
  }
  if (!done) {
    throw ConvergenceError("instanton path did not converge after " + std::to_string(out.rounds) +
                           " rounds (action " + std::to_string(out.action) + ", change " +
                           std::to_string(std::abs(out.action - last)) + ")");
  }
  out.solver_residual = out.residual_history.back();
  out.nodes = q;

  // Clamp ε_b away from the minima and integrate dτ = ds_M/√(2ΔU).
  auto clamp_index = [&](const Point3& end, bool from_front) {
    if (from_front) {
      for (int i = 1; i <= K; ++i)
        if ((q[i] - end).norm() >= o.eps_b) return i;
    } else {
      for (int i = K - 1; i >= 0; --i)
        if ((q[i] - end).norm() >= o.eps_b) return i;
    }
    return from_front ? K : 0;
  };
  const int ia = clamp_index(qa, true);
  const int ib = clamp_index(qb, false);
  auto cut = [&](const Point3& end, const Point3& inside, const Point3& outside) {
    const double di = (inside - end).norm();
    const double dout = (outside - end).norm();
    const double t = dout > di ? (o.eps_b - di) / (dout - di) : 0.0;
    return Point3(inside + t * (outside - inside));
  };
  std::vector<Point3> pts;
  pts.push_back(cut(qa, q[ia - 1], q[ia]));
  for (int i = ia; i <= ib; ++i) pts.push_back(q[i]);
  pts.push_back(cut(qb, q[ib + 1], q[ib]));
  double tau = 0.0;
  out.samples.push_back({0.0, pts[0]});
  double du_max = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const Point3 d = pts[i] - pts[i - 1];
    const double du = std::max(potential(p, b, 0.5 * (pts[i] + pts[i - 1])) - e0, 1e-16);
    du_max = std::max(du_max, du);
    tau += std::sqrt(d.dot(M * d)) / std::sqrt(2.0 * du);
    out.samples.push_back({tau, pts[i]});
  }
  out.horizon = tau;
  double eres = 0.0;
  for (std::size_t i = 1; i + 1 < out.samples.size(); ++i) {
    const double dt = out.samples[i + 1].tau - out.samples[i - 1].tau;
    const Point3 v = (out.samples[i + 1].q - out.samples[i - 1].q) / dt;
    const double kin = 0.5 * v.dot(M * v);
    const double du = potential(p, b, out.samples[i].q) - e0;
    eres = std::max(eres, std::abs(kin - du) / du_max);
  }
  out.energy_residual = eres;
  const auto& sm = out.samples;
  const std::size_t ns = sm.size();
  out.endpoint_speed = std::max((sm[1].q - sm[0].q).norm() / (sm[1].tau - sm[0].tau),
                                (sm[ns - 1].q - sm[ns - 2].q).norm() / (sm[ns - 1].tau - sm[ns - 2].tau));
  return out;
}

double path_deviation(const InstantonPath& path, const BiasPoint& bias, double z, double margin) {
  const double lo = std::min(path.endpoints[0](0), path.endpoints[1](0));
  const double hi = std::max(path.endpoints[0](0), path.endpoints[1](0));
  double dev = 0.0;
  for (const Point3& q : path.nodes) {
    if (q(0) < lo + margin || q(0) > hi - margin) continue;
    dev = std::max(dev, std::abs(q(1) - path_approx(q(0), bias, z)));
  }
  return dev;
}

EffectiveParams reduce_to_effective(const CircuitParams& p, const BiasPoint& b,
                                    PathSource source, const InstantonPath* path, int M) {
  if (M < 16) throw DomainError("Fourier reduction needs at least 16 points");
  std::vector<Point3> nodes;
  if (source == PathSource::Numeric) {
    if (path == nullptr || path->nodes.size() < 2) throw UsageError("numeric reduction needs a solved path");
    nodes = path->nodes;
    if (nodes.front()(0) > nodes.back()(0)) std::reverse(nodes.begin(), nodes.end());
    for (std::size_t i = 1; i < nodes.size(); ++i) {
      if (nodes[i](0) < nodes[i - 1](0)) {
        throw DomainError("instanton path is not monotone in phi; cannot parametrize by phi");
      }
    }
  }
  auto along = [&](double phi) -> Point3 {
    if (source == PathSource::Approx) return Point3(phi, path_approx(phi, b, p.z()), 0.0);
    // U(φ, ϕ, θ) = U(−φ, ϕ, −θ) and 2π periodicity extend [0, π] to the circle.
    double f = std::fmod(phi, 2.0 * kPi);
    double sign = 1.0;
    if (f > kPi) {
      f = 2.0 * kPi - f;
      sign = -1.0;
    }
    auto it = std::lower_bound(nodes.begin(), nodes.end(), f,
                               [](const Point3& q, double v) { return q(0) < v; });
    Point3 r;
    if (it == nodes.begin()) {
      r = nodes.front();
    } else if (it == nodes.end()) {
      r = nodes.back();
    } else {
      const Point3& hi = *it;
      const Point3& lo = *(it - 1);
      const double t = hi(0) > lo(0) ? (f - lo(0)) / (hi(0) - lo(0)) : 0.0;
      r = lo + t * (hi - lo);
    }
    return Point3(phi, r(1), sign * r(2));
  };
  double c[5] = {0, 0, 0, 0, 0};
  for (int j = 0; j < M; ++j) {
    const double phi = 2.0 * kPi * j / M;
    const double u = potential(p, b, along(phi));
    for (int k = 1; k <= 4; ++k) c[k] += 2.0 / M * u * std::cos(k * phi);
  }
  EffectiveParams e;
  e.z = p.z();
  e.c1 = c[1];
  e.c2 = c[2];
  e.c3 = c[3];
  e.c4 = c[4];
  e.kinetic = 0.5 / (1.0 + 1.0 / ((1.0 + e.z) * (1.0 + e.z)));
  e.phi_ext_folded = b.phi_ext_folded();
  return e;
}

void write_path_csv(std::ostream& os, const InstantonPath& path) {
  os << "tau_ns,phi,varphi,theta\n";
  os << std::setprecision(17);
  for (const auto& s : path.samples) {
    os << s.tau << ',' << s.q(0) << ',' << s.q(1) << ',' << s.q(2) << '\n';
  }
}

}  // namespace cos2phi
