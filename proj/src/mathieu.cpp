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

#include "cos2phi/mathieu.hpp"

#include <algorithm>
#include <cmath>

#include "cos2phi/errors.hpp"

namespace cos2phi {

std::vector<double> uniform_grid(double a, double b, int points) {
  if (points < 1) throw DomainError("grid needs at least one point");
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    g[i] = points == 1 ? a : a + (b - a) * static_cast<double>(i) / (points - 1);
  }
  return g;
}

SectorSpectrum toy_sector_spectrum(const ToyParams& tp, int levels) {
  const Eigen::MatrixXd H = toy_hamiltonian(tp).dense().real();
  const int n = static_cast<int>(H.rows());
  SectorSpectrum out;
  for (int parity = 0; parity < 2; ++parity) {
    std::vector<int> idx;
    for (int i = 0; i < n; ++i) {
      const int N = i - tp.N0_toy;
      if (((N % 2) + 2) % 2 == parity) idx.push_back(i);
    }
    const int m = static_cast<int>(idx.size());
    if (levels > m) throw DomainError("requested more toy levels than the sector holds");
    Eigen::MatrixXd B(m, m);
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c) B(r, c) = H(idx[r], idx[c]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
    (parity == 0 ? out.even : out.odd) = es.eigenvalues().head(levels);
    for (int l = 0; l < levels; ++l) {
      const auto v = es.eigenvectors().col(l);
      const double edge = v(0) * v(0) + v(m - 1) * v(m - 1);
      out.boundary_population = std::max(out.boundary_population, edge);
    }
  }
  return out;
}

DispersionResult exact_dispersion(const ToyParams& tp, int k, int grid_points) {
  if (k < 0) throw DomainError("level index must be non-negative");
  DispersionResult r;
  r.k = k;
  r.method = "exact";
  r.N_g = uniform_grid(0.0, 1.0, grid_points);
  for (double ng : r.N_g) {
    ToyParams q = tp;
    q.N_g = ng;
    const SectorSpectrum s = toy_sector_spectrum(q, k + 1);
    r.energy.push_back(s.even(k));
    r.splitting.push_back(s.odd(0) - s.even(0));
    r.boundary_population = std::max(r.boundary_population, s.boundary_population);
  }
  if (r.boundary_population > 1e-12) {
    throw ConvergenceError("toy charge truncation too small: boundary population " +
                           std::to_string(r.boundary_population));
  }
  const auto [mn, mx] = std::minmax_element(r.energy.begin(), r.energy.end());
  const double swing = *mx - *mn;
  r.eps_k = (r.energy.back() >= r.energy.front()) ? swing : -swing;
  return r;
}

double asymptotic_epsilon(double E_J, double E_C, int k) {
  const double r = 2.0 * E_J / E_C;
  const double sign = (k % 2 == 0) ? 1.0 : -1.0;
  const double logv = (k + 2) * std::log(4.0) - std::lgamma(k + 1.0) +
                      0.25 * (2.0 * k + 3.0) * std::log(r) - std::sqrt(r);
  return sign * E_C * std::sqrt(2.0 / kPi) * std::exp(logv);
}

DispersionResult asymptotic_dispersion(const ToyParams& tp, int k, int grid_points) {
  tp.validate();
  DispersionResult r;
  r.k = k;
  r.method = "asymptotic";
  if (tp.E_J / tp.E_C < 20.0) r.warning = "E_J/E_C below 20: asymptotic form unreliable";
  r.eps_k = asymptotic_epsilon(tp.E_J, tp.E_C, k);
  const double e0 = asymptotic_epsilon(tp.E_J, tp.E_C, 0);
  r.N_g = uniform_grid(0.0, 1.0, grid_points);
  for (double ng : r.N_g) {
    r.energy.push_back(-0.5 * r.eps_k * std::cos(kPi * ng));
    r.splitting.push_back(e0 * std::cos(kPi * ng));
  }
  return r;
}

}  // namespace cos2phi
