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
#include <vector>

#include "cos2phi/hamiltonians.hpp"

namespace cos2phi {

// The cos 2φ toy model splits into even-N and odd-N charge sectors. Level k
// below is the k-th level of the even sector; its odd-sector partner has the
// opposite dispersion.
struct DispersionResult {
  int k = 0;
  // Signed: sign of E_k(Ng=1) − E_k(Ng=0), magnitude max − min over the grid.
  double eps_k = 0;
  std::vector<double> N_g;
  // E_k(Ng) of the even-sector level (exact) or E_k(½) − ½ε_k cos(πNg).
  std::vector<double> energy;
  // Ground splitting E_odd,0 − E_even,0 over the same grid.
  std::vector<double> splitting;
  std::string method;
  double boundary_population = 0;
  std::string warning;
};

struct SectorSpectrum {
  Eigen::VectorXd even;
  Eigen::VectorXd odd;
  double boundary_population = 0;
};

SectorSpectrum toy_sector_spectrum(const ToyParams& tp, int levels);

std::vector<double> uniform_grid(double a, double b, int points);

DispersionResult exact_dispersion(const ToyParams& tp, int k, int grid_points = 41);

// (−1)^k 4^{k+2}/k! E_C √(2/π) (2E_J/E_C)^{(2k+3)/4} e^{−√(2E_J/E_C)}
double asymptotic_epsilon(double E_J, double E_C, int k);

DispersionResult asymptotic_dispersion(const ToyParams& tp, int k, int grid_points = 41);

}  // namespace cos2phi
