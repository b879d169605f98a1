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
#include <ostream>
#include <vector>

#include "cos2phi/hamiltonians.hpp"

namespace cos2phi {

// (φ, ϕ, θ)
using Point3 = Eigen::Vector3d;

struct PotentialValue {
  double energy = 0;
  Eigen::Vector3d gradient;
  Eigen::Matrix3d hessian;
};

// εL[¼(ϕ − φext)² + θ²] − 2εJ cos φ cos(ϕ/2), with the δJ and δL terms.
double potential(const CircuitParams& params, const BiasPoint& bias, const Point3& q);
PotentialValue potential_full(const CircuitParams& params, const BiasPoint& bias,
                              const Point3& q);

// Kinetic mass matrix in (φ, ϕ, θ), units h·GHz·ns².
Eigen::Matrix3d mass_matrix(const CircuitParams& params);

struct Minimum {
  Point3 q;
  double energy = 0;
  double gradient_norm = 0;
  Eigen::Vector3d hessian_eigenvalues;
  int iterations = 0;
};

// The φ ≈ 0 and φ ≈ π minima.
std::array<Minimum, 2> find_minima(const CircuitParams& params, const BiasPoint& bias);

double path_approx(double phi, const BiasPoint& bias, double z);

struct PathSample {
  double tau = 0;  // ns
  Point3 q;
};

struct InstantonOptions {
  int points = 513;
  double eps_b = 1e-3;
  int max_rounds = 60;
  double action_tol = 1e-8;
  // Solve from the φ ≈ π minimum to the φ ≈ 0 minimum.
  bool reverse = false;
};

struct InstantonPath {
  // Full discretized path, endpoints included.
  std::vector<Point3> nodes;
  // Time-parametrized samples between the ε_b-clamped endpoints.
  std::vector<PathSample> samples;
  std::array<Point3, 2> endpoints;
  double action = 0;
  double solver_residual = 0;
  std::vector<double> residual_history;
  double energy_residual = 0;
  double eps_b = 0;
  double horizon = 0;
  // Largest Euclidean |dq/dτ| (rad/ns) at the two clamped ends.
  double endpoint_speed = 0;
  int rounds = 0;
};

InstantonPath solve_instanton(const CircuitParams& params, const BiasPoint& bias,
                              const InstantonOptions& opts = {});

// Largest |ϕ_path(φ) − path_approx(φ)| over nodes whose φ is farther than
// `margin` from both endpoints.
double path_deviation(const InstantonPath& path, const BiasPoint& bias, double z,
                      double margin = 0.3);

enum class PathSource { Approx, Numeric };

// Fourier coefficients of U(φ, ϕ(φ), θ(φ)) on a uniform φ grid.
EffectiveParams reduce_to_effective(const CircuitParams& params, const BiasPoint& bias,
                                    PathSource source, const InstantonPath* path = nullptr,
                                    int quadrature_points = 1024);

void write_path_csv(std::ostream& os, const InstantonPath& path);

}  // namespace cos2phi
