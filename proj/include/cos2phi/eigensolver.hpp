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

#include <cstdint>
#include <string>
#include <vector>

#include "cos2phi/model.hpp"

namespace cos2phi {

enum class Backend { Auto, Dense, Krylov };
const char* to_string(Backend b);

struct SolverOptions {
  Backend backend = Backend::Auto;
  Index dense_threshold = 1200;
  // Krylov basis size; 0 picks max(2k + 24, k + 64) capped at dim.
  Index krylov_dim = 0;
  int max_restarts = 2000;
  std::uint64_t seed = 0x5eed2f1ULL;
  double degeneracy_window = 1e-9;
  // Search the orthogonal complement for levels the Krylov run skipped.
  bool multiplicity_check = true;
  // Symmetry used to fix the basis inside degenerate groups.
  const HermitianOperator* gauge = nullptr;
};

struct SolverMetadata {
  std::string backend;
  int iterations = 0;
  int restarts = 0;
  long matvecs = 0;
  double tolerance = 0;
  std::uint64_t seed = 0;
  std::string kernels;
};

struct EigenSolution {
  Eigen::VectorXd energies;
  Eigen::MatrixXcd vectors;
  std::vector<double> residuals;
  std::uint64_t fingerprint = 0;
  SolverMetadata meta;

  Index size() const { return energies.size(); }
  Eigen::VectorXcd vector(Index i) const { return vectors.col(i); }
};

EigenSolution lowest_eigenpairs(const HermitianOperator& H, Index k, double tol,
                                const SolverOptions& opts = {});

// Rotates every group of energies closer than `window` so that `sym` is
// diagonal inside the group.
void fix_degenerate_gauge(EigenSolution& sol, const HermitianOperator& sym, double window);

struct LadderLevel {
  BasisTruncation trunc;
  Index dim = 0;
  Eigen::VectorXd energies;
  // Energies minus the previous level's energies; empty on the first level.
  Eigen::VectorXd deltas;
};

struct LadderReport {
  std::vector<LadderLevel> levels;
  double tolerance = 0;
  bool converged = false;
};

LadderReport convergence_ladder(const CircuitParams& params, const BiasPoint& bias,
                                const std::vector<BasisTruncation>& levels, Index k,
                                double tolerance = 1e-4, const SolverOptions& opts = {});

}  // namespace cos2phi
