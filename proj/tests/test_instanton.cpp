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


#include <cmath>
#include <sstream>

#include "doctest.h"

#include "cos2phi/instanton.hpp"

using namespace cos2phi;

TEST_CASE("potential examples and symmetry") {
  const CircuitParams p;
  const BiasPoint pi{kPi, 0.0};
  CHECK(std::abs(potential(p, pi, Point3(0.0, kPi, 0.0))) < 1e-12);
  for (double phi : {kPi, 1.3, 4.0}) {
    const BiasPoint b{phi, 0.0};
    for (const Point3& q : {Point3(0.4, 1.1, 0.2), Point3(-2.0, 0.3, -0.7), Point3(1.0, 5.0, 0.1)}) {
      const Point3 m(-q(0), q(1), -q(2));
      CHECK(potential(p, b, q) == doctest::Approx(potential(p, b, m)).epsilon(1e-13));
    }
  }
}

TEST_CASE("analytic gradient and Hessian against finite differences") {
  CircuitParams p;
  p.delta_L = 0.3;
  const BiasPoint b{2.7, 0.0};
  const Point3 q(0.3, 1.7, -0.2);
  const PotentialValue v = potential_full(p, b, q);
  CHECK(v.energy == doctest::Approx(potential(p, b, q)));
  const double h = 1e-5;
  for (int i = 0; i < 3; ++i) {
    Point3 qp = q, qm = q;
    qp(i) += h;
    qm(i) -= h;
    const double g = (potential(p, b, qp) - potential(p, b, qm)) / (2 * h);
    CHECK(v.gradient(i) == doctest::Approx(g).epsilon(1e-6));
    const Eigen::Vector3d gd =
        (potential_full(p, b, qp).gradient - potential_full(p, b, qm).gradient) / (2 * h);
    for (int j = 0; j < 3; ++j) CHECK(v.hessian(j, i) == doctest::Approx(gd(j)).epsilon(1e-6));
  }
}

TEST_CASE("minima at the symmetric point") {
  const CircuitParams p;
  const BiasPoint b{kPi, 0.0};
  const auto m = find_minima(p, b);
  CHECK(std::abs(m[0].energy - m[1].energy) < 1e-9);
  for (const auto& x : m) {
    CHECK(x.gradient_norm <= 1e-8);
    CHECK(x.hessian_eigenvalues.minCoeff() > 0);
    CHECK(std::abs(x.q(2)) < 1e-12);
    CHECK(std::abs(x.energy + 2.0 * p.eps_J) < 3.0 * p.eps_L);
  }
  CHECK(std::abs(m[0].q(0)) < 1e-9);
  CHECK(std::abs(m[1].q(0) - kPi) < 1e-9);
}

TEST_CASE("ridge detuning follows the c1 coefficient") {
  const CircuitParams p;
  auto gap = [&](double phi) {
    const auto m = find_minima(p, {phi, 0.0});
    return m[0].energy - m[1].energy;
  };
  const double d = 0.1;
  const double slope = (gap(kPi - d) - gap(kPi + d)) / (2 * d);
  // U(0) − U(π) = 2c1 for the reduced potential; c1 = −(16/3π) εL (π − φ̃ext).
  const double expect = 2.0 * (16.0 / (3.0 * kPi)) * p.eps_L;
  CHECK(std::abs(gap(kPi - d) + gap(kPi + d)) < 1e-6);
  CHECK(std::abs(slope) == doctest::Approx(expect).epsilon(0.2));
}

TEST_CASE("approximate path") {
  const BiasPoint b{kPi, 0.0};
  const double z = 1.0 / 15.0;
  CHECK(path_approx(0.0, b, z) == doctest::Approx(kPi / 16.0).epsilon(1e-14));
  CHECK(path_approx(0.0, b, z) == doctest::Approx(0.19635).epsilon(1e-5));
  CHECK(path_approx(kPi, b, z) == doctest::Approx(kPi * (2 + z) / (1 + z)).epsilon(1e-14));
  for (double phi : {-2.0, 0.3, 1.9, 3.0}) {
    CHECK(path_approx(phi, b, z) == doctest::Approx(path_approx(phi + 2 * kPi, b, z)));
  }
}

TEST_CASE("instanton path at the reference circuit") {
  const CircuitParams p;
  const BiasPoint b{kPi, 0.0};
  const InstantonPath path = solve_instanton(p, b);
  const auto m = find_minima(p, b);
  CHECK((path.endpoints[0] - m[0].q).norm() <= path.eps_b);
  CHECK((path.endpoints[1] - m[1].q).norm() <= path.eps_b);
  CHECK(path.action > 0);
  CHECK(path.energy_residual < 1e-2);
  const double dev = path_deviation(path, b, p.z());
  CHECK(dev <= 0.15);
  MESSAGE("action " << path.action << ", deviation " << dev << ", rounds " << path.rounds);

  for (std::size_t i = 1; i < path.samples.size(); ++i) {
    CHECK(path.samples[i].tau >= path.samples[i - 1].tau);
  }

  InstantonOptions rev;
  rev.reverse = true;
  const InstantonPath back = solve_instanton(p, b, rev);
  CHECK(back.action == doctest::Approx(path.action).epsilon(1e-6));
  CHECK((back.endpoints[0] - path.endpoints[1]).norm() < 1e-9);
  CHECK((back.endpoints[1] - path.endpoints[0]).norm() < 1e-9);
  const std::size_t n = path.nodes.size();
  double worst = 0;
  for (std::size_t i = 0; i < n; ++i) {
    worst = std::max(worst, (back.nodes[i] - path.nodes[n - 1 - i]).norm());
  }
  CHECK(worst < 1e-2);

  std::ostringstream os;
  write_path_csv(os, path);
  CHECK(os.str().rfind("tau", 0) == 0);

  const EffectiveParams num = reduce_to_effective(p, b, PathSource::Numeric, &path);
  CHECK(std::abs(num.c2) > 10.0);
}

TEST_CASE("Fourier reduction along the approximate path") {
  const CircuitParams p;
  const BiasPoint b{kPi, 0.0};
  const double z = p.z();
  const EffectiveParams e = reduce_to_effective(p, b, PathSource::Approx);
  CHECK(std::abs(e.c1) <= 1e-10);
  CHECK(std::abs(e.c3) <= 1e-10);
  const double c2 = -p.eps_J * (1.0 - 1.25 * z + z * z * (81.0 - 2.0 * kPi * kPi) / 48.0);
  const double c4 = -p.eps_L * (1.0 / 12.0 - 17.0 * z / 72.0);
  CHECK(e.c2 == doctest::Approx(c2).epsilon(0.005));
  CHECK(e.c4 == doctest::Approx(c4).epsilon(0.05));
}

TEST_CASE("even harmonics decay in powers of z") {
  for (double z = 0.03; z <= 0.2 + 1e-12; z += 0.01) {
    CircuitParams p;
    p.eps_L = z * p.eps_J;
    const EffectiveParams e = reduce_to_effective(p, {kPi, 0.0}, PathSource::Approx);
    CAPTURE(z);
    CHECK(std::abs(e.c4 / e.c2) <= 3.0 * z);
  }
}
