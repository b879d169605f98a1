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

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstring>

#include "cos2phi/kernels.hpp"

namespace cos2phi::kernels {
namespace {

cplx dotc_ref(std::size_t n, const cplx* x, const cplx* y) {
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = x[i].real(), b = x[i].imag();
    const double c = y[i].real(), d = y[i].imag();
    re += a * c + b * d;
    im += a * d - b * c;
  }
  return {re, im};
}

void axpy_ref(std::size_t n, cplx alpha, const cplx* x, cplx* y) {
  const double ar = alpha.real(), ai = alpha.imag();
  for (std::size_t i = 0; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    y[i] = {y[i].real() + ar * xr - ai * xi, y[i].imag() + ar * xi + ai * xr};
  }
}

void scal_ref(std::size_t n, cplx alpha, cplx* x) {
  const double ar = alpha.real(), ai = alpha.imag();
  for (std::size_t i = 0; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    x[i] = {ar * xr - ai * xi, ar * xi + ai * xr};
  }
}

double nrm2_ref(std::size_t n, const cplx* x) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::norm(x[i]);
  return std::sqrt(s);
}

void spmv_ref(std::size_t rows, const int* outer, const int* inner,
              const cplx* values, const cplx* x, cplx* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    double re = 0.0, im = 0.0;
    for (int k = outer[r]; k < outer[r + 1]; ++k) {
      const double vr = values[k].real(), vi = values[k].imag();
      const double xr = x[inner[k]].real(), xi = x[inner[k]].imag();
      re += vr * xr - vi * xi;
      im += vr * xi + vi * xr;
    }
    y[r] = {re, im};
  }
}

const KernelTable kScalar{"scalar", dotc_ref, axpy_ref, scal_ref, nrm2_ref,
                          spmv_ref};

std::atomic<const KernelTable*> g_override{nullptr};

const KernelTable& detect() {
  const char* env = std::getenv("COS2PHI_KERNELS");
  if (env != nullptr && std::strcmp(env, "scalar") == 0) return kScalar;
  if (const KernelTable* t = avx2()) return *t;
  return kScalar;
}

}  // namespace

const KernelTable& scalar() { return kScalar; }

#ifdef COS2PHI_HAVE_AVX2
extern const KernelTable kAvx2Table;
#endif

const KernelTable* avx2() {
#ifdef COS2PHI_HAVE_AVX2
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
    return &kAvx2Table;
  }
#endif
  return nullptr;
}

const KernelTable& active() {
  if (const KernelTable* t = g_override.load()) return *t;
  static const KernelTable& chosen = detect();
  return chosen;
}

void set_active(const KernelTable* table) { g_override.store(table); }

}  // namespace cos2phi::kernels
