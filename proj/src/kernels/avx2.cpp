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

// Compiled with -mavx2 -mfma. Nothing here runs before the cpuid check in
// scalar.cpp has accepted the table.

#include <immintrin.h>

#include <cmath>

#include "cos2phi/kernels.hpp"

namespace cos2phi::kernels {
namespace {

inline const double* dp(const cplx* p) {
  return reinterpret_cast<const double*>(p);
}
inline double* dp(cplx* p) { return reinterpret_cast<double*>(p); }

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

// Lanes hold (re0, im0, re1, im1); returns a*b lane-pairwise as complex.
inline __m256d cmul(__m256d a, __m256d b) {
  const __m256d ar = _mm256_movedup_pd(a);
  const __m256d ai = _mm256_permute_pd(a, 0xF);
  const __m256d bs = _mm256_permute_pd(b, 0x5);
  return _mm256_fmaddsub_pd(ar, b, _mm256_mul_pd(ai, bs));
}

cplx dotc_avx2(std::size_t n, const cplx* x, const cplx* y) {
  __m256d re0 = _mm256_setzero_pd(), re1 = _mm256_setzero_pd();
  __m256d im0 = _mm256_setzero_pd(), im1 = _mm256_setzero_pd();
  const double* xa = dp(x);
  const double* ya = dp(y);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x0 = _mm256_loadu_pd(xa + 2 * i);
    const __m256d y0 = _mm256_loadu_pd(ya + 2 * i);
    const __m256d x1 = _mm256_loadu_pd(xa + 2 * i + 4);
    const __m256d y1 = _mm256_loadu_pd(ya + 2 * i + 4);
    re0 = _mm256_fmadd_pd(x0, y0, re0);
    re1 = _mm256_fmadd_pd(x1, y1, re1);
    im0 = _mm256_fmadd_pd(x0, _mm256_permute_pd(y0, 0x5), im0);
    im1 = _mm256_fmadd_pd(x1, _mm256_permute_pd(y1, 0x5), im1);
  }
  for (; i + 2 <= n; i += 2) {
    const __m256d x0 = _mm256_loadu_pd(xa + 2 * i);
    const __m256d y0 = _mm256_loadu_pd(ya + 2 * i);
    re0 = _mm256_fmadd_pd(x0, y0, re0);
    im0 = _mm256_fmadd_pd(x0, _mm256_permute_pd(y0, 0x5), im0);
  }
  // im lanes are (xr*yi, xi*yr, ...): even minus odd.
  const __m256d sign = _mm256_set_pd(-1.0, 1.0, -1.0, 1.0);
  double re = hsum(_mm256_add_pd(re0, re1));
  double im = hsum(_mm256_mul_pd(_mm256_add_pd(im0, im1), sign));
  for (; i < n; ++i) {
    re += x[i].real() * y[i].real() + x[i].imag() * y[i].imag();
    im += x[i].real() * y[i].imag() - x[i].imag() * y[i].real();
  }
  return {re, im};
}

void axpy_avx2(std::size_t n, cplx alpha, const cplx* x, cplx* y) {
  const __m256d a = _mm256_set_pd(alpha.imag(), alpha.real(), alpha.imag(),
                                  alpha.real());
  const double* xa = dp(x);
  double* ya = dp(y);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d xv = _mm256_loadu_pd(xa + 2 * i);
    const __m256d yv = _mm256_loadu_pd(ya + 2 * i);
    _mm256_storeu_pd(ya + 2 * i, _mm256_add_pd(yv, cmul(a, xv)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void scal_avx2(std::size_t n, cplx alpha, cplx* x) {
  const __m256d a = _mm256_set_pd(alpha.imag(), alpha.real(), alpha.imag(),
                                  alpha.real());
  double* xa = dp(x);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    _mm256_storeu_pd(xa + 2 * i, cmul(a, _mm256_loadu_pd(xa + 2 * i)));
  }
  for (; i < n; ++i) x[i] *= alpha;
}

double nrm2_avx2(std::size_t n, const cplx* x) {
  __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
  const double* xa = dp(x);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v0 = _mm256_loadu_pd(xa + 2 * i);
    const __m256d v1 = _mm256_loadu_pd(xa + 2 * i + 4);
    s0 = _mm256_fmadd_pd(v0, v0, s0);
    s1 = _mm256_fmadd_pd(v1, v1, s1);
  }
  for (; i + 2 <= n; i += 2) {
    const __m256d v0 = _mm256_loadu_pd(xa + 2 * i);
    s0 = _mm256_fmadd_pd(v0, v0, s0);
  }
  double s = hsum(_mm256_add_pd(s0, s1));
  for (; i < n; ++i) s += std::norm(x[i]);
  return std::sqrt(s);
}

void spmv_avx2(std::size_t rows, const int* outer, const int* inner,
               const cplx* values, const cplx* x, cplx* y) {
  const double* va = dp(values);
  const double* xa = dp(x);
  for (std::size_t r = 0; r < rows; ++r) {
    __m256d acc = _mm256_setzero_pd();
    int k = outer[r];
    const int end = outer[r + 1];
    for (; k + 2 <= end; k += 2) {
      const __m256d v = _mm256_loadu_pd(va + 2 * k);
      const __m256d xv = _mm256_loadu2_m128d(xa + 2 * inner[k + 1],
                                             xa + 2 * inner[k]);
      acc = _mm256_add_pd(acc, cmul(v, xv));
    }
    __m128d s = _mm_add_pd(_mm256_castpd256_pd128(acc),
                           _mm256_extractf128_pd(acc, 1));
    if (k < end) {
      const __m128d v = _mm_loadu_pd(va + 2 * k);
      const __m128d xv = _mm_loadu_pd(xa + 2 * inner[k]);
      const __m128d vr = _mm_movedup_pd(v);
      const __m128d vi = _mm_permute_pd(v, 0x3);
      const __m128d xs = _mm_permute_pd(xv, 0x1);
      s = _mm_add_pd(s, _mm_fmaddsub_pd(vr, xv, _mm_mul_pd(vi, xs)));
    }
    _mm_storeu_pd(reinterpret_cast<double*>(y + r), s);
  }
}

}  // namespace

extern const KernelTable kAvx2Table;
const KernelTable kAvx2Table{"avx2", dotc_avx2, axpy_avx2, scal_avx2,
                             nrm2_avx2, spmv_avx2};

}  // namespace cos2phi::kernels
