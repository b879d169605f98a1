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

#include <complex>
#include <cstddef>
#include <string_view>

namespace cos2phi::kernels {

using cplx = std::complex<double>;

// Dense complex level-1 routines and the CSR matrix-vector product used by
// the Krylov solver. All pointers are unaligned-safe.
struct KernelTable {
  const char* name;
  // sum_i conj(x_i) y_i
  cplx (*dotc)(std::size_t n, const cplx* x, const cplx* y);
  // y += alpha x
  void (*axpy)(std::size_t n, cplx alpha, const cplx* x, cplx* y);
  // x *= alpha
  void (*scal)(std::size_t n, cplx alpha, cplx* x);
  double (*nrm2)(std::size_t n, const cplx* x);
  // y = A x for a row-major CSR matrix
  void (*spmv)(std::size_t rows, const int* outer, const int* inner,
               const cplx* values, const cplx* x, cplx* y);
};

const KernelTable& scalar();

// nullptr when the binary was built without the AVX2 translation unit or the
// CPU lacks AVX2/FMA.
const KernelTable* avx2();

// Kernel table chosen at first use: AVX2 when supported, unless the
// COS2PHI_KERNELS environment variable is set to "scalar".
const KernelTable& active();

// Overrides the selection. Pass nullptr to restore automatic dispatch.
void set_active(const KernelTable* table);

}  // namespace cos2phi::kernels
