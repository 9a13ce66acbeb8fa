#pragma once

// Elementwise complex kernels used by the propagation and adjoint loops.
//
// Every kernel has a scalar reference implementation and, on x86-64, an
// AVX2/FMA variant. The variant is chosen once at startup from CPUID; setting
// SONN_SIMD=scalar in the environment forces the reference path. Outputs may
// alias inputs exactly (out == a) but must not partially overlap.

#include <complex>
#include <cstddef>

namespace sonn::kernels {

using cplx = std::complex<double>;

struct KernelTable {
  const char* name;
  // out[i] = a[i] * b[i]
  void (*cmul)(const cplx* a, const cplx* b, cplx* out, std::size_t n);
  // out[i] = a[i] * conj(b[i])
  void (*cmul_conj)(const cplx* a, const cplx* b, cplx* out, std::size_t n);
  // out[i] = |a[i]|^2
  void (*norm_sq)(const cplx* a, double* out, std::size_t n);
  // sum |a[i]|^2
  double (*sum_norm_sq)(const cplx* a, std::size_t n);
  // sum Re(conj(a[i]) * b[i])
  double (*real_dot)(const cplx* a, const cplx* b, std::size_t n);
  // sum Im(conj(a[i]) * b[i])
  double (*imag_dot)(const cplx* a, const cplx* b, std::size_t n);
  // a[i] *= s
  void (*scale)(cplx* a, double s, std::size_t n);
};

const KernelTable& scalar_table();

/// nullptr when the AVX2 variant was not compiled in.
const KernelTable* avx2_table();

bool cpu_supports_avx2_fma();

/// The table selected for this process.
const KernelTable& active();

}  // namespace sonn::kernels
