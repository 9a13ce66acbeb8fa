// Compiled with -mavx2 -mfma; only reached after a CPUID check.

#include <immintrin.h>

#include "sonn/kernels.hpp"

namespace sonn::kernels {
namespace {

inline __m256d load2(const cplx* p) { return _mm256_loadu_pd(reinterpret_cast<const double*>(p)); }
inline void store2(cplx* p, __m256d v) { _mm256_storeu_pd(reinterpret_cast<double*>(p), v); }

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// lanes: [re0, im0, re1, im1]
inline __m256d mul(__m256d a, __m256d b) {
  const __m256d b_re = _mm256_movedup_pd(b);
  const __m256d b_im = _mm256_permute_pd(b, 0xF);
  const __m256d a_sw = _mm256_permute_pd(a, 0x5);
  return _mm256_fmaddsub_pd(a, b_re, _mm256_mul_pd(a_sw, b_im));
}

inline __m256d mul_conj(__m256d a, __m256d b) {
  const __m256d b_re = _mm256_movedup_pd(b);
  const __m256d b_im = _mm256_permute_pd(b, 0xF);
  const __m256d a_sw = _mm256_permute_pd(a, 0x5);
  return _mm256_fmsubadd_pd(a, b_re, _mm256_mul_pd(a_sw, b_im));
}

void cmul(const cplx* a, const cplx* b, cplx* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d r0 = mul(load2(a + i), load2(b + i));
    const __m256d r1 = mul(load2(a + i + 2), load2(b + i + 2));
    store2(out + i, r0);
    store2(out + i + 2, r1);
  }
  for (; i + 2 <= n; i += 2) store2(out + i, mul(load2(a + i), load2(b + i)));
  scalar_table().cmul(a + i, b + i, out + i, n - i);
}

void cmul_conj(const cplx* a, const cplx* b, cplx* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d r0 = mul_conj(load2(a + i), load2(b + i));
    const __m256d r1 = mul_conj(load2(a + i + 2), load2(b + i + 2));
    store2(out + i, r0);
    store2(out + i + 2, r1);
  }
  for (; i + 2 <= n; i += 2) store2(out + i, mul_conj(load2(a + i), load2(b + i)));
  scalar_table().cmul_conj(a + i, b + i, out + i, n - i);
}

void norm_sq(const cplx* a, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = load2(a + i);
    const __m256d y = load2(a + i + 2);
    // hadd -> [|a0|^2, |a2|^2, |a1|^2, |a3|^2]
    const __m256d h = _mm256_hadd_pd(_mm256_mul_pd(x, x), _mm256_mul_pd(y, y));
    _mm256_storeu_pd(out + i, _mm256_permute4x64_pd(h, 0xD8));
  }
  scalar_table().norm_sq(a + i, out + i, n - i);
}

double sum_norm_sq(const cplx* a, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = load2(a + i);
    const __m256d y = load2(a + i + 2);
    acc0 = _mm256_fmadd_pd(x, x, acc0);
    acc1 = _mm256_fmadd_pd(y, y, acc1);
  }
  return hsum(_mm256_add_pd(acc0, acc1)) + scalar_table().sum_norm_sq(a + i, n - i);
}

double real_dot(const cplx* a, const cplx* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(load2(a + i), load2(b + i), acc0);
    acc1 = _mm256_fmadd_pd(load2(a + i + 2), load2(b + i + 2), acc1);
  }
  return hsum(_mm256_add_pd(acc0, acc1)) + scalar_table().real_dot(a + i, b + i, n - i);
}

double imag_dot(const cplx* a, const cplx* b, std::size_t n) {
  // [ai*br, ar*bi] per complex; result is sum(odd lanes) - sum(even lanes).
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_permute_pd(load2(a + i), 0x5), load2(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_permute_pd(load2(a + i + 2), 0x5), load2(b + i + 2), acc1);
  }
  const __m256d sign = _mm256_set_pd(1.0, -1.0, 1.0, -1.0);
  return hsum(_mm256_mul_pd(_mm256_add_pd(acc0, acc1), sign)) + scalar_table().imag_dot(a + i, b + i, n - i);
}

void scale(cplx* a, double s, std::size_t n) {
  const __m256d f = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) store2(a + i, _mm256_mul_pd(load2(a + i), f));
  scalar_table().scale(a + i, s, n - i);
}

constexpr KernelTable kTable{"avx2", cmul, cmul_conj, norm_sq, sum_norm_sq, real_dot, imag_dot, scale};

}  // namespace

const KernelTable* avx2_table_impl() { return &kTable; }

}  // namespace sonn::kernels
