#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <new>
#include <vector>

namespace sonn {

using cplx = std::complex<double>;

template <class T, std::size_t Align = 64>
struct AlignedAllocator {
  using value_type = T;
  template <class U>
  struct rebind {
    using other = AlignedAllocator<U, Align>;
  };

  AlignedAllocator() noexcept = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U, Align>&) noexcept {}

  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), std::align_val_t{Align})); }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, std::align_val_t{Align}); }

  template <class U>
  bool operator==(const AlignedAllocator<U, Align>&) const noexcept {
    return true;
  }
};

/// Complex sample buffer; 64-byte aligned so FFTW's SIMD codelets apply.
using CVec = std::vector<cplx, AlignedAllocator<cplx>>;

/// Unnormalized 1-D complex DFT of a fixed length, backed by FFTW.
/// Execution is thread-safe; plans are created once per length and shared.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n);
  ~FftPlan();
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  std::size_t size() const noexcept { return n_; }

  /// out[k] = sum_n in[n] exp(-2 pi i k n / N). In-place (in == out) is allowed.
  void forward(const cplx* in, cplx* out) const;
  /// out[n] = sum_k in[k] exp(+2 pi i k n / N), no 1/N factor.
  void inverse(const cplx* in, cplx* out) const;

 private:
  struct Impl;
  std::size_t n_;
  std::unique_ptr<Impl> impl_;
};

/// Process-wide plan cache keyed by length.
std::shared_ptr<const FftPlan> fft_plan(std::size_t n);

}  // namespace sonn
