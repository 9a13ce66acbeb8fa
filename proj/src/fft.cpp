#include "sonn/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>

namespace sonn {
namespace {

// FFTW's planner is not re-entrant; fftw_execute_dft is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(const cplx* p) { return reinterpret_cast<fftw_complex*>(const_cast<cplx*>(p)); }

}  // namespace

struct FftPlan::Impl {
  // [direction][in_place][unaligned]
  fftw_plan plans[2][2][2]{};
};

FftPlan::FftPlan(std::size_t n) : n_(n), impl_(std::make_unique<Impl>()) {
  if (n == 0) throw std::invalid_argument("FftPlan: zero length");
  // FFTW_ESTIMATE keeps plan selection deterministic, so repeated runs are bit-identical.
  CVec a(n), b(n);
  std::lock_guard lock(planner_mutex());
  const int len = static_cast<int>(n);
  for (int dir = 0; dir < 2; ++dir) {
    const int sign = dir == 0 ? FFTW_FORWARD : FFTW_BACKWARD;
    for (int inplace = 0; inplace < 2; ++inplace) {
      for (int unaligned = 0; unaligned < 2; ++unaligned) {
        const unsigned flags = FFTW_ESTIMATE | (unaligned ? FFTW_UNALIGNED : 0u);
        fftw_complex* out = inplace ? as_fftw(a.data()) : as_fftw(b.data());
        impl_->plans[dir][inplace][unaligned] = fftw_plan_dft_1d(len, as_fftw(a.data()), out, sign, flags);
        if (impl_->plans[dir][inplace][unaligned] == nullptr) throw std::runtime_error("FFTW planning failed");
      }
    }
  }
}

FftPlan::~FftPlan() {
  std::lock_guard lock(planner_mutex());
  for (auto& d : impl_->plans)
    for (auto& i : d)
      for (auto& p : i)
        if (p != nullptr) fftw_destroy_plan(p);
}

namespace {

void execute(const fftw_plan (&plans)[2][2], const cplx* in, cplx* out) {
  const int inplace = in == out ? 1 : 0;
  const bool aligned =
      fftw_alignment_of(reinterpret_cast<double*>(const_cast<cplx*>(in))) == 0 &&
      fftw_alignment_of(reinterpret_cast<double*>(out)) == 0;
  fftw_execute_dft(plans[inplace][aligned ? 0 : 1], as_fftw(in), as_fftw(out));
}

}  // namespace

void FftPlan::forward(const cplx* in, cplx* out) const { execute(impl_->plans[0], in, out); }

void FftPlan::inverse(const cplx* in, cplx* out) const { execute(impl_->plans[1], in, out); }

std::shared_ptr<const FftPlan> fft_plan(std::size_t n) {
  static std::mutex cache_mutex;
  static std::map<std::size_t, std::shared_ptr<const FftPlan>> cache;
  std::lock_guard lock(cache_mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  auto plan = std::make_shared<const FftPlan>(n);
  cache.emplace(n, plan);
  return plan;
}

}  // namespace sonn
