#include "sonn/grid.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "sonn/error.hpp"

namespace sonn {

TimeGrid::TimeGrid(double period, int samples_per_period, int num_periods)
    : period_(period), samples_per_period_(samples_per_period), num_periods_(num_periods) {
  if (!(period > 0.0) || !std::isfinite(period)) throw ValidationError("TimeGrid: period must be positive and finite");
  if (samples_per_period < 8 || samples_per_period % 2 != 0)
    throw ValidationError("TimeGrid: samples_per_period must be even and >= 8, got " +
                          std::to_string(samples_per_period));
  if (num_periods < 1) throw ValidationError("TimeGrid: num_periods must be >= 1");
}

double TimeGrid::omega_step() const noexcept {
  return 2.0 * std::numbers::pi / (static_cast<double>(size()) * dt());
}

double TimeGrid::omega_of_bin(std::size_t k) const noexcept {
  const auto n = static_cast<long long>(size());
  auto kk = static_cast<long long>(k);
  if (kk >= n / 2) kk -= n;
  return static_cast<double>(kk) * omega_step();
}

std::vector<double> TimeGrid::centered_frequency_axis() const {
  const std::size_t n = size();
  std::vector<double> axis(n);
  const auto half = static_cast<long long>(n / 2);
  for (std::size_t i = 0; i < n; ++i) axis[i] = static_cast<double>(static_cast<long long>(i) - half) * omega_step();
  return axis;
}

TimeGrid make_grid(double f_rep, int samples_per_period, int num_periods) {
  if (!(f_rep > 0.0) || !std::isfinite(f_rep)) throw ValidationError("make_grid: f_rep must be positive");
  return TimeGrid(1.0 / f_rep, samples_per_period, num_periods);
}

}  // namespace sonn
