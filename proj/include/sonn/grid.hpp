#pragma once

#include <cstddef>
#include <vector>

namespace sonn {

/// Sampled time axis spanning `num_periods` pulse periods, and the matching
/// angular-frequency axis of its DFT.
///
/// The period is stored and the sample spacing derived from it, so
/// dt * samples_per_period == period holds exactly. The frequency axis is
/// centered: bin k of an unshifted DFT maps to 2*pi*k/(N*dt) for k < N/2 and
/// to 2*pi*(k-N)/(N*dt) otherwise, with the single Nyquist bin on the
/// negative side.
class TimeGrid {
 public:
  TimeGrid(double period, int samples_per_period, int num_periods);

  double period() const noexcept { return period_; }
  double f_rep() const noexcept { return 1.0 / period_; }
  int samples_per_period() const noexcept { return samples_per_period_; }
  int num_periods() const noexcept { return num_periods_; }
  double dt() const noexcept { return period_ / samples_per_period_; }
  std::size_t size() const noexcept {
    return static_cast<std::size_t>(samples_per_period_) * static_cast<std::size_t>(num_periods_);
  }
  double duration() const noexcept { return period_ * num_periods_; }

  double time(std::size_t n) const noexcept { return static_cast<double>(n) * dt(); }
  std::size_t period_start(int i) const noexcept {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(samples_per_period_);
  }

  /// Angular frequency of unshifted DFT bin k.
  double omega_of_bin(std::size_t k) const noexcept;
  /// Frequency spacing 2*pi/(N*dt).
  double omega_step() const noexcept;
  /// Ascending centered axis, -pi/dt ... pi/dt - step.
  std::vector<double> centered_frequency_axis() const;

  bool operator==(const TimeGrid&) const = default;

 private:
  double period_;
  int samples_per_period_;
  int num_periods_;
};

/// Validated constructor: f_rep > 0, samples_per_period even and >= 8, num_periods >= 1.
TimeGrid make_grid(double f_rep, int samples_per_period, int num_periods);

}  // namespace sonn
