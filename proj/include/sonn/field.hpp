#pragma once

// Optical field primitives: pulse-train synthesis, object sampling,
// piecewise-constant temporal modulation and group-delay dispersion.
// All operations are pure; none mutates its input field.

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "sonn/fft.hpp"
#include "sonn/grid.hpp"

namespace sonn {

/// Gaussian pulse exp(-(t - T/2)^2 / (2 c_lw^2)) exp(-j phi0), forced to zero
/// for |t - T/2| > T.
struct PulseShape {
  double c_lw;
  double phi0 = 0.0;

  /// c_lw = T/20: adjacent-period truncation loses far less than 1e-9 of the energy.
  static PulseShape default_for(const TimeGrid& grid) { return {grid.period() / 20.0, 0.0}; }

  void validate() const;
  bool operator==(const PulseShape&) const = default;
};

/// Signed total group-delay dispersion phi2 = beta2 * L, in s^2/rad.
struct GddValue {
  double phi2 = 0.0;
  bool operator==(const GddValue&) const = default;
};

/// Complex envelope sampled on a TimeGrid.
class ComplexField {
 public:
  explicit ComplexField(TimeGrid grid);
  ComplexField(TimeGrid grid, CVec samples);

  const TimeGrid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return samples_.size(); }

  std::span<const cplx> samples() const noexcept { return samples_; }
  std::span<cplx> samples() noexcept { return samples_; }
  const CVec& data() const noexcept { return samples_; }
  CVec& data() noexcept { return samples_; }

  cplx operator[](std::size_t n) const noexcept { return samples_[n]; }
  cplx& operator[](std::size_t n) noexcept { return samples_[n]; }

  /// |E(t)|^2 per sample.
  std::vector<double> intensity() const;
  bool all_finite() const noexcept;

 private:
  TimeGrid grid_;
  CVec samples_;
};

/// Sum |E_n|^2 dt.
double energy(const ComplexField& field);

/// Energy of a single truncated pulse, by direct summation on the grid spacing.
double single_pulse_energy(const TimeGrid& grid, const PulseShape& shape);

/// Fraction of the untruncated pulse energy removed by the |t - T/2| <= T support.
double truncation_loss(const TimeGrid& grid, const PulseShape& shape);

/// One pulse per period, peak at sample i*N_pp + N_pp/2. Pulse tails that run
/// past the grid edges wrap circularly, matching the DFT's periodicity. When the
/// truncation removes more than 1e-6 of a pulse's energy a message is appended
/// to `warnings` (if given).
ComplexField synth_pulse_train(const TimeGrid& grid, const PulseShape& shape,
                               std::vector<std::string>* warnings = nullptr);

/// Single unit pulse centered in period `slot`, zero elsewhere.
ComplexField single_pulse(const TimeGrid& grid, const PulseShape& shape, int slot);

/// Multiplies period i of `train` by slot_amplitudes[i] (field amplitude).
ComplexField sample_object(const ComplexField& train, std::span<const double> slot_amplitudes);

/// Partition of a grid into piecewise-constant modulation levels of length
/// N_pp / levels_per_period. With `half_period_offset`, every boundary is
/// delayed by half a level and the last level wraps around to the start.
class StepGeometry {
 public:
  struct Segment {
    std::size_t level;
    std::size_t begin;
    std::size_t end;
  };

  StepGeometry(const TimeGrid& grid, int levels_per_period, bool half_period_offset);

  std::size_t num_levels() const noexcept { return num_levels_; }
  std::size_t level_length() const noexcept { return level_length_; }
  /// Contiguous runs in sample order; a wrapped level appears twice.
  const std::vector<Segment>& segments() const noexcept { return segments_; }
  std::size_t level_of_sample(std::size_t n) const noexcept;

  /// Expands per-level values to per-sample values.
  template <class T, class Out>
  void expand(std::span<const T> level_values, Out* out) const {
    for (const auto& s : segments_)
      for (std::size_t n = s.begin; n < s.end; ++n) out[n] = level_values[s.level];
  }

 private:
  std::size_t num_levels_;
  std::size_t level_length_;
  std::size_t shift_;
  std::size_t total_;
  std::vector<Segment> segments_;
};

/// E_out(t) = E_in(t) exp(-j phi(t)), phi piecewise-constant per StepGeometry.
ComplexField apply_phase_steps(const ComplexField& field, std::span<const double> step_values, int levels_per_period,
                               bool half_period_offset);

/// H(omega) = exp(j phi2 omega^2 / 2) in unshifted DFT bin order, with the
/// inverse DFT's 1/N folded in.
CVec dispersion_transfer(const TimeGrid& grid, GddValue gdd);

/// In-place IDFT{ H . DFT[x] } for a transfer produced by dispersion_transfer.
void apply_transfer(std::span<cplx> samples, std::span<const cplx> transfer, const FftPlan& plan);

/// Dispersive propagation on the centered frequency axis.
ComplexField propagate_gdd(const ComplexField& field, GddValue gdd);

/// Same propagation via alternating-sign time samples: multiply by (-1)^n,
/// DFT, apply H on the bin index minus N/2, inverse DFT, multiply by (-1)^n.
ComplexField propagate_gdd_sign_trick(const ComplexField& field, GddValue gdd);

/// phi2 = sign * s / (2 pi f_rep^2): the s-th integer temporal Talbot dispersion.
GddValue talbot_gdd(double f_rep, int s, int sign = +1);

/// Accumulated dispersion D*L = -(2 pi c / lambda^2) phi2, in ps/nm.
double gdd_to_ps_per_nm(GddValue gdd, double wavelength_m);

/// Energy fraction in the outermost period on each side: a wraparound
/// diagnostic for the circular boundary.
double edge_leakage(const ComplexField& field);

}  // namespace sonn
