#include "sonn/field.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "sonn/error.hpp"
#include "sonn/kernels.hpp"

namespace sonn {

namespace {

constexpr double kSpeedOfLight = 299792458.0;

double pulse_amplitude(double tau, double c_lw) { return std::exp(-(tau * tau) / (2.0 * c_lw * c_lw)); }

}  // namespace

void PulseShape::validate() const {
  if (!(c_lw > 0.0) || !std::isfinite(c_lw)) throw ValidationError("PulseShape: c_lw must be positive");
  if (!std::isfinite(phi0)) throw ValidationError("PulseShape: phi0 must be finite");
}

ComplexField::ComplexField(TimeGrid grid) : grid_(grid), samples_(grid.size(), cplx{0.0, 0.0}) {}

ComplexField::ComplexField(TimeGrid grid, CVec samples) : grid_(grid), samples_(std::move(samples)) {
  if (samples_.size() != grid_.size()) throw ValidationError("ComplexField: sample count does not match grid");
}

std::vector<double> ComplexField::intensity() const {
  std::vector<double> out(samples_.size());
  kernels::active().norm_sq(samples_.data(), out.data(), samples_.size());
  return out;
}

bool ComplexField::all_finite() const noexcept {
  for (const auto& v : samples_)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

double energy(const ComplexField& field) {
  return kernels::active().sum_norm_sq(field.data().data(), field.size()) * field.grid().dt();
}

double single_pulse_energy(const TimeGrid& grid, const PulseShape& shape) {
  const auto npp = static_cast<long long>(grid.samples_per_period());
  const double dt = grid.dt();
  double acc = 0.0;
  for (long long m = -npp; m <= npp; ++m) {
    const double a = pulse_amplitude(static_cast<double>(m) * dt, shape.c_lw);
    acc += a * a;
  }
  return acc * dt;
}

double truncation_loss(const TimeGrid& grid, const PulseShape& shape) {
  // Intensity exp(-tau^2/c^2): the fraction beyond |tau| > T is erfc(T/c).
  return std::erfc(grid.period() / shape.c_lw);
}

ComplexField synth_pulse_train(const TimeGrid& grid, const PulseShape& shape, std::vector<std::string>* warnings) {
  shape.validate();
  const double loss = truncation_loss(grid, shape);
  if (loss > 1e-6 && warnings != nullptr) {
    std::ostringstream msg;
    msg << "pulse truncation at |t - T/2| > T removes " << loss << " of each pulse's energy";
    warnings->push_back(msg.str());
  }

  const auto npp = static_cast<long long>(grid.samples_per_period());
  const auto n = static_cast<long long>(grid.size());
  const double dt = grid.dt();

  // Kernel over offsets -N_pp..N_pp from the pulse peak.
  std::vector<double> kernel(static_cast<std::size_t>(2 * npp + 1));
  for (long long m = -npp; m <= npp; ++m)
    kernel[static_cast<std::size_t>(m + npp)] = pulse_amplitude(static_cast<double>(m) * dt, shape.c_lw);

  const cplx phase = std::polar(1.0, -shape.phi0);
  ComplexField out(grid);
  auto s = out.samples();
  for (int i = 0; i < grid.num_periods(); ++i) {
    const long long peak = static_cast<long long>(i) * npp + npp / 2;
    for (long long m = -npp; m <= npp; ++m) {
      long long idx = (peak + m) % n;
      if (idx < 0) idx += n;
      s[static_cast<std::size_t>(idx)] += kernel[static_cast<std::size_t>(m + npp)] * phase;
    }
  }
  return out;
}

ComplexField single_pulse(const TimeGrid& grid, const PulseShape& shape, int slot) {
  shape.validate();
  if (slot < 0 || slot >= grid.num_periods()) throw ValidationError("single_pulse: slot outside grid");
  const auto npp = static_cast<long long>(grid.samples_per_period());
  const auto n = static_cast<long long>(grid.size());
  const double dt = grid.dt();
  const cplx phase = std::polar(1.0, -shape.phi0);
  ComplexField out(grid);
  const long long peak = static_cast<long long>(slot) * npp + npp / 2;
  for (long long m = -npp; m <= npp; ++m) {
    long long idx = (peak + m) % n;
    if (idx < 0) idx += n;
    out[static_cast<std::size_t>(idx)] += pulse_amplitude(static_cast<double>(m) * dt, shape.c_lw) * phase;
  }
  return out;
}

ComplexField sample_object(const ComplexField& train, std::span<const double> slot_amplitudes) {
  const TimeGrid& g = train.grid();
  if (slot_amplitudes.size() != static_cast<std::size_t>(g.num_periods()))
    throw ValidationError("sample_object: expected " + std::to_string(g.num_periods()) + " slot amplitudes, got " +
                          std::to_string(slot_amplitudes.size()));
  ComplexField out(train);
  auto s = out.samples();
  const std::size_t npp = static_cast<std::size_t>(g.samples_per_period());
  for (std::size_t i = 0; i < slot_amplitudes.size(); ++i) {
    const double a = slot_amplitudes[i];
    if (!(a >= 0.0) || !std::isfinite(a)) throw ValidationError("sample_object: amplitudes must be finite and >= 0");
    if (a == 1.0) continue;
    for (std::size_t k = i * npp; k < (i + 1) * npp; ++k) s[k] *= a;
  }
  return out;
}

StepGeometry::StepGeometry(const TimeGrid& grid, int levels_per_period, bool half_period_offset) {
  if (levels_per_period != 1 && levels_per_period != 2)
    throw ValidationError("StepGeometry: levels_per_period must be 1 or 2");
  const auto npp = static_cast<std::size_t>(grid.samples_per_period());
  const auto lpp = static_cast<std::size_t>(levels_per_period);
  const std::size_t divisor = half_period_offset ? 2 * lpp : lpp;
  if (npp % divisor != 0)
    throw ValidationError("StepGeometry: samples_per_period must be divisible by " + std::to_string(divisor));
  level_length_ = npp / lpp;
  num_levels_ = static_cast<std::size_t>(grid.num_periods()) * lpp;
  shift_ = half_period_offset ? level_length_ / 2 : 0;
  total_ = grid.size();

  if (shift_ == 0) {
    for (std::size_t k = 0; k < num_levels_; ++k) segments_.push_back({k, k * level_length_, (k + 1) * level_length_});
  } else {
    // Head of the wrapped last level.
    segments_.push_back({num_levels_ - 1, 0, shift_});
    for (std::size_t k = 0; k + 1 < num_levels_; ++k)
      segments_.push_back({k, k * level_length_ + shift_, (k + 1) * level_length_ + shift_});
    segments_.push_back({num_levels_ - 1, total_ - level_length_ + shift_, total_});
  }
}

std::size_t StepGeometry::level_of_sample(std::size_t n) const noexcept {
  return ((n + total_ - shift_) % total_) / level_length_;
}

ComplexField apply_phase_steps(const ComplexField& field, std::span<const double> step_values, int levels_per_period,
                               bool half_period_offset) {
  const StepGeometry geom(field.grid(), levels_per_period, half_period_offset);
  if (step_values.size() != geom.num_levels())
    throw ValidationError("apply_phase_steps: expected " + std::to_string(geom.num_levels()) + " step values, got " +
                          std::to_string(step_values.size()));
  std::vector<cplx> factors(step_values.size());
  for (std::size_t k = 0; k < step_values.size(); ++k) factors[k] = std::polar(1.0, -step_values[k]);
  CVec profile(field.size());
  geom.expand<cplx>(factors, profile.data());
  ComplexField out(field);
  bool identity = true;
  for (double v : step_values) identity = identity && v == 0.0;
  if (!identity) kernels::active().cmul(out.data().data(), profile.data(), out.data().data(), out.size());
  return out;
}

CVec dispersion_transfer(const TimeGrid& grid, GddValue gdd) {
  const std::size_t n = grid.size();
  CVec h(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double w = grid.omega_of_bin(k);
    h[k] = std::polar(inv_n, 0.5 * gdd.phi2 * w * w);
  }
  return h;
}

void apply_transfer(std::span<cplx> samples, std::span<const cplx> transfer, const FftPlan& plan) {
  plan.forward(samples.data(), samples.data());
  kernels::active().cmul(samples.data(), transfer.data(), samples.data(), samples.size());
  plan.inverse(samples.data(), samples.data());
}

ComplexField propagate_gdd(const ComplexField& field, GddValue gdd) {
  if (!std::isfinite(gdd.phi2)) throw ValidationError("propagate_gdd: phi2 must be finite");
  const CVec h = dispersion_transfer(field.grid(), gdd);
  ComplexField out(field);
  apply_transfer(out.samples(), h, *fft_plan(out.size()));
  return out;
}

ComplexField propagate_gdd_sign_trick(const ComplexField& field, GddValue gdd) {
  const TimeGrid& g = field.grid();
  const std::size_t n = g.size();
  const auto half = static_cast<long long>(n / 2);
  ComplexField out(field);
  auto s = out.samples();
  for (std::size_t i = 1; i < n; i += 2) s[i] = -s[i];
  const auto plan = fft_plan(n);
  plan->forward(s.data(), s.data());
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double w = static_cast<double>(static_cast<long long>(k) - half) * g.omega_step();
    s[k] *= std::polar(inv_n, 0.5 * gdd.phi2 * w * w);
  }
  plan->inverse(s.data(), s.data());
  for (std::size_t i = 1; i < n; i += 2) s[i] = -s[i];
  return out;
}

GddValue talbot_gdd(double f_rep, int s, int sign) {
  if (!(f_rep > 0.0)) throw ValidationError("talbot_gdd: f_rep must be positive");
  if (s < 1) throw ValidationError("talbot_gdd: Talbot order s must be >= 1");
  if (sign != 1 && sign != -1) throw ValidationError("talbot_gdd: sign must be +1 or -1");
  return {static_cast<double>(sign) * static_cast<double>(s) / (2.0 * std::numbers::pi * f_rep * f_rep)};
}

double gdd_to_ps_per_nm(GddValue gdd, double wavelength_m) {
  if (!(wavelength_m > 0.0)) throw ValidationError("gdd_to_ps_per_nm: wavelength must be positive");
  const double s_per_m = -(2.0 * std::numbers::pi * kSpeedOfLight / (wavelength_m * wavelength_m)) * gdd.phi2;
  return s_per_m * 1e12 / 1e9;
}

double edge_leakage(const ComplexField& field) {
  const double total = energy(field);
  if (total == 0.0) return 0.0;
  const TimeGrid& g = field.grid();
  const std::size_t npp = static_cast<std::size_t>(g.samples_per_period());
  const auto& k = kernels::active();
  const double head = k.sum_norm_sq(field.data().data(), npp);
  const double tail = k.sum_norm_sq(field.data().data() + field.size() - npp, npp);
  return (head + tail) * g.dt() / total;
}

}  // namespace sonn
