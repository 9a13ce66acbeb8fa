#pragma once

// Peak-position classification, accuracy, and the study harnesses: IVR sweep,
// off-Talbot dispersion, consecutive patterns, Talbot self-imaging and the
// modulation-type comparison.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sonn/data.hpp"
#include "sonn/network.hpp"
#include "sonn/train.hpp"

namespace sonn {

struct ClassTarget {
  int id = 0;
  int slot = 0;  // grid period index of the label peak
};

std::vector<ClassTarget> class_targets(const Dataset& dataset);

struct Verdict {
  int predicted_class = -1;
  double peak_time = 0.0;
  bool correct = false;
  /// Tallest over second-tallest label-slot intensity, capped at kMarginCap.
  double margin = 0.0;
  /// Peak equidistant from two label slots; the lower slot won.
  bool ambiguous = false;
  /// Output identically zero in the window.
  bool no_signal = false;
};

inline constexpr double kMarginCap = 1e9;

struct ClassifyOptions {
  /// Max |peak_time - label_time| for a correct verdict; <= 0 selects T/2.
  double tolerance = 0.0;
  /// Restrict the argmax to samples [window_begin, window_end); 0/0 means the whole grid.
  std::size_t window_begin = 0;
  std::size_t window_end = 0;
};

/// Nearest-label decision on the argmax of the output intensity.
Verdict classify(std::span<const double> intensity, std::span<const ClassTarget> classes, const TimeGrid& grid,
                 int true_class, const ClassifyOptions& options = {});

/// Fraction of correct verdicts over `indices`.
double accuracy(const Network& net, const ParamSet& theta, const Dataset& dataset,
                std::span<const std::size_t> indices, int jobs = 1);

std::vector<Verdict> evaluate(const Network& net, const ParamSet& theta, const Dataset& dataset,
                              std::span<const std::size_t> indices, int jobs = 1);

// ---------------------------------------------------------------------------

struct IvrPoint {
  double ivr_db = 0.0;
  double accuracy = 0.0;
  int best_epoch = -1;
};

/// For each IVR, generates a dataset from `data` at that IVR and either
/// trains a fresh model (`retrain`) or re-evaluates `trained` on its test split.
std::vector<IvrPoint> ivr_sweep(const NetworkSpec& spec, DatasetSpec data, std::span<const double> ivr_list,
                                const TrainConfig& config, bool retrain = true, const ParamSet* trained = nullptr);

std::string ivr_table_csv(std::span<const IvrPoint> points);

struct OffTalbotReport {
  double deviation = 0.0;
  double baseline_accuracy = 0.0;
  double detuned_accuracy = 0.0;
  std::vector<double> detuned_per_restart;
};

/// Trains with every layer's dispersion scaled by (1 + deviation) and compares
/// with the on-Talbot run. A precomputed baseline accuracy may be supplied.
OffTalbotReport off_talbot_study(const NetworkSpec& spec, const Dataset& dataset, double deviation,
                                 const TrainConfig& config, std::optional<double> baseline_accuracy = std::nullopt);

struct PatternInstance {
  int class_id = 0;
  std::vector<double> amplitudes;  // pattern region only
};

struct ConsecutiveResult {
  std::vector<Verdict> verdicts;
  /// Peak time minus that pattern's label time, per pattern.
  std::vector<double> peak_deviation;
  std::vector<double> intensity;
  TimeGrid grid;
  std::vector<int> pattern_start;  // grid period where each pattern begins
};

/// Places the patterns one after another with `gap_periods` empty periods in
/// between, tiles the trained modulation profile around each pattern, runs a
/// single forward pass and classifies each pattern inside its own window.
ConsecutiveResult consecutive_run(const Network& trained_net, const ParamSet& theta, const Dataset& dataset,
                                  std::span<const PatternInstance> patterns, int gap_periods,
                                  std::optional<int> total_periods = std::nullopt);

struct TalbotReport {
  int order = 1;
  double correlation_at_half_period = 0.0;
  double correlation_at_zero = 0.0;
  double best_correlation = 0.0;
  double best_shift = 0.0;  // seconds, in [0, T)
};

/// Propagates the unmodulated train through `gdd_scale` times the s-th Talbot dispersion.
TalbotReport talbot_check(double f_rep, int s, const TimeGrid& grid, const PulseShape& shape, double gdd_scale = 1.0);

/// Normalized circular cross-correlation of a against b shifted by `shift` samples.
double circular_correlation(std::span<const double> a, std::span<const double> b, std::size_t shift);

struct ModeReport {
  ModulationMode mode = ModulationMode::phase;
  std::vector<double> accuracy_per_seed;
  double median_accuracy = 0.0;
  /// Mean over test samples of the output intensity peak inside the true label slot.
  double main_peak = 0.0;
  /// Mean ratio of that peak to the tallest output outside the label slot, in dB.
  double extinction_db = 0.0;
};

struct ModulationComparison {
  std::vector<ModeReport> modes;
  /// 10 log10(main_peak(phase) / main_peak(amplitude)), when both modes ran.
  std::optional<double> amplitude_peak_suppression_db;
};

ModulationComparison modulation_comparison(const NetworkSpec& spec, const Dataset& dataset,
                                           std::span<const ModulationMode> modes, std::span<const std::uint64_t> seeds,
                                           const TrainConfig& config);

}  // namespace sonn
