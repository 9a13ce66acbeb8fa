#pragma once

// Pattern datasets: analog waveform classes, 8-bit ASCII classes, amplitude
// noise at a given individuality variance rate (IVR), label waveforms, a
// stratified train/test split and the JSON dataset file.

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sonn/field.hpp"

namespace sonn {

enum class DatasetKind { analog, digital };

std::string_view to_string(DatasetKind kind);
DatasetKind dataset_kind_from_string(std::string_view name);

struct PatternClass {
  int id = 0;
  std::string name;
  int label_slot = 0;  // pattern-local period index of the target peak
  bool operator==(const PatternClass&) const = default;
};

struct Sample {
  int class_id = 0;
  std::vector<double> amplitudes;  // one per grid period; padding slots are 0
  bool operator==(const Sample&) const = default;
};

struct DatasetSpec {
  DatasetKind kind = DatasetKind::analog;
  double f_rep = 5e9;
  int pattern_periods = 15;
  int pad_periods = 8;
  /// Analog class names, in class-id order.
  std::vector<std::string> analog_classes{"sine", "square", "rev_triangle", "sawtooth"};
  /// Digital classes, one per character.
  std::string characters = "ucas";
  /// Pattern-local label slots per class; empty selects the defaults.
  std::vector<int> label_slots;
  /// User slot tables (name, pattern amplitudes) replacing the built-in shapes.
  std::vector<std::pair<std::string, std::vector<double>>> custom_patterns;
  int n_per_class = 100;
  double ivr_db = 30.0;
  double train_fraction = 0.7;
  std::uint64_t seed = 1;
  /// Add noise to zero-amplitude pattern slots as well.
  bool noise_on_zero_slots = true;

  void validate() const;
};

struct Dataset {
  DatasetKind kind = DatasetKind::analog;
  double f_rep = 5e9;
  int pattern_periods = 15;
  int pad_periods = 8;
  double ivr_db = 30.0;
  std::uint64_t seed = 1;
  double train_fraction = 0.7;
  bool noise_on_zero_slots = true;
  std::vector<PatternClass> classes;
  std::vector<Sample> samples;
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;

  int num_periods() const noexcept { return pattern_periods + 2 * pad_periods; }
  /// Grid period index of a class's label peak.
  int global_label_slot(int class_id) const;
  const PatternClass& class_by_id(int id) const;

  bool operator==(const Dataset&) const = default;
};

/// Canonical analog shapes on slot i of an n-slot pattern, in [0, 1].
std::vector<double> analog_shape(std::string_view name, int pattern_periods);

/// MSB-first bits of an ASCII character.
std::array<int, 8> ascii_bits(char c);

/// Default evenly spread label slots for `num_classes` classes.
std::vector<int> default_label_slots(DatasetKind kind, int num_classes, int pattern_periods);

/// Standard deviation of the additive amplitude noise: 10^(-ivr_db/10) for a unit peak.
double ivr_sigma(double ivr_db);

/// Adds N(0, sigma) to every pattern slot (or only to non-zero slots), then
/// clamps into [0, 1 + 5 sigma].
void apply_ivr(std::span<double> pattern_amplitudes, double ivr_db, std::mt19937_64& rng,
               bool noise_on_zero_slots = true);

Dataset gen_analog(const DatasetSpec& spec);
Dataset gen_digital(const DatasetSpec& spec);
Dataset generate_dataset(const DatasetSpec& spec);

/// Stratified split: per class, round(train_fraction * n_c) samples go to training.
void split_dataset(Dataset& dataset);

/// |E_p|^2 of one unit pulse centered in grid period `global_slot`.
std::vector<double> make_label(const TimeGrid& grid, const PulseShape& shape, int global_slot);

/// Canonical JSON text; parse(serialize(d)) == d and re-serializing is byte-identical.
std::string serialize_dataset(const Dataset& dataset);
Dataset parse_dataset(const std::string& text);
/// Header fields only, canonical JSON (used for config hashing).
std::string dataset_header_json(const Dataset& dataset);

void save_dataset(const Dataset& dataset, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace sonn
