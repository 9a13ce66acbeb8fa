#pragma once

// Layer stack of a serial optical network: each layer optionally modulates
// the field with a trainable piecewise-constant profile, then applies
// group-delay dispersion. The detector sees |E_L(t)|^2.

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sonn/field.hpp"

namespace sonn {

enum class ModulationMode { phase, amplitude, complex };

std::string_view to_string(ModulationMode mode);
ModulationMode modulation_mode_from_string(std::string_view name);

struct LayerSpec {
  GddValue gdd;
  bool has_modulation = true;
  ModulationMode mode = ModulationMode::phase;
  int levels_per_period = 2;
  bool half_period_offset = false;

  bool operator==(const LayerSpec&) const = default;
};

struct NetworkSpec {
  std::string name;
  double f_rep = 5e9;
  PulseShape pulse{1e-11, 0.0};
  int samples_per_period = 1024;
  int pattern_periods = 15;
  int pad_periods = 8;
  std::vector<LayerSpec> layers;

  int num_periods() const noexcept { return pattern_periods + 2 * pad_periods; }
  TimeGrid grid() const { return make_grid(f_rep, samples_per_period, num_periods()); }
  void validate() const;

  bool operator==(const NetworkSpec&) const = default;
};

/// analog4, digital4, pseudo3 or twolayer. The pulse width is T/20 of the preset's rate.
NetworkSpec preset(std::string_view name, int samples_per_period = 1024);
std::vector<std::string> preset_names();

/// Same network with every layer's dispersion scaled by (1 + deviation).
NetworkSpec with_gdd_deviation(NetworkSpec spec, double deviation);

/// Same network with every modulated layer switched to `mode`.
NetworkSpec with_modulation_mode(NetworkSpec spec, ModulationMode mode);

enum class ParamKind { phase, amplitude };

struct ParamBlock {
  std::size_t layer;
  ParamKind kind;
  std::size_t offset;
  std::size_t count;
  bool operator==(const ParamBlock&) const = default;
};

/// Where each modulated layer's parameters live in the flat parameter vector.
/// Complex-mode layers own a phase block followed by an amplitude block.
class ParamLayout {
 public:
  ParamLayout() = default;
  explicit ParamLayout(const NetworkSpec& spec);

  const std::vector<ParamBlock>& blocks() const noexcept { return blocks_; }
  std::size_t total() const noexcept { return total_; }
  const ParamBlock* find(std::size_t layer, ParamKind kind) const noexcept;

  bool operator==(const ParamLayout&) const = default;

 private:
  std::vector<ParamBlock> blocks_;
  std::size_t total_ = 0;
};

/// Unconstrained trainable parameters theta. Gradients share the same shape.
class ParamSet {
 public:
  ParamSet() = default;
  explicit ParamSet(ParamLayout layout, double fill = 0.0);
  ParamSet(ParamLayout layout, std::vector<double> values);

  const ParamLayout& layout() const noexcept { return layout_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> block(const ParamBlock& b) noexcept { return std::span(values_).subspan(b.offset, b.count); }
  std::span<const double> block(const ParamBlock& b) const noexcept {
    return std::span(values_).subspan(b.offset, b.count);
  }
  bool all_finite() const noexcept;

  bool operator==(const ParamSet&) const = default;

 private:
  ParamLayout layout_;
  std::vector<double> values_;
};

using Gradient = ParamSet;

double sigmoid(double x) noexcept;

/// Physical values of one layer: phases 2*pi*sigmoid(theta) and amplitudes
/// sigmoid(theta). A mode without a phase (or amplitude) leaves that vector empty.
struct LayerValues {
  std::vector<double> phase;
  std::vector<double> amplitude;
};

LayerValues map_params(const ParamSet& theta, std::size_t layer);

/// Per-sample modulation factor a(t) exp(-j phi(t)) for each layer; empty for
/// layers without modulation.
struct Modulation {
  std::vector<LayerValues> values;
  std::vector<CVec> factor;
};

struct ForwardResult {
  std::vector<double> intensity;
  CVec output;
  /// Field entering each layer's dispersion stage (after modulation). Kept on request.
  std::vector<CVec> modulated;
  /// Field leaving each layer. Kept on request.
  std::vector<CVec> layer_outputs;
};

/// A NetworkSpec with precomputed transfer functions and step geometries.
class Network {
 public:
  explicit Network(NetworkSpec spec);

  const NetworkSpec& spec() const noexcept { return spec_; }
  const TimeGrid& grid() const noexcept { return grid_; }
  const ParamLayout& layout() const noexcept { return layout_; }
  const StepGeometry* geometry(std::size_t layer) const noexcept;
  std::span<const cplx> transfer(std::size_t layer) const noexcept { return transfers_[layer]; }
  const ComplexField& pulse_train() const noexcept { return train_; }

  Modulation modulation(const ParamSet& theta) const;

  ForwardResult forward(const Modulation& modulation, const ComplexField& input, bool keep_intermediates = false) const;
  ForwardResult forward(const ParamSet& theta, const ComplexField& input, bool keep_intermediates = false) const;

  /// Input field for per-period object amplitudes (length num_periods).
  ComplexField encode(std::span<const double> slot_amplitudes) const;

  /// Reverse pass: given dE/dE_L (packed as d/dRe + j d/dIm), propagate to the
  /// per-parameter gradient. `fwd` must hold intermediates.
  void accumulate_gradient(const Modulation& modulation, const ForwardResult& fwd, CVec adjoint,
                           std::span<double> grad) const;

 private:
  NetworkSpec spec_;
  TimeGrid grid_;
  ParamLayout layout_;
  std::vector<CVec> transfers_;
  std::vector<CVec> adjoint_transfers_;
  std::vector<std::optional<StepGeometry>> geometry_;
  std::shared_ptr<const FftPlan> plan_;
  ComplexField train_;
};

}  // namespace sonn
