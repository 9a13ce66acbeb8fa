#include "sonn/network.hpp"

#include <cmath>
#include <numbers>

#include "sonn/error.hpp"
#include "sonn/kernels.hpp"

namespace sonn {

std::string_view to_string(ModulationMode mode) {
  switch (mode) {
    case ModulationMode::phase: return "phase";
    case ModulationMode::amplitude: return "amplitude";
    case ModulationMode::complex: return "complex";
  }
  return "phase";
}

ModulationMode modulation_mode_from_string(std::string_view name) {
  if (name == "phase") return ModulationMode::phase;
  if (name == "amplitude") return ModulationMode::amplitude;
  if (name == "complex") return ModulationMode::complex;
  throw ValidationError("unknown modulation mode '" + std::string(name) + "'");
}

void NetworkSpec::validate() const {
  if (!(f_rep > 0.0)) throw ValidationError("NetworkSpec: f_rep must be positive");
  pulse.validate();
  if (pattern_periods < 1) throw ValidationError("NetworkSpec: pattern_periods must be >= 1");
  if (pad_periods < 0) throw ValidationError("NetworkSpec: pad_periods must be >= 0");
  if (layers.empty()) throw ValidationError("NetworkSpec: at least one layer is required");
  const TimeGrid g = grid();
  for (const auto& l : layers) {
    if (!std::isfinite(l.gdd.phi2)) throw ValidationError("NetworkSpec: layer dispersion must be finite");
    if (l.has_modulation) StepGeometry(g, l.levels_per_period, l.half_period_offset);
  }
}

namespace {

NetworkSpec symmetric_four_layer(std::string name, int pattern_periods, int talbot_order, int spp) {
  NetworkSpec s;
  s.name = std::move(name);
  s.f_rep = 5e9;
  s.samples_per_period = spp;
  s.pattern_periods = pattern_periods;
  s.pad_periods = 8;
  s.pulse = {1.0 / s.f_rep / 20.0, 0.0};
  for (int i = 0; i < 4; ++i) {
    LayerSpec l;
    l.gdd = talbot_gdd(s.f_rep, talbot_order, i % 2 == 0 ? +1 : -1);
    l.has_modulation = true;
    l.mode = ModulationMode::phase;
    l.levels_per_period = 2;
    l.half_period_offset = i % 2 == 1;  // layers 2 and 4
    s.layers.push_back(l);
  }
  return s;
}

NetworkSpec experiment_layout(std::string name, bool with_pseudo_layer, int spp) {
  NetworkSpec s;
  s.name = std::move(name);
  s.f_rep = 12.0561e9;
  s.samples_per_period = spp;
  s.pattern_periods = 8;
  s.pad_periods = 8;
  s.pulse = {1.0 / s.f_rep / 20.0, 0.0};
  const GddValue dt = talbot_gdd(s.f_rep, 1, +1);
  if (with_pseudo_layer) s.layers.push_back({dt, false, ModulationMode::phase, 1, false});
  const std::size_t first = s.layers.size();
  for (std::size_t i = first; i < first + 2; ++i)
    s.layers.push_back({dt, true, ModulationMode::phase, 1, i % 2 == 1});
  return s;
}

}  // namespace

NetworkSpec preset(std::string_view name, int samples_per_period) {
  NetworkSpec s;
  if (name == "analog4") {
    s = symmetric_four_layer("analog4", 15, 2, samples_per_period);
  } else if (name == "digital4") {
    s = symmetric_four_layer("digital4", 8, 3, samples_per_period);
  } else if (name == "pseudo3") {
    s = experiment_layout("pseudo3", true, samples_per_period);
  } else if (name == "twolayer") {
    s = experiment_layout("twolayer", false, samples_per_period);
  } else {
    throw ValidationError("unknown preset '" + std::string(name) + "'");
  }
  s.validate();
  return s;
}

std::vector<std::string> preset_names() { return {"analog4", "digital4", "pseudo3", "twolayer"}; }

NetworkSpec with_gdd_deviation(NetworkSpec spec, double deviation) {
  for (auto& l : spec.layers) l.gdd.phi2 *= (1.0 + deviation);
  return spec;
}

NetworkSpec with_modulation_mode(NetworkSpec spec, ModulationMode mode) {
  for (auto& l : spec.layers)
    if (l.has_modulation) l.mode = mode;
  return spec;
}

ParamLayout::ParamLayout(const NetworkSpec& spec) {
  const auto periods = static_cast<std::size_t>(spec.num_periods());
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const auto& l = spec.layers[i];
    if (!l.has_modulation) continue;
    const std::size_t count = periods * static_cast<std::size_t>(l.levels_per_period);
    if (l.mode != ModulationMode::amplitude) {
      blocks_.push_back({i, ParamKind::phase, total_, count});
      total_ += count;
    }
    if (l.mode != ModulationMode::phase) {
      blocks_.push_back({i, ParamKind::amplitude, total_, count});
      total_ += count;
    }
  }
}

const ParamBlock* ParamLayout::find(std::size_t layer, ParamKind kind) const noexcept {
  for (const auto& b : blocks_)
    if (b.layer == layer && b.kind == kind) return &b;
  return nullptr;
}

ParamSet::ParamSet(ParamLayout layout, double fill) : layout_(std::move(layout)), values_(layout_.total(), fill) {}

ParamSet::ParamSet(ParamLayout layout, std::vector<double> values)
    : layout_(std::move(layout)), values_(std::move(values)) {
  if (values_.size() != layout_.total())
    throw ValidationError("ParamSet: expected " + std::to_string(layout_.total()) + " values, got " +
                          std::to_string(values_.size()));
}

bool ParamSet::all_finite() const noexcept {
  for (double v : values_)
    if (!std::isfinite(v)) return false;
  return true;
}

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

LayerValues map_params(const ParamSet& theta, std::size_t layer) {
  LayerValues v;
  if (const ParamBlock* b = theta.layout().find(layer, ParamKind::phase)) {
    const auto t = theta.block(*b);
    v.phase.resize(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) v.phase[k] = 2.0 * std::numbers::pi * sigmoid(t[k]);
  }
  if (const ParamBlock* b = theta.layout().find(layer, ParamKind::amplitude)) {
    const auto t = theta.block(*b);
    v.amplitude.resize(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) v.amplitude[k] = sigmoid(t[k]);
  }
  return v;
}

Network::Network(NetworkSpec spec)
    : spec_(std::move(spec)), grid_(spec_.grid()), layout_(spec_), plan_(fft_plan(grid_.size())),
      train_(synth_pulse_train(grid_, spec_.pulse)) {
  spec_.validate();
  for (const auto& l : spec_.layers) {
    CVec h = dispersion_transfer(grid_, l.gdd);
    CVec hc(h.size());
    for (std::size_t k = 0; k < h.size(); ++k) hc[k] = std::conj(h[k]);
    transfers_.push_back(std::move(h));
    adjoint_transfers_.push_back(std::move(hc));
    if (l.has_modulation) {
      geometry_.emplace_back(StepGeometry(grid_, l.levels_per_period, l.half_period_offset));
    } else {
      geometry_.emplace_back(std::nullopt);
    }
  }
}

const StepGeometry* Network::geometry(std::size_t layer) const noexcept {
  return geometry_[layer] ? &*geometry_[layer] : nullptr;
}

Modulation Network::modulation(const ParamSet& theta) const {
  if (!(theta.layout() == layout_)) throw ValidationError("Network: parameter layout does not match the network");
  Modulation m;
  m.values.resize(spec_.layers.size());
  m.factor.resize(spec_.layers.size());
  for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
    if (!spec_.layers[i].has_modulation) continue;
    const StepGeometry& geom = *geometry_[i];
    LayerValues v = map_params(theta, i);
    std::vector<cplx> per_level(geom.num_levels());
    for (std::size_t k = 0; k < per_level.size(); ++k) {
      const double a = v.amplitude.empty() ? 1.0 : v.amplitude[k];
      const double p = v.phase.empty() ? 0.0 : v.phase[k];
      per_level[k] = std::polar(a, -p);
    }
    m.factor[i].resize(grid_.size());
    geom.expand<cplx>(per_level, m.factor[i].data());
    m.values[i] = std::move(v);
  }
  return m;
}

ForwardResult Network::forward(const Modulation& modulation, const ComplexField& input, bool keep) const {
  if (!(input.grid() == grid_)) throw ValidationError("Network::forward: input is not on the network grid");
  if (modulation.factor.size() != spec_.layers.size())
    throw ValidationError("Network::forward: modulation does not match layer count");
  const auto& k = kernels::active();
  const std::size_t n = grid_.size();
  ForwardResult r;
  CVec e = input.data();
  if (keep) {
    r.modulated.reserve(spec_.layers.size());
    r.layer_outputs.reserve(spec_.layers.size());
  }
  for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
    if (spec_.layers[i].has_modulation) {
      const CVec& f = modulation.factor[i];
      if (f.size() != n) throw ValidationError("Network::forward: modulation profile has the wrong length");
      k.cmul(e.data(), f.data(), e.data(), n);
    }
    if (keep) r.modulated.push_back(e);
    apply_transfer(e, transfers_[i], *plan_);
    if (keep) r.layer_outputs.push_back(e);
  }
  r.intensity.resize(n);
  k.norm_sq(e.data(), r.intensity.data(), n);
  r.output = std::move(e);
  return r;
}

ForwardResult Network::forward(const ParamSet& theta, const ComplexField& input, bool keep) const {
  return forward(modulation(theta), input, keep);
}

ComplexField Network::encode(std::span<const double> slot_amplitudes) const {
  return sample_object(train_, slot_amplitudes);
}

void Network::accumulate_gradient(const Modulation& modulation, const ForwardResult& fwd, CVec adjoint,
                                  std::span<double> grad) const {
  if (fwd.modulated.size() != spec_.layers.size())
    throw ValidationError("Network::accumulate_gradient: forward pass did not keep intermediates");
  if (grad.size() != layout_.total()) throw ValidationError("Network::accumulate_gradient: gradient size mismatch");
  const auto& k = kernels::active();
  const std::size_t n = grid_.size();
  std::vector<double> level_sum;

  for (std::size_t i = spec_.layers.size(); i-- > 0;) {
    // Dispersion is unitary: its adjoint applies conj(H).
    apply_transfer(adjoint, adjoint_transfers_[i], *plan_);
    if (!spec_.layers[i].has_modulation) continue;

    const StepGeometry& geom = *geometry_[i];
    const CVec& u = fwd.modulated[i];
    const LayerValues& v = modulation.values[i];

    if (const ParamBlock* b = layout_.find(i, ParamKind::phase)) {
      // dU/dphi = -j U  =>  de/dphi = sum Im(conj(G) U)
      level_sum.assign(geom.num_levels(), 0.0);
      for (const auto& s : geom.segments())
        level_sum[s.level] += k.imag_dot(adjoint.data() + s.begin, u.data() + s.begin, s.end - s.begin);
      auto g = grad.subspan(b->offset, b->count);
      for (std::size_t l = 0; l < level_sum.size(); ++l) {
        const double sg = v.phase[l] / (2.0 * std::numbers::pi);
        g[l] += level_sum[l] * 2.0 * std::numbers::pi * sg * (1.0 - sg);
      }
    }
    if (const ParamBlock* b = layout_.find(i, ParamKind::amplitude)) {
      // dU/da = U / a and da/dtheta = a (1 - a)  =>  de/dtheta = (1 - a) sum Re(conj(G) U)
      level_sum.assign(geom.num_levels(), 0.0);
      for (const auto& s : geom.segments())
        level_sum[s.level] += k.real_dot(adjoint.data() + s.begin, u.data() + s.begin, s.end - s.begin);
      auto g = grad.subspan(b->offset, b->count);
      for (std::size_t l = 0; l < level_sum.size(); ++l) g[l] += level_sum[l] * (1.0 - v.amplitude[l]);
    }
    k.cmul_conj(adjoint.data(), modulation.factor[i].data(), adjoint.data(), n);
  }
}

}  // namespace sonn
