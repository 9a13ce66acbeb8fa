#include "sonn/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "sonn/error.hpp"

namespace sonn {

namespace {

void reject_unknown(const ojson& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!j.is_object()) throw ParseError(where + ": expected an object", 0);
  for (const auto& item : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
      throw ParseError(where + ": unknown field '" + item.key() + "'", 0);
  }
}

template <class T>
void optional_field(const ojson& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(where + ": field '" + key + "': " + e.what(), 0);
  }
}

template <class T>
T required_field(const ojson& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(where + ": missing field '" + key + "'", 0);
  T out{};
  optional_field(j, key, out, where);
  return out;
}

ojson parse_json(const std::string& text, const std::string& what) {
  try {
    return ojson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(what + ": " + e.what(), e.byte);
  }
}

// Domain validation failures inside a parser surface as parse errors.
template <class F>
auto as_parse_error(F&& f) {
  try {
    return f();
  } catch (const ValidationError& e) {
    throw ParseError(e.what(), 0);
  }
}

}  // namespace

DatasetSpec default_dataset_for(const NetworkSpec& spec) {
  DatasetSpec d;
  d.f_rep = spec.f_rep;
  d.pattern_periods = spec.pattern_periods;
  d.pad_periods = spec.pad_periods;
  d.kind = spec.pattern_periods == 15 ? DatasetKind::analog : DatasetKind::digital;
  // The three-layer networks were built for the binary letter tasks.
  if (spec.name == "pseudo3" || spec.name == "twolayer") d.characters = "uc";
  return d;
}

RunConfig default_run_config(std::string_view preset_name, int samples_per_period) {
  RunConfig c;
  c.preset = std::string(preset_name);
  c.network = preset(preset_name, samples_per_period);
  c.dataset = default_dataset_for(c.network);
  if (c.network.name == "digital4") c.train.epochs = 800;
  return c;
}

void RunConfig::validate() const {
  network.validate();
  train.validate();
  if (dataset_file.empty()) {
    dataset.validate();
    if (std::abs(dataset.f_rep - network.f_rep) > 1e-9 * network.f_rep)
      throw ValidationError("config: dataset f_rep does not match the network");
    if (dataset.pattern_periods != network.pattern_periods || dataset.pad_periods != network.pad_periods)
      throw ValidationError("config: dataset pattern_periods/pad_periods do not match the network");
  }
  if (ParamLayout(network).total() == 0) throw ValidationError("config: network has no trainable parameters");
}

ojson network_to_json(const NetworkSpec& s) {
  ojson j;
  j["name"] = s.name;
  j["f_rep"] = s.f_rep;
  j["samples_per_period"] = s.samples_per_period;
  j["pattern_periods"] = s.pattern_periods;
  j["pad_periods"] = s.pad_periods;
  j["pulse"] = {{"c_lw", s.pulse.c_lw}, {"phi0", s.pulse.phi0}};
  ojson layers = ojson::array();
  for (const auto& l : s.layers) {
    ojson lj;
    lj["phi2"] = l.gdd.phi2;
    lj["modulated"] = l.has_modulation;
    lj["mode"] = std::string(to_string(l.mode));
    lj["levels_per_period"] = l.levels_per_period;
    lj["half_period_offset"] = l.half_period_offset;
    layers.push_back(std::move(lj));
  }
  j["layers"] = std::move(layers);
  return j;
}

NetworkSpec network_from_json(const ojson& j) {
  const std::string where = "network";
  reject_unknown(j, {"name", "f_rep", "samples_per_period", "pattern_periods", "pad_periods", "pulse", "layers"}, where);
  NetworkSpec s;
  s.name = j.value("name", std::string("custom"));
  s.f_rep = required_field<double>(j, "f_rep", where);
  s.samples_per_period = 1024;
  optional_field(j, "samples_per_period", s.samples_per_period, where);
  s.pattern_periods = required_field<int>(j, "pattern_periods", where);
  optional_field(j, "pad_periods", s.pad_periods, where);
  s.pulse = {1.0 / s.f_rep / 20.0, 0.0};
  if (j.contains("pulse")) {
    const ojson& p = j.at("pulse");
    reject_unknown(p, {"c_lw", "phi0"}, "network.pulse");
    optional_field(p, "c_lw", s.pulse.c_lw, "network.pulse");
    optional_field(p, "phi0", s.pulse.phi0, "network.pulse");
  }
  for (const auto& lj : required_field<ojson>(j, "layers", where)) {
    reject_unknown(lj, {"phi2", "modulated", "mode", "levels_per_period", "half_period_offset"}, "network.layers[]");
    LayerSpec l;
    l.gdd.phi2 = required_field<double>(lj, "phi2", "network.layers[]");
    l.has_modulation = true;
    optional_field(lj, "modulated", l.has_modulation, "network.layers[]");
    std::string mode = "phase";
    optional_field(lj, "mode", mode, "network.layers[]");
    l.mode = as_parse_error([&] { return modulation_mode_from_string(mode); });
    optional_field(lj, "levels_per_period", l.levels_per_period, "network.layers[]");
    optional_field(lj, "half_period_offset", l.half_period_offset, "network.layers[]");
    s.layers.push_back(l);
  }
  return s;
}

ojson dataset_spec_to_json(const DatasetSpec& d) {
  ojson j;
  j["kind"] = std::string(to_string(d.kind));
  j["f_rep"] = d.f_rep;
  j["pattern_periods"] = d.pattern_periods;
  j["pad_periods"] = d.pad_periods;
  j["analog_classes"] = d.analog_classes;
  j["characters"] = d.characters;
  j["label_slots"] = d.label_slots;
  ojson custom = ojson::array();
  for (const auto& [name, amps] : d.custom_patterns) custom.push_back({{"name", name}, {"amplitudes", amps}});
  j["custom_patterns"] = std::move(custom);
  j["n_per_class"] = d.n_per_class;
  j["ivr_db"] = d.ivr_db;
  j["train_fraction"] = d.train_fraction;
  j["seed"] = d.seed;
  j["noise_on_zero_slots"] = d.noise_on_zero_slots;
  return j;
}

namespace {

void dataset_spec_from_json(const ojson& j, DatasetSpec& d) {
  const std::string where = "dataset";
  reject_unknown(j,
                 {"kind", "f_rep", "pattern_periods", "pad_periods", "analog_classes", "characters", "label_slots",
                  "custom_patterns", "n_per_class", "ivr_db", "train_fraction", "seed", "noise_on_zero_slots"},
                 where);
  if (j.contains("kind")) {
    const auto kind = required_field<std::string>(j, "kind", where);
    d.kind = as_parse_error([&] { return dataset_kind_from_string(kind); });
  }
  optional_field(j, "f_rep", d.f_rep, where);
  optional_field(j, "pattern_periods", d.pattern_periods, where);
  optional_field(j, "pad_periods", d.pad_periods, where);
  optional_field(j, "analog_classes", d.analog_classes, where);
  optional_field(j, "characters", d.characters, where);
  optional_field(j, "label_slots", d.label_slots, where);
  if (j.contains("custom_patterns")) {
    d.custom_patterns.clear();
    for (const auto& p : j.at("custom_patterns")) {
      reject_unknown(p, {"name", "amplitudes"}, "dataset.custom_patterns[]");
      d.custom_patterns.emplace_back(required_field<std::string>(p, "name", "dataset.custom_patterns[]"),
                                     required_field<std::vector<double>>(p, "amplitudes", "dataset.custom_patterns[]"));
    }
  }
  optional_field(j, "n_per_class", d.n_per_class, where);
  optional_field(j, "ivr_db", d.ivr_db, where);
  optional_field(j, "train_fraction", d.train_fraction, where);
  optional_field(j, "seed", d.seed, where);
  optional_field(j, "noise_on_zero_slots", d.noise_on_zero_slots, where);
}

void train_config_from_json(const ojson& j, TrainConfig& t) {
  const std::string where = "train";
  reject_unknown(j,
                 {"optimizer", "lr0", "decay_factor", "decay_every", "batch_size", "epochs", "restarts", "seed",
                  "init_range", "beta1", "beta2", "epsilon", "stop_at_accuracy", "jobs"},
                 where);
  if (j.contains("optimizer")) {
    const auto name = required_field<std::string>(j, "optimizer", where);
    t.optimizer = as_parse_error([&] { return optimizer_from_string(name); });
  }
  optional_field(j, "lr0", t.lr0, where);
  optional_field(j, "decay_factor", t.decay_factor, where);
  optional_field(j, "decay_every", t.decay_every, where);
  optional_field(j, "batch_size", t.batch_size, where);
  optional_field(j, "epochs", t.epochs, where);
  optional_field(j, "restarts", t.restarts, where);
  optional_field(j, "seed", t.seed, where);
  optional_field(j, "init_range", t.init_range, where);
  optional_field(j, "beta1", t.beta1, where);
  optional_field(j, "beta2", t.beta2, where);
  optional_field(j, "epsilon", t.epsilon, where);
  optional_field(j, "stop_at_accuracy", t.stop_at_accuracy, where);
  optional_field(j, "jobs", t.jobs, where);
}

}  // namespace

ojson train_config_to_json(const TrainConfig& t) {
  ojson j;
  j["optimizer"] = std::string(to_string(t.optimizer));
  j["lr0"] = t.lr0;
  j["decay_factor"] = t.decay_factor;
  j["decay_every"] = t.decay_every;
  j["batch_size"] = t.batch_size;
  j["epochs"] = t.epochs;
  j["restarts"] = t.restarts;
  j["seed"] = t.seed;
  j["init_range"] = t.init_range;
  j["beta1"] = t.beta1;
  j["beta2"] = t.beta2;
  j["epsilon"] = t.epsilon;
  j["stop_at_accuracy"] = t.stop_at_accuracy;
  j["jobs"] = t.jobs;
  return j;
}

RunConfig parse_run_config(const std::string& text) {
  const ojson j = parse_json(text, "config");
  reject_unknown(j,
                 {"preset", "samples_per_period", "network", "dataset", "dataset_file", "train", "out_dir", "seed"},
                 "config");
  if (j.contains("preset") == j.contains("network"))
    throw ParseError("config: exactly one of 'preset' and 'network' is required", 0);

  RunConfig c;
  optional_field(j, "seed", c.seed, "config");
  if (j.contains("preset")) {
    int spp = 1024;
    optional_field(j, "samples_per_period", spp, "config");
    const auto name = required_field<std::string>(j, "preset", "config");
    c = as_parse_error([&] { return default_run_config(name, spp); });
    optional_field(j, "seed", c.seed, "config");
  } else {
    if (j.contains("samples_per_period")) throw ParseError("config: samples_per_period belongs inside 'network'", 0);
    c.network = network_from_json(j.at("network"));
    c.dataset = default_dataset_for(c.network);
  }
  // The top-level seed is the default for both RNG consumers.
  c.dataset.seed = c.seed;
  c.train.seed = c.seed;
  if (j.contains("dataset")) dataset_spec_from_json(j.at("dataset"), c.dataset);
  if (j.contains("train")) train_config_from_json(j.at("train"), c.train);
  optional_field(j, "dataset_file", c.dataset_file, "config");
  optional_field(j, "out_dir", c.out_dir, "config");
  as_parse_error([&] {
    c.validate();
    return 0;
  });
  return c;
}

std::string serialize_run_config(const RunConfig& c) {
  ojson j;
  if (!c.preset.empty()) {
    j["preset"] = c.preset;
    j["samples_per_period"] = c.network.samples_per_period;
  } else {
    j["network"] = network_to_json(c.network);
  }
  j["seed"] = c.seed;
  j["dataset"] = dataset_spec_to_json(c.dataset);
  if (!c.dataset_file.empty()) j["dataset_file"] = c.dataset_file;
  j["train"] = train_config_to_json(c.train);
  if (!c.out_dir.empty()) j["out_dir"] = c.out_dir;
  return j.dump(2) + "\n";
}

RunConfig load_run_config(const std::string& path) { return parse_run_config(read_text_file(path)); }

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const NetworkSpec& spec, const Dataset& dataset) {
  const std::string canon = network_to_json(spec).dump() + "\n" + dataset_header_json(dataset);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canon)));
  return buf;
}

Checkpoint make_checkpoint(const RunConfig& config, const Dataset& dataset, const FitResult& fit) {
  Checkpoint c;
  c.config_hash = config_hash(config.network, dataset);
  c.preset = config.preset;
  c.seed = config.train.seed;
  c.best_restart = fit.best_restart;
  c.best_epoch = fit.best_epoch;
  c.best_accuracy = fit.best_accuracy;
  c.network = config.network;
  c.theta = fit.best_theta;
  return c;
}

std::string serialize_checkpoint(const Checkpoint& c) {
  ojson j;
  j["format"] = "sonn-checkpoint";
  j["format_version"] = c.format_version;
  j["config_hash"] = c.config_hash;
  j["preset"] = c.preset;
  j["seed"] = c.seed;
  j["best_restart"] = c.best_restart;
  j["best_epoch"] = c.best_epoch;
  j["best_accuracy"] = c.best_accuracy;
  j["network"] = network_to_json(c.network);
  ojson layers = ojson::array();
  for (std::size_t i = 0; i < c.network.layers.size(); ++i) {
    if (!c.network.layers[i].has_modulation) continue;
    ojson lj;
    lj["layer"] = i;
    for (const auto& b : c.theta.layout().blocks()) {
      if (b.layer != i) continue;
      const auto vals = c.theta.block(b);
      lj[b.kind == ParamKind::phase ? "phase" : "amplitude"] = std::vector<double>(vals.begin(), vals.end());
    }
    layers.push_back(std::move(lj));
  }
  j["theta"] = std::move(layers);
  return j.dump(1) + "\n";
}

Checkpoint parse_checkpoint(const std::string& text) {
  const ojson j = parse_json(text, "checkpoint");
  const std::string where = "checkpoint";
  if (required_field<std::string>(j, "format", where) != "sonn-checkpoint")
    throw ParseError("checkpoint: unexpected format tag", 0);
  Checkpoint c;
  c.format_version = required_field<int>(j, "format_version", where);
  if (c.format_version != kCheckpointVersion)
    throw ParseError("checkpoint: unsupported format_version " + std::to_string(c.format_version), 0);
  c.config_hash = required_field<std::string>(j, "config_hash", where);
  c.preset = required_field<std::string>(j, "preset", where);
  c.seed = required_field<std::uint64_t>(j, "seed", where);
  c.best_restart = required_field<int>(j, "best_restart", where);
  c.best_epoch = required_field<int>(j, "best_epoch", where);
  c.best_accuracy = required_field<double>(j, "best_accuracy", where);
  c.network = network_from_json(required_field<ojson>(j, "network", where));
  as_parse_error([&] {
    c.network.validate();
    return 0;
  });
  const ParamLayout layout(c.network);
  c.theta = ParamSet(layout);
  std::vector<bool> seen(layout.blocks().size(), false);
  for (const auto& lj : required_field<ojson>(j, "theta", where)) {
    const auto layer = required_field<std::size_t>(lj, "layer", "checkpoint.theta[]");
    for (ParamKind kind : {ParamKind::phase, ParamKind::amplitude}) {
      const char* key = kind == ParamKind::phase ? "phase" : "amplitude";
      if (!lj.contains(key)) continue;
      const ParamBlock* b = layout.find(layer, kind);
      if (b == nullptr) throw ParseError("checkpoint: layer " + std::to_string(layer) + " has no " + key + " block", 0);
      const auto vals = required_field<std::vector<double>>(lj, key, "checkpoint.theta[]");
      if (vals.size() != b->count) throw ParseError("checkpoint: wrong parameter count for layer " + std::to_string(layer), 0);
      std::copy(vals.begin(), vals.end(), c.theta.block(*b).begin());
      seen[static_cast<std::size_t>(b - layout.blocks().data())] = true;
    }
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end())
    throw ParseError("checkpoint: missing parameters for a modulated layer", 0);
  return c;
}

void verify_checkpoint(const Checkpoint& c, const Dataset& d) {
  const std::string h = config_hash(c.network, d);
  if (h != c.config_hash)
    throw ValidationError("checkpoint config hash " + c.config_hash + " does not match network/dataset hash " + h);
}

std::string epoch_log_line(const EpochRecord& r, std::string_view hash) {
  ojson j;
  j["restart"] = r.restart;
  j["epoch"] = r.epoch;
  j["cost"] = r.cost;
  j["train_acc"] = r.train_acc;
  j["test_acc"] = r.test_acc;
  j["lr"] = r.lr;
  j["config_hash"] = hash;
  return j.dump() + "\n";
}

std::string waveform_csv(const TimeGrid& grid, std::span<const std::string> names,
                         std::span<const std::vector<double>> series) {
  if (names.size() != series.size()) throw ValidationError("waveform_csv: one name per series");
  for (const auto& s : series)
    if (s.size() != grid.size()) throw ValidationError("waveform_csv: series length does not match the grid");
  std::ostringstream os;
  os.precision(17);
  os << "time_s";
  for (const auto& n : names) os << ',' << n;
  os << '\n';
  for (std::size_t i = 0; i < grid.size(); ++i) {
    os << grid.time(i);
    for (const auto& s : series) os << ',' << s[i];
    os << '\n';
  }
  return os.str();
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << text;
  if (!out) throw ValidationError("failed writing '" + path + "'");
}

}  // namespace sonn
