#include "sonn/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "sonn/error.hpp"

namespace sonn {

using ojson = nlohmann::ordered_json;

std::string_view to_string(DatasetKind kind) { return kind == DatasetKind::analog ? "analog" : "digital"; }

DatasetKind dataset_kind_from_string(std::string_view name) {
  if (name == "analog") return DatasetKind::analog;
  if (name == "digital") return DatasetKind::digital;
  throw ValidationError("unknown dataset kind '" + std::string(name) + "'");
}

void DatasetSpec::validate() const {
  if (!(f_rep > 0.0)) throw ValidationError("DatasetSpec: f_rep must be positive");
  if (pattern_periods < 1 || pad_periods < 0) throw ValidationError("DatasetSpec: bad pattern geometry");
  if (n_per_class < 1) throw ValidationError("DatasetSpec: n_per_class must be >= 1");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ValidationError("DatasetSpec: train_fraction must lie in (0, 1)");
  if (std::isnan(ivr_db)) throw ValidationError("DatasetSpec: ivr_db must not be NaN");
}

int Dataset::global_label_slot(int class_id) const { return pad_periods + class_by_id(class_id).label_slot; }

const PatternClass& Dataset::class_by_id(int id) const {
  for (const auto& c : classes)
    if (c.id == id) return c;
  throw ValidationError("dataset has no class " + std::to_string(id));
}

std::vector<double> analog_shape(std::string_view name, int n) {
  std::vector<double> a(static_cast<std::size_t>(n));
  const double nn = static_cast<double>(n);
  for (int i = 0; i < n; ++i) {
    const double x = static_cast<double>(i);
    double v = 0.0;
    if (name == "sine") {
      v = 0.5 + 0.5 * std::sin(2.0 * std::numbers::pi * x / nn);
    } else if (name == "square") {
      v = i < (n + 1) / 2 ? 1.0 : 0.0;
    } else if (name == "rev_triangle") {
      v = std::abs(1.0 - 2.0 * x / nn);
    } else if (name == "sawtooth") {
      v = x / nn;
    } else {
      throw ValidationError("unknown analog shape '" + std::string(name) + "'");
    }
    a[static_cast<std::size_t>(i)] = v;
  }
  return a;
}

std::array<int, 8> ascii_bits(char c) {
  const auto u = static_cast<unsigned char>(c);
  if (u > 127) throw ValidationError("ascii_bits: non-ASCII character");
  std::array<int, 8> bits{};
  for (int b = 0; b < 8; ++b) bits[static_cast<std::size_t>(b)] = (u >> (7 - b)) & 1;
  return bits;
}

std::vector<int> default_label_slots(DatasetKind kind, int num_classes, int pattern_periods) {
  if (kind == DatasetKind::analog && num_classes == 4 && pattern_periods == 15) return {2, 6, 10, 14};
  if (num_classes == 4 && pattern_periods == 8) return {1, 3, 5, 7};
  if (num_classes == 2 && pattern_periods == 8) return {1, 6};
  // Evenly spaced slot centers.
  std::vector<int> slots;
  for (int c = 0; c < num_classes; ++c)
    slots.push_back(static_cast<int>(std::floor((c + 0.5) * pattern_periods / static_cast<double>(num_classes))));
  return slots;
}

double ivr_sigma(double ivr_db) { return std::pow(10.0, -ivr_db / 10.0); }

void apply_ivr(std::span<double> amplitudes, double ivr_db, std::mt19937_64& rng, bool noise_on_zero_slots) {
  if (std::isnan(ivr_db)) throw ValidationError("apply_ivr: ivr_db must not be NaN");
  const double sigma = ivr_sigma(ivr_db);
  if (sigma == 0.0) return;
  std::normal_distribution<double> noise(0.0, sigma);
  const double upper = 1.0 + 5.0 * sigma;
  for (double& a : amplitudes) {
    if (!noise_on_zero_slots && a == 0.0) continue;
    a = std::clamp(a + noise(rng), 0.0, upper);
  }
}

namespace {

Dataset make_header(const DatasetSpec& spec) {
  Dataset d;
  d.kind = spec.kind;
  d.f_rep = spec.f_rep;
  d.pattern_periods = spec.pattern_periods;
  d.pad_periods = spec.pad_periods;
  d.ivr_db = spec.ivr_db;
  d.seed = spec.seed;
  d.train_fraction = spec.train_fraction;
  d.noise_on_zero_slots = spec.noise_on_zero_slots;
  return d;
}

Dataset from_patterns(const DatasetSpec& spec, const std::vector<std::pair<std::string, std::vector<double>>>& patterns) {
  Dataset d = make_header(spec);
  const int num_classes = static_cast<int>(patterns.size());
  if (num_classes < 1) throw ValidationError("dataset needs at least one class");
  std::vector<int> slots =
      spec.label_slots.empty() ? default_label_slots(spec.kind, num_classes, spec.pattern_periods) : spec.label_slots;
  if (static_cast<int>(slots.size()) != num_classes)
    throw ValidationError("label_slots must list one slot per class");
  for (int c = 0; c < num_classes; ++c) {
    const int s = slots[static_cast<std::size_t>(c)];
    if (s < 0 || s >= spec.pattern_periods) throw ValidationError("label slot outside the pattern region");
    for (int o = 0; o < c; ++o)
      if (slots[static_cast<std::size_t>(o)] == s) throw ValidationError("classes must have distinct label slots");
    d.classes.push_back({c, patterns[static_cast<std::size_t>(c)].first, s});
  }

  std::mt19937_64 rng(spec.seed);
  for (int c = 0; c < num_classes; ++c) {
    const auto& base = patterns[static_cast<std::size_t>(c)].second;
    if (static_cast<int>(base.size()) != spec.pattern_periods)
      throw ValidationError("pattern '" + patterns[static_cast<std::size_t>(c)].first + "' has " +
                            std::to_string(base.size()) + " slots, expected " + std::to_string(spec.pattern_periods));
    for (double v : base)
      if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("pattern amplitudes must be finite and >= 0");
    for (int k = 0; k < spec.n_per_class; ++k) {
      Sample s{c, std::vector<double>(static_cast<std::size_t>(d.num_periods()), 0.0)};
      auto region = std::span(s.amplitudes).subspan(static_cast<std::size_t>(spec.pad_periods), base.size());
      std::copy(base.begin(), base.end(), region.begin());
      apply_ivr(region, spec.ivr_db, rng, spec.noise_on_zero_slots);
      d.samples.push_back(std::move(s));
    }
  }
  split_dataset(d);
  return d;
}

}  // namespace

Dataset gen_analog(const DatasetSpec& spec) {
  spec.validate();
  if (spec.kind != DatasetKind::analog) throw ValidationError("gen_analog: spec kind is not analog");
  if (!spec.custom_patterns.empty()) return from_patterns(spec, spec.custom_patterns);
  if (spec.pattern_periods != 15)
    throw ValidationError("gen_analog: the built-in shapes are defined on 15 pattern periods");
  std::vector<std::pair<std::string, std::vector<double>>> patterns;
  for (const auto& name : spec.analog_classes) patterns.emplace_back(name, analog_shape(name, spec.pattern_periods));
  return from_patterns(spec, patterns);
}

Dataset gen_digital(const DatasetSpec& spec) {
  spec.validate();
  if (spec.kind != DatasetKind::digital) throw ValidationError("gen_digital: spec kind is not digital");
  if (!spec.custom_patterns.empty()) return from_patterns(spec, spec.custom_patterns);
  if (spec.pattern_periods != 8) throw ValidationError("gen_digital: 8-bit codes need 8 pattern periods");
  std::vector<std::pair<std::string, std::vector<double>>> patterns;
  for (char ch : spec.characters) {
    const auto bits = ascii_bits(ch);
    patterns.emplace_back(std::string(1, ch), std::vector<double>(bits.begin(), bits.end()));
  }
  return from_patterns(spec, patterns);
}

Dataset generate_dataset(const DatasetSpec& spec) {
  return spec.kind == DatasetKind::analog ? gen_analog(spec) : gen_digital(spec);
}

void split_dataset(Dataset& d) {
  d.train.clear();
  d.test.clear();
  std::mt19937_64 rng(d.seed ^ 0x5eed5b1177ULL);
  for (const auto& c : d.classes) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < d.samples.size(); ++i)
      if (d.samples[i].class_id == c.id) idx.push_back(i);
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto n_train = static_cast<std::size_t>(std::llround(d.train_fraction * static_cast<double>(idx.size())));
    d.train.insert(d.train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    d.test.insert(d.test.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  }
  std::shuffle(d.train.begin(), d.train.end(), rng);
  std::shuffle(d.test.begin(), d.test.end(), rng);
}

std::vector<double> make_label(const TimeGrid& grid, const PulseShape& shape, int global_slot) {
  return single_pulse(grid, shape, global_slot).intensity();
}

namespace {

ojson header_json(const Dataset& d) {
  ojson h;
  h["kind"] = to_string(d.kind);
  h["f_rep"] = d.f_rep;
  h["pattern_periods"] = d.pattern_periods;
  h["pad"] = d.pad_periods;
  h["ivr_db"] = d.ivr_db;
  h["seed"] = d.seed;
  h["train_fraction"] = d.train_fraction;
  h["noise_on_zero_slots"] = d.noise_on_zero_slots;
  ojson classes = ojson::array();
  for (const auto& c : d.classes) classes.push_back({{"id", c.id}, {"name", c.name}, {"label_slot", c.label_slot}});
  h["classes"] = std::move(classes);
  return h;
}

template <class T>
T required(const ojson& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(std::string("dataset: missing field '") + key + "'", 0);
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("dataset: field '") + key + "': " + e.what(), 0);
  }
}

}  // namespace

std::string dataset_header_json(const Dataset& d) { return header_json(d).dump(); }

std::string serialize_dataset(const Dataset& d) {
  ojson j;
  j["format"] = "sonn-dataset";
  j["version"] = 1;
  j["header"] = header_json(d);
  ojson samples = ojson::array();
  for (const auto& s : d.samples) samples.push_back({{"class_id", s.class_id}, {"amplitudes", s.amplitudes}});
  j["samples"] = std::move(samples);
  j["split"] = {{"train", d.train}, {"test", d.test}};
  return j.dump(1) + "\n";
}

Dataset parse_dataset(const std::string& text) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("dataset: ") + e.what(), e.byte);
  }
  if (required<std::string>(j, "format") != "sonn-dataset") throw ParseError("dataset: unexpected format tag", 0);
  if (required<int>(j, "version") != 1) throw ParseError("dataset: unsupported version", 0);
  const ojson h = required<ojson>(j, "header");
  Dataset d;
  try {
    d.kind = dataset_kind_from_string(required<std::string>(h, "kind"));
  } catch (const ValidationError& e) {
    throw ParseError(e.what(), 0);
  }
  d.f_rep = required<double>(h, "f_rep");
  d.pattern_periods = required<int>(h, "pattern_periods");
  d.pad_periods = required<int>(h, "pad");
  d.ivr_db = required<double>(h, "ivr_db");
  d.seed = required<std::uint64_t>(h, "seed");
  d.train_fraction = required<double>(h, "train_fraction");
  d.noise_on_zero_slots = required<bool>(h, "noise_on_zero_slots");
  for (const auto& c : required<ojson>(h, "classes"))
    d.classes.push_back({required<int>(c, "id"), required<std::string>(c, "name"), required<int>(c, "label_slot")});
  for (const auto& s : required<ojson>(j, "samples")) {
    Sample smp{required<int>(s, "class_id"), required<std::vector<double>>(s, "amplitudes")};
    if (static_cast<int>(smp.amplitudes.size()) != d.num_periods())
      throw ParseError("dataset: sample has " + std::to_string(smp.amplitudes.size()) + " amplitudes, expected " +
                           std::to_string(d.num_periods()),
                       0);
    d.samples.push_back(std::move(smp));
  }
  const ojson& sp = required<ojson>(j, "split");
  d.train = required<std::vector<std::size_t>>(sp, "train");
  d.test = required<std::vector<std::size_t>>(sp, "test");
  for (auto i : d.train)
    if (i >= d.samples.size()) throw ParseError("dataset: split index out of range", 0);
  for (auto i : d.test)
    if (i >= d.samples.size()) throw ParseError("dataset: split index out of range", 0);
  return d;
}

void save_dataset(const Dataset& d, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write dataset file '" + path + "'");
  out << serialize_dataset(d);
  if (!out) throw ValidationError("failed writing dataset file '" + path + "'");
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read dataset file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_dataset(ss.str());
}

}  // namespace sonn
