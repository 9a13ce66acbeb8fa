#include "sonn/eval.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sonn/error.hpp"
#include "sonn/parallel.hpp"

namespace sonn {

std::vector<ClassTarget> class_targets(const Dataset& d) {
  std::vector<ClassTarget> t;
  for (const auto& c : d.classes) t.push_back({c.id, d.pad_periods + c.label_slot});
  return t;
}

Verdict classify(std::span<const double> intensity, std::span<const ClassTarget> classes, const TimeGrid& grid,
                 int true_class, const ClassifyOptions& options) {
  if (classes.size() < 2) throw ValidationError("classify: at least two classes are required");
  if (intensity.size() != grid.size()) throw ValidationError("classify: intensity is not on the grid");
  const std::size_t begin = options.window_begin;
  const std::size_t end = options.window_end == 0 ? intensity.size() : options.window_end;
  if (begin >= end || end > intensity.size()) throw ValidationError("classify: bad window");

  const double period = grid.period();
  const double tolerance = options.tolerance > 0.0 ? options.tolerance : 0.5 * period;
  auto label_time = [&](const ClassTarget& c) { return (static_cast<double>(c.slot) + 0.5) * period; };

  Verdict v;
  const auto peak_it = std::max_element(intensity.begin() + static_cast<std::ptrdiff_t>(begin),
                                        intensity.begin() + static_cast<std::ptrdiff_t>(end));
  if (!(*peak_it > 0.0)) {
    v.no_signal = true;
    return v;
  }
  v.peak_time = grid.time(static_cast<std::size_t>(peak_it - intensity.begin()));

  // Nearest label; exact ties go to the lower slot.
  const ClassTarget* best = nullptr;
  double best_dist = 0.0;
  for (const auto& c : classes) {
    const double dist = std::abs(v.peak_time - label_time(c));
    if (best == nullptr || dist < best_dist - 1e-9 * period) {
      best = &c;
      best_dist = dist;
      v.ambiguous = false;
    } else if (std::abs(dist - best_dist) <= 1e-9 * period) {
      v.ambiguous = true;
      if (c.slot < best->slot) best = &c;
    }
  }
  v.predicted_class = best->id;

  const ClassTarget* truth = nullptr;
  for (const auto& c : classes)
    if (c.id == true_class) truth = &c;
  v.correct = truth != nullptr && v.predicted_class == true_class &&
              std::abs(v.peak_time - label_time(*truth)) <= tolerance;

  const auto npp = static_cast<std::size_t>(grid.samples_per_period());
  std::vector<double> slot_peak;
  for (const auto& c : classes) {
    const auto s0 = static_cast<std::size_t>(c.slot) * npp;
    slot_peak.push_back(*std::max_element(intensity.begin() + static_cast<std::ptrdiff_t>(s0),
                                          intensity.begin() + static_cast<std::ptrdiff_t>(s0 + npp)));
  }
  std::sort(slot_peak.begin(), slot_peak.end(), std::greater<>());
  v.margin = slot_peak[1] > 0.0 ? std::min(slot_peak[0] / slot_peak[1], kMarginCap) : kMarginCap;
  return v;
}

std::vector<Verdict> evaluate(const Network& net, const ParamSet& theta, const Dataset& d,
                              std::span<const std::size_t> indices, int jobs) {
  const Modulation mod = net.modulation(theta);
  const auto targets = class_targets(d);
  std::vector<Verdict> out(indices.size());
  parallel_for(indices.size(), jobs, [&](std::size_t i) {
    const Sample& s = d.samples[indices[i]];
    const ForwardResult r = net.forward(mod, net.encode(s.amplitudes));
    out[i] = classify(r.intensity, targets, net.grid(), s.class_id);
  });
  return out;
}

double accuracy(const Network& net, const ParamSet& theta, const Dataset& d, std::span<const std::size_t> indices,
                int jobs) {
  if (indices.empty()) throw ValidationError("accuracy: empty split");
  const auto verdicts = evaluate(net, theta, d, indices, jobs);
  std::size_t correct = 0;
  for (const auto& v : verdicts) correct += v.correct ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(verdicts.size());
}

std::vector<IvrPoint> ivr_sweep(const NetworkSpec& spec, DatasetSpec data, std::span<const double> ivr_list,
                                const TrainConfig& config, bool retrain, const ParamSet* trained) {
  if (ivr_list.empty()) throw ValidationError("ivr_sweep: empty IVR list");
  if (!retrain && trained == nullptr) throw ValidationError("ivr_sweep: re-evaluation needs a trained model");
  const Network net(spec);
  std::vector<IvrPoint> points;
  for (double ivr : ivr_list) {
    data.ivr_db = ivr;
    const Dataset d = generate_dataset(data);
    IvrPoint p{ivr, 0.0, -1};
    if (retrain) {
      const FitResult r = fit(net, d, config);
      p.accuracy = r.best_accuracy;
      p.best_epoch = r.best_epoch;
    } else {
      check_compatible(spec, d);
      p.accuracy = accuracy(net, *trained, d, d.test, config.jobs);
    }
    points.push_back(p);
  }
  return points;
}

std::string ivr_table_csv(std::span<const IvrPoint> points) {
  std::ostringstream os;
  os.precision(17);
  os << "ivr_db,accuracy,best_epoch\n";
  for (const auto& p : points) os << p.ivr_db << ',' << p.accuracy << ',' << p.best_epoch << '\n';
  return os.str();
}

OffTalbotReport off_talbot_study(const NetworkSpec& spec, const Dataset& d, double deviation, const TrainConfig& config,
                                 std::optional<double> baseline_accuracy) {
  OffTalbotReport rep;
  rep.deviation = deviation;
  rep.baseline_accuracy = baseline_accuracy ? *baseline_accuracy : fit(Network(spec), d, config).best_accuracy;
  const FitResult detuned = fit(Network(with_gdd_deviation(spec, deviation)), d, config);
  rep.detuned_accuracy = detuned.best_accuracy;
  rep.detuned_per_restart.assign(static_cast<std::size_t>(config.restarts), 0.0);
  for (const auto& e : detuned.log) {
    auto& slot = rep.detuned_per_restart[static_cast<std::size_t>(e.restart)];
    slot = std::max(slot, e.test_acc);
  }
  return rep;
}

ConsecutiveResult consecutive_run(const Network& net, const ParamSet& theta, const Dataset& d,
                                  std::span<const PatternInstance> patterns, int gap_periods,
                                  std::optional<int> total_periods) {
  const NetworkSpec& base = net.spec();
  check_compatible(base, d);
  if (patterns.size() < 2) throw ValidationError("consecutive_run: needs at least two patterns");
  if (gap_periods < 0) throw ValidationError("consecutive_run: gap must be >= 0");
  const int pat = base.pattern_periods;
  const int pad = base.pad_periods;
  const int k_count = static_cast<int>(patterns.size());
  const int needed = 2 * pad + k_count * pat + (k_count - 1) * gap_periods;
  if (total_periods && *total_periods < needed)
    throw ValidationError("consecutive_run: grid of " + std::to_string(*total_periods) + " periods cannot hold " +
                          std::to_string(needed));
  const int total = total_periods.value_or(needed);

  NetworkSpec long_spec = base;
  long_spec.name = base.name + "-consecutive";
  long_spec.pattern_periods = total - 2 * pad;
  const Network long_net(long_spec);

  std::vector<int> starts;
  for (int k = 0; k < k_count; ++k) starts.push_back(pad + k * (pat + gap_periods));

  std::vector<double> amps(static_cast<std::size_t>(total), 0.0);
  for (int k = 0; k < k_count; ++k) {
    const auto& p = patterns[static_cast<std::size_t>(k)];
    if (static_cast<int>(p.amplitudes.size()) != pat)
      throw ValidationError("consecutive_run: pattern length does not match the network");
    std::copy(p.amplitudes.begin(), p.amplitudes.end(), amps.begin() + starts[static_cast<std::size_t>(k)]);
  }

  // Tile the trained per-sample profile: every sample takes the value it has
  // relative to the nearest pattern in the trained (isolated) frame.
  const Modulation short_mod = net.modulation(theta);
  const auto npp = static_cast<long long>(base.samples_per_period);
  const auto n_short = static_cast<long long>(net.grid().size());
  const std::size_t n_long = long_net.grid().size();
  Modulation mod;
  mod.values = short_mod.values;
  mod.factor.resize(base.layers.size());
  for (std::size_t i = 0; i < base.layers.size(); ++i) {
    if (!base.layers[i].has_modulation) continue;
    const CVec& src = short_mod.factor[i];
    CVec& dst = mod.factor[i];
    dst.resize(n_long);
    for (std::size_t n = 0; n < n_long; ++n) {
      const double x = static_cast<double>(n) / static_cast<double>(npp);
      int nearest = 0;
      double best = 1e300;
      for (int k = 0; k < k_count; ++k) {
        const double c = starts[static_cast<std::size_t>(k)] + 0.5 * pat;
        if (std::abs(x - c) < best) {
          best = std::abs(x - c);
          nearest = k;
        }
      }
      const long long origin = static_cast<long long>(starts[static_cast<std::size_t>(nearest)] - pad) * npp;
      const long long local = std::clamp(static_cast<long long>(n) - origin, 0LL, n_short - 1);
      dst[n] = src[static_cast<std::size_t>(local)];
    }
  }

  ConsecutiveResult res{{}, {}, {}, long_net.grid(), starts};
  const ForwardResult fwd = long_net.forward(mod, long_net.encode(amps));
  res.intensity = fwd.intensity;

  const auto np = static_cast<std::size_t>(npp);
  for (int k = 0; k < k_count; ++k) {
    const int start = starts[static_cast<std::size_t>(k)];
    const int w0 = k == 0 ? 0 : start - gap_periods / 2;
    const int w1 = k == k_count - 1 ? total : starts[static_cast<std::size_t>(k) + 1] - gap_periods / 2;
    std::vector<ClassTarget> targets;
    for (const auto& c : d.classes) targets.push_back({c.id, start + c.label_slot});
    ClassifyOptions opt;
    opt.window_begin = static_cast<std::size_t>(w0) * np;
    opt.window_end = static_cast<std::size_t>(w1) * np;
    const int truth = patterns[static_cast<std::size_t>(k)].class_id;
    const Verdict v = classify(fwd.intensity, targets, long_net.grid(), truth, opt);
    res.verdicts.push_back(v);
    const double label_time = (start + d.class_by_id(truth).label_slot + 0.5) * long_net.grid().period();
    res.peak_deviation.push_back(v.no_signal ? 0.0 : v.peak_time - label_time);
  }
  return res;
}

double circular_correlation(std::span<const double> a, std::span<const double> b, std::size_t shift) {
  if (a.size() != b.size() || a.empty()) throw ValidationError("circular_correlation: length mismatch");
  const std::size_t n = a.size();
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double bv = b[(i + n - shift % n) % n];
    ab += a[i] * bv;
    aa += a[i] * a[i];
    bb += bv * bv;
  }
  return (aa > 0.0 && bb > 0.0) ? ab / std::sqrt(aa * bb) : 0.0;
}

TalbotReport talbot_check(double f_rep, int s, const TimeGrid& grid, const PulseShape& shape, double gdd_scale) {
  if (std::abs(grid.f_rep() - f_rep) > 1e-9 * f_rep) throw ValidationError("talbot_check: grid does not match f_rep");
  GddValue gdd = talbot_gdd(f_rep, s, +1);
  gdd.phi2 *= gdd_scale;
  const ComplexField train = synth_pulse_train(grid, shape);
  const auto in = train.intensity();
  const auto out = propagate_gdd(train, gdd).intensity();

  TalbotReport rep;
  rep.order = s;
  const auto npp = static_cast<std::size_t>(grid.samples_per_period());
  rep.correlation_at_half_period = circular_correlation(out, in, npp / 2);
  rep.correlation_at_zero = circular_correlation(out, in, 0);
  rep.best_correlation = -1.0;
  for (std::size_t sh = 0; sh < npp; ++sh) {
    const double c = circular_correlation(out, in, sh);
    if (c > rep.best_correlation) {
      rep.best_correlation = c;
      rep.best_shift = static_cast<double>(sh) * grid.dt();
    }
  }
  return rep;
}

ModulationComparison modulation_comparison(const NetworkSpec& spec, const Dataset& d,
                                           std::span<const ModulationMode> modes, std::span<const std::uint64_t> seeds,
                                           const TrainConfig& config) {
  if (modes.empty() || seeds.empty()) throw ValidationError("modulation_comparison: need modes and seeds");
  ModulationComparison out;
  const auto targets = class_targets(d);
  for (ModulationMode mode : modes) {
    const Network net(with_modulation_mode(spec, mode));
    const auto npp = static_cast<std::size_t>(net.spec().samples_per_period);
    ModeReport rep;
    rep.mode = mode;
    double peak_sum = 0.0, ext_sum = 0.0;
    for (std::uint64_t seed : seeds) {
      TrainConfig cfg = config;
      cfg.seed = seed;
      const FitResult r = fit(net, d, cfg);
      rep.accuracy_per_seed.push_back(r.best_accuracy);

      const Modulation mod = net.modulation(r.best_theta);
      double seed_peak = 0.0, seed_ext = 0.0;
      for (std::size_t idx : d.test) {
        const Sample& s = d.samples[idx];
        const auto I = net.forward(mod, net.encode(s.amplitudes)).intensity;
        const std::size_t s0 = static_cast<std::size_t>(d.global_label_slot(s.class_id)) * npp;
        double in_slot = 0.0, outside = 0.0;
        for (std::size_t n = 0; n < I.size(); ++n) {
          if (n >= s0 && n < s0 + npp) {
            in_slot = std::max(in_slot, I[n]);
          } else {
            outside = std::max(outside, I[n]);
          }
        }
        seed_peak += in_slot;
        seed_ext += 10.0 * std::log10(std::max(in_slot, 1e-300) / std::max(outside, 1e-300));
      }
      peak_sum += seed_peak / static_cast<double>(d.test.size());
      ext_sum += seed_ext / static_cast<double>(d.test.size());
    }
    auto sorted = rep.accuracy_per_seed;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t m = sorted.size();
    rep.median_accuracy = m % 2 == 1 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
    rep.main_peak = peak_sum / static_cast<double>(seeds.size());
    rep.extinction_db = ext_sum / static_cast<double>(seeds.size());
    out.modes.push_back(std::move(rep));
  }
  const ModeReport* phase = nullptr;
  const ModeReport* amp = nullptr;
  for (const auto& r : out.modes) {
    if (r.mode == ModulationMode::phase) phase = &r;
    if (r.mode == ModulationMode::amplitude) amp = &r;
  }
  if (phase != nullptr && amp != nullptr && phase->main_peak > 0.0 && amp->main_peak > 0.0)
    out.amplitude_peak_suppression_db = 10.0 * std::log10(phase->main_peak / amp->main_peak);
  return out;
}

}  // namespace sonn
