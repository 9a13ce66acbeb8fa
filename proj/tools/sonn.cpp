// sonn: command-line front end for the serial optical neural network simulator.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sonn/config.hpp"
#include "sonn/error.hpp"
#include "sonn/eval.hpp"

namespace fs = std::filesystem;
using namespace sonn;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

struct Globals {
  std::string config_path;
  std::string preset_name;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> jobs;
  std::optional<int> samples_per_period;
  std::optional<int> epochs;
  std::optional<int> restarts;
  std::string dataset_path;
  std::string checkpoint_path;
};

RunConfig resolve_config(const Globals& g) {
  RunConfig c;
  if (!g.config_path.empty()) {
    if (!g.preset_name.empty()) throw ValidationError("--config and --preset are mutually exclusive");
    c = load_run_config(g.config_path);
    if (g.samples_per_period) {
      c.network.samples_per_period = *g.samples_per_period;
      c.network.validate();
    }
  } else {
    c = default_run_config(g.preset_name.empty() ? "analog4" : g.preset_name, g.samples_per_period.value_or(1024));
  }
  if (g.seed) {
    c.seed = *g.seed;
    c.dataset.seed = *g.seed;
    c.train.seed = *g.seed;
  }
  if (g.jobs) c.train.jobs = *g.jobs;
  if (g.epochs) c.train.epochs = *g.epochs;
  if (g.restarts) c.train.restarts = *g.restarts;
  if (!g.dataset_path.empty()) c.dataset_file = g.dataset_path;
  if (!g.out.empty()) {
    c.out_dir = g.out;
  } else if (c.out_dir.empty()) {
    const char* env = std::getenv("SONN_OUT_DIR");
    c.out_dir = env != nullptr && *env != '\0' ? env : "out";
  }
  c.validate();
  return c;
}

fs::path out_path(const RunConfig& c, const std::string& name) {
  fs::create_directories(c.out_dir);
  return fs::path(c.out_dir) / name;
}

Dataset obtain_dataset(const RunConfig& c) {
  Dataset d = c.dataset_file.empty() ? generate_dataset(c.dataset) : load_dataset(c.dataset_file);
  check_compatible(c.network, d);
  return d;
}

struct Trained {
  Checkpoint ckpt;
  Network net;
};

Trained load_trained(const Globals& g, const Dataset& d) {
  if (g.checkpoint_path.empty()) throw ValidationError("--checkpoint is required");
  Checkpoint ckpt = parse_checkpoint(read_text_file(g.checkpoint_path));
  verify_checkpoint(ckpt, d);
  Network net(ckpt.network);
  return {std::move(ckpt), std::move(net)};
}

std::string hash_comment(const std::string& hash) { return "# config_hash: " + hash + "\n"; }

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ValidationError("cannot parse list item '" + item + "'");
    }
  }
  if (out.empty()) throw ValidationError("empty list");
  return out;
}

int cmd_gen_data(const Globals& g) {
  const RunConfig c = resolve_config(g);
  const Dataset d = generate_dataset(c.dataset);
  const auto path = out_path(c, "dataset.json");
  save_dataset(d, path.string());
  std::cout << "wrote " << d.samples.size() << " samples (" << d.train.size() << " train, " << d.test.size()
            << " test) to " << path.string() << "\n";
  return 0;
}

int cmd_train(const Globals& g) {
  const RunConfig c = resolve_config(g);
  const Dataset d = obtain_dataset(c);
  const Network net(c.network);
  const std::string hash = config_hash(c.network, d);
  write_text_file(out_path(c, "config.json").string(), serialize_run_config(c));

  std::ofstream log(out_path(c, "train_log.jsonl"), std::ios::binary);
  if (!log) throw ValidationError("cannot write training log");
  const FitResult r = fit(net, d, c.train, [&](const EpochRecord& e) {
    log << epoch_log_line(e, hash);
    log.flush();
  });
  for (const auto& msg : r.diagnostics) std::cerr << "warning: " << msg << "\n";
  const Checkpoint ckpt = make_checkpoint(c, d, r);
  write_text_file(out_path(c, "checkpoint.json").string(), serialize_checkpoint(ckpt));
  std::printf("best test accuracy %.4f (restart %d, epoch %d), config hash %s\n", r.best_accuracy, r.best_restart,
              r.best_epoch, hash.c_str());
  return 0;
}

int cmd_eval(const Globals& g, const std::string& split) {
  const RunConfig c = resolve_config(g);
  const Dataset d = obtain_dataset(c);
  const Trained t = load_trained(g, d);
  std::vector<std::size_t> idx;
  if (split == "test") {
    idx = d.test;
  } else if (split == "train") {
    idx = d.train;
  } else {
    for (std::size_t i = 0; i < d.samples.size(); ++i) idx.push_back(i);
  }
  const auto verdicts = evaluate(t.net, t.ckpt.theta, d, idx, c.train.jobs);
  std::size_t correct = 0;
  ojson per = ojson::array();
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto& v = verdicts[i];
    correct += v.correct ? 1 : 0;
    per.push_back({{"sample", idx[i]},
                   {"class_id", d.samples[idx[i]].class_id},
                   {"predicted_class", v.predicted_class},
                   {"peak_time_s", v.peak_time},
                   {"correct", v.correct},
                   {"margin", v.margin},
                   {"ambiguous", v.ambiguous},
                   {"no_signal", v.no_signal}});
  }
  const double acc = idx.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(idx.size());
  ojson rep{{"config_hash", t.ckpt.config_hash}, {"split", split}, {"accuracy", acc}, {"verdicts", per}};
  write_text_file(out_path(c, "eval.json").string(), rep.dump(1) + "\n");
  std::printf("accuracy %.4f on %zu %s samples\n", acc, idx.size(), split.c_str());
  return 0;
}

int cmd_simulate(const Globals& g, const std::vector<int>& class_ids, int gap) {
  const RunConfig c = resolve_config(g);
  const Dataset d = obtain_dataset(c);
  const Trained t = load_trained(g, d);
  std::vector<PatternInstance> patterns;
  for (int id : class_ids) {
    d.class_by_id(id);
    const Sample* s = nullptr;
    for (std::size_t i : d.test)
      if (d.samples[i].class_id == id) {
        s = &d.samples[i];
        break;
      }
    if (s == nullptr) throw ValidationError("no test sample of class " + std::to_string(id));
    const auto first = s->amplitudes.begin() + d.pad_periods;
    patterns.push_back({id, std::vector<double>(first, first + d.pattern_periods)});
  }
  const ConsecutiveResult r = consecutive_run(t.net, t.ckpt.theta, d, patterns, gap);
  ojson per = ojson::array();
  for (std::size_t k = 0; k < r.verdicts.size(); ++k) {
    const auto& v = r.verdicts[k];
    per.push_back({{"class_id", patterns[k].class_id},
                   {"pattern_start", r.pattern_start[k]},
                   {"predicted_class", v.predicted_class},
                   {"correct", v.correct},
                   {"peak_deviation_s", r.peak_deviation[k]},
                   {"margin", v.margin}});
    std::printf("pattern %zu class %d -> predicted %d, %s, peak deviation %.3e s\n", k, patterns[k].class_id,
                v.predicted_class, v.correct ? "correct" : "wrong", r.peak_deviation[k]);
  }
  write_text_file(out_path(c, "consecutive.json").string(),
                  ojson{{"config_hash", t.ckpt.config_hash}, {"gap_periods", gap}, {"patterns", per}}.dump(1) + "\n");
  const std::vector<std::string> names{"intensity"};
  const std::vector<std::vector<double>> series{r.intensity};
  write_text_file(out_path(c, "consecutive.csv").string(),
                  hash_comment(t.ckpt.config_hash) + waveform_csv(r.grid, names, series));
  return 0;
}

int cmd_sweep_ivr(const Globals& g, const std::string& ivr_text) {
  const RunConfig c = resolve_config(g);
  const auto ivrs = parse_list(ivr_text);
  std::vector<IvrPoint> points;
  if (g.checkpoint_path.empty()) {
    points = ivr_sweep(c.network, c.dataset, ivrs, c.train, true);
  } else {
    const Checkpoint ckpt = parse_checkpoint(read_text_file(g.checkpoint_path));
    if (!(ckpt.network == c.network)) throw ValidationError("checkpoint network does not match the config");
    points = ivr_sweep(c.network, c.dataset, ivrs, c.train, false, &ckpt.theta);
  }
  const Dataset header_only = generate_dataset(c.dataset);
  write_text_file(out_path(c, "ivr_sweep.csv").string(),
                  hash_comment(config_hash(c.network, header_only)) + ivr_table_csv(points));
  for (const auto& p : points) std::printf("ivr %5.1f dB  accuracy %.4f\n", p.ivr_db, p.accuracy);
  return 0;
}

int cmd_talbot_check(const Globals& g, double f_rep, int order, double scale) {
  RunConfig c = resolve_config(g);
  const TimeGrid grid = make_grid(f_rep, c.network.samples_per_period, c.network.num_periods());
  const TalbotReport r = talbot_check(f_rep, order, grid, PulseShape::default_for(grid), scale);
  const double phi2 = talbot_gdd(f_rep, order, +1).phi2 * scale;
  ojson rep{{"f_rep", f_rep},
            {"order", order},
            {"gdd_scale", scale},
            {"phi2_s2_per_rad", phi2},
            {"ps_per_nm_at_1550nm", gdd_to_ps_per_nm(GddValue{phi2}, 1550e-9)},
            {"correlation_at_half_period", r.correlation_at_half_period},
            {"correlation_at_zero", r.correlation_at_zero},
            {"best_correlation", r.best_correlation},
            {"best_shift_s", r.best_shift}};
  write_text_file(out_path(c, "talbot_check.json").string(), rep.dump(1) + "\n");
  std::printf("phi2 %.6e s^2/rad; correlation at T/2 %.6f, at 0 %.6f; best %.6f at shift %.4e s\n", phi2,
              r.correlation_at_half_period, r.correlation_at_zero, r.best_correlation, r.best_shift);
  return 0;
}

int cmd_export_waveform(const Globals& g, const std::vector<std::size_t>& samples) {
  const RunConfig c = resolve_config(g);
  const Dataset d = obtain_dataset(c);
  const Trained t = load_trained(g, d);
  const auto labels = class_labels(t.net, d);
  const Modulation mod = t.net.modulation(t.ckpt.theta);
  for (std::size_t idx : samples) {
    if (idx >= d.samples.size()) throw ValidationError("sample index " + std::to_string(idx) + " out of range");
    const Sample& s = d.samples[idx];
    const ComplexField in = t.net.encode(s.amplitudes);
    const auto out = t.net.forward(mod, in).intensity;
    std::size_t ci = 0;
    while (d.classes[ci].id != s.class_id) ++ci;
    const std::vector<std::string> names{"input", "label", "intensity"};
    const std::vector<std::vector<double>> series{in.intensity(), labels[ci], out};
    const auto path = out_path(c, "waveform_" + std::to_string(idx) + ".csv");
    write_text_file(path.string(), hash_comment(t.ckpt.config_hash) + waveform_csv(t.net.grid(), names, series));
    std::cout << "wrote " << path.string() << "\n";
  }
  return 0;
}

int cmd_off_talbot(const Globals& g, double deviation) {
  const RunConfig c = resolve_config(g);
  const Dataset d = obtain_dataset(c);
  const OffTalbotReport r = off_talbot_study(c.network, d, deviation, c.train);
  ojson rep{{"config_hash", config_hash(c.network, d)},
            {"deviation", r.deviation},
            {"baseline_accuracy", r.baseline_accuracy},
            {"detuned_accuracy", r.detuned_accuracy},
            {"detuned_per_restart", r.detuned_per_restart}};
  write_text_file(out_path(c, "off_talbot.json").string(), rep.dump(1) + "\n");
  std::printf("on-Talbot best %.4f, detuned (%+.4f) best %.4f\n", r.baseline_accuracy, deviation, r.detuned_accuracy);
  return 0;
}

int cmd_compare_modulation(const Globals& g, const std::string& modes_text, const std::string& seeds_text) {
  const RunConfig c = resolve_config(g);
  const Dataset d = obtain_dataset(c);
  std::vector<ModulationMode> modes;
  std::stringstream ms(modes_text);
  for (std::string m; std::getline(ms, m, ',');) modes.push_back(modulation_mode_from_string(m));
  std::vector<std::uint64_t> seeds;
  for (double s : parse_list(seeds_text)) seeds.push_back(static_cast<std::uint64_t>(s));
  const ModulationComparison r = modulation_comparison(c.network, d, modes, seeds, c.train);
  ojson rep{{"config_hash", config_hash(c.network, d)}};
  ojson arr = ojson::array();
  for (const auto& m : r.modes) {
    arr.push_back({{"mode", std::string(to_string(m.mode))},
                   {"accuracy_per_seed", m.accuracy_per_seed},
                   {"median_accuracy", m.median_accuracy},
                   {"main_peak", m.main_peak},
                   {"extinction_db", m.extinction_db}});
    std::printf("%-9s median accuracy %.4f  main peak %.4e  extinction %.2f dB\n", std::string(to_string(m.mode)).c_str(),
                m.median_accuracy, m.main_peak, m.extinction_db);
  }
  rep["modes"] = std::move(arr);
  if (r.amplitude_peak_suppression_db) {
    rep["amplitude_peak_suppression_db"] = *r.amplitude_peak_suppression_db;
    std::printf("amplitude-mode main peak suppression %.2f dB\n", *r.amplitude_peak_suppression_db);
  }
  write_text_file(out_path(c, "modulation_comparison.json").string(), rep.dump(1) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Serial optical neural network simulator and trainer"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "Run configuration JSON")->check(CLI::ExistingFile);
  app.add_option("--preset", g.preset_name, "Network preset (analog4, digital4, pseudo3, twolayer)");
  app.add_option("--seed", g.seed, "Seed for data generation and training");
  app.add_option("--out", g.out, "Output directory (default: config out_dir, $SONN_OUT_DIR, or ./out)");
  app.add_option("--jobs", g.jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--samples-per-period", g.samples_per_period, "FFT samples per repetition period");
  app.add_option("--epochs", g.epochs, "Override the number of epochs");
  app.add_option("--restarts", g.restarts, "Override the number of restarts");
  app.add_option("--dataset", g.dataset_path, "Dataset JSON file");

  auto* gen = app.add_subcommand("gen-data", "Generate a dataset file");
  auto* train = app.add_subcommand("train", "Train and write checkpoint.json and train_log.jsonl");

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset split");
  std::string split = "test";
  eval->add_option("--checkpoint", g.checkpoint_path)->required();
  eval->add_option("--split", split)->check(CLI::IsMember({"test", "train", "all"}));

  auto* sim = app.add_subcommand("simulate", "Run patterns back to back through a trained network");
  std::vector<int> sim_classes{0, 1};
  int gap = 16;
  sim->add_option("--checkpoint", g.checkpoint_path)->required();
  sim->add_option("--classes", sim_classes, "Class ids, one pattern each")->delimiter(',');
  sim->add_option("--gap", gap, "Empty periods between patterns");

  auto* sweep = app.add_subcommand("sweep-ivr", "Accuracy versus individuality variance rate");
  std::string ivr_text = "0,5,10,15,20,25,30";
  sweep->add_option("--ivr", ivr_text, "Comma-separated IVR values in dB");
  sweep->add_option("--checkpoint", g.checkpoint_path, "Re-evaluate this model instead of retraining");

  auto* talbot = app.add_subcommand("talbot-check", "Self-imaging check of the unmodulated pulse train");
  double f_rep = 5e9;
  int order = 1;
  double scale = 1.0;
  talbot->add_option("--f-rep", f_rep, "Repetition rate in Hz")->check(CLI::PositiveNumber);
  talbot->add_option("--order", order, "Talbot order s")->check(CLI::PositiveNumber);
  talbot->add_option("--gdd-scale", scale, "Multiplier on the Talbot dispersion");

  auto* exp = app.add_subcommand("export-waveform", "Write input/label/output intensity CSVs");
  std::vector<std::size_t> samples{0};
  exp->add_option("--checkpoint", g.checkpoint_path)->required();
  exp->add_option("--samples", samples, "Sample indices")->delimiter(',');

  auto* off = app.add_subcommand("off-talbot", "Train with detuned dispersion and compare");
  double deviation = 0.0157;
  off->add_option("--deviation", deviation, "Fractional dispersion deviation");

  auto* cmp = app.add_subcommand("compare-modulation", "Train phase/amplitude/complex modulation variants");
  std::string modes_text = "phase,amplitude,complex";
  std::string seeds_text = "1,2,3";
  cmp->add_option("--modes", modes_text);
  cmp->add_option("--seeds", seeds_text);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*gen) return cmd_gen_data(g);
    if (*train) return cmd_train(g);
    if (*eval) return cmd_eval(g, split);
    if (*sim) return cmd_simulate(g, sim_classes, gap);
    if (*sweep) return cmd_sweep_ivr(g, ivr_text);
    if (*talbot) return cmd_talbot_check(g, f_rep, order, scale);
    if (*exp) return cmd_export_waveform(g, samples);
    if (*off) return cmd_off_talbot(g, deviation);
    if (*cmp) return cmd_compare_modulation(g, modes_text, seeds_text);
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const sonn::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitUsage;
}
