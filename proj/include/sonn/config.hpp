#pragma once

// Run configuration, checkpoints and the artifact file formats used by the
// command-line tool. Field names are fixed; see docs/schema.md.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sonn/data.hpp"
#include "sonn/network.hpp"
#include "sonn/train.hpp"

namespace sonn {

using ojson = nlohmann::ordered_json;

struct RunConfig {
  /// Preset the network came from; empty for an explicit network.
  std::string preset;
  NetworkSpec network;
  DatasetSpec dataset;
  /// Existing dataset file to train on instead of generating one.
  std::string dataset_file;
  TrainConfig train;
  /// Empty: SONN_OUT_DIR, then "out".
  std::string out_dir;
  std::uint64_t seed = 1;

  /// Each part, plus dataset/network geometry agreement.
  void validate() const;
};

/// Dataset spec matching a network's repetition rate and pattern length.
DatasetSpec default_dataset_for(const NetworkSpec& spec);
RunConfig default_run_config(std::string_view preset_name, int samples_per_period = 1024);

ojson network_to_json(const NetworkSpec& spec);
NetworkSpec network_from_json(const ojson& j);
ojson dataset_spec_to_json(const DatasetSpec& spec);
ojson train_config_to_json(const TrainConfig& config);

/// Parses a run config. Unknown keys are rejected; absent keys keep defaults.
RunConfig parse_run_config(const std::string& text);
std::string serialize_run_config(const RunConfig& config);
RunConfig load_run_config(const std::string& path);

std::uint64_t fnv1a64(std::string_view bytes);
/// 16 hex digits over the canonical network JSON and the dataset header.
std::string config_hash(const NetworkSpec& spec, const Dataset& dataset);

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  int format_version = kCheckpointVersion;
  std::string config_hash;
  std::string preset;
  std::uint64_t seed = 0;
  int best_restart = 0;
  int best_epoch = 0;
  double best_accuracy = 0.0;
  NetworkSpec network;
  ParamSet theta;
};

Checkpoint make_checkpoint(const RunConfig& config, const Dataset& dataset, const FitResult& fit);
std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint parse_checkpoint(const std::string& text);
/// Throws ValidationError unless the checkpoint was trained on this network/dataset pair.
void verify_checkpoint(const Checkpoint& ckpt, const Dataset& dataset);

/// One JSONL line (with trailing newline) for an epoch record.
std::string epoch_log_line(const EpochRecord& rec, std::string_view hash);

/// CSV with a time_s column followed by one column per series.
std::string waveform_csv(const TimeGrid& grid, std::span<const std::string> names,
                         std::span<const std::vector<double>> series);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view text);

}  // namespace sonn
