#pragma once

// Optimizers, learning-rate schedule and the multi-restart training loop.

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "sonn/data.hpp"
#include "sonn/grad.hpp"
#include "sonn/network.hpp"

namespace sonn {

enum class OptimizerKind { sgd, adam };

std::string_view to_string(OptimizerKind kind);
OptimizerKind optimizer_from_string(std::string_view name);

struct TrainConfig {
  OptimizerKind optimizer = OptimizerKind::adam;
  double lr0 = 0.01;
  double decay_factor = 0.3;
  int decay_every = 200;
  int batch_size = 6;
  int epochs = 1000;
  int restarts = 3;
  std::uint64_t seed = 1;
  /// theta is initialized uniform in (-init_range, init_range).
  double init_range = 1.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Stop all training once test accuracy reaches this value; > 1 disables.
  double stop_at_accuracy = 2.0;
  int jobs = 1;

  void validate() const;
  /// lr0 * decay_factor^floor(epoch / decay_every)
  double learning_rate(int epoch) const;
};

struct TrainState {
  ParamSet theta;
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;

  explicit TrainState(ParamSet initial);
};

/// theta <- theta - lr * g
void sgd_step(TrainState& state, const Gradient& g, double lr);

/// Bias-corrected Adam update.
void adam_step(TrainState& state, const Gradient& g, double lr, double beta1 = 0.9, double beta2 = 0.999,
               double epsilon = 1e-8);

struct EpochRecord {
  int restart = 0;
  int epoch = 0;
  double cost = 0.0;
  double train_acc = 0.0;
  double test_acc = 0.0;
  double lr = 0.0;
};

struct FitResult {
  ParamSet best_theta;
  int best_restart = -1;
  int best_epoch = -1;
  double best_accuracy = 0.0;
  double best_cost = 0.0;
  std::vector<EpochRecord> log;
  /// One entry per aborted restart.
  std::vector<std::string> diagnostics;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Throws ValidationError when the dataset's geometry does not match the network.
void check_compatible(const NetworkSpec& spec, const Dataset& dataset);

/// Per-class label intensities on the network grid, indexed by class id order in `dataset.classes`.
std::vector<std::vector<double>> class_labels(const Network& net, const Dataset& dataset);

/// Mean loss and mean gradient over a batch, reduced in index order.
LossAndGradient batch_gradient(const Network& net, const ParamSet& theta, const Dataset& dataset,
                               std::span<const std::size_t> indices, const std::vector<std::vector<double>>& labels,
                               int jobs, std::vector<std::vector<double>>* intensities = nullptr);

/// Uniform(-range, range) initialization from a seed.
ParamSet random_params(const ParamLayout& layout, std::uint64_t seed, double range);

/// Trains `config.restarts` times from fresh random starts and keeps the best
/// epoch by test accuracy (lower training cost breaks ties).
FitResult fit(const Network& net, const Dataset& dataset, const TrainConfig& config, const EpochCallback& on_epoch = {});

/// Deterministic 64-bit seed derivation.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

}  // namespace sonn
