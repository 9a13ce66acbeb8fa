#include "sonn/train.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "sonn/error.hpp"
#include "sonn/eval.hpp"
#include "sonn/parallel.hpp"

namespace sonn {

std::string_view to_string(OptimizerKind kind) { return kind == OptimizerKind::sgd ? "sgd" : "adam"; }

OptimizerKind optimizer_from_string(std::string_view name) {
  if (name == "sgd") return OptimizerKind::sgd;
  if (name == "adam") return OptimizerKind::adam;
  throw ValidationError("unknown optimizer '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
  if (!(lr0 > 0.0)) throw ValidationError("TrainConfig: lr0 must be positive");
  if (!(decay_factor > 0.0 && decay_factor <= 1.0)) throw ValidationError("TrainConfig: decay_factor must be in (0, 1]");
  if (decay_every < 1) throw ValidationError("TrainConfig: decay_every must be >= 1");
  if (batch_size < 1) throw ValidationError("TrainConfig: batch_size must be >= 1");
  if (epochs < 1) throw ValidationError("TrainConfig: epochs must be >= 1");
  if (restarts < 1) throw ValidationError("TrainConfig: restarts must be >= 1");
  if (!(init_range >= 0.0)) throw ValidationError("TrainConfig: init_range must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(epsilon > 0.0))
    throw ValidationError("TrainConfig: invalid Adam constants");
}

double TrainConfig::learning_rate(int epoch) const {
  return lr0 * std::pow(decay_factor, static_cast<double>(epoch / decay_every));
}

TrainState::TrainState(ParamSet initial)
    : theta(std::move(initial)), m(theta.size(), 0.0), v(theta.size(), 0.0) {}

void sgd_step(TrainState& s, const Gradient& g, double lr) {
  if (g.size() != s.theta.size()) throw ValidationError("sgd_step: gradient shape mismatch");
  auto th = s.theta.values();
  const auto gv = g.values();
  for (std::size_t i = 0; i < th.size(); ++i) th[i] -= lr * gv[i];
  ++s.step;
}

void adam_step(TrainState& s, const Gradient& g, double lr, double beta1, double beta2, double epsilon) {
  if (g.size() != s.theta.size()) throw ValidationError("adam_step: gradient shape mismatch");
  ++s.step;
  const double t = static_cast<double>(s.step);
  const double c1 = 1.0 - std::pow(beta1, t);
  const double c2 = 1.0 - std::pow(beta2, t);
  auto th = s.theta.values();
  const auto gv = g.values();
  for (std::size_t i = 0; i < th.size(); ++i) {
    s.m[i] = beta1 * s.m[i] + (1.0 - beta1) * gv[i];
    s.v[i] = beta2 * s.v[i] + (1.0 - beta2) * gv[i] * gv[i];
    const double m_hat = s.m[i] / c1;
    const double v_hat = s.v[i] / c2;
    th[i] -= lr * m_hat / (std::sqrt(v_hat) + epsilon);
  }
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  // splitmix64 over a combined key
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(seed) ^ a) ^ (b * 0xd1b54a32d192ed03ULL));
}

void check_compatible(const NetworkSpec& spec, const Dataset& d) {
  if (std::abs(spec.f_rep - d.f_rep) > 1e-9 * spec.f_rep)
    throw ValidationError("dataset repetition rate does not match the network");
  if (spec.pattern_periods != d.pattern_periods || spec.pad_periods != d.pad_periods)
    throw ValidationError("dataset pattern geometry (" + std::to_string(d.pattern_periods) + "+2x" +
                          std::to_string(d.pad_periods) + ") does not match the network (" +
                          std::to_string(spec.pattern_periods) + "+2x" + std::to_string(spec.pad_periods) + ")");
  for (const auto& s : d.samples)
    if (static_cast<int>(s.amplitudes.size()) != spec.num_periods())
      throw ValidationError("dataset sample length does not match the network grid");
}

std::vector<std::vector<double>> class_labels(const Network& net, const Dataset& d) {
  std::vector<std::vector<double>> labels;
  for (const auto& c : d.classes) labels.push_back(make_label(net.grid(), net.spec().pulse, d.pad_periods + c.label_slot));
  return labels;
}

namespace {

std::size_t class_index(const Dataset& d, int class_id) {
  for (std::size_t i = 0; i < d.classes.size(); ++i)
    if (d.classes[i].id == class_id) return i;
  throw ValidationError("sample refers to unknown class " + std::to_string(class_id));
}

}  // namespace

LossAndGradient batch_gradient(const Network& net, const ParamSet& theta, const Dataset& d,
                               std::span<const std::size_t> indices, const std::vector<std::vector<double>>& labels,
                               int jobs, std::vector<std::vector<double>>* intensities) {
  if (indices.empty()) throw ValidationError("batch_gradient: empty batch");
  const Modulation mod = net.modulation(theta);
  std::vector<LossAndGradient> parts(indices.size());
  parallel_for(indices.size(), jobs, [&](std::size_t i) {
    const Sample& s = d.samples[indices[i]];
    parts[i] = backward(net, theta, mod, net.encode(s.amplitudes), labels[class_index(d, s.class_id)]);
  });
  LossAndGradient total{{0.0}, Gradient(theta.layout()), {}};
  auto g = total.gradient.values();
  for (auto& p : parts) {
    total.loss.mse += p.loss.mse;
    const auto pg = p.gradient.values();
    for (std::size_t k = 0; k < g.size(); ++k) g[k] += pg[k];
  }
  const double inv = 1.0 / static_cast<double>(indices.size());
  total.loss.mse *= inv;
  for (double& v : g) v *= inv;
  if (intensities != nullptr) {
    intensities->clear();
    for (auto& p : parts) intensities->push_back(std::move(p.intensity));
  }
  return total;
}

ParamSet random_params(const ParamLayout& layout, std::uint64_t seed, double range) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-range, range);
  ParamSet p(layout);
  for (double& v : p.values()) v = range > 0.0 ? u(rng) : 0.0;
  return p;
}

FitResult fit(const Network& net, const Dataset& d, const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  check_compatible(net.spec(), d);
  if (d.train.empty()) throw ValidationError("fit: empty training split");
  if (d.test.empty()) throw ValidationError("fit: empty test split");

  const auto labels = class_labels(net, d);
  const auto targets = class_targets(d);
  FitResult result;
  bool have_best = false;
  bool stop = false;

  for (int r = 0; r < config.restarts && !stop; ++r) {
    TrainState state(random_params(net.layout(), mix_seed(config.seed, static_cast<std::uint64_t>(r), 0),
                                   config.init_range));
    bool aborted = false;
    for (int epoch = 0; epoch < config.epochs && !aborted; ++epoch) {
      const double lr = config.learning_rate(epoch);
      std::vector<std::size_t> order = d.train;
      std::mt19937_64 shuffle_rng(mix_seed(config.seed, static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(epoch) + 1));
      std::shuffle(order.begin(), order.end(), shuffle_rng);

      double loss_sum = 0.0;
      std::size_t correct = 0;
      std::vector<std::vector<double>> intensities;
      for (std::size_t b = 0; b < order.size(); b += static_cast<std::size_t>(config.batch_size)) {
        const std::size_t e = std::min(order.size(), b + static_cast<std::size_t>(config.batch_size));
        const std::span<const std::size_t> batch(order.data() + b, e - b);
        LossAndGradient lg = batch_gradient(net, state.theta, d, batch, labels, config.jobs, &intensities);
        if (!std::isfinite(lg.loss.mse) || !lg.gradient.all_finite()) {
          result.diagnostics.push_back("restart " + std::to_string(r) + " aborted at epoch " + std::to_string(epoch) +
                                       ": non-finite loss or gradient");
          aborted = true;
          break;
        }
        loss_sum += lg.loss.mse * static_cast<double>(batch.size());
        for (std::size_t i = 0; i < batch.size(); ++i) {
          const int cls = d.samples[batch[i]].class_id;
          if (classify(intensities[i], targets, net.grid(), cls).correct) ++correct;
        }
        if (config.optimizer == OptimizerKind::adam) {
          adam_step(state, lg.gradient, lr, config.beta1, config.beta2, config.epsilon);
        } else {
          sgd_step(state, lg.gradient, lr);
        }
      }
      if (aborted) break;

      EpochRecord rec;
      rec.restart = r;
      rec.epoch = epoch;
      rec.cost = loss_sum / static_cast<double>(order.size());
      rec.train_acc = static_cast<double>(correct) / static_cast<double>(order.size());
      rec.test_acc = accuracy(net, state.theta, d, d.test, config.jobs);
      rec.lr = lr;
      result.log.push_back(rec);
      if (on_epoch) on_epoch(rec);

      const bool better = !have_best || rec.test_acc > result.best_accuracy ||
                          (rec.test_acc == result.best_accuracy && rec.cost < result.best_cost);
      if (better) {
        have_best = true;
        result.best_theta = state.theta;
        result.best_restart = r;
        result.best_epoch = epoch;
        result.best_accuracy = rec.test_acc;
        result.best_cost = rec.cost;
      }
      if (rec.test_acc >= config.stop_at_accuracy) {
        stop = true;
        break;
      }
    }
  }
  if (!have_best) throw NumericError("fit: every restart diverged");
  return result;
}

}  // namespace sonn
