#include "sonn/grad.hpp"

#include <cmath>

#include "sonn/error.hpp"

namespace sonn {

LossValue loss_mse(std::span<const double> out, std::span<const double> label) {
  if (out.size() != label.size()) throw ValidationError("loss_mse: intensity lengths differ");
  if (out.empty()) throw ValidationError("loss_mse: empty intensity");
  double acc = 0.0;
  for (std::size_t n = 0; n < out.size(); ++n) {
    if (out[n] < 0.0 || label[n] < 0.0) throw ValidationError("loss_mse: negative intensity");
    const double d = std::sqrt(out[n]) - std::sqrt(label[n]);
    acc += d * d;
  }
  return {acc / static_cast<double>(out.size())};
}

LossAndGradient backward(const Network& net, const ParamSet& theta, const Modulation& modulation,
                         const ComplexField& input, std::span<const double> label) {
  ForwardResult fwd = net.forward(modulation, input, true);
  LossAndGradient r{loss_mse(fwd.intensity, label), Gradient(theta.layout()), {}};

  // d/dE of (|E| - s)^2 / N, packed as d/dRe + j d/dIm.
  const std::size_t n = fwd.output.size();
  const double scale = 2.0 / static_cast<double>(n);
  CVec seed(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double mag = std::abs(fwd.output[i]);
    if (mag < kZeroFieldGuard) continue;
    seed[i] = fwd.output[i] * (scale * (mag - std::sqrt(label[i])) / mag);
  }
  net.accumulate_gradient(modulation, fwd, std::move(seed), r.gradient.values());
  r.intensity = std::move(fwd.intensity);
  return r;
}

LossAndGradient backward(const Network& net, const ParamSet& theta, const ComplexField& input,
                         std::span<const double> label) {
  return backward(net, theta, net.modulation(theta), input, label);
}

Gradient fd_gradient(const Network& net, const ParamSet& theta, const ComplexField& input,
                     std::span<const double> label, double h) {
  if (!(h > 0.0)) throw ValidationError("fd_gradient: step must be positive");
  Gradient g(theta.layout());
  ParamSet probe = theta;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double base = theta.values()[i];
    probe.values()[i] = base + h;
    const double up = loss_mse(net.forward(probe, input).intensity, label).mse;
    probe.values()[i] = base - h;
    const double down = loss_mse(net.forward(probe, input).intensity, label).mse;
    probe.values()[i] = base;
    g.values()[i] = (up - down) / (2.0 * h);
  }
  return g;
}

}  // namespace sonn
