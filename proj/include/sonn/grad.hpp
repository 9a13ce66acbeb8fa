#pragma once

// Loss on square-root intensities and its exact reverse-mode gradient with
// respect to the unconstrained parameters, plus a central-difference oracle.

#include <span>
#include <vector>

#include "sonn/network.hpp"

namespace sonn {

struct LossValue {
  double mse = 0.0;
};

/// Mean over samples of (sqrt(I_out) - sqrt(I_label))^2.
LossValue loss_mse(std::span<const double> intensity_out, std::span<const double> intensity_label);

/// Below this field magnitude the sqrt-intensity seed is treated as zero.
inline constexpr double kZeroFieldGuard = 1e-15;

struct LossAndGradient {
  LossValue loss;
  Gradient gradient;
  std::vector<double> intensity;
};

/// One forward pass plus the adjoint pass; the returned loss is computed from
/// that same forward pass.
LossAndGradient backward(const Network& net, const ParamSet& theta, const ComplexField& input,
                         std::span<const double> intensity_label);

/// Variant reusing a precomputed Modulation for theta (shared across a batch).
LossAndGradient backward(const Network& net, const ParamSet& theta, const Modulation& modulation,
                         const ComplexField& input, std::span<const double> intensity_label);

/// (e(theta + h e_i) - e(theta - h e_i)) / 2h for every coordinate.
Gradient fd_gradient(const Network& net, const ParamSet& theta, const ComplexField& input,
                     std::span<const double> intensity_label, double h);

}  // namespace sonn
