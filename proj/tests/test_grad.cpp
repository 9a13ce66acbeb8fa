#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "sonn/data.hpp"
#include "sonn/error.hpp"
#include "sonn/grad.hpp"

using namespace sonn;

namespace {

struct Problem {
  NetworkSpec spec;
  ParamSet theta;
  std::vector<double> amps;
  std::vector<double> label;
};

// Two layers on a four-period pattern at 64 samples per period, with the
// dispersion, modulation type, level count and offsets drawn at random.
Problem random_problem(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Problem p;
  p.spec.name = "small";
  p.spec.f_rep = 5e9;
  p.spec.samples_per_period = 64;
  p.spec.pattern_periods = 4;
  p.spec.pad_periods = 1;
  p.spec.pulse = {1.0 / 5e9 / 8.0, 0.0};
  const ModulationMode modes[] = {ModulationMode::phase, ModulationMode::amplitude, ModulationMode::complex};
  for (int l = 0; l < 2; ++l) {
    LayerSpec ls;
    ls.gdd = talbot_gdd(5e9, 1, u(rng) < 0.5 ? 1 : -1);
    ls.gdd.phi2 *= 0.3 + 2.0 * u(rng);
    ls.has_modulation = true;
    ls.mode = modes[static_cast<int>(u(rng) * 3) % 3];
    ls.levels_per_period = u(rng) < 0.5 ? 1 : 2;
    ls.half_period_offset = u(rng) < 0.5;
    p.spec.layers.push_back(ls);
  }
  const ParamLayout layout(p.spec);
  p.theta = ParamSet(layout);
  std::uniform_real_distribution<double> th(-1.5, 1.5);
  for (double& v : p.theta.values()) v = th(rng);
  p.amps.assign(6, 0.0);
  for (int i = 1; i <= 4; ++i) p.amps[static_cast<std::size_t>(i)] = u(rng);
  p.label = make_label(p.spec.grid(), p.spec.pulse, 1 + static_cast<int>(u(rng) * 4));
  return p;
}

// Per-coordinate relative error. Coordinates below `floor` times the largest
// component are compared against that floor: there the central difference is
// limited by round-off (about eps * loss / h), not by the adjoint.
double max_rel_error(const Gradient& a, const Gradient& b, double floor = 1e-2) {
  double scale = 0.0;
  for (double v : b.values()) scale = std::max(scale, std::abs(v));
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double denom = std::max({std::abs(a.values()[i]), std::abs(b.values()[i]), floor * scale});
    worst = std::max(worst, std::abs(a.values()[i] - b.values()[i]) / denom);
  }
  return worst;
}

}  // namespace

TEST_CASE("loss on square-root intensities") {
  const std::vector<double> a{4.0, 1.0, 0.0}, b{1.0, 1.0, 9.0};
  CHECK(loss_mse(a, b).mse == doctest::Approx((1.0 + 0.0 + 9.0) / 3.0));
  CHECK(loss_mse(a, a).mse == 0.0);
  const std::vector<double> shorter{1.0};
  CHECK_THROWS_AS(loss_mse(a, shorter), ValidationError);
  const std::vector<double> neg{-1.0, 0.0, 0.0};
  CHECK_THROWS_AS(loss_mse(neg, b), ValidationError);
  CHECK_THROWS_AS(loss_mse(std::vector<double>{}, std::vector<double>{}), ValidationError);
}

TEST_CASE("adjoint gradient matches central differences on random small networks") {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 24; ++seed) {
    const Problem p = random_problem(seed);
    const Network net(p.spec);
    const ComplexField in = net.encode(p.amps);
    const LossAndGradient lg = backward(net, p.theta, in, p.label);
    const Gradient fd = fd_gradient(net, p.theta, in, p.label, 1e-6);
    const double err = max_rel_error(lg.gradient, fd);
    CAPTURE(seed);
    CHECK(err < 1e-5);
    worst = std::max(worst, err);
    // With a larger step the round-off floor drops and small coordinates are checked too.
    CHECK(max_rel_error(lg.gradient, fd_gradient(net, p.theta, in, p.label, 1e-4), 1e-3) < 1e-6);

    // Loss reported by backward is that of its own forward pass.
    const auto fwd = net.forward(p.theta, in);
    CHECK(lg.loss.mse == doctest::Approx(loss_mse(fwd.intensity, p.label).mse).epsilon(1e-14));
  }
  MESSAGE("worst relative gradient error " << worst);
}

TEST_CASE("finite-difference agreement across step sizes") {
  const Problem p = random_problem(77);
  const Network net(p.spec);
  const ComplexField in = net.encode(p.amps);
  const Gradient g = backward(net, p.theta, in, p.label).gradient;
  for (double h : {1e-4, 1e-5, 1e-6, 1e-7}) {
    CAPTURE(h);
    CHECK(max_rel_error(g, fd_gradient(net, p.theta, in, p.label, h)) < 1e-4);
  }
}

TEST_CASE("gradient on a preset network at a non-trivial point") {
  const NetworkSpec s = preset("digital4", 16);
  const Network net(s);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ParamSet th(net.layout());
  for (double& v : th.values()) v = u(rng);
  std::vector<double> amps(24, 0.0);
  for (int i = 8; i < 16; ++i) amps[static_cast<std::size_t>(i)] = (i % 3 == 0) ? 1.0 : 0.0;
  const auto label = make_label(net.grid(), s.pulse, 9);
  const ComplexField in = net.encode(amps);
  const Gradient g = backward(net, th, in, label).gradient;
  CHECK(max_rel_error(g, fd_gradient(net, th, in, label, 1e-6)) < 1e-5);
}

TEST_CASE("zero input gives a zero gradient without NaNs") {
  const Problem p = random_problem(3);
  const Network net(p.spec);
  const ComplexField zero(net.grid());
  const LossAndGradient lg = backward(net, p.theta, zero, p.label);
  CHECK(lg.gradient.all_finite());
  for (double v : lg.gradient.values()) CHECK(v == 0.0);
}

TEST_CASE("adjoint gradient matches a fourth-order difference stencil") {
  for (std::uint64_t seed : {2u, 11u, 23u}) {
    const Problem p = random_problem(seed);
    const Network net(p.spec);
    const ComplexField in = net.encode(p.amps);
    const Gradient g = backward(net, p.theta, in, p.label).gradient;
    Gradient fd5(p.theta.layout());
    const double h = 1e-3;
    for (std::size_t i = 0; i < g.size(); ++i) {
      ParamSet t = p.theta;
      const double x = t.values()[i];
      auto at = [&](double d) {
        t.values()[i] = x + d;
        return loss_mse(net.forward(t, in).intensity, p.label).mse;
      };
      fd5.values()[i] = (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h);
    }
    CAPTURE(seed);
    CHECK(max_rel_error(g, fd5, 1e-3) < 1e-6);
  }
}
