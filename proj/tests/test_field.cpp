#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "sonn/error.hpp"
#include "sonn/field.hpp"

using namespace sonn;
using std::numbers::pi;

namespace {

ComplexField random_field(const TimeGrid& g, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  ComplexField f(g);
  for (auto& x : f.samples()) x = {n(rng), n(rng)};
  return f;
}

double max_diff(const ComplexField& a, const ComplexField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("time grid geometry and validation") {
  const TimeGrid g = make_grid(5e9, 64, 31);
  CHECK(g.size() == 64u * 31u);
  CHECK(g.period() == doctest::Approx(200e-12));
  CHECK(g.dt() * 64 == doctest::Approx(g.period()).epsilon(1e-15));
  CHECK(g.omega_of_bin(1) == doctest::Approx(2 * pi / g.duration()));
  CHECK(g.omega_of_bin(g.size() - 1) == doctest::Approx(-2 * pi / g.duration()));
  CHECK(g.omega_of_bin(g.size() / 2) == doctest::Approx(-pi / g.dt()));
  const auto axis = g.centered_frequency_axis();
  CHECK(axis.front() == doctest::Approx(-pi / g.dt()));
  CHECK(axis[1] - axis[0] == doctest::Approx(g.omega_step()));
  CHECK_THROWS_AS(make_grid(5e9, 63, 4), ValidationError);
  CHECK_THROWS_AS(make_grid(5e9, 4, 4), ValidationError);
  CHECK_THROWS_AS(make_grid(5e9, 64, 0), ValidationError);
  CHECK_THROWS_AS(make_grid(-1.0, 64, 2), ValidationError);
}

TEST_CASE("single pulse energy matches the Gaussian quadrature") {
  const TimeGrid g = make_grid(5e9, 1024, 4);
  for (double frac : {1.0 / 20.0, 1.0 / 10.0, 1.0 / 3.0}) {
    const PulseShape p{g.period() * frac, 0.0};
    // |E|^2 = exp(-t^2/c^2) on |t| <= T
    const double c = p.c_lw;
    const double analytic = c * std::sqrt(pi) * std::erf(g.period() / c);
    CHECK(single_pulse_energy(g, p) == doctest::Approx(analytic).epsilon(1e-9));
    CHECK(truncation_loss(g, p) == doctest::Approx(std::erfc(g.period() / c)).epsilon(1e-12));
    CHECK(energy(single_pulse(g, p, 2)) == doctest::Approx(single_pulse_energy(g, p)).epsilon(1e-12));
  }
}

TEST_CASE("pulse train: peaks at period centers, warning for wide pulses") {
  const TimeGrid g = make_grid(5e9, 64, 6);
  std::vector<std::string> warnings;
  const ComplexField t = synth_pulse_train(g, PulseShape::default_for(g), &warnings);
  CHECK(warnings.empty());
  for (int i = 0; i < 6; ++i) CHECK(std::abs(t[g.period_start(i) + 32]) == doctest::Approx(1.0));
  CHECK(energy(t) == doctest::Approx(6 * single_pulse_energy(g, PulseShape::default_for(g))).epsilon(1e-12));

  synth_pulse_train(g, PulseShape{g.period() / 2.0, 0.0}, &warnings);
  CHECK(warnings.size() == 1);
  CHECK_THROWS_AS(synth_pulse_train(g, PulseShape{0.0, 0.0}), ValidationError);
}

TEST_CASE("sample_object scales each period") {
  const TimeGrid g = make_grid(5e9, 32, 3);
  const ComplexField t = synth_pulse_train(g, PulseShape::default_for(g));
  const std::vector<double> a{0.0, 0.5, 1.0};
  const ComplexField s = sample_object(t, a);
  CHECK(std::abs(s[16]) == 0.0);
  CHECK(std::abs(s[32 + 16]) == doctest::Approx(0.5));
  CHECK(std::abs(s[64 + 16]) == doctest::Approx(1.0));
  const std::vector<double> wrong{1.0};
  CHECK_THROWS_AS(sample_object(t, wrong), ValidationError);
}

TEST_CASE("dispersion is unitary on random fields") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const TimeGrid g = make_grid(5e9, 64, 4 + trial % 5);
    const ComplexField f = random_field(g, rng);
    const GddValue gdd{u(rng) * talbot_gdd(5e9, 1).phi2};
    const double e0 = energy(f);
    worst = std::max(worst, std::abs(energy(propagate_gdd(f, gdd)) - e0) / e0);
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("dispersion composes additively and inverts with the opposite sign") {
  std::mt19937_64 rng(1);
  const TimeGrid g = make_grid(5e9, 64, 8);
  const ComplexField f = random_field(g, rng);
  const GddValue a{2.1e-21}, b{-0.7e-21};
  const ComplexField ab = propagate_gdd(propagate_gdd(f, a), b);
  CHECK(max_diff(ab, propagate_gdd(f, GddValue{a.phi2 + b.phi2})) < 1e-11);
  CHECK(max_diff(propagate_gdd(propagate_gdd(f, a), GddValue{-a.phi2}), f) < 1e-11);
  CHECK(max_diff(propagate_gdd(f, GddValue{0.0}), f) < 1e-12);
}

TEST_CASE("Gaussian pulse through dispersion matches the analytic chirped pulse") {
  // exp(-t^2/2c^2) with H = exp(j phi2 w^2 / 2) becomes
  // c/sqrt(c^2 - j phi2) exp(-t^2 / (2 (c^2 - j phi2))).
  const TimeGrid g = make_grid(5e9, 256, 31);
  const PulseShape p{g.period() / 20.0, 0.0};
  const int slot = 15;
  const ComplexField in = single_pulse(g, p, slot);
  const double c2 = p.c_lw * p.c_lw;
  for (double ratio : {0.5, 3.0, -8.0}) {
    const GddValue gdd{ratio * c2};
    const ComplexField out = propagate_gdd(in, gdd);
    const std::complex<double> q(c2, -gdd.phi2);
    const double t0 = (slot + 0.5) * g.period();
    double err = 0.0;
    for (std::size_t n = 0; n < g.size(); ++n) {
      const double t = g.time(n) - t0;
      const std::complex<double> expect = p.c_lw / std::sqrt(q) * std::exp(-t * t / (2.0 * q));
      err = std::max(err, std::abs(out[n] - expect));
    }
    CHECK(err < 1e-9);

    // Intensity width grows as c sqrt(1 + (phi2/c^2)^2).
    const auto I = out.intensity();
    double m0 = 0.0, m2 = 0.0;
    for (std::size_t n = 0; n < g.size(); ++n) {
      const double t = g.time(n) - t0;
      m0 += I[n];
      m2 += I[n] * t * t;
    }
    const double width = std::sqrt(2.0 * m2 / m0);
    CHECK(width == doctest::Approx(p.c_lw * std::sqrt(1.0 + ratio * ratio)).epsilon(1e-6));
  }
}

TEST_CASE("first Talbot dispersion images the train with a half-period shift") {
  const TimeGrid g = make_grid(5e9, 256, 31);
  CHECK(talbot_gdd(5e9, 1).phi2 == doctest::Approx(6.3662e-21).epsilon(1e-4));
  const ComplexField t = synth_pulse_train(g, PulseShape::default_for(g));
  const auto in = t.intensity();
  const auto out = propagate_gdd(t, talbot_gdd(5e9, 1)).intensity();
  double err = 0.0;
  for (std::size_t n = 0; n < g.size(); ++n) err = std::max(err, std::abs(out[n] - in[(n + 128) % g.size()]));
  CHECK(err < 1e-9);
  // Second order restores the original positions.
  const auto out2 = propagate_gdd(t, talbot_gdd(5e9, 2, -1)).intensity();
  err = 0.0;
  for (std::size_t n = 0; n < g.size(); ++n) err = std::max(err, std::abs(out2[n] - in[n]));
  CHECK(err < 1e-9);
}

TEST_CASE("alternating-sign transform equals the centered-axis transfer") {
  std::mt19937_64 rng(9);
  for (int spp : {16, 64, 256}) {
    const TimeGrid g = make_grid(5e9, spp, 7);
    const ComplexField f = random_field(g, rng);
    for (double s : {1.0, -2.0, 0.37}) {
      const GddValue gdd{s * talbot_gdd(5e9, 1).phi2};
      CHECK(max_diff(propagate_gdd(f, gdd), propagate_gdd_sign_trick(f, gdd)) < 1e-10);
    }
  }
}

TEST_CASE("Talbot dispersion in engineering units") {
  const double ps_nm = gdd_to_ps_per_nm(talbot_gdd(12.0561e9, 1), 1550e-9);
  CHECK(std::abs(ps_nm) == doctest::Approx(858.5).epsilon(2e-3));
  CHECK(ps_nm < 0.0);
  CHECK_THROWS_AS(talbot_gdd(5e9, 0), ValidationError);
  CHECK_THROWS_AS(talbot_gdd(5e9, 1, 0), ValidationError);
}

TEST_CASE("step geometry: plain and half-level offset") {
  const TimeGrid g = make_grid(5e9, 16, 3);
  const StepGeometry plain(g, 2, false);
  CHECK(plain.num_levels() == 6);
  CHECK(plain.level_length() == 8);
  CHECK(plain.level_of_sample(0) == 0);
  CHECK(plain.level_of_sample(8) == 1);
  CHECK(plain.level_of_sample(47) == 5);

  const StepGeometry off(g, 2, true);
  CHECK(off.level_of_sample(0) == 5);  // head of the wrapped last level
  CHECK(off.level_of_sample(3) == 5);
  CHECK(off.level_of_sample(4) == 0);
  CHECK(off.level_of_sample(11) == 0);
  CHECK(off.level_of_sample(12) == 1);
  CHECK(off.level_of_sample(44) == 5);
  std::size_t covered = 0;
  for (const auto& s : off.segments()) covered += s.end - s.begin;
  CHECK(covered == g.size());

  CHECK_THROWS_AS(StepGeometry(g, 3, false), ValidationError);
  CHECK_THROWS_AS(StepGeometry(make_grid(5e9, 10, 2), 2, true), ValidationError);
}

TEST_CASE("phase steps preserve intensity exactly") {
  std::mt19937_64 rng(4);
  const TimeGrid g = make_grid(5e9, 32, 5);
  const ComplexField f = random_field(g, rng);
  std::uniform_real_distribution<double> u(0.0, 2 * pi);
  std::vector<double> steps(10);
  for (double& s : steps) s = u(rng);
  for (bool offset : {false, true}) {
    const ComplexField m = apply_phase_steps(f, steps, 2, offset);
    const auto a = f.intensity(), b = m.intensity();
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-15 * a[i]);
    const StepGeometry geo(g, 2, offset);
    const std::size_t n = 37;
    CHECK(std::abs(m[n] - f[n] * std::polar(1.0, -steps[geo.level_of_sample(n)])) < 1e-14);
  }
}

TEST_CASE("edge leakage diagnostic") {
  const TimeGrid g = make_grid(5e9, 64, 10);
  const PulseShape p = PulseShape::default_for(g);
  CHECK(edge_leakage(single_pulse(g, p, 5)) < 1e-12);
  CHECK(edge_leakage(single_pulse(g, p, 0)) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(edge_leakage(ComplexField(g)) == 0.0);
}
