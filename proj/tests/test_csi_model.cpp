#include "doctest.h"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "csiwater/csi_model.hpp"

using namespace csiwater;

namespace {

CsiFrame uniform_frame(double re, double im, std::size_t n = kDefaultSubcarriers) {
  CsiFrame f;
  f.subcarriers.assign(n, ComplexSample(re, im));
  return f;
}

}  // namespace

TEST_CASE("amplitude of simple samples") {
  CHECK(amplitude(ComplexSample(3, 4)) == 5.0);
  CHECK(amplitude(ComplexSample(0, 0)) == 0.0);
  CHECK(amplitude(ComplexSample(1, 1)) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("phase branch conventions") {
  CHECK(phase(ComplexSample(1, 0)).radians == 0.0);
  CHECK(phase(ComplexSample(0, 1)).radians == doctest::Approx(std::numbers::pi / 2));
  CHECK(phase(ComplexSample(-1, 0)).radians == std::numbers::pi);
  // -0.0 imaginary part would give -pi from atan2; the range is (-pi, pi].
  CHECK(phase(ComplexSample(-1, -0.0)).radians == std::numbers::pi);
  const auto z = phase(ComplexSample(0, 0));
  CHECK(z.radians == 0.0);
  CHECK(z.degenerate);
  CHECK_FALSE(phase(ComplexSample(1, 0)).degenerate);
}

TEST_CASE("non-finite components are rejected") {
  CHECK_THROWS_AS(ComplexSample(std::nan(""), 0), std::invalid_argument);
  CHECK_THROWS_AS(ComplexSample(0, std::numeric_limits<double>::infinity()), std::invalid_argument);
}

TEST_CASE("frame vectors") {
  const auto ones = frame_amplitudes(uniform_frame(1, 0));
  CHECK(ones.size() == 64);
  CHECK((ones.array() == 1.0).all());
  CHECK((frame_phases(uniform_frame(1, 0)).array() == 0.0).all());
  CHECK((frame_phases(uniform_frame(0, 1)).array() == std::numbers::pi / 2).all());

  CsiFrame alt;
  for (int i = 0; i < 64; ++i) alt.subcarriers.emplace_back(i % 2 ? 0.0 : 3.0, i % 2 ? 0.0 : 4.0);
  const auto a = frame_amplitudes(alt);
  for (int i = 0; i < 64; ++i) CHECK(a[i] == (i % 2 ? 0.0 : 5.0));
  CHECK(count_degenerate_subcarriers(alt) == 32);
}

TEST_CASE("random frame matches per-element scalar calls") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(-100, 100);
  CsiFrame f;
  for (int i = 0; i < 64; ++i) f.subcarriers.emplace_back(u(gen), u(gen));
  const auto a = frame_amplitudes(f);
  const auto p = frame_phases(f);
  for (int i = 0; i < 64; ++i) {
    CHECK(a[i] == amplitude(f.subcarriers[i]));
    CHECK(p[i] == phase(f.subcarriers[i]).radians);
  }
}

TEST_CASE("amplitude and phase properties on random samples") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  std::uniform_real_distribution<double> scale(1e-3, 1e3);
  for (int t = 0; t < 10000; ++t) {
    const double re = u(gen), im = u(gen);
    const ComplexSample s(re, im);
    const double a = amplitude(s);
    const double r = phase(s).radians;
    // Squared amplitude against the direct sum, within a few ULP.
    const double direct = re * re + im * im;
    CHECK(std::abs(a * a - direct) <= 4 * std::numeric_limits<double>::epsilon() * direct);
    CHECK(r > -std::numbers::pi);
    CHECK(r <= std::numbers::pi);
    CHECK(std::abs(a * std::cos(r) - re) <= 1e-12 * a);
    CHECK(std::abs(a * std::sin(r) - im) <= 1e-12 * a);
    const double l = scale(gen);
    const ComplexSample scaled(l * re, l * im);
    CHECK(std::abs(phase(scaled).radians - r) <= 1e-12);
    CHECK(std::abs(amplitude(scaled) - l * a) <= 1e-12 * l * a);
  }
}

TEST_CASE("mac address text form") {
  const auto mac = MacAddress::parse("aa:bb:cc:dd:ee:0f");
  REQUIRE(mac);
  CHECK(mac->to_string() == "AA:BB:CC:DD:EE:0F");
  CHECK_FALSE(MacAddress::parse("AA:BB:CC:DD:EE"));
  CHECK_FALSE(MacAddress::parse("AA:BB:CC:DD:EE:GG"));
  CHECK_FALSE(MacAddress::parse("AABBCCDDEEFF"));
  CHECK_FALSE(MacAddress::parse("AA:BB:CC:DD:EE:FF:00"));
}

TEST_CASE("class labels") {
  for (auto l : kAllLabels) CHECK(parse_class_label(to_string(l)) == l);
  CHECK_FALSE(parse_class_label("Dirty"));
  CHECK_FALSE(is_poisoned(ClassLabel::Clean));
  CHECK(is_poisoned(ClassLabel::Toxic100ppm));
  CHECK(is_poisoned(ClassLabel::Toxic1000ppm));
}
