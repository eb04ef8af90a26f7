#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "csiwater/preprocess.hpp"

using namespace csiwater;

namespace {

CsiFrame frame_with(double amp, const MacAddress& mac = {}) {
  CsiFrame f;
  f.source_mac = mac;
  f.subcarriers.assign(8, ComplexSample(amp, 0));
  return f;
}

MacAddress mac_n(std::uint8_t n) {
  MacAddress m;
  m.bytes[5] = n;
  return m;
}

double wrap(double x) {
  double r = std::remainder(x, 2 * std::numbers::pi);
  return r <= -std::numbers::pi ? r + 2 * std::numbers::pi : r;
}

// Straight-line Hampel evaluation used as the oracle.
std::vector<bool> hampel_oracle(const std::vector<double>& s, int window, double k) {
  const int n = static_cast<int>(s.size());
  const int half = window / 2;
  std::vector<bool> out(s.size());
  for (int i = 0; i < n; ++i) {
    std::vector<double> w;
    for (int j = std::max(0, i - half); j <= std::min(n - 1, i + half); ++j) w.push_back(s[static_cast<std::size_t>(j)]);
    auto median = [](std::vector<double> v) {
      std::sort(v.begin(), v.end());
      const auto m = v.size() / 2;
      return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
    };
    const double med = median(w);
    std::vector<double> dev;
    for (double x : w) dev.push_back(std::abs(x - med));
    out[static_cast<std::size_t>(i)] = std::abs(s[static_cast<std::size_t>(i)] - med) > k * 1.4826 * median(dev);
  }
  return out;
}

}  // namespace

TEST_CASE("filter_by_mac keeps matching frames in order") {
  std::vector<CsiFrame> frames;
  for (int i = 0; i < 10; ++i) frames.push_back(frame_with(i, mac_n(i < 7 ? 1 : 2)));
  const auto kept = filter_by_mac(frames, mac_n(1));
  REQUIRE(kept.size() == 7);
  for (int i = 0; i < 7; ++i) CHECK(kept[static_cast<std::size_t>(i)] == frames[static_cast<std::size_t>(i)]);
  CHECK(filter_by_mac(frames, mac_n(9)).empty());
  CHECK(filter_by_mac(kept, mac_n(1)) == kept);
  CHECK(filter_by_mac(filter_by_mac(frames, mac_n(2)), mac_n(2)) == filter_by_mac(frames, mac_n(2)));
}

TEST_CASE("hampel on constant and spiked series") {
  std::vector<double> flat(30, 4.0);
  const auto none = hampel_outliers(flat, 11, 3.0);
  CHECK(std::none_of(none.begin(), none.end(), [](bool b) { return b; }));

  std::vector<CsiFrame> frames;
  // Small deterministic jitter keeps the MAD positive without chance flags.
  for (int i = 0; i < 100; ++i) frames.push_back(frame_with(10 + 0.01 * (i % 3)));
  for (auto& s : frames[37].subcarriers) s = ComplexSample(s.re() * 50, 0);
  PreprocessConfig cfg;
  const auto split = reject_outlier_frames(frames, cfg);
  REQUIRE(split.rejected.size() == 1);
  CHECK(split.rejected[0] == 37);
  CHECK(split.kept.size() == 99);
}

TEST_CASE("hampel window larger than the series is truncated") {
  std::vector<double> s{1, 2, 100};
  const auto flags = hampel_outliers(s, 11, 3.0);
  CHECK(flags.size() == 3);
  CHECK(flags == hampel_oracle(s, 11, 3.0));
}

TEST_CASE("hampel matches a straight-line oracle") {
  std::mt19937_64 gen(2);
  std::normal_distribution<double> n(0, 1);
  std::uniform_int_distribution<int> spike(0, 9);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> s;
    for (int i = 0; i < 60; ++i) s.push_back(n(gen) + (spike(gen) == 0 ? 20.0 : 0.0));
    CHECK(hampel_outliers(s, 11, 3.0) == hampel_oracle(s, 11, 3.0));
    CHECK(hampel_outliers(s, 5, 2.0) == hampel_oracle(s, 5, 2.0));
  }
}

TEST_CASE("reject_outlier_frames partitions its input") {
  std::mt19937_64 gen(4);
  std::lognormal_distribution<double> amp(2, 0.5);
  std::vector<CsiFrame> frames;
  for (int i = 0; i < 200; ++i) frames.push_back(frame_with(amp(gen)));
  const auto split = reject_outlier_frames(frames, PreprocessConfig{});
  CHECK(split.kept.size() + split.rejected.size() == frames.size());
}

TEST_CASE("config validation") {
  PreprocessConfig cfg;
  cfg.hampel_window = 4;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.hampel_window = 1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.hampel_window = 5;
  cfg.hampel_k = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("unwrap and sanitize examples") {
  Eigen::VectorXd crossing(2);
  crossing << 3.1, -3.1;
  const Eigen::VectorXd u = unwrap_phase(crossing);
  CHECK(u[0] == 3.1);
  CHECK(std::abs(u[1] - 3.1831853) < 1e-7);

  Eigen::VectorXd ramp(64), constant = Eigen::VectorXd::Constant(64, 0.7);
  for (int i = 0; i < 64; ++i) ramp[i] = 0.1 * i;
  CHECK(sanitize_phase(ramp).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(sanitize_phase(constant).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("sanitized output has zero mean and zero slope, and is a fixed point") {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(-std::numbers::pi, std::numbers::pi), step(-1.5, 1.5);
  for (int t = 0; t < 200; ++t) {
    // Wrapped smooth phase: successive true steps stay well inside pi.
    Eigen::VectorXd p(64);
    double theta = u(gen);
    for (auto& x : p) {
      x = std::remainder(theta, 2 * std::numbers::pi);
      theta += step(gen);
    }
    const Eigen::VectorXd s = sanitize_phase(p);
    CHECK(std::abs(s.mean()) < 1e-9);
    Eigen::VectorXd idx = Eigen::VectorXd::LinSpaced(64, 0, 63);
    idx.array() -= idx.mean();
    CHECK(std::abs(idx.dot(s) / idx.squaredNorm()) < 1e-9);
    CHECK((sanitize_phase(s) - s).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("sanitize is invariant to offset and ramp applied before wrapping") {
  std::mt19937_64 gen(9);
  std::normal_distribution<double> small(0, 0.3);
  std::uniform_real_distribution<double> off(-10, 10), slope(-0.5, 0.5);
  for (int t = 0; t < 200; ++t) {
    // Smooth true phase so unwrapping is unambiguous.
    Eigen::VectorXd truth(64);
    double acc = 0;
    for (int i = 0; i < 64; ++i) truth[i] = acc += 0.3 * small(gen);
    const double b = off(gen), a = slope(gen);
    Eigen::VectorXd base(64), shifted(64);
    for (int i = 0; i < 64; ++i) {
      base[i] = wrap(truth[i]);
      shifted[i] = wrap(truth[i] + b + a * i);
    }
    CHECK((sanitize_phase(base) - sanitize_phase(shifted)).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("phase helpers are scalar templates") {
  Eigen::VectorXf p(3);
  p << 3.1f, -3.1f, 3.1f;
  const Eigen::VectorXf u = unwrap_phase(p);
  CHECK(u[1] == doctest::Approx(3.1831853f).epsilon(1e-6));
}

TEST_CASE("zscore examples") {
  Eigen::MatrixXd col(2, 1);
  col << 1, 3;
  const ZScore z = zscore_fit(col);
  CHECK(z.mean[0] == 2);
  CHECK(z.stddev[0] == 1);
  const Eigen::MatrixXd n = zscore_apply(col, z);
  CHECK(n(0, 0) == -1);
  CHECK(n(1, 0) == 1);

  Eigen::MatrixXd c5 = Eigen::MatrixXd::Constant(3, 1, 5.0);
  const Eigen::MatrixXd n5 = zscore_apply(c5, zscore_fit(c5));
  CHECK((n5.array() == 0).all());

  CHECK_THROWS_AS(zscore_fit(Eigen::MatrixXd(0, 3)), std::invalid_argument);
}

TEST_CASE("zscore on a random matrix") {
  std::mt19937_64 gen(10);
  std::normal_distribution<double> n(3, 7);
  Eigen::MatrixXd x(100, 128);
  for (auto& v : x.reshaped()) v = n(gen);
  x.col(5).setConstant(2.5);
  const Eigen::MatrixXd z = zscore_apply(x, zscore_fit(x));
  CHECK(z.allFinite());
  for (Eigen::Index c = 0; c < 128; ++c) {
    const double mean = z.col(c).mean();
    CHECK(std::abs(mean) < 1e-9);
    const double sd = std::sqrt((z.col(c).array() - mean).square().mean());
    if (c == 5) {
      CHECK(sd == 0);
    } else {
      CHECK(std::abs(sd - 1) < 1e-9);
    }
  }
}
