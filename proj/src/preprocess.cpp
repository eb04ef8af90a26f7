#include "csiwater/preprocess.hpp"

#include <algorithm>
#include <stdexcept>

namespace csiwater {
namespace {

double median_of(std::vector<double>& v) {
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

}  // namespace

void PreprocessConfig::validate() const {
  if (hampel_window < 3 || hampel_window % 2 == 0) {
    throw std::invalid_argument("hampel_window must be an odd integer >= 3");
  }
  if (!(hampel_k > 0.0)) throw std::invalid_argument("hampel_k must be positive");
}

std::vector<CsiFrame> filter_by_mac(std::span<const CsiFrame> frames, const MacAddress& target) {
  std::vector<CsiFrame> out;
  for (const auto& f : frames) {
    if (f.source_mac == target) out.push_back(f);
  }
  return out;
}

std::vector<bool> hampel_outliers(std::span<const double> series, int window, double k) {
  const auto n = series.size();
  const auto half = static_cast<std::size_t>(std::max(window, 1) / 2);
  std::vector<bool> flags(n, false);
  std::vector<double> buf;
  for (std::size_t t = 0; t < n; ++t) {
    const auto lo = t >= half ? t - half : 0;
    const auto hi = std::min(n - 1, t + half);
    buf.assign(series.begin() + static_cast<std::ptrdiff_t>(lo), series.begin() + static_cast<std::ptrdiff_t>(hi + 1));
    const double med = median_of(buf);
    for (auto& v : buf) v = std::abs(v - med);
    const double mad = median_of(buf);
    flags[t] = std::abs(series[t] - med) > k * 1.4826 * mad;
  }
  return flags;
}

OutlierSplit reject_outlier_frames(std::span<const CsiFrame> frames, const PreprocessConfig& cfg) {
  std::vector<double> level(frames.size());
  for (std::size_t t = 0; t < frames.size(); ++t) {
    level[t] = frames[t].width() == 0 ? 0.0 : frame_amplitudes(frames[t]).mean();
  }
  const auto flags = hampel_outliers(level, cfg.hampel_window, cfg.hampel_k);
  OutlierSplit split;
  for (std::size_t t = 0; t < frames.size(); ++t) {
    if (flags[t]) {
      split.rejected.push_back(t);
    } else {
      split.kept.push_back(frames[t]);
    }
  }
  return split;
}

ZScore zscore_fit(const Eigen::Ref<const Eigen::MatrixXd>& train) {
  if (train.rows() == 0 || train.cols() == 0) {
    throw std::invalid_argument("zscore_fit: empty training matrix");
  }
  ZScore z;
  z.mean = train.colwise().mean();
  const Eigen::MatrixXd centred = train.rowwise() - z.mean;
  z.stddev = (centred.colwise().squaredNorm() / static_cast<double>(train.rows())).cwiseSqrt();
  for (Eigen::Index j = 0; j < z.stddev.size(); ++j) {
    if (z.stddev(j) == 0.0) z.stddev(j) = 1.0;
  }
  return z;
}

Eigen::MatrixXd zscore_apply(const Eigen::Ref<const Eigen::MatrixXd>& x, const ZScore& params) {
  if (x.cols() != params.mean.size()) throw std::invalid_argument("zscore_apply: width mismatch");
  return (x.rowwise() - params.mean).array().rowwise() / params.stddev.array();
}

}  // namespace csiwater
