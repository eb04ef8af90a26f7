#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "csiwater/csi_model.hpp"

namespace csiwater {

struct PreprocessConfig {
  std::optional<MacAddress> target_mac;
  // Hampel outlier rejection over the per-frame mean amplitude.
  bool reject_outliers = true;
  int hampel_window = 11;  // odd, >= 3
  double hampel_k = 3.0;   // > 0
  bool sanitize_phase = true;
  bool drop_zero_subcarrier_frames = false;

  // Throws std::invalid_argument on a bad window or threshold.
  void validate() const;
};

std::vector<CsiFrame> filter_by_mac(std::span<const CsiFrame> frames, const MacAddress& target);

// Hampel rule: x[t] is an outlier when |x[t] - median(W)| > k * 1.4826 * MAD(W),
// W the window centred on t and truncated at the series ends.
std::vector<bool> hampel_outliers(std::span<const double> series, int window, double k);

struct OutlierSplit {
  std::vector<CsiFrame> kept;
  std::vector<std::size_t> rejected;  // indices into the input, ascending
};

OutlierSplit reject_outlier_frames(std::span<const CsiFrame> frames, const PreprocessConfig& cfg);

// Removes 2*pi jumps between successive entries.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> unwrap_phase(const Eigen::MatrixBase<Derived>& phases) {
  using Scalar = typename Derived::Scalar;
  constexpr Scalar kPi = std::numbers::pi_v<Scalar>;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(phases.size());
  Scalar offset = 0;
  for (Eigen::Index i = 0; i < phases.size(); ++i) {
    if (i > 0) {
      const Scalar step = phases(i) - phases(i - 1);
      if (std::abs(step) > kPi) offset -= 2 * kPi * std::round(step / (2 * kPi));
    }
    out(i) = phases(i) + offset;
  }
  return out;
}

// Subtracts the least-squares line over the entry index.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> detrend_linear(const Eigen::MatrixBase<Derived>& values) {
  using Scalar = typename Derived::Scalar;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Eigen::Index n = values.size();
  Vector out = values.reshaped();
  if (n == 0) return out;
  out.array() -= out.mean();
  if (n < 2) return out;
  const Vector centred_index = Vector::LinSpaced(n, Scalar(0), Scalar(n - 1)).array() - Scalar(n - 1) / 2;
  out -= (centred_index.dot(out) / centred_index.squaredNorm()) * centred_index;
  return out;
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> sanitize_phase(const Eigen::MatrixBase<Derived>& phases) {
  return detrend_linear(unwrap_phase(phases));
}

// Per-feature standardization. Zero deviations are stored as 1 so constant
// features map to 0.
struct ZScore {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd stddev;

  bool operator==(const ZScore& other) const {
    return mean.size() == other.mean.size() && (mean.array() == other.mean.array()).all() &&
           (stddev.array() == other.stddev.array()).all();
  }
};

// Population (divide-by-N) deviation. Throws std::invalid_argument on an empty matrix.
ZScore zscore_fit(const Eigen::Ref<const Eigen::MatrixXd>& train);
Eigen::MatrixXd zscore_apply(const Eigen::Ref<const Eigen::MatrixXd>& x, const ZScore& params);

}  // namespace csiwater
