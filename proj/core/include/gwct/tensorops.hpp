#pragma once

#include <cstdint>
#include <span>

#include <Eigen/Dense>

namespace gwct {

/// Relative eigenvalue floor used by whitening unless the caller overrides it.
inline constexpr double kDefaultWhiteningEps = 1e-5;

/// Vectorized feature grid: one row per channel, one column per spatial cell.
/// Columns are ordered row-major over the grid (column = y * width + x).
struct FeatureMap {
  Eigen::MatrixXd data;
  int height = 0;
  int width = 0;

  FeatureMap() = default;
  /// Throws ShapeMismatch unless data.cols() == height * width.
  FeatureMap(Eigen::MatrixXd data, int height, int width);

  Eigen::Index channels() const noexcept { return data.rows(); }
  Eigen::Index cells() const noexcept { return data.cols(); }
};

struct FeatureStats {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  Eigen::Index count = 0;
};

/// Eigenvalues in descending order with matching orthonormal eigenvectors as columns.
struct EigenPair {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

// Statistics over the columns of a C x n matrix. The covariance uses the
// (n - 1) normalizer, clamped to 1 for single-column inputs.
FeatureStats compute_stats(const Eigen::MatrixXd& columns);
FeatureStats compute_stats(const FeatureMap& features);
/// selector must have one entry per feature cell; nonzero entries are included.
FeatureStats compute_stats(const FeatureMap& features,
                           std::span<const std::uint8_t> selector);

/// Decomposes (m + m^T) / 2. Eigenvector signs are fixed so the entry of
/// largest magnitude in each column is positive.
EigenPair sym_eig(const Eigen::MatrixXd& m);

struct WhiteningTransform {
  Eigen::MatrixXd matrix;  // E * clamp(D, floor)^(-1/2) * E^T
  Eigen::VectorXd mean;
  int clamped = 0;  // eigenvalues raised to the floor
};

struct ColoringTransform {
  Eigen::MatrixXd matrix;  // E * max(D, 0)^(1/2) * E^T
  Eigen::VectorXd mean;
  int clamped = 0;  // negative eigenvalues zeroed
};

/// Floor is eps * largest eigenvalue (or eps itself when the spectrum is zero).
WhiteningTransform make_whitening(const FeatureStats& stats,
                                  double eps = kDefaultWhiteningEps);
ColoringTransform make_coloring(const Eigen::MatrixXd& cov,
                                const Eigen::VectorXd& mean);

Eigen::MatrixXd apply(const WhiteningTransform& t, const Eigen::MatrixXd& columns);
Eigen::MatrixXd apply(const ColoringTransform& t, const Eigen::MatrixXd& columns);

FeatureMap whiten(const FeatureMap& features, const FeatureStats& stats,
                  double eps = kDefaultWhiteningEps);
FeatureMap color(const FeatureMap& whitened, const FeatureStats& target);

/// alpha * stylized + (1 - alpha) * content.
FeatureMap blend_features(const FeatureMap& content, const FeatureMap& stylized,
                          double alpha);
/// Per-column alpha; alpha.size() must equal the number of cells.
FeatureMap blend_features(const FeatureMap& content, const FeatureMap& stylized,
                          std::span<const double> alpha);

Eigen::MatrixXd blend_columns(const Eigen::MatrixXd& content,
                              const Eigen::MatrixXd& stylized, double alpha);

}  // namespace gwct
