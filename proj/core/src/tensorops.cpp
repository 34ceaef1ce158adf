#include "gwct/tensorops.hpp"

#include <cmath>
#include <string>

#include "gwct/error.hpp"

namespace gwct {

namespace {

void require_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::InvalidAlpha,
                "alpha must lie in [0, 1], got " + std::to_string(alpha));
  }
}

void require_same_shape(const FeatureMap& a, const FeatureMap& b) {
  if (a.data.rows() != b.data.rows() || a.data.cols() != b.data.cols() ||
      a.height != b.height || a.width != b.width) {
    throw Error(ErrorCode::ShapeMismatch, "feature maps differ in shape");
  }
}

void require_channels(Eigen::Index got, Eigen::Index want) {
  if (got != want) {
    throw Error(ErrorCode::ShapeMismatch,
                "expected " + std::to_string(want) + " channels, got " +
                    std::to_string(got));
  }
}

}  // namespace

FeatureMap::FeatureMap(Eigen::MatrixXd data_in, int height_in, int width_in)
    : data(std::move(data_in)), height(height_in), width(width_in) {
  if (height < 0 || width < 0 ||
      data.cols() != static_cast<Eigen::Index>(height) * width) {
    throw Error(ErrorCode::ShapeMismatch,
                "feature matrix has " + std::to_string(data.cols()) +
                    " columns for a " + std::to_string(height) + "x" +
                    std::to_string(width) + " grid");
  }
}

FeatureStats compute_stats(const Eigen::MatrixXd& columns) {
  const Eigen::Index n = columns.cols();
  if (n < 1) {
    throw Error(ErrorCode::EmptyRegion, "statistics requested over zero columns");
  }
  FeatureStats stats;
  stats.count = n;
  stats.mean = columns.rowwise().mean();
  const Eigen::MatrixXd centered = columns.colwise() - stats.mean;
  const double norm = static_cast<double>(std::max<Eigen::Index>(n - 1, 1));
  stats.cov = (centered * centered.transpose()) / norm;
  return stats;
}

FeatureStats compute_stats(const FeatureMap& features) {
  return compute_stats(features.data);
}

FeatureStats compute_stats(const FeatureMap& features,
                           std::span<const std::uint8_t> selector) {
  if (static_cast<Eigen::Index>(selector.size()) != features.cells()) {
    throw Error(ErrorCode::ShapeMismatch,
                "selector length " + std::to_string(selector.size()) +
                    " does not match " + std::to_string(features.cells()) +
                    " feature cells");
  }
  Eigen::Index selected = 0;
  for (auto s : selector) selected += s != 0;
  Eigen::MatrixXd gathered(features.channels(), selected);
  Eigen::Index out = 0;
  for (Eigen::Index j = 0; j < features.cells(); ++j) {
    if (selector[static_cast<std::size_t>(j)] != 0) {
      gathered.col(out++) = features.data.col(j);
    }
  }
  return compute_stats(gathered);
}

EigenPair sym_eig(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::InvalidMatrix, "eigendecomposition needs a square matrix");
  }
  if (!m.allFinite()) {
    throw Error(ErrorCode::InvalidMatrix, "matrix has non-finite entries");
  }
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::InvalidMatrix, "symmetric eigensolver did not converge");
  }
  const Eigen::Index n = sym.rows();
  EigenPair out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  // Eigen orders ascending.
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = n - 1 - k;
    out.values(k) = solver.eigenvalues()(src);
    Eigen::VectorXd v = solver.eigenvectors().col(src);
    Eigen::Index pivot = 0;
    v.cwiseAbs().maxCoeff(&pivot);
    if (v(pivot) < 0.0) v = -v;
    out.vectors.col(k) = v;
  }
  return out;
}

WhiteningTransform make_whitening(const FeatureStats& stats, double eps) {
  if (!(eps > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "whitening eps must be positive");
  }
  const EigenPair eig = sym_eig(stats.cov);
  const double top = eig.values.size() > 0 ? eig.values(0) : 0.0;
  const double floor = top > 0.0 ? eps * top : eps;
  WhiteningTransform t;
  Eigen::VectorXd scale(eig.values.size());
  for (Eigen::Index k = 0; k < eig.values.size(); ++k) {
    double v = eig.values(k);
    if (v < floor) {
      v = floor;
      ++t.clamped;
    }
    scale(k) = 1.0 / std::sqrt(v);
  }
  t.matrix = (eig.vectors * scale.asDiagonal()) * eig.vectors.transpose();
  t.mean = stats.mean;
  return t;
}

ColoringTransform make_coloring(const Eigen::MatrixXd& cov, const Eigen::VectorXd& mean) {
  require_channels(mean.size(), cov.rows());
  const EigenPair eig = sym_eig(cov);
  ColoringTransform t;
  Eigen::VectorXd scale(eig.values.size());
  for (Eigen::Index k = 0; k < eig.values.size(); ++k) {
    double v = eig.values(k);
    if (v < 0.0) {
      v = 0.0;
      ++t.clamped;
    }
    scale(k) = std::sqrt(v);
  }
  t.matrix = (eig.vectors * scale.asDiagonal()) * eig.vectors.transpose();
  t.mean = mean;
  return t;
}

Eigen::MatrixXd apply(const WhiteningTransform& t, const Eigen::MatrixXd& columns) {
  require_channels(columns.rows(), t.matrix.cols());
  return t.matrix * (columns.colwise() - t.mean);
}

Eigen::MatrixXd apply(const ColoringTransform& t, const Eigen::MatrixXd& columns) {
  require_channels(columns.rows(), t.matrix.cols());
  Eigen::MatrixXd out = t.matrix * columns;
  out.colwise() += t.mean;
  return out;
}

FeatureMap whiten(const FeatureMap& features, const FeatureStats& stats, double eps) {
  return FeatureMap(apply(make_whitening(stats, eps), features.data),
                    features.height, features.width);
}

FeatureMap color(const FeatureMap& whitened, const FeatureStats& target) {
  return FeatureMap(apply(make_coloring(target.cov, target.mean), whitened.data),
                    whitened.height, whitened.width);
}

Eigen::MatrixXd blend_columns(const Eigen::MatrixXd& content,
                              const Eigen::MatrixXd& stylized, double alpha) {
  require_alpha(alpha);
  if (content.rows() != stylized.rows() || content.cols() != stylized.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "blend operands differ in shape");
  }
  return alpha * stylized + (1.0 - alpha) * content;
}

FeatureMap blend_features(const FeatureMap& content, const FeatureMap& stylized,
                          double alpha) {
  require_same_shape(content, stylized);
  return FeatureMap(blend_columns(content.data, stylized.data, alpha), content.height,
                    content.width);
}

FeatureMap blend_features(const FeatureMap& content, const FeatureMap& stylized,
                          std::span<const double> alpha) {
  require_same_shape(content, stylized);
  if (static_cast<Eigen::Index>(alpha.size()) != content.cells()) {
    throw Error(ErrorCode::ShapeMismatch, "alpha vector length does not match cells");
  }
  for (double a : alpha) require_alpha(a);
  Eigen::MatrixXd out(content.data.rows(), content.data.cols());
  for (Eigen::Index j = 0; j < content.cells(); ++j) {
    const double a = alpha[static_cast<std::size_t>(j)];
    out.col(j) = a * stylized.data.col(j) + (1.0 - a) * content.data.col(j);
  }
  return FeatureMap(std::move(out), content.height, content.width);
}

}  // namespace gwct
