#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace gwct {

/// Rank-R CP model of an N x C x C stack:
///   stack[i](a, b) ~= sum_r styles(i, r) * rows(a, r) * cols(b, r)
struct CpFactors {
  Eigen::MatrixXd styles;  // N x R
  Eigen::MatrixXd rows;    // C x R
  Eigen::MatrixXd cols;    // C x R

  Eigen::Index rank() const noexcept { return styles.cols(); }
  Eigen::Index n_styles() const noexcept { return styles.rows(); }
  Eigen::Index channels() const noexcept { return rows.rows(); }
};

/// Non-negative, l1-normalized blend weights over the styles of a stack.
class StyleWeights {
 public:
  /// Throws InvalidWeights for negative or non-finite entries, or when the
  /// l1 norm differs from one by more than 1e-9.
  explicit StyleWeights(std::vector<double> w);

  /// Scales non-negative entries to unit l1 norm; throws InvalidWeights if all zero.
  static StyleWeights normalized(std::vector<double> w);
  static StyleWeights one_hot(std::size_t n, std::size_t index);
  static StyleWeights uniform(std::size_t n);

  std::span<const double> values() const noexcept { return w_; }
  std::size_t size() const noexcept { return w_.size(); }
  double operator[](std::size_t i) const noexcept { return w_[i]; }

 private:
  std::vector<double> w_;
};

struct CpOptions {
  Eigen::Index rank = 1;
  std::uint64_t seed = 0;
  int max_iters = 500;
  double tol = 1e-8;
};

struct CpResult {
  CpFactors factors;
  double relative_error = 0.0;  // ||stack - model||_F / ||stack||_F
  int iterations = 0;
  /// Relative error after the seeded initialization and after every sweep.
  std::vector<double> error_history;
};

/// Alternating least squares. Initial factors are drawn uniformly from
/// [-1, 1] column by column, so a rank-R start is a prefix of any larger
/// rank's start for the same seed.
CpResult cp_decompose(std::span<const Eigen::MatrixXd> stack, const CpOptions& options);

Eigen::MatrixXd reconstruct_slice(const CpFactors& factors, Eigen::Index index);
Eigen::MatrixXd reconstruct_blend(const CpFactors& factors, const StyleWeights& w);
/// means is N x C, one style mean per row.
Eigen::VectorXd blend_means(const Eigen::MatrixXd& means, const StyleWeights& w);

/// Relative Frobenius error of the CP model over the whole stack.
double reconstruction_error(std::span<const Eigen::MatrixXd> stack,
                            const CpFactors& factors);

}  // namespace gwct
