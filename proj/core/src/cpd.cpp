#include "gwct/cpd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "gwct/error.hpp"

namespace gwct {

namespace {

constexpr double kWeightSumTolerance = 1e-9;
// Below this relative error the fit is exact to roundoff and ALS stops.
constexpr double kExactFit = 1e-14;

void validate_weights(const std::vector<double>& w) {
  if (w.empty()) {
    throw Error(ErrorCode::InvalidWeights, "weight vector is empty");
  }
  for (double v : w) {
    if (!std::isfinite(v) || v < 0.0) {
      throw Error(ErrorCode::InvalidWeights,
                  "style weights must be finite and non-negative");
    }
  }
}

// Portable uniform [-1, 1): std::uniform_real_distribution differs across
// standard libraries, which would break cross-platform reproducibility.
double uniform_pm1(std::mt19937_64& gen) {
  const double unit = static_cast<double>(gen() >> 11) * 0x1.0p-53;
  return 2.0 * unit - 1.0;
}

void validate_stack(std::span<const Eigen::MatrixXd> stack) {
  if (stack.empty()) {
    throw Error(ErrorCode::InvalidTensor, "covariance stack is empty");
  }
  const Eigen::Index c = stack.front().rows();
  for (const auto& slice : stack) {
    if (slice.rows() != c || slice.cols() != c) {
      throw Error(ErrorCode::InvalidTensor,
                  "stack slices must all be square with equal size");
    }
    if (!slice.allFinite()) {
      throw Error(ErrorCode::InvalidTensor, "stack has non-finite entries");
    }
  }
}

// Least-squares update M * G^+ with G symmetric positive semi-definite.
Eigen::MatrixXd solve_normal(const Eigen::MatrixXd& mttkrp, const Eigen::MatrixXd& gram) {
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(gram);
  return cod.solve(mttkrp.transpose()).transpose();
}

// Moves column norms of `unit` into `scale` so `unit` has unit-norm columns.
void push_norms(Eigen::MatrixXd& unit, Eigen::MatrixXd& scale) {
  for (Eigen::Index r = 0; r < unit.cols(); ++r) {
    const double n = unit.col(r).norm();
    if (n > 0.0) {
      unit.col(r) /= n;
      scale.col(r) *= n;
    }
  }
}

double stack_norm(std::span<const Eigen::MatrixXd> stack) {
  double sq = 0.0;
  for (const auto& s : stack) sq += s.squaredNorm();
  return std::sqrt(sq);
}

double residual_norm(std::span<const Eigen::MatrixXd> stack, const CpFactors& f) {
  double sq = 0.0;
  for (std::size_t i = 0; i < stack.size(); ++i) {
    sq += (stack[i] - reconstruct_slice(f, static_cast<Eigen::Index>(i))).squaredNorm();
  }
  return std::sqrt(sq);
}

}  // namespace

StyleWeights::StyleWeights(std::vector<double> w) : w_(std::move(w)) {
  validate_weights(w_);
  const double sum = std::accumulate(w_.begin(), w_.end(), 0.0);
  if (std::abs(sum - 1.0) > kWeightSumTolerance) {
    throw Error(ErrorCode::InvalidWeights,
                "style weights must sum to 1, got " + std::to_string(sum));
  }
}

StyleWeights StyleWeights::normalized(std::vector<double> w) {
  validate_weights(w);
  const double sum = std::accumulate(w.begin(), w.end(), 0.0);
  if (!(sum > 0.0)) {
    throw Error(ErrorCode::InvalidWeights, "style weights are all zero");
  }
  for (double& v : w) v /= sum;
  return StyleWeights(std::move(w));
}

StyleWeights StyleWeights::one_hot(std::size_t n, std::size_t index) {
  if (index >= n) {
    throw Error(ErrorCode::IndexOutOfRange, "one-hot index outside weight vector");
  }
  std::vector<double> w(n, 0.0);
  w[index] = 1.0;
  return StyleWeights(std::move(w));
}

StyleWeights StyleWeights::uniform(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::InvalidWeights, "weight vector is empty");
  return StyleWeights(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

CpResult cp_decompose(std::span<const Eigen::MatrixXd> stack, const CpOptions& options) {
  validate_stack(stack);
  if (options.rank < 1) {
    throw Error(ErrorCode::InvalidRank,
                "CP rank must be at least 1, got " + std::to_string(options.rank));
  }
  const auto n = static_cast<Eigen::Index>(stack.size());
  const Eigen::Index c = stack.front().rows();
  const Eigen::Index rank = options.rank;

  CpResult result;
  CpFactors& f = result.factors;
  f.styles.resize(n, rank);
  f.rows.resize(c, rank);
  f.cols.resize(c, rank);
  std::mt19937_64 gen(options.seed);
  for (Eigen::Index r = 0; r < rank; ++r) {
    for (Eigen::Index i = 0; i < n; ++i) f.styles(i, r) = uniform_pm1(gen);
    for (Eigen::Index a = 0; a < c; ++a) f.rows(a, r) = uniform_pm1(gen);
    for (Eigen::Index b = 0; b < c; ++b) f.cols(b, r) = uniform_pm1(gen);
  }

  const double total = stack_norm(stack);
  if (total == 0.0) {
    f.styles.setZero();
    result.relative_error = 0.0;
    result.error_history = {0.0};
    return result;
  }

  double err = residual_norm(stack, f) / total;
  result.error_history.push_back(err);

  Eigen::MatrixXd mttkrp;
  std::vector<Eigen::MatrixXd> tx(stack.size());
  for (int iter = 0; iter < options.max_iters; ++iter) {
    // styles: M(i, r) = y_r^T T_i x_r; T_i X is reused by the rows update.
    mttkrp.resize(n, rank);
    for (Eigen::Index i = 0; i < n; ++i) {
      tx[static_cast<std::size_t>(i)].noalias() = stack[static_cast<std::size_t>(i)] * f.cols;
      mttkrp.row(i) = f.rows.cwiseProduct(tx[static_cast<std::size_t>(i)]).colwise().sum();
    }
    f.styles = solve_normal(mttkrp, (f.rows.transpose() * f.rows)
                                        .cwiseProduct(f.cols.transpose() * f.cols));

    // rows: M = sum_i T_i X diag(z_i)
    mttkrp.setZero(c, rank);
    for (Eigen::Index i = 0; i < n; ++i) {
      mttkrp.noalias() += tx[static_cast<std::size_t>(i)] * f.styles.row(i).asDiagonal();
    }
    f.rows = solve_normal(mttkrp, (f.styles.transpose() * f.styles)
                                      .cwiseProduct(f.cols.transpose() * f.cols));
    push_norms(f.rows, f.styles);

    // cols: M = sum_i T_i^T Y diag(z_i)
    mttkrp.setZero(c, rank);
    for (Eigen::Index i = 0; i < n; ++i) {
      mttkrp.noalias() += (stack[static_cast<std::size_t>(i)].transpose() * f.rows) *
                          f.styles.row(i).asDiagonal();
    }
    f.cols = solve_normal(mttkrp, (f.styles.transpose() * f.styles)
                                      .cwiseProduct(f.rows.transpose() * f.rows));
    push_norms(f.cols, f.styles);

    const double prev = err;
    err = residual_norm(stack, f) / total;
    result.error_history.push_back(err);
    result.iterations = iter + 1;
    // fit = 1 - err, so the fit change is the change in relative error.
    if (err < kExactFit || std::abs(prev - err) < options.tol) {
      break;
    }
  }
  result.relative_error = err;
  return result;
}

Eigen::MatrixXd reconstruct_slice(const CpFactors& factors, Eigen::Index index) {
  if (index < 0 || index >= factors.n_styles()) {
    throw Error(ErrorCode::IndexOutOfRange,
                "slice index " + std::to_string(index) + " outside [0, " +
                    std::to_string(factors.n_styles()) + ")");
  }
  return (factors.rows * factors.styles.row(index).asDiagonal()) *
         factors.cols.transpose();
}

Eigen::MatrixXd reconstruct_blend(const CpFactors& factors, const StyleWeights& w) {
  if (static_cast<Eigen::Index>(w.size()) != factors.n_styles()) {
    throw Error(ErrorCode::ShapeMismatch,
                "weight vector has " + std::to_string(w.size()) + " entries for " +
                    std::to_string(factors.n_styles()) + " styles");
  }
  const Eigen::Map<const Eigen::VectorXd> wv(w.values().data(),
                                             static_cast<Eigen::Index>(w.size()));
  const Eigen::VectorXd diag = factors.styles.transpose() * wv;
  return (factors.rows * diag.asDiagonal()) * factors.cols.transpose();
}

Eigen::VectorXd blend_means(const Eigen::MatrixXd& means, const StyleWeights& w) {
  if (static_cast<Eigen::Index>(w.size()) != means.rows()) {
    throw Error(ErrorCode::ShapeMismatch,
                "weight vector has " + std::to_string(w.size()) + " entries for " +
                    std::to_string(means.rows()) + " means");
  }
  const Eigen::Map<const Eigen::VectorXd> wv(w.values().data(),
                                             static_cast<Eigen::Index>(w.size()));
  return means.transpose() * wv;
}

double reconstruction_error(std::span<const Eigen::MatrixXd> stack,
                            const CpFactors& factors) {
  validate_stack(stack);
  const double total = stack_norm(stack);
  const double res = residual_norm(stack, factors);
  return total > 0.0 ? res / total : res;
}

}  // namespace gwct
