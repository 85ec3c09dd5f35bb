#pragma once

// Dense column kernels shared by every module. Two builds of each kernel
// exist: `serial` is the reference and `parallel` splits the same work
// over OpenMP threads. Reductions use a fixed block partition (independent
// of the thread count) and compensated summation, and block partials are
// always combined in ascending order, so both builds return bit-identical
// results for any thread count.

#include <cstddef>
#include <span>

#include <Eigen/Dense>

namespace synthcorr::kernels {

/// Rows per reduction block.
inline constexpr std::size_t kBlockRows = 4096;

#define SYNTHCORR_KERNEL_DECLS                                                          \
  double sum(std::span<const double> x);                                                \
  double dot(std::span<const double> x, std::span<const double> y);                     \
  double squared_deviation_sum(std::span<const double> x, double center);               \
  Eigen::VectorXd column_means(const Eigen::MatrixXd& x);                               \
  Eigen::VectorXd column_variances(const Eigen::MatrixXd& x, const Eigen::VectorXd& means); \
  Eigen::MatrixXd subtract_row(const Eigen::MatrixXd& x, const Eigen::VectorXd& row);   \
  Eigen::MatrixXd cross_gram(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);       \
  Eigen::MatrixXd multiply_small(const Eigen::MatrixXd& x, const Eigen::MatrixXd& w);   \
  Eigen::MatrixXd scale_shift(const Eigen::MatrixXd& x, const Eigen::VectorXd& scale,   \
                              const Eigen::VectorXd& shift);                            \
  double frobenius_distance(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);

// sum/dot/squared_deviation_sum: compensated blocked reductions.
// column_variances: population variance from precomputed means (two-pass).
// subtract_row: x - 1 * rowᵀ.
// cross_gram: xᵀ y for two n×m operands, each entry a blocked dot product.
// multiply_small: x (n×m) times a small dense w (m×k).
// scale_shift: x * diag(scale) + 1 * shiftᵀ.
namespace serial {
SYNTHCORR_KERNEL_DECLS
}  // namespace serial

namespace parallel {
SYNTHCORR_KERNEL_DECLS
}  // namespace parallel

#undef SYNTHCORR_KERNEL_DECLS

using namespace parallel;

inline std::span<const double> column(const Eigen::MatrixXd& x, Eigen::Index j) {
  return {x.col(j).data(), static_cast<std::size_t>(x.rows())};
}

inline std::span<const double> view(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace synthcorr::kernels
