#include <vector>

#include "kernels_detail.hpp"

namespace synthcorr::kernels::serial {

namespace {

template <class Term>
double reduce(std::size_t n, Term term) {
  const std::size_t blocks = detail::block_count(n);
  std::vector<double> partials(blocks);
  for (std::size_t b = 0; b < blocks; ++b) partials[b] = detail::block_partial(b, n, term);
  return detail::combine(partials);
}

}  // namespace

double sum(std::span<const double> x) {
  return reduce(x.size(), [&](std::size_t i) { return x[i]; });
}

double dot(std::span<const double> x, std::span<const double> y) {
  return reduce(x.size(), [&](std::size_t i) { return x[i] * y[i]; });
}

double squared_deviation_sum(std::span<const double> x, double center) {
  return reduce(x.size(), [&](std::size_t i) {
    const double d = x[i] - center;
    return d * d;
  });
}

Eigen::VectorXd column_means(const Eigen::MatrixXd& x) {
  Eigen::VectorXd means(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    means(j) = sum(column(x, j)) / static_cast<double>(x.rows());
  return means;
}

Eigen::VectorXd column_variances(const Eigen::MatrixXd& x, const Eigen::VectorXd& means) {
  Eigen::VectorXd vars(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    vars(j) = squared_deviation_sum(column(x, j), means(j)) / static_cast<double>(x.rows());
  return vars;
}

Eigen::MatrixXd subtract_row(const Eigen::MatrixXd& x, const Eigen::VectorXd& row) {
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    for (Eigen::Index i = 0; i < x.rows(); ++i) out(i, j) = x(i, j) - row(j);
  return out;
}

Eigen::MatrixXd cross_gram(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  Eigen::MatrixXd g(x.cols(), y.cols());
  for (Eigen::Index j = 0; j < y.cols(); ++j)
    for (Eigen::Index i = 0; i < x.cols(); ++i) g(i, j) = dot(column(x, i), column(y, j));
  return g;
}

Eigen::MatrixXd multiply_small(const Eigen::MatrixXd& x, const Eigen::MatrixXd& w) {
  Eigen::MatrixXd out(x.rows(), w.cols());
  for (Eigen::Index k = 0; k < w.cols(); ++k) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      double acc = 0.0;
      for (Eigen::Index j = 0; j < x.cols(); ++j) acc += x(i, j) * w(j, k);
      out(i, k) = acc;
    }
  }
  return out;
}

Eigen::MatrixXd scale_shift(const Eigen::MatrixXd& x, const Eigen::VectorXd& scale,
                            const Eigen::VectorXd& shift) {
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    for (Eigen::Index i = 0; i < x.rows(); ++i) out(i, j) = x(i, j) * scale(j) + shift(j);
  return out;
}

double frobenius_distance(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  // Per-column sums of squares, combined in column order.
  std::vector<double> per_column(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const auto a = column(x, j);
    const auto b = column(y, j);
    per_column[static_cast<std::size_t>(j)] = reduce(a.size(), [&](std::size_t i) {
      const double d = a[i] - b[i];
      return d * d;
    });
  }
  return std::sqrt(detail::combine(per_column));
}

}  // namespace synthcorr::kernels::serial
