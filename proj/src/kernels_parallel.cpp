#include <vector>

#include "kernels_detail.hpp"

namespace synthcorr::kernels::parallel {

namespace {

// Reduces `items` independent sums of length n at once. Every (item, block)
// pair is one unit of parallel work; partials are combined per item in
// block order afterwards.
template <class Term>
std::vector<double> reduce_many(std::size_t items, std::size_t n, Term term) {
  const std::size_t blocks = detail::block_count(n);
  std::vector<double> partials(items * blocks);
  const auto units = static_cast<std::ptrdiff_t>(items * blocks);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t u = 0; u < units; ++u) {
    const auto item = static_cast<std::size_t>(u) / blocks;
    const auto b = static_cast<std::size_t>(u) % blocks;
    partials[static_cast<std::size_t>(u)] =
        detail::block_partial(b, n, [&](std::size_t i) { return term(item, i); });
  }
  std::vector<double> out(items);
  for (std::size_t item = 0; item < items; ++item)
    out[item] = detail::combine(std::span<const double>(partials).subspan(item * blocks, blocks));
  return out;
}

template <class Term>
double reduce(std::size_t n, Term term) {
  return reduce_many(1, n, [&](std::size_t, std::size_t i) { return term(i); })[0];
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
  const auto n = static_cast<std::size_t>(x.rows());
  const auto sums = reduce_many(static_cast<std::size_t>(x.cols()), n,
                                [&](std::size_t j, std::size_t i) { return x.data()[j * n + i]; });
  Eigen::VectorXd means(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    means(j) = sums[static_cast<std::size_t>(j)] / static_cast<double>(n);
  return means;
}

Eigen::VectorXd column_variances(const Eigen::MatrixXd& x, const Eigen::VectorXd& means) {
  const auto n = static_cast<std::size_t>(x.rows());
  const auto sums = reduce_many(static_cast<std::size_t>(x.cols()), n, [&](std::size_t j, std::size_t i) {
    const double d = x.data()[j * n + i] - means(static_cast<Eigen::Index>(j));
    return d * d;
  });
  Eigen::VectorXd vars(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    vars(j) = sums[static_cast<std::size_t>(j)] / static_cast<double>(n);
  return vars;
}

Eigen::MatrixXd subtract_row(const Eigen::MatrixXd& x, const Eigen::VectorXd& row) {
  Eigen::MatrixXd out(x.rows(), x.cols());
  const Eigen::Index n = x.rows();
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) out(i, j) = x(i, j) - row(j);
  return out;
}

Eigen::MatrixXd cross_gram(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  const auto n = static_cast<std::size_t>(x.rows());
  const auto p = static_cast<std::size_t>(x.cols());
  const auto q = static_cast<std::size_t>(y.cols());
  const auto dots = reduce_many(p * q, n, [&](std::size_t item, std::size_t i) {
    const std::size_t a = item % p;
    const std::size_t b = item / p;
    return x.data()[a * n + i] * y.data()[b * n + i];
  });
  return Eigen::Map<const Eigen::MatrixXd>(dots.data(), x.cols(), y.cols());
}

Eigen::MatrixXd multiply_small(const Eigen::MatrixXd& x, const Eigen::MatrixXd& w) {
  Eigen::MatrixXd out(x.rows(), w.cols());
  const Eigen::Index n = x.rows();
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < w.cols(); ++k) {
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
  const Eigen::Index n = x.rows();
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) out(i, j) = x(i, j) * scale(j) + shift(j);
  return out;
}

double frobenius_distance(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  const auto n = static_cast<std::size_t>(x.rows());
  const auto per_column = reduce_many(static_cast<std::size_t>(x.cols()), n, [&](std::size_t j, std::size_t i) {
    const double d = x.data()[j * n + i] - y.data()[j * n + i];
    return d * d;
  });
  return std::sqrt(detail::combine(per_column));
}

}  // namespace synthcorr::kernels::parallel
