#include "synthcorr/stats.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "synthcorr/error.hpp"
#include "synthcorr/kernels.hpp"

namespace synthcorr {

namespace {

Eigen::MatrixXd triangular_factor(const Eigen::MatrixXd& x) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
  const Eigen::Index m = x.cols();
  return qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
}

void require_nonempty(std::span<const double> f) {
  if (f.empty()) throw Error(ErrorKind::InvalidInput, "empty feature vector");
}

}  // namespace

FeatureMatrix::FeatureMatrix(Eigen::MatrixXd values, std::vector<std::string> names)
    : values_(std::move(values)), names_(std::move(names)) {
  validate();
}

FeatureMatrix::FeatureMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {
  names_ = default_names(values_.cols());
  validate();
}

void FeatureMatrix::validate() const {
  const Eigen::Index n = values_.rows();
  const Eigen::Index m = values_.cols();
  if (m < 1) throw Error(ErrorKind::InvalidInput, "a feature matrix needs at least one column");
  if (n < 2) throw Error(ErrorKind::InvalidInput, "a feature matrix needs at least two rows");
  if (m > n)
    throw Error(ErrorKind::InvalidInput,
                "more features (" + std::to_string(m) + ") than observations (" + std::to_string(n) + ")");
  if (names_.size() != static_cast<std::size_t>(m))
    throw Error(ErrorKind::InvalidInput, "expected " + std::to_string(m) + " feature names, got " +
                                             std::to_string(names_.size()));
  std::unordered_set<std::string> seen;
  for (const auto& name : names_)
    if (!seen.insert(name).second) throw Error(ErrorKind::InvalidInput, "duplicate feature name '" + name + "'");
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto col = column(j);
    const auto bad = std::find_if(col.begin(), col.end(), [](double v) { return !std::isfinite(v); });
    if (bad != col.end())
      throw Error(ErrorKind::InvalidInput, "non-finite value in feature '" + names_[static_cast<std::size_t>(j)] +
                                               "' at row " + std::to_string(bad - col.begin()));
  }
}

std::span<const double> FeatureMatrix::column(Eigen::Index j) const { return kernels::column(values_, j); }

std::vector<std::string> default_names(Eigen::Index m) {
  std::vector<std::string> names;
  for (Eigen::Index j = 0; j < m; ++j) names.push_back("c" + std::to_string(j));
  return names;
}

double column_mean(std::span<const double> f) {
  require_nonempty(f);
  return kernels::sum(f) / static_cast<double>(f.size());
}

double column_variance(std::span<const double> f) {
  require_nonempty(f);
  const double mean = column_mean(f);
  return kernels::squared_deviation_sum(f, mean) / static_cast<double>(f.size());
}

FeatureStats feature_stats(const FeatureMatrix& f) {
  FeatureStats stats;
  stats.means = kernels::column_means(f.values());
  stats.variances = kernels::column_variances(f.values(), stats.means);
  stats.centered_norms = (stats.variances * static_cast<double>(f.rows())).cwiseSqrt();
  return stats;
}

FeatureMatrix center(const FeatureMatrix& f) {
  return FeatureMatrix(kernels::subtract_row(f.values(), kernels::column_means(f.values())), f.names());
}

CorrelationMatrix cosine_similarity(const FeatureMatrix& f) {
  Eigen::MatrixXd gram = kernels::cross_gram(f.values(), f.values());
  const Eigen::Index m = gram.rows();
  Eigen::VectorXd norms(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    norms(j) = std::sqrt(gram(j, j));
    if (!(norms(j) > 0.0)) throw Error(ErrorKind::ZeroNormColumn, "feature '" + f.name(j) + "' has zero norm");
  }
  CorrelationMatrix out{Eigen::MatrixXd(m, m), CorrelationKind::Cosine};
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = 0; i < m; ++i) {
      // Symmetric by construction: both triangles come from the same dot product.
      const double g = i <= j ? gram(i, j) : gram(j, i);
      out.entries(i, j) = i == j ? 1.0 : std::clamp(g / (norms(i) * norms(j)), -1.0, 1.0);
    }
  }
  return out;
}

bool is_constant_column(std::span<const double> column, double centered_norm) {
  double max_abs = 0.0;
  for (double v : column) max_abs = std::max(max_abs, std::abs(v));
  return centered_norm <= 1e-12 * std::sqrt(static_cast<double>(column.size())) * max_abs;
}

CorrelationMatrix pearson_correlation(const FeatureMatrix& f) {
  const FeatureMatrix centered = center(f);
  for (Eigen::Index j = 0; j < f.cols(); ++j) {
    const double norm = std::sqrt(kernels::dot(centered.column(j), centered.column(j)));
    if (is_constant_column(f.column(j), norm))
      throw Error(ErrorKind::ConstantColumn, "feature '" + f.name(j) + "' is constant; its correlation is undefined");
  }
  CorrelationMatrix out = cosine_similarity(centered);
  out.kind = CorrelationKind::Pearson;
  return out;
}

RankReport rank_check(const FeatureMatrix& f, double rel_tol) {
  RankReport report;
  report.singular_values = Eigen::JacobiSVD<Eigen::MatrixXd>(triangular_factor(f.values())).singularValues();
  const double largest = report.singular_values.size() > 0 ? report.singular_values(0) : 0.0;
  report.numerical_rank = 0;
  if (largest > 0.0)
    for (Eigen::Index i = 0; i < report.singular_values.size(); ++i)
      if (report.singular_values(i) > rel_tol * largest) ++report.numerical_rank;
  report.full_rank = report.numerical_rank == f.cols();
  return report;
}

std::vector<Eigen::Index> dependent_columns(const Eigen::MatrixXd& x, double rel_tol) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(triangular_factor(x));
  qr.setThreshold(rel_tol);
  std::vector<Eigen::Index> out;
  const auto& perm = qr.colsPermutation().indices();
  for (Eigen::Index k = qr.rank(); k < x.cols(); ++k) out.push_back(perm(k));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace synthcorr
