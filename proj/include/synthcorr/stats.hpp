#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace synthcorr {

/// Dense n×m table of real-valued features, one named column per feature.
///
/// Construction validates m ≥ 1, n ≥ 2, m ≤ n, finite entries and unique
/// names, so every FeatureMatrix in circulation satisfies them.
class FeatureMatrix {
 public:
  FeatureMatrix(Eigen::MatrixXd values, std::vector<std::string> names);

  /// Names default to c0, c1, ...
  explicit FeatureMatrix(Eigen::MatrixXd values);

  Eigen::Index rows() const { return values_.rows(); }
  Eigen::Index cols() const { return values_.cols(); }
  const Eigen::MatrixXd& values() const { return values_; }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(Eigen::Index j) const { return names_[static_cast<std::size_t>(j)]; }
  std::span<const double> column(Eigen::Index j) const;

  /// Moves the storage out, leaving this matrix empty.
  Eigen::MatrixXd release() && { return std::move(values_); }

 private:
  void validate() const;

  Eigen::MatrixXd values_;
  std::vector<std::string> names_;
};

std::vector<std::string> default_names(Eigen::Index m);

struct FeatureStats {
  Eigen::VectorXd means;
  Eigen::VectorXd variances;       // population (divide by n)
  Eigen::VectorXd centered_norms;  // ‖column − mean‖₂
};

enum class CorrelationKind { Pearson, Cosine };

struct CorrelationMatrix {
  Eigen::MatrixXd entries;
  CorrelationKind kind = CorrelationKind::Pearson;
};

struct RankReport {
  bool full_rank = false;
  Eigen::Index numerical_rank = 0;
  Eigen::VectorXd singular_values;  // nonincreasing
};

double column_mean(std::span<const double> f);
double column_variance(std::span<const double> f);

FeatureStats feature_stats(const FeatureMatrix& f);

FeatureMatrix center(const FeatureMatrix& f);

CorrelationMatrix cosine_similarity(const FeatureMatrix& f);

/// Throws ConstantColumn when a column has (numerically) zero spread.
CorrelationMatrix pearson_correlation(const FeatureMatrix& f);

/// Singular values are those of the n×m matrix itself, computed from the
/// m×m triangular factor of a thin QR so cost stays O(n·m²).
RankReport rank_check(const FeatureMatrix& f, double rel_tol = 1e-10);

/// True when a column's centered norm is at or below the constant-column
/// threshold 1e-12·sqrt(n)·max|entry|.
bool is_constant_column(std::span<const double> column, double centered_norm);

/// Columns left out of the numerical column space by column-pivoted QR of
/// the triangular factor, in ascending order. Empty for full-rank input.
std::vector<Eigen::Index> dependent_columns(const Eigen::MatrixXd& x, double rel_tol);

}  // namespace synthcorr
