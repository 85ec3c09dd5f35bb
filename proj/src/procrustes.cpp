#include "synthcorr/procrustes.hpp"

#include <cmath>
#include <string>

#include "synthcorr/error.hpp"
#include "synthcorr/kernels.hpp"

namespace synthcorr {

namespace {

struct ThinQR {
  Eigen::MatrixXd q;  // n×m
  Eigen::MatrixXd r;  // m×m upper triangular
};

ThinQR thin_qr(const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.rows();
  const Eigen::Index m = x.cols();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
  ThinQR out;
  out.r = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
  out.q = Eigen::MatrixXd::Identity(n, m);
  out.q.applyOnTheLeft(qr.householderQ());
  return out;
}

std::string join_names(const FeatureMatrix& f, const std::vector<Eigen::Index>& cols) {
  std::string out;
  for (Eigen::Index j : cols) {
    if (!out.empty()) out += ", ";
    out += "'" + f.name(j) + "'";
  }
  return out;
}

// Replaces columns [rank, m) of `frame` with unit vectors orthogonal to the
// all-ones direction and to every earlier column. Candidates are tried in a
// fixed order: the masked column itself, the matching right factor column,
// then the standard basis.
Eigen::Index complete_frame(Eigen::MatrixXd& frame, Eigen::Index rank, const Eigen::MatrixXd& right) {
  const Eigen::Index n = frame.rows();
  const Eigen::Index m = frame.cols();
  const Eigen::VectorXd ones_unit = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));

  auto orthogonalize = [&](Eigen::VectorXd x, Eigen::Index upto) {
    for (int pass = 0; pass < 2; ++pass) {
      x -= kernels::dot(kernels::view(x), kernels::view(ones_unit)) * ones_unit;
      for (Eigen::Index k = 0; k < upto; ++k)
        x -= kernels::dot(kernels::view(x), kernels::column(frame, k)) * frame.col(k);
    }
    return x;
  };

  Eigen::Index completed = 0;
  for (Eigen::Index k = rank; k < m; ++k) {
    Eigen::Index next_basis = 0;
    for (int attempt = 0;; ++attempt) {
      Eigen::VectorXd candidate;
      if (attempt == 0) {
        candidate = frame.col(k);
      } else if (attempt == 1) {
        candidate = right.col(k);
      } else if (next_basis < n) {
        candidate = Eigen::VectorXd::Unit(n, next_basis++);
      } else {
        throw Error(ErrorKind::RankDeficient, "unable to complete the orthogonal frame");
      }
      const double before = candidate.norm();
      if (!(before > 0.0)) continue;
      candidate = orthogonalize(candidate / before, k);
      const double after = candidate.norm();
      if (after > 0.1) {
        frame.col(k) = candidate / after;
        break;
      }
    }
    ++completed;
  }
  return completed;
}

// Ō·N, centering before scaling so large means do not cost precision.
Eigen::MatrixXd centered_scaled(const FeatureMatrix& original, const FeatureStats& stats,
                                const ScalingMatrix& scaling) {
  return kernels::scale_shift(kernels::subtract_row(original.values(), stats.means), scaling.diagonal,
                              Eigen::VectorXd::Zero(original.cols()));
}

}  // namespace

void StatTargets::validate(Eigen::Index m) const {
  if (means.size() != m || variances.size() != m)
    throw Error(ErrorKind::InvalidInput, "targets must supply " + std::to_string(m) + " means and variances, got " +
                                             std::to_string(means.size()) + " and " + std::to_string(variances.size()));
  for (Eigen::Index j = 0; j < m; ++j) {
    if (!std::isfinite(means(j)) || !std::isfinite(variances(j)))
      throw Error(ErrorKind::InvalidInput, "non-finite target for feature " + std::to_string(j));
    if (!(variances(j) > 0.0))
      throw Error(ErrorKind::DegenerateTarget,
                  "target variance for feature " + std::to_string(j) + " must be strictly positive");
  }
}

ScalingMatrix scaling_matrix(const FeatureStats& original, const StatTargets& targets, Eigen::Index n) {
  const Eigen::Index m = original.centered_norms.size();
  targets.validate(m);
  ScalingMatrix out{Eigen::VectorXd(m)};
  for (Eigen::Index j = 0; j < m; ++j) {
    const double norm = original.centered_norms(j);
    if (!(norm > 0.0))
      throw Error(ErrorKind::ConstantColumn, "original feature " + std::to_string(j) + " is constant");
    out.diagonal(j) = std::sqrt(targets.variances(j)) * std::sqrt(static_cast<double>(n)) / norm;
  }
  return out;
}

MeanOffset mean_offset(const StatTargets& targets) { return {targets.means}; }

ProcrustesFactors thin_svd_outer(const Eigen::MatrixXd& b, const Eigen::MatrixXd& a, double rel_tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error(ErrorKind::ShapeMismatch, "operands are " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()) +
                                              " and " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  if (a.cols() > a.rows()) throw Error(ErrorKind::ShapeMismatch, "operands must have at least as many rows as columns");

  ProcrustesFactors out;
  out.rel_tol = rel_tol;
  Eigen::MatrixXd core;
  Eigen::MatrixXd q_b;
  Eigen::MatrixXd q_a;
  {
    ThinQR fb = thin_qr(b);
    ThinQR fa = thin_qr(a);
    core = fb.r * fa.r.transpose();
    q_b = std::move(fb.q);
    q_a = std::move(fa.q);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(core, Eigen::ComputeFullU | Eigen::ComputeFullV);
  out.sigma = svd.singularValues();
  out.u = kernels::multiply_small(q_b, svd.matrixU());
  q_b.resize(0, 0);
  out.v = kernels::multiply_small(q_a, svd.matrixV());

  const Eigen::Index m = out.sigma.size();
  out.rank_mask = Eigen::VectorXd::Zero(m);
  const double largest = m > 0 ? out.sigma(0) : 0.0;
  if (largest > 0.0)
    for (Eigen::Index i = 0; i < m; ++i)
      if (out.sigma(i) > rel_tol * largest) out.rank_mask(i) = 1.0;
  return out;
}

EnforceResult enforce_correlations(const FeatureMatrix& original, const FeatureMatrix& synthetic,
                                   const StatTargets& targets, double rel_tol) {
  const Eigen::Index n = original.rows();
  const Eigen::Index m = original.cols();
  if (synthetic.rows() != n)
    throw Error(ErrorKind::ShapeMismatch, "synthetic table has p=" + std::to_string(synthetic.rows()) +
                                              " rows but the original has n=" + std::to_string(n) +
                                              "; enforcement requires p = n");
  if (synthetic.cols() != m)
    throw Error(ErrorKind::ShapeMismatch, "synthetic table has " + std::to_string(synthetic.cols()) +
                                              " features but the original has " + std::to_string(m));
  targets.validate(m);

  const FeatureStats stats = feature_stats(original);
  for (Eigen::Index j = 0; j < m; ++j)
    if (is_constant_column(original.column(j), stats.centered_norms(j)))
      throw Error(ErrorKind::ConstantColumn, "original feature '" + original.name(j) + "' is constant");

  const RankReport rank = rank_check(original, rel_tol);
  if (!rank.full_rank)
    throw Error(ErrorKind::RankDeficient,
                "original table has numerical rank " + std::to_string(rank.numerical_rank) + " < " +
                    std::to_string(m) + "; dependent features: " +
                    join_names(original, dependent_columns(original.values(), rel_tol)));

  const ScalingMatrix scaling = scaling_matrix(stats, targets, n);
  Eigen::MatrixXd scaled = centered_scaled(original, stats, scaling);
  ProcrustesFactors factors;
  {
    const Eigen::MatrixXd centered_synthetic =
        kernels::subtract_row(synthetic.values(), kernels::column_means(synthetic.values()));
    factors = thin_svd_outer(centered_synthetic, scaled, rel_tol);
  }

  EnforceDiagnostics diagnostics;
  diagnostics.rank = factors.rank();
  diagnostics.unique = diagnostics.rank == n;

  // Vᵀ·(Ō·N) is m×m; the applied map is then U·I_Σ times it.
  const Eigen::MatrixXd projected = kernels::cross_gram(factors.v, scaled);
  scaled.resize(0, 0);
  Eigen::MatrixXd moved;
  if (diagnostics.rank == m) {
    moved = kernels::multiply_small(factors.u, factors.rank_mask.asDiagonal() * projected);
  } else {
    Eigen::MatrixXd frame = factors.u;
    diagnostics.completed_directions = complete_frame(frame, diagnostics.rank, factors.v);
    moved = kernels::multiply_small(frame, projected);
  }

  // The columns of `moved` lie in the zero-mean hyperplane up to rounding;
  // removing the residual mean makes the target means exact.
  const Eigen::VectorXd residual = kernels::column_means(moved);
  moved = kernels::scale_shift(moved, Eigen::VectorXd::Ones(m), mean_offset(targets).row - residual);
  return {FeatureMatrix(std::move(moved), synthetic.names()), std::move(factors), diagnostics};
}

double frobenius_gap(const FeatureMatrix& s_hat, const FeatureMatrix& s) {
  if (s_hat.rows() != s.rows() || s_hat.cols() != s.cols())
    throw Error(ErrorKind::ShapeMismatch, "cannot compare " + std::to_string(s_hat.rows()) + "x" +
                                              std::to_string(s_hat.cols()) + " with " + std::to_string(s.rows()) +
                                              "x" + std::to_string(s.cols()));
  return kernels::frobenius_distance(s_hat.values(), s.values());
}

FeatureMatrix constrained_candidate(const FeatureMatrix& original, const StatTargets& targets,
                                    const Eigen::MatrixXd& q) {
  const Eigen::Index n = original.rows();
  if (q.rows() != n || q.cols() != n)
    throw Error(ErrorKind::InvalidCompetitor, "competitor must be " + std::to_string(n) + "x" + std::to_string(n));
  const double orth_err = (q.transpose() * q - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
  if (!(orth_err <= 1e-10))
    throw Error(ErrorKind::InvalidCompetitor, "competitor is not orthogonal (max |QᵀQ - I| = " +
                                                  std::to_string(orth_err) + ")");
  const double fix_err = (q * Eigen::VectorXd::Ones(n) - Eigen::VectorXd::Ones(n)).cwiseAbs().maxCoeff();
  if (!(fix_err <= 1e-10))
    throw Error(ErrorKind::InvalidCompetitor, "competitor does not fix the all-ones direction");

  const FeatureStats stats = feature_stats(original);
  const ScalingMatrix scaling = scaling_matrix(stats, targets, n);
  const Eigen::MatrixXd scaled = centered_scaled(original, stats, scaling);
  Eigen::MatrixXd out = q * scaled;
  out.rowwise() += mean_offset(targets).row.transpose();
  return FeatureMatrix(std::move(out), original.names());
}

}  // namespace synthcorr
