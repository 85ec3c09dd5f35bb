#pragma once

// Correlation enforcement by an orthogonal Procrustes fit.
//
// Given an original table O and a synthetic table S of the same shape, the
// nearest matrix (in Frobenius norm) to S whose Pearson correlation equals
// Corr(O) and whose column means and variances equal prescribed targets is
//
//     Ŝ = U · I_Σ · Vᵀ · Ō · N + T
//
// where Ō is O with column means removed, N = diag(σ_i·√n / ‖Ō_i‖) rescales
// each centered column to the target spread, T repeats the target means on
// every row, and U Σ Vᵀ is an SVD of S̄ (Ō N)ᵀ with I_Σ masking the zero
// singular values. The n×n product is never formed: thin QR factors of both
// operands reduce the SVD to an m×m problem.

#include <Eigen/Dense>

#include "synthcorr/stats.hpp"

namespace synthcorr {

/// Per-feature target moments for the enforced output.
struct StatTargets {
  Eigen::VectorXd means;
  Eigen::VectorXd variances;

  static StatTargets from_stats(const FeatureStats& stats) { return {stats.means, stats.variances}; }

  /// Throws InvalidInput on size mismatch or non-finite entries, and
  /// DegenerateTarget when a variance is not strictly positive.
  void validate(Eigen::Index m) const;
};

struct ScalingMatrix {
  Eigen::VectorXd diagonal;
};

/// Target means as a single row; conceptually replicated over all n rows.
struct MeanOffset {
  Eigen::VectorXd row;
};

struct ProcrustesFactors {
  Eigen::MatrixXd u;          // n×m, orthonormal columns
  Eigen::MatrixXd v;          // n×m, orthonormal columns
  Eigen::VectorXd sigma;      // nonincreasing
  Eigen::VectorXd rank_mask;  // 1 where sigma > rel_tol·sigma[0], else 0
  double rel_tol = 0.0;

  Eigen::Index rank() const { return static_cast<Eigen::Index>(rank_mask.sum()); }
};

struct EnforceDiagnostics {
  Eigen::Index rank = 0;
  bool unique = false;
  /// Masked directions that were mapped onto a completing orthonormal frame
  /// so the applied map stays an isometry on the column space of Ō·N. Zero
  /// unless S̄ is rank deficient.
  Eigen::Index completed_directions = 0;
};

struct EnforceResult {
  FeatureMatrix s_hat;
  ProcrustesFactors factors;
  EnforceDiagnostics diagnostics;
};

ScalingMatrix scaling_matrix(const FeatureStats& original, const StatTargets& targets, Eigen::Index n);

MeanOffset mean_offset(const StatTargets& targets);

/// Thin SVD of b·aᵀ (both n×m) without forming the n×n product: thin QR of
/// each operand, then a dense SVD of the m×m product of triangular factors.
ProcrustesFactors thin_svd_outer(const Eigen::MatrixXd& b, const Eigen::MatrixXd& a, double rel_tol);

/// Nearest matrix to `synthetic` with Corr = Corr(original) and the target
/// moments. Output columns carry the synthetic table's names.
EnforceResult enforce_correlations(const FeatureMatrix& original, const FeatureMatrix& synthetic,
                                   const StatTargets& targets, double rel_tol = 1e-12);

double frobenius_gap(const FeatureMatrix& s_hat, const FeatureMatrix& s);

/// Feasible competitor Q·Ō·N + T for a dense n×n orthogonal Q with Q·1 = 1.
/// Intended for optimality checks on small instances.
FeatureMatrix constrained_candidate(const FeatureMatrix& original, const StatTargets& targets,
                                    const Eigen::MatrixXd& q);

}  // namespace synthcorr
