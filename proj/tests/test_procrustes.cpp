#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "synthcorr/error.hpp"
#include "synthcorr/procrustes.hpp"
#include "synthcorr/sampler.hpp"

using namespace synthcorr;
using oracle::gaussian_matrix;
using oracle::max_abs_diff;

namespace {

template <class F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected synthcorr::Error";
  return ErrorKind::IoError;
}

Eigen::VectorXd column_means(const Eigen::MatrixXd& x) { return x.colwise().mean(); }

Eigen::VectorXd column_variances(const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd c = x.rowwise() - x.colwise().mean();
  return c.colwise().squaredNorm() / static_cast<double>(x.rows());
}

void expect_constraints(const FeatureMatrix& original, const FeatureMatrix& s_hat, const StatTargets& t) {
  EXPECT_LT(max_abs_diff(pearson_correlation(s_hat).entries, pearson_correlation(original).entries), 1e-8);
  const Eigen::VectorXd means = column_means(s_hat.values());
  const Eigen::VectorXd vars = column_variances(s_hat.values());
  for (Eigen::Index j = 0; j < original.cols(); ++j) {
    EXPECT_LE(std::abs(means(j) - t.means(j)), 1e-10 * (1.0 + std::abs(t.means(j))));
    EXPECT_LE(std::abs(vars(j) - t.variances(j)), 1e-8 * t.variances(j));
  }
}

// ---- scaling_matrix -------------------------------------------------------

TEST(ScalingMatrix, SelfTargetsGiveIdentity) {
  Rng rng(1);
  const FeatureMatrix o(gaussian_matrix(20, 3, rng) * 5.0);
  const FeatureStats stats = feature_stats(o);
  const auto n = scaling_matrix(stats, StatTargets::from_stats(stats), o.rows());
  EXPECT_LT((n.diagonal.array() - 1.0).abs().maxCoeff(), 1e-14);
}

TEST(ScalingMatrix, RatioOfStandardDeviations) {
  Eigen::MatrixXd x(4, 1);
  x << -2, 2, -2, 2;  // variance 4
  const FeatureStats stats = feature_stats(FeatureMatrix(x));
  const StatTargets t{Eigen::VectorXd::Constant(1, 0.0), Eigen::VectorXd::Constant(1, 1.0)};
  EXPECT_NEAR(scaling_matrix(stats, t, 4).diagonal(0), 0.5, 1e-15);
}

TEST(ScalingMatrix, MatchesDirectFormula) {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const FeatureMatrix o(gaussian_matrix(40, 4, rng) * 3.0);
    const FeatureStats stats = feature_stats(o);
    StatTargets t{Eigen::VectorXd::Zero(4), Eigen::VectorXd(4)};
    for (Eigen::Index j = 0; j < 4; ++j) t.variances(j) = std::exp(2.0 * rng.normal());
    const auto n = scaling_matrix(stats, t, 40);
    for (Eigen::Index j = 0; j < 4; ++j) {
      const long double norm = oracle::dense_centering(o.values()).col(j).norm();
      const long double expected = std::sqrt(static_cast<long double>(t.variances(j))) * std::sqrt(40.0L) / norm;
      EXPECT_NEAR(n.diagonal(j) / static_cast<double>(expected), 1.0, 1e-13);
    }
  }
}

TEST(ScalingMatrix, Errors) {
  FeatureStats stats{Eigen::VectorXd::Zero(2), Eigen::VectorXd::Ones(2), Eigen::VectorXd(2)};
  stats.centered_norms << 1.0, 0.0;
  const StatTargets ok{Eigen::VectorXd::Zero(2), Eigen::VectorXd::Ones(2)};
  EXPECT_EQ(kind_of([&] { scaling_matrix(stats, ok, 5); }), ErrorKind::ConstantColumn);
  stats.centered_norms << 1.0, 1.0;
  const StatTargets flat{Eigen::VectorXd::Zero(2), Eigen::Vector2d(1.0, 0.0)};
  EXPECT_EQ(kind_of([&] { scaling_matrix(stats, flat, 5); }), ErrorKind::DegenerateTarget);
  const StatTargets shortish{Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1)};
  EXPECT_EQ(kind_of([&] { scaling_matrix(stats, shortish, 5); }), ErrorKind::InvalidInput);
}

// ---- thin_svd_outer -------------------------------------------------------

TEST(ThinSvdOuter, OrthonormalFrameAgainstItself) {
  Rng rng(3);
  const Eigen::MatrixXd a = Eigen::HouseholderQR<Eigen::MatrixXd>(gaussian_matrix(30, 4, rng)).householderQ() *
                            Eigen::MatrixXd::Identity(30, 4);
  const auto f = thin_svd_outer(a, a, 1e-12);
  EXPECT_LT((f.sigma.array() - 1.0).abs().maxCoeff(), 1e-12);
  EXPECT_EQ(f.rank(), 4);
  EXPECT_LT(max_abs_diff(f.u * f.v.transpose() * a, a), 1e-12);
}

TEST(ThinSvdOuter, RankDropShowsInMask) {
  Rng rng(4);
  Eigen::MatrixXd b = gaussian_matrix(25, 3, rng);
  b.col(1).setZero();
  const Eigen::MatrixXd a = gaussian_matrix(25, 3, rng);
  const auto f = thin_svd_outer(b, a, 1e-12);
  EXPECT_LE(f.sigma(2), 1e-12 * f.sigma(0));
  EXPECT_EQ(f.rank_mask(2), 0.0);
  EXPECT_EQ(f.rank_mask(0), 1.0);
  EXPECT_EQ(f.rank(), 2);
}

TEST(ThinSvdOuter, MatchesDenseSvdOfExplicitProduct) {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd b = gaussian_matrix(50, 3, rng);
    const Eigen::MatrixXd a = gaussian_matrix(50, 3, rng);
    const auto f = thin_svd_outer(b, a, 1e-12);
    const Eigen::MatrixXd product = b * a.transpose();
    const auto dense = oracle::jacobi_svd(product);
    for (Eigen::Index k = 0; k < 3; ++k) EXPECT_NEAR(f.sigma(k), dense.sigma(k), 1e-10);
    for (Eigen::Index k = 3; k < 50; ++k) EXPECT_LE(dense.sigma(k), 1e-10);
    EXPECT_LT(max_abs_diff(f.u * f.sigma.asDiagonal() * f.v.transpose(), product), 1e-10);
    EXPECT_LT(max_abs_diff(f.u.transpose() * f.u, Eigen::MatrixXd::Identity(3, 3)), 1e-10);
    EXPECT_LT(max_abs_diff(f.v.transpose() * f.v, Eigen::MatrixXd::Identity(3, 3)), 1e-10);
    for (Eigen::Index k = 1; k < 3; ++k) EXPECT_LE(f.sigma(k), f.sigma(k - 1));
  }
}

TEST(ThinSvdOuter, ShapeMismatch) {
  EXPECT_EQ(kind_of([] { thin_svd_outer(Eigen::MatrixXd::Ones(5, 2), Eigen::MatrixXd::Ones(4, 2), 1e-12); }),
            ErrorKind::ShapeMismatch);
  EXPECT_EQ(kind_of([] { thin_svd_outer(Eigen::MatrixXd::Ones(5, 2), Eigen::MatrixXd::Ones(5, 3), 1e-12); }),
            ErrorKind::ShapeMismatch);
}

// ---- enforce_correlations -------------------------------------------------

TEST(EnforceCorrelations, OriginalIsAFixedPoint) {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    auto inst = oracle::random_instance(30 + trial, 4, rng);
    const auto targets = StatTargets::from_stats(feature_stats(inst.original));
    const auto r = enforce_correlations(inst.original, inst.original, targets);
    EXPECT_LT(max_abs_diff(r.s_hat.values(), inst.original.values()), 1e-9);
    EXPECT_FALSE(r.diagnostics.unique);
    EXPECT_EQ(r.diagnostics.rank, 4);
  }
}

TEST(EnforceCorrelations, FrozenFourByTwoInstance) {
  Eigen::MatrixXd o(4, 2);
  o << 1, 2, 2, 1, 3, 5, 4, 4;
  const Eigen::MatrixXd s = standard_normal_matrix(4, 2, 7);
  // The draw itself is part of the frozen instance.
  EXPECT_DOUBLE_EQ(s(0, 0), 1.0142337674277124);
  EXPECT_DOUBLE_EQ(s(3, 1), -0.55622561017665184);
  const FeatureMatrix original(o);
  const auto targets = StatTargets::from_stats(feature_stats(original));
  const auto r = enforce_correlations(original, FeatureMatrix(s), targets);
  // Dense evaluation (explicit 4×4 product, full SVD) computed offline.
  Eigen::MatrixXd expected(4, 2);
  expected << 3.9462767204354092, 4.540204470679978,  //
      3.222368368222637, 3.821344496663618,           //
      1.5478834090876548, 0.37618936922082646,        //
      1.283471502254298, 3.262261663435577;
  EXPECT_LT(max_abs_diff(r.s_hat.values(), expected), 1e-10);
  EXPECT_LT(max_abs_diff(r.s_hat.values(),
                         oracle::dense_enforce_oracle(o, s, targets.means, targets.variances, 1e-12)),
            1e-10);
}

TEST(EnforceCorrelations, RestoresCorrelationDestroyedBySampler) {
  Eigen::MatrixXd corr(3, 3);
  corr << 1, 0.8, -0.4, 0.8, 1, -0.1, -0.4, -0.1, 1;
  const FeatureMatrix o = make_test_dataset(2000, 3, corr, 17);
  const FeatureMatrix s = naive_sample(o, {SamplerMode::Bootstrap, 0, 18});
  EXPECT_GT(max_abs_diff(pearson_correlation(s).entries, pearson_correlation(o).entries), 0.5);
  const auto targets = StatTargets::from_stats(feature_stats(s));
  const auto r = enforce_correlations(o, s, targets);
  expect_constraints(o, r.s_hat, targets);
}

TEST(EnforceCorrelations, MatchesDenseOracle) {
  Rng rng(7);
  for (int trial = 0; trial < 25; ++trial) {
    const Eigen::Index m = 2 + static_cast<Eigen::Index>(rng.below(4));
    const Eigen::Index n = m + 3 + static_cast<Eigen::Index>(rng.below(30));
    const auto inst = oracle::random_instance(n, m, rng);
    const auto r = enforce_correlations(inst.original, inst.synthetic, inst.targets);
    const auto dense = oracle::dense_enforce_oracle(inst.original.values(), inst.synthetic.values(),
                                                    inst.targets.means, inst.targets.variances, 1e-12);
    EXPECT_LT(max_abs_diff(r.s_hat.values(), dense), 1e-9) << "n=" << n << " m=" << m;
  }
}

TEST(EnforceCorrelations, Errors) {
  Rng rng(8);
  const FeatureMatrix o(gaussian_matrix(10, 2, rng));
  const FeatureMatrix s_short(gaussian_matrix(9, 2, rng));
  const auto t = StatTargets::from_stats(feature_stats(o));
  try {
    enforce_correlations(o, s_short, t);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ShapeMismatch);
    EXPECT_NE(std::string(e.what()).find("p=9"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("n=10"), std::string::npos);
  }
  EXPECT_EQ(kind_of([&] { enforce_correlations(o, FeatureMatrix(gaussian_matrix(10, 3, rng)), t); }),
            ErrorKind::ShapeMismatch);

  Eigen::MatrixXd dup = gaussian_matrix(10, 3, rng);
  dup.col(2) = 2.0 * dup.col(0) - dup.col(1);
  const FeatureMatrix deficient(dup, {"i", "v", "p"});
  try {
    enforce_correlations(deficient, FeatureMatrix(gaussian_matrix(10, 3, rng)),
                         StatTargets::from_stats(feature_stats(deficient)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::RankDeficient);
    EXPECT_NE(std::string(e.what()).find("dependent features"), std::string::npos);
  }

  Eigen::MatrixXd flat = gaussian_matrix(10, 2, rng);
  flat.col(1).setConstant(3.0);
  EXPECT_EQ(kind_of([&] { enforce_correlations(FeatureMatrix(flat), FeatureMatrix(gaussian_matrix(10, 2, rng)), t); }),
            ErrorKind::ConstantColumn);

  const StatTargets degenerate{t.means, Eigen::Vector2d(1.0, 0.0)};
  EXPECT_EQ(kind_of([&] { enforce_correlations(o, o, degenerate); }), ErrorKind::DegenerateTarget);
}

// A synthetic table with a constant or duplicated feature makes S̄ rank
// deficient; masked directions are completed so constraints still hold.
TEST(EnforceCorrelations, RankDeficientSyntheticStillFeasibleAndOptimal) {
  Rng rng(9);
  for (int variant = 0; variant < 2; ++variant) {
    auto inst = oracle::random_instance(12, 3, rng);
    Eigen::MatrixXd s = inst.synthetic.values();
    if (variant == 0) {
      s.col(1).setConstant(4.0);
    } else {
      s.col(2) = s.col(0);
    }
    const FeatureMatrix synthetic(s);
    const auto r = enforce_correlations(inst.original, synthetic, inst.targets);
    EXPECT_EQ(r.diagnostics.rank, 2);
    EXPECT_EQ(r.diagnostics.completed_directions, 1);
    expect_constraints(inst.original, r.s_hat, inst.targets);
    const double best = frobenius_gap(r.s_hat, synthetic);
    for (int k = 0; k < 200; ++k) {
      const auto q = oracle::random_feasible_orthogonal(12, rng);
      EXPECT_GE(frobenius_gap(constrained_candidate(inst.original, inst.targets, q), synthetic), best - 1e-9);
    }
  }
}

TEST(EnforceProperties, RandomInstances) {
  Rng rng(10);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index m = 2 + static_cast<Eigen::Index>(rng.below(7));
    const Eigen::Index n = 10 + static_cast<Eigen::Index>(rng.below(191));
    const auto inst = oracle::random_instance(n, m, rng);
    const auto r = enforce_correlations(inst.original, inst.synthetic, inst.targets);
    expect_constraints(inst.original, r.s_hat, inst.targets);

    // Centering preservation.
    const Eigen::MatrixXd moved = r.s_hat.values().rowwise() - inst.targets.means.transpose();
    const Eigen::VectorXd spread = inst.targets.variances.cwiseSqrt();
    for (Eigen::Index j = 0; j < m; ++j) EXPECT_LE(std::abs(moved.col(j).mean()), 1e-10 * (1.0 + spread(j)));

    // Idempotence: the output already satisfies every constraint.
    const auto again = enforce_correlations(inst.original, r.s_hat, inst.targets);
    EXPECT_LT(max_abs_diff(again.s_hat.values(), r.s_hat.values()), 1e-8);

    // Thin factors have orthonormal columns.
    EXPECT_LT(max_abs_diff(r.factors.u.transpose() * r.factors.u, Eigen::MatrixXd::Identity(m, m)), 1e-10);
    EXPECT_LT(max_abs_diff(r.factors.v.transpose() * r.factors.v, Eigen::MatrixXd::Identity(m, m)), 1e-10);
  }
}

TEST(EnforceProperties, AppliedMapIsPartialIsometry) {
  Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const auto inst = oracle::random_instance(15 + trial, 3, rng);
    Eigen::MatrixXd s = inst.synthetic.values();
    if (trial % 2 == 1) s.col(1) = s.col(0);
    const auto r = enforce_correlations(inst.original, FeatureMatrix(s), inst.targets);
    const Eigen::MatrixXd map = r.factors.u * r.factors.rank_mask.asDiagonal() * r.factors.v.transpose();
    const auto sv = oracle::jacobi_svd(map).sigma;
    for (Eigen::Index k = 0; k < sv.size(); ++k)
      EXPECT_LT(std::min(std::abs(sv(k)), std::abs(sv(k) - 1.0)), 1e-10);
  }
}

TEST(FeasibleSet, OrthogonalMapsFixingOnesKeepCorrelation) {
  Rng rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    const auto inst = oracle::random_instance(14, 3, rng);
    const Eigen::MatrixXd m = oracle::random_feasible_orthogonal(14, rng);
    Eigen::VectorXd scale(3);
    for (Eigen::Index j = 0; j < 3; ++j) scale(j) = std::exp(rng.normal());
    Eigen::MatrixXd x = m * oracle::dense_centering(inst.original.values()) * scale.asDiagonal();
    x.rowwise() += inst.targets.means.transpose();
    EXPECT_LT(max_abs_diff(pearson_correlation(FeatureMatrix(x)).entries,
                           pearson_correlation(inst.original).entries),
              1e-8);
  }
}

// ---- frobenius_gap --------------------------------------------------------

TEST(FrobeniusGap, Cases) {
  Rng rng(13);
  const FeatureMatrix a(gaussian_matrix(6, 2, rng));
  EXPECT_EQ(frobenius_gap(a, a), 0.0);
  Eigen::MatrixXd b = a.values();
  b(3, 1) += 3.0;
  EXPECT_NEAR(frobenius_gap(FeatureMatrix(b), a), 3.0, 1e-14);
  const FeatureMatrix c(gaussian_matrix(6, 2, rng));
  double acc = 0.0;
  for (Eigen::Index i = 0; i < 6; ++i)
    for (Eigen::Index j = 0; j < 2; ++j) acc += std::pow(a.values()(i, j) - c.values()(i, j), 2);
  EXPECT_NEAR(frobenius_gap(a, c) / std::sqrt(acc), 1.0, 1e-12);
  EXPECT_EQ(kind_of([&] { frobenius_gap(a, FeatureMatrix(gaussian_matrix(7, 2, rng))); }), ErrorKind::ShapeMismatch);
}

// ---- constrained_candidate ------------------------------------------------

TEST(ConstrainedCandidate, IdentityAndReflection) {
  Rng rng(14);
  const auto inst = oracle::random_instance(12, 3, rng);
  const auto id = constrained_candidate(inst.original, inst.targets, Eigen::MatrixXd::Identity(12, 12));
  const FeatureStats stats = feature_stats(inst.original);
  Eigen::MatrixXd expected =
      oracle::dense_centering(inst.original.values()) * scaling_matrix(stats, inst.targets, 12).diagonal.asDiagonal();
  expected.rowwise() += inst.targets.means.transpose();
  EXPECT_LT(max_abs_diff(id.values(), expected), 1e-10);
  expect_constraints(inst.original, id, inst.targets);

  Eigen::VectorXd w = gaussian_matrix(12, 1, rng);
  w.array() -= w.mean();
  w.normalize();
  const Eigen::MatrixXd reflect = Eigen::MatrixXd::Identity(12, 12) - 2.0 * w * w.transpose();
  expect_constraints(inst.original, constrained_candidate(inst.original, inst.targets, reflect), inst.targets);
}

TEST(ConstrainedCandidate, RejectsInfeasibleCompetitors) {
  Rng rng(15);
  const auto inst = oracle::random_instance(8, 2, rng);
  EXPECT_EQ(kind_of([&] { constrained_candidate(inst.original, inst.targets, 2.0 * Eigen::MatrixXd::Identity(8, 8)); }),
            ErrorKind::InvalidCompetitor);
  Eigen::MatrixXd swap = Eigen::MatrixXd::Identity(8, 8);
  swap(0, 0) = -1.0;  // orthogonal but moves the all-ones vector
  EXPECT_EQ(kind_of([&] { constrained_candidate(inst.original, inst.targets, swap); }), ErrorKind::InvalidCompetitor);
  EXPECT_EQ(kind_of([&] { constrained_candidate(inst.original, inst.targets, Eigen::MatrixXd::Identity(7, 7)); }),
            ErrorKind::InvalidCompetitor);
}

TEST(ConstrainedCandidate, NoCompetitorBeatsTheEnforcedTable) {
  Rng rng(16);
  const auto inst = oracle::random_instance(12, 3, rng);
  const auto r = enforce_correlations(inst.original, inst.synthetic, inst.targets);
  const double best = frobenius_gap(r.s_hat, inst.synthetic);
  for (int k = 0; k < 100; ++k) {
    const auto q = oracle::random_feasible_orthogonal(12, rng);
    const auto candidate = constrained_candidate(inst.original, inst.targets, q);
    EXPECT_GE(frobenius_gap(candidate, inst.synthetic), best - 1e-9);
  }
  // Small rotations of the optimum are feasible and never closer either.
  const Eigen::MatrixXd moved = r.s_hat.values().rowwise() - inst.targets.means.transpose();
  for (int k = 0; k < 100; ++k) {
    Eigen::MatrixXd x = oracle::small_feasible_rotation(12, 1e-3 * (1 + k % 10), rng) * moved;
    x.rowwise() += inst.targets.means.transpose();
    EXPECT_GE(frobenius_gap(FeatureMatrix(x), inst.synthetic), best - 1e-9);
  }
}

}  // namespace
