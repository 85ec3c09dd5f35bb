#include "synthcorr/sampler.hpp"

#include <cmath>
#include <utility>

#include "synthcorr/error.hpp"
#include "synthcorr/kernels.hpp"
#include "synthcorr/rng.hpp"

namespace synthcorr {

FeatureMatrix naive_sample(const FeatureMatrix& original, const SamplerConfig& cfg) {
  const Eigen::Index n = original.rows();
  const Eigen::Index m = original.cols();
  const Eigen::Index rows = cfg.rows == 0 ? n : cfg.rows;
  if (rows < 2) throw Error(ErrorKind::InvalidConfig, "sampler needs at least two output rows");
  if (cfg.mode == SamplerMode::Permutation && rows != n)
    throw Error(ErrorKind::InvalidConfig, "permutation mode requires rows = n (" + std::to_string(n) + "), got " +
                                              std::to_string(rows));
  if (rows < m)
    throw Error(ErrorKind::InvalidConfig, "sampler needs at least as many rows as features");

  Eigen::MatrixXd out(rows, m);
#pragma omp parallel for schedule(static)
  for (Eigen::Index j = 0; j < m; ++j) {
    Rng rng(substream_seed(cfg.seed, static_cast<std::uint64_t>(j)));
    const auto source = original.column(j);
    auto target = out.col(j);
    if (cfg.mode == SamplerMode::Bootstrap) {
      for (Eigen::Index i = 0; i < rows; ++i) target(i) = source[rng.below(static_cast<std::uint64_t>(n))];
    } else {
      for (Eigen::Index i = 0; i < n; ++i) target(i) = source[static_cast<std::size_t>(i)];
      for (Eigen::Index i = n - 1; i > 0; --i) {
        const auto k = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(i) + 1));
        std::swap(target(i), target(k));
      }
    }
  }
  return FeatureMatrix(std::move(out), original.names());
}

Eigen::MatrixXd standard_normal_matrix(Eigen::Index n, Eigen::Index m, std::uint64_t seed) {
  Eigen::MatrixXd z(n, m);
#pragma omp parallel for schedule(static)
  for (Eigen::Index j = 0; j < m; ++j) {
    Rng rng(substream_seed(seed, static_cast<std::uint64_t>(j)));
    for (Eigen::Index i = 0; i < n; ++i) z(i, j) = rng.normal();
  }
  return z;
}

FeatureMatrix make_test_dataset(Eigen::Index n, Eigen::Index m, const Eigen::MatrixXd& corr_target,
                                std::uint64_t seed, std::optional<std::vector<std::string>> names) {
  if (m < 1 || n <= m) throw Error(ErrorKind::InvalidInput, "test dataset needs n > m >= 1");
  if (corr_target.rows() != m || corr_target.cols() != m)
    throw Error(ErrorKind::InvalidCorrelation, "target correlation must be " + std::to_string(m) + "x" +
                                                   std::to_string(m));
  if (!corr_target.allFinite()) throw Error(ErrorKind::InvalidCorrelation, "target has non-finite entries");
  for (Eigen::Index i = 0; i < m; ++i) {
    if (std::abs(corr_target(i, i) - 1.0) > 1e-12)
      throw Error(ErrorKind::InvalidCorrelation, "target diagonal must be 1");
    for (Eigen::Index j = 0; j < i; ++j)
      if (std::abs(corr_target(i, j) - corr_target(j, i)) > 1e-12)
        throw Error(ErrorKind::InvalidCorrelation, "target must be symmetric");
  }
  const Eigen::MatrixXd sym = 0.5 * (corr_target + corr_target.transpose());
  const double smallest = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym, Eigen::EigenvaluesOnly).eigenvalues()(0);
  if (!(smallest > 1e-10))
    throw Error(ErrorKind::InvalidCorrelation,
                "target must be positive definite (smallest eigenvalue " + std::to_string(smallest) + ")");
  const Eigen::MatrixXd lower = Eigen::LLT<Eigen::MatrixXd>(sym).matrixL();

  Eigen::MatrixXd colored = kernels::multiply_small(standard_normal_matrix(n, m, seed), lower.transpose());
  if (names) return FeatureMatrix(std::move(colored), std::move(*names));
  return FeatureMatrix(std::move(colored));
}

SamplerMode parse_sampler_mode(const std::string& text) {
  if (text == "bootstrap") return SamplerMode::Bootstrap;
  if (text == "permutation") return SamplerMode::Permutation;
  throw Error(ErrorKind::InvalidConfig, "unknown sampler mode '" + text + "' (expected bootstrap or permutation)");
}

std::string to_string(SamplerMode mode) {
  return mode == SamplerMode::Bootstrap ? "bootstrap" : "permutation";
}

}  // namespace synthcorr
