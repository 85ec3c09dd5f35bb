#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "synthcorr/stats.hpp"

namespace synthcorr {

enum class SamplerMode { Bootstrap, Permutation };

struct SamplerConfig {
  SamplerMode mode = SamplerMode::Bootstrap;
  Eigen::Index rows = 0;  // 0 means "same as the input"
  std::uint64_t seed = 0;
};

/// Baseline generator that keeps each column's empirical distribution and
/// nothing else. Column j draws from Rng(substream_seed(seed, j)), so the
/// result does not depend on how columns are scheduled across threads.
///
/// Bootstrap draws `rows` values with replacement; permutation shuffles the
/// column (Fisher–Yates, high index first) and requires rows = n.
FeatureMatrix naive_sample(const FeatureMatrix& original, const SamplerConfig& cfg);

/// n×m matrix of independent standard normal draws, column j from
/// substream j of `seed`.
Eigen::MatrixXd standard_normal_matrix(Eigen::Index n, Eigen::Index m, std::uint64_t seed);

/// Gaussian stand-in dataset with population correlation `corr_target`,
/// produced by coloring white noise with the Cholesky factor of the target.
/// The target must be symmetric with unit diagonal and strictly positive
/// definite.
FeatureMatrix make_test_dataset(Eigen::Index n, Eigen::Index m, const Eigen::MatrixXd& corr_target,
                                std::uint64_t seed,
                                std::optional<std::vector<std::string>> names = std::nullopt);

SamplerMode parse_sampler_mode(const std::string& text);
std::string to_string(SamplerMode mode);

}  // namespace synthcorr
