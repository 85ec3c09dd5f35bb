#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "synthcorr/stats.hpp"

namespace synthcorr {

struct EcdfPoint {
  double value = 0.0;
  double original = 0.0;   // F_original(value)
  double candidate = 0.0;  // F_candidate(value)
};

struct FeatureFidelity {
  std::string name;
  double mean_original = 0.0;
  double mean_candidate = 0.0;
  double var_original = 0.0;
  double var_candidate = 0.0;
  double ks_distance = 0.0;
  std::vector<EcdfPoint> ecdf_grid;
};

struct FidelityReport {
  std::vector<std::string> names;
  CorrelationMatrix corr_original;
  CorrelationMatrix corr_candidate;
  double corr_max_abs_error = 0.0;
  double corr_frobenius_error = 0.0;
  std::vector<FeatureFidelity> features;
  std::optional<double> frobenius_gap_to_start;
};

/// Two-sample Kolmogorov–Smirnov statistic sup_x |F_a(x) − F_b(x)|.
double ks_distance(std::span<const double> a, std::span<const double> b);

/// Same statistic for inputs already sorted ascending.
double ks_distance_sorted(std::span<const double> a, std::span<const double> b);

/// Compares `candidate` against `original` feature by feature. The ECDF grid
/// is taken at `ecdf_points` evenly spaced ranks of the pooled sample.
/// `start`, when given, is the table the candidate was derived from and
/// must have the candidate's shape.
FidelityReport build_report(const FeatureMatrix& original, const FeatureMatrix& candidate,
                            const FeatureMatrix* start = nullptr, int ecdf_points = 256);

nlohmann::json to_json(const FidelityReport& report);
nlohmann::json to_json(const CorrelationMatrix& corr, const std::vector<std::string>& names);

void write_report_json(const FidelityReport& report, const std::filesystem::path& path);

/// One `<prefix><feature>.csv` per feature with columns value,F_original,F_candidate.
void write_ecdf_csvs(const FidelityReport& report, const std::filesystem::path& dir, const std::string& prefix);

}  // namespace synthcorr
