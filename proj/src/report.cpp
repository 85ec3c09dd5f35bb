#include "synthcorr/report.hpp"

#include <algorithm>
#include <cmath>

#include "synthcorr/dataio.hpp"
#include "synthcorr/error.hpp"
#include "synthcorr/procrustes.hpp"

namespace synthcorr {

namespace {

std::vector<double> sorted_copy(std::span<const double> x) {
  std::vector<double> out(x.begin(), x.end());
  std::sort(out.begin(), out.end());
  return out;
}

double ecdf(const std::vector<double>& sorted, double x) {
  const auto count = std::upper_bound(sorted.begin(), sorted.end(), x) - sorted.begin();
  return static_cast<double>(count) / static_cast<double>(sorted.size());
}

std::vector<EcdfPoint> ecdf_grid(const std::vector<double>& a, const std::vector<double>& b, int points) {
  std::vector<double> pooled(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), pooled.begin());
  const std::size_t count = std::min(pooled.size(), static_cast<std::size_t>(points));
  std::vector<EcdfPoint> grid;
  grid.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t rank = count == 1 ? 0 : (k * (pooled.size() - 1)) / (count - 1);
    const double x = pooled[rank];
    grid.push_back({x, ecdf(a, x), ecdf(b, x)});
  }
  return grid;
}

}  // namespace

double ks_distance_sorted(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw Error(ErrorKind::InvalidInput, "KS distance needs two nonempty samples");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double best = 0.0;
  while (i < a.size() && j < b.size()) {
    // Step past every copy of the smallest pending value in both samples
    // before comparing, so ties do not produce spurious gaps.
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    best = std::max(best, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return std::min(best, 1.0);
}

double ks_distance(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw Error(ErrorKind::InvalidInput, "KS distance needs two nonempty samples");
  return ks_distance_sorted(sorted_copy(a), sorted_copy(b));
}

FidelityReport build_report(const FeatureMatrix& original, const FeatureMatrix& candidate, const FeatureMatrix* start,
                            int ecdf_points) {
  if (original.names() != candidate.names())
    throw Error(ErrorKind::SchemaMismatch, "candidate features do not match the original's names and order");
  if (ecdf_points < 2) throw Error(ErrorKind::InvalidInput, "ECDF grid needs at least two points");

  FidelityReport report;
  report.names = original.names();
  report.corr_original = pearson_correlation(original);
  report.corr_candidate = pearson_correlation(candidate);
  const Eigen::MatrixXd diff = report.corr_original.entries - report.corr_candidate.entries;
  report.corr_max_abs_error = diff.cwiseAbs().maxCoeff();
  report.corr_frobenius_error = diff.norm();

  const FeatureStats so = feature_stats(original);
  const FeatureStats sc = feature_stats(candidate);
  const Eigen::Index m = original.cols();
  report.features.resize(static_cast<std::size_t>(m));
#pragma omp parallel for schedule(dynamic)
  for (Eigen::Index j = 0; j < m; ++j) {
    FeatureFidelity& f = report.features[static_cast<std::size_t>(j)];
    f.name = original.name(j);
    f.mean_original = so.means(j);
    f.mean_candidate = sc.means(j);
    f.var_original = so.variances(j);
    f.var_candidate = sc.variances(j);
    const auto a = sorted_copy(original.column(j));
    const auto b = sorted_copy(candidate.column(j));
    f.ks_distance = ks_distance_sorted(a, b);
    f.ecdf_grid = ecdf_grid(a, b, ecdf_points);
  }
  if (start != nullptr) report.frobenius_gap_to_start = frobenius_gap(candidate, *start);
  return report;
}

nlohmann::json to_json(const CorrelationMatrix& corr, const std::vector<std::string>& names) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < corr.entries.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < corr.entries.cols(); ++j) row.push_back(corr.entries(i, j));
    rows.push_back(std::move(row));
  }
  return {{"kind", corr.kind == CorrelationKind::Pearson ? "pearson" : "cosine"},
          {"names", names},
          {"values", std::move(rows)}};
}

nlohmann::json to_json(const FidelityReport& report) {
  nlohmann::json features = nlohmann::json::array();
  for (const auto& f : report.features) {
    nlohmann::json grid = nlohmann::json::array();
    for (const auto& p : f.ecdf_grid) grid.push_back({p.value, p.original, p.candidate});
    features.push_back({{"name", f.name},
                        {"mean_orig", f.mean_original},
                        {"mean_cand", f.mean_candidate},
                        {"var_orig", f.var_original},
                        {"var_cand", f.var_candidate},
                        {"ks_distance", f.ks_distance},
                        {"ecdf_grid", std::move(grid)}});
  }
  nlohmann::json out;
  out["corr_original"] = to_json(report.corr_original, report.names);
  out["corr_candidate"] = to_json(report.corr_candidate, report.names);
  out["corr_max_abs_error"] = report.corr_max_abs_error;
  out["corr_frobenius_error"] = report.corr_frobenius_error;
  out["features"] = std::move(features);
  out["frobenius_gap_to_start"] =
      report.frobenius_gap_to_start ? nlohmann::json(*report.frobenius_gap_to_start) : nlohmann::json(nullptr);
  return out;
}

void write_report_json(const FidelityReport& report, const std::filesystem::path& path) {
  write_text_atomic(path, to_json(report).dump(2) + "\n");
}

void write_ecdf_csvs(const FidelityReport& report, const std::filesystem::path& dir, const std::string& prefix) {
  std::filesystem::create_directories(dir);
  for (const auto& f : report.features) {
    std::string text = "value,F_original,F_candidate\n";
    for (const auto& p : f.ecdf_grid)
      text += format_double(p.value) + "," + format_double(p.original) + "," + format_double(p.candidate) + "\n";
    write_text_atomic(dir / (prefix + f.name + ".csv"), text);
  }
}

}  // namespace synthcorr
