#include "synthcorr/cli.hpp"

#include <filesystem>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "synthcorr/dataio.hpp"
#include "synthcorr/procrustes.hpp"
#include "synthcorr/report.hpp"
#include "synthcorr/sampler.hpp"
#include "synthcorr/stats.hpp"

namespace synthcorr::cli {

namespace fs = std::filesystem;

int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::ZeroNormColumn:
    case ErrorKind::ConstantColumn:
    case ErrorKind::RankDeficient:
    case ErrorKind::DegenerateTarget:
      return kExitNumeric;
    case ErrorKind::IoError:
      return kExitIo;
    default:
      return kExitValidation;
  }
}

namespace {

struct TableOptions {
  std::vector<std::string> columns;
  std::string delimiter = ",";
  bool no_header = false;
  bool drop_missing = false;

  CsvSchema schema() const {
    if (delimiter.size() != 1) throw Error(ErrorKind::InvalidConfig, "--delimiter must be a single character");
    CsvSchema s;
    s.delimiter = delimiter[0];
    s.has_header = !no_header;
    if (!columns.empty()) s.selected_columns = columns;
    s.missing_policy = drop_missing ? MissingPolicy::DropRow : MissingPolicy::Error;
    return s;
  }
};

void add_table_options(CLI::App* app, TableOptions& opts) {
  app->add_option("--columns", opts.columns, "Features to use, by header name, in this order")->delimiter(',');
  app->add_option("--delimiter", opts.delimiter, "Field delimiter (single character)");
  app->add_flag("--no-header", opts.no_header, "Input files have no header row; columns are named c0, c1, ...");
  app->add_flag("--drop-missing", opts.drop_missing, "Skip rows with unparseable cells instead of failing");
}

// Output files are always written with a header and the chosen delimiter.
CsvSchema output_schema(const CsvSchema& in) {
  CsvSchema out;
  out.delimiter = in.delimiter;
  return out;
}

enum class TargetSource { Original, Synthetic, File };

struct TargetsChoice {
  TargetSource source = TargetSource::Original;
  fs::path file;
};

TargetsChoice parse_targets(const std::string& text) {
  if (text == "original") return {TargetSource::Original, {}};
  if (text == "synthetic") return {TargetSource::Synthetic, {}};
  return {TargetSource::File, fs::path(text)};
}

StatTargets resolve_targets(const TargetsChoice& choice, const FeatureMatrix& original, const FeatureMatrix& synthetic) {
  switch (choice.source) {
    case TargetSource::Original: return StatTargets::from_stats(feature_stats(original));
    case TargetSource::Synthetic: return StatTargets::from_stats(feature_stats(synthetic));
    case TargetSource::File: return read_targets_csv(choice.file, original.names());
  }
  return {};
}

class Log {
 public:
  explicit Log(std::ostream& err) : err_(err) {}
  void operator()(const std::string& line) const { err_ << "[synthcorr] " << line << '\n'; }

 private:
  std::ostream& err_;
};

std::string shape(const FeatureMatrix& f) {
  return "n=" + std::to_string(f.rows()) + " m=" + std::to_string(f.cols());
}

int cmd_stats(const fs::path& input, const TableOptions& opts, const std::string& json_path, bool skip_corr,
              std::ostream& out, const Log& log) {
  const FeatureMatrix f = read_csv(input, opts.schema());
  log("read " + input.string() + " (" + shape(f) + ")");
  const FeatureStats stats = feature_stats(f);
  std::optional<CorrelationMatrix> corr;
  if (!skip_corr) corr = pearson_correlation(f);

  out << std::left << std::setw(16) << "feature" << std::setw(26) << "mean" << "variance\n";
  for (Eigen::Index j = 0; j < f.cols(); ++j)
    out << std::setw(16) << f.name(j) << std::setw(26) << format_double(stats.means(j))
        << format_double(stats.variances(j)) << '\n';
  if (corr) {
    out << "\npearson correlation\n";
    for (Eigen::Index i = 0; i < f.cols(); ++i) {
      out << std::setw(16) << f.name(i);
      for (Eigen::Index j = 0; j < f.cols(); ++j) {
        std::ostringstream cell;
        cell << std::fixed << std::setprecision(6) << corr->entries(i, j);
        out << std::right << std::setw(11) << cell.str() << std::left;
      }
      out << '\n';
    }
  }

  if (!json_path.empty()) {
    nlohmann::json doc;
    doc["names"] = f.names();
    doc["n"] = f.rows();
    doc["means"] = std::vector<double>(stats.means.data(), stats.means.data() + stats.means.size());
    doc["variances"] = std::vector<double>(stats.variances.data(), stats.variances.data() + stats.variances.size());
    doc["centered_norms"] =
        std::vector<double>(stats.centered_norms.data(), stats.centered_norms.data() + stats.centered_norms.size());
    doc["correlation"] = corr ? to_json(*corr, f.names()) : nlohmann::json(nullptr);
    write_text_atomic(json_path, doc.dump(2) + "\n");
    log("wrote " + json_path);
  }
  return kExitOk;
}

int cmd_sample(const fs::path& input, const TableOptions& opts, const SamplerConfig& cfg, const fs::path& output,
               const Log& log) {
  const CsvSchema schema = opts.schema();
  const FeatureMatrix original = read_csv(input, schema);
  log("read " + input.string() + " (" + shape(original) + ")");
  const FeatureMatrix sample = naive_sample(original, cfg);
  log("sampled " + shape(sample) + " mode=" + to_string(cfg.mode) + " seed=" + std::to_string(cfg.seed));
  write_csv(sample, output, output_schema(schema));
  log("wrote " + output.string());
  return kExitOk;
}

struct EnforceOutputs {
  fs::path output;
  fs::path report;
  fs::path ecdf_dir;
  std::string ecdf_prefix;
};

struct Enforced {
  EnforceResult result;
  std::optional<FidelityReport> report;
};

Enforced run_enforce(const FeatureMatrix& original, const FeatureMatrix& synthetic, const StatTargets& targets,
                     double rel_tol, bool want_report, const Log& log) {
  Enforced e{enforce_correlations(original, synthetic, targets, rel_tol), std::nullopt};
  log("enforced correlations: rank=" + std::to_string(e.result.diagnostics.rank) +
      (e.result.diagnostics.completed_directions > 0
           ? " completed=" + std::to_string(e.result.diagnostics.completed_directions)
           : std::string()));
  if (want_report) e.report = build_report(original, e.result.s_hat, &synthetic);
  return e;
}

void write_enforced(const Enforced& e, const CsvSchema& schema, const EnforceOutputs& outputs, const Log& log) {
  if (e.report && !outputs.report.empty()) {
    write_report_json(*e.report, outputs.report);
    log("wrote " + outputs.report.string() + " (corr_max_abs_error=" + format_double(e.report->corr_max_abs_error) +
        ")");
  }
  if (e.report && !outputs.ecdf_dir.empty()) write_ecdf_csvs(*e.report, outputs.ecdf_dir, outputs.ecdf_prefix);
  write_csv(e.result.s_hat, outputs.output, output_schema(schema));
  log("wrote " + outputs.output.string());
}

// The synthetic table is matched to the original by feature name.
FeatureMatrix read_synthetic(const fs::path& path, const CsvSchema& schema, const FeatureMatrix& original) {
  CsvSchema s = schema;
  s.selected_columns = original.names();
  try {
    return read_csv(path, s);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::MissingColumn) throw Error(ErrorKind::SchemaMismatch, e.what());
    throw;
  }
}

int cmd_enforce(const fs::path& original_path, const fs::path& synthetic_path, const TableOptions& opts,
                const std::string& targets_text, double rel_tol, const EnforceOutputs& outputs, const Log& log) {
  const CsvSchema schema = opts.schema();
  const FeatureMatrix original = read_csv(original_path, schema);
  log("read original " + original_path.string() + " (" + shape(original) + ")");
  const FeatureMatrix synthetic = read_synthetic(synthetic_path, schema, original);
  log("read synthetic " + synthetic_path.string() + " (" + shape(synthetic) + ")");
  const StatTargets targets = resolve_targets(parse_targets(targets_text), original, synthetic);
  const Enforced e = run_enforce(original, synthetic, targets, rel_tol,
                                 !outputs.report.empty() || !outputs.ecdf_dir.empty(), log);
  write_enforced(e, schema, outputs, log);
  return kExitOk;
}

// Everything is computed before the first file is written, so a failing run leaves no outputs behind.
int cmd_pipeline(const fs::path& original_path, const TableOptions& opts, const SamplerConfig& cfg,
                 const std::string& targets_text, double rel_tol, const fs::path& dir, bool ecdf, const Log& log) {
  const CsvSchema schema = opts.schema();
  const FeatureMatrix original = read_csv(original_path, schema);
  log("read original " + original_path.string() + " (" + shape(original) + ")");

  const FeatureMatrix synthetic = naive_sample(original, cfg);
  log("sampled S: " + shape(synthetic) + " mode=" + to_string(cfg.mode) + " seed=" + std::to_string(cfg.seed));
  const FidelityReport s_report = build_report(original, synthetic);
  log("S vs O: corr_max_abs_error=" + format_double(s_report.corr_max_abs_error));

  const TargetsChoice choice = parse_targets(targets_text);
  const StatTargets s_targets = resolve_targets(choice, original, synthetic);
  const Enforced s_hat = run_enforce(original, synthetic, s_targets, rel_tol, true, log);

  // Ô keeps O's own moments whatever the choice for Ŝ, unless a file was given.
  const StatTargets o_targets = choice.source == TargetSource::File ? s_targets
                                                                      : StatTargets::from_stats(feature_stats(original));
  const Enforced o_hat = run_enforce(original, original, o_targets, rel_tol, true, log);

  fs::create_directories(dir);
  const CsvSchema out_schema = output_schema(schema);
  write_csv(synthetic, dir / "S.csv", out_schema);
  write_report_json(s_report, dir / "report_S.json");
  if (ecdf) write_ecdf_csvs(s_report, dir / "ecdf", "S_");
  log("wrote " + (dir / "S.csv").string());
  write_enforced(s_hat, schema, {dir / "S_hat.csv", dir / "report_S_hat.json", ecdf ? dir / "ecdf" : fs::path(), "S_hat_"},
                 log);
  write_enforced(o_hat, schema, {dir / "O_hat.csv", dir / "report_O_hat.json", ecdf ? dir / "ecdf" : fs::path(), "O_hat_"},
                 log);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Enforce the Pearson correlation of an original table on synthetic data", "synthcorr"};
  app.require_subcommand(1);
  const Log log(err);

  TableOptions table;
  SamplerConfig sampler;
  std::string mode = "bootstrap";
  std::string targets_text;
  double rel_tol = 1e-12;
  fs::path input;
  fs::path output;
  fs::path synthetic_path;
  fs::path report_path;
  fs::path ecdf_dir;
  std::string json_path;
  bool skip_corr = false;
  bool ecdf = false;

  auto* stats = app.add_subcommand("stats", "Per-feature moments and the Pearson correlation matrix");
  stats->add_option("input", input, "CSV file")->required();
  stats->add_option("--json", json_path, "Also write the results as JSON");
  stats->add_flag("--no-corr", skip_corr, "Skip the correlation matrix");
  add_table_options(stats, table);

  auto* sample = app.add_subcommand("sample", "Naive column-wise resampling that keeps marginals only");
  sample->add_option("input", input, "Original CSV file")->required();
  sample->add_option("-o,--output", output, "Where to write S")->required();
  sample->add_option("--seed", sampler.seed, "Random seed");
  sample->add_option("--mode", mode, "bootstrap or permutation")->check(CLI::IsMember({"bootstrap", "permutation"}));
  sample->add_option("--rows", sampler.rows, "Output rows (default: same as input)");
  add_table_options(sample, table);

  auto* enforce = app.add_subcommand("enforce", "Move a synthetic table to the original's correlation");
  enforce->add_option("--original", input, "Original CSV file")->required();
  enforce->add_option("--synthetic", synthetic_path, "Synthetic CSV file with the same features")->required();
  enforce->add_option("-o,--output", output, "Where to write the enforced table")->required();
  enforce->add_option("--report", report_path, "Fidelity report (JSON)");
  enforce->add_option("--ecdf-dir", ecdf_dir, "Directory for per-feature ECDF CSVs");
  enforce->add_option("--targets", targets_text, "original, synthetic, or a CSV with name,mean,variance")
      ->default_str("original");
  enforce->add_option("--rel-tol", rel_tol, "Relative threshold for zero singular values");
  add_table_options(enforce, table);

  auto* pipeline = app.add_subcommand("pipeline", "Sample, enforce and report in one run");
  pipeline->add_option("input", input, "Original CSV file")->required();
  pipeline->add_option("--output-dir", output, "Directory for S, S_hat, O_hat and their reports")->required();
  pipeline->add_option("--seed", sampler.seed, "Random seed");
  pipeline->add_option("--mode", mode, "bootstrap or permutation")->check(CLI::IsMember({"bootstrap", "permutation"}));
  pipeline->add_option("--rows", sampler.rows, "Rows of S (enforcement needs the input's row count)");
  pipeline->add_option("--targets", targets_text, "Moments for S_hat: synthetic, original, or a CSV file")
      ->default_str("synthetic");
  pipeline->add_option("--rel-tol", rel_tol, "Relative threshold for zero singular values");
  pipeline->add_flag("--ecdf", ecdf, "Also write per-feature ECDF CSVs under <output-dir>/ecdf");
  add_table_options(pipeline, table);

  std::vector<const char*> argv{"synthcorr"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "synthcorr: " << e.what() << '\n';
    return kExitValidation;
  }

  try {
    sampler.mode = parse_sampler_mode(mode);
    if (stats->parsed()) return cmd_stats(input, table, json_path, skip_corr, out, log);
    if (sample->parsed()) return cmd_sample(input, table, sampler, output, log);
    if (enforce->parsed())
      return cmd_enforce(input, synthetic_path, table, targets_text.empty() ? "original" : targets_text, rel_tol,
                         {output, report_path, ecdf_dir, ""}, log);
    if (pipeline->parsed())
      return cmd_pipeline(input, table, sampler, targets_text.empty() ? "synthetic" : targets_text, rel_tol, output,
                          ecdf, log);
  } catch (const Error& e) {
    err << "synthcorr: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const fs::filesystem_error& e) {
    err << "synthcorr: IoError: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitValidation;
}

}  // namespace synthcorr::cli
