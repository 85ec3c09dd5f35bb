#pragma once

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "synthcorr/procrustes.hpp"
#include "synthcorr/stats.hpp"

namespace synthcorr {

enum class MissingPolicy { Error, DropRow };

struct CsvSchema {
  char delimiter = ',';
  bool has_header = true;
  std::optional<std::vector<std::string>> selected_columns;
  MissingPolicy missing_policy = MissingPolicy::Error;
};

/// Bytes read from disk per chunk by read_csv.
inline constexpr std::size_t kCsvChunkBytes = std::size_t{1} << 20;

/// Streams the file twice: once to count rows, once to parse them straight
/// into the output matrix. Working memory beyond the result is one chunk
/// plus the longest line.
///
/// Accepts LF or CRLF line endings, a leading UTF-8 BOM, and double-quoted
/// fields (without embedded newlines). Blank lines are skipped. Without a
/// header the columns are named c0, c1, ...
FeatureMatrix read_csv(const std::filesystem::path& path, const CsvSchema& schema = {});

/// Header row then one line per observation, LF endings, numbers in the
/// shortest form that parses back to the same double. The file appears
/// atomically: data goes to a temporary sibling that is renamed on success.
void write_csv(const FeatureMatrix& f, const std::filesystem::path& path, const CsvSchema& schema = {});

/// Same format for a bare matrix; only requires at least one column.
void write_csv(const Eigen::MatrixXd& values, const std::vector<std::string>& names,
               const std::filesystem::path& path, const CsvSchema& schema = {});

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

/// Per-feature targets from a CSV with columns name,mean,variance. Rows are
/// matched to `names` by name; every name must appear exactly once.
StatTargets read_targets_csv(const std::filesystem::path& path, const std::vector<std::string>& names);

/// Writes to `<path>.tmp.<pid>` and renames onto `path` in commit(). If
/// destroyed before commit() the temporary is removed.
class AtomicFileWriter {
 public:
  explicit AtomicFileWriter(std::filesystem::path path);
  ~AtomicFileWriter();
  AtomicFileWriter(const AtomicFileWriter&) = delete;
  AtomicFileWriter& operator=(const AtomicFileWriter&) = delete;

  void write(std::string_view bytes);
  void commit();

 private:
  std::filesystem::path path_;
  std::filesystem::path temp_;
  std::FILE* file_ = nullptr;
};

void write_text_atomic(const std::filesystem::path& path, std::string_view text);

}  // namespace synthcorr
