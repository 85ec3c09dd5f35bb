#include "synthcorr/dataio.hpp"

#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <unordered_map>

#include "synthcorr/error.hpp"

namespace synthcorr {

namespace fs = std::filesystem;

namespace {

// Yields one line at a time from a file read in fixed-size chunks. The
// buffer only grows past the chunk size when a single line is longer.
class ChunkedLineReader {
 public:
  explicit ChunkedLineReader(const fs::path& path) : in_(path, std::ios::binary), buffer_(kCsvChunkBytes) {
    if (!in_) throw Error(ErrorKind::IoError, "cannot open '" + path.string() + "': " + std::strerror(errno));
  }

  // Returns false at end of file. The view stays valid until the next call.
  bool next(std::string_view& line) {
    for (;;) {
      const char* begin = buffer_.data() + start_;
      const char* end = buffer_.data() + filled_;
      const char* nl = static_cast<const char*>(std::memchr(begin, '\n', static_cast<std::size_t>(end - begin)));
      if (nl != nullptr) {
        line = trim_cr({begin, static_cast<std::size_t>(nl - begin)});
        start_ += static_cast<std::size_t>(nl - begin) + 1;
        ++line_number_;
        return true;
      }
      if (eof_) {
        if (start_ == filled_) return false;
        line = trim_cr({begin, filled_ - start_});
        start_ = filled_;
        ++line_number_;
        return true;
      }
      refill();
    }
  }

  std::size_t line_number() const { return line_number_; }

 private:
  static std::string_view trim_cr(std::string_view s) {
    if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
    return s;
  }

  void refill() {
    const std::size_t pending = filled_ - start_;
    if (start_ > 0) {
      std::memmove(buffer_.data(), buffer_.data() + start_, pending);
      start_ = 0;
      filled_ = pending;
    }
    if (filled_ == buffer_.size()) buffer_.resize(buffer_.size() * 2);
    in_.read(buffer_.data() + filled_, static_cast<std::streamsize>(buffer_.size() - filled_));
    const auto got = static_cast<std::size_t>(in_.gcount());
    filled_ += got;
    if (got == 0 || !in_) {
      if (in_.bad()) throw Error(ErrorKind::IoError, "read failure");
      eof_ = true;
    }
  }

  std::ifstream in_;
  std::vector<char> buffer_;
  std::size_t start_ = 0;
  std::size_t filled_ = 0;
  std::size_t line_number_ = 0;
  bool eof_ = false;
};

std::string_view trim_spaces(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

// Splits on the delimiter, honoring double quotes. Quoted fields are
// returned without their quotes; doubled quotes inside them are left as is,
// which only matters for header names.
void split_fields(std::string_view line, char delim, std::vector<std::string_view>& fields) {
  fields.clear();
  std::size_t i = 0;
  for (;;) {
    std::size_t j = i;
    while (j < line.size() && (line[j] == ' ' || line[j] == '\t')) ++j;
    if (j < line.size() && line[j] == '"') {
      std::size_t k = j + 1;
      while (k < line.size()) {
        if (line[k] == '"') {
          if (k + 1 < line.size() && line[k + 1] == '"') {
            k += 2;
            continue;
          }
          break;
        }
        ++k;
      }
      fields.push_back(line.substr(j + 1, k - j - 1));
      std::size_t next = line.find(delim, std::min(k + 1, line.size()));
      if (next == std::string_view::npos) return;
      i = next + 1;
    } else {
      std::size_t next = line.find(delim, i);
      if (next == std::string_view::npos) {
        fields.push_back(trim_spaces(line.substr(i)));
        return;
      }
      fields.push_back(trim_spaces(line.substr(i, next - i)));
      i = next + 1;
    }
  }
}

std::string unquote_name(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    out += s[i];
    if (s[i] == '"' && i + 1 < s.size() && s[i + 1] == '"') ++i;
  }
  return out;
}

bool parse_number(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

std::string quote_name(const std::string& name, char delim) {
  if (name.find(delim) == std::string::npos && name.find('"') == std::string::npos &&
      name.find('\n') == std::string::npos)
    return name;
  std::string out = "\"";
  for (char c : name) {
    out += c;
    if (c == '"') out += '"';
  }
  return out + "\"";
}

}  // namespace

FeatureMatrix read_csv(const fs::path& path, const CsvSchema& schema) {
  std::vector<std::string> file_names;
  std::vector<std::string_view> fields;
  std::size_t data_lines = 0;
  {
    ChunkedLineReader reader(path);
    std::string_view line;
    bool first = true;
    while (reader.next(line)) {
      if (first) {
        first = false;
        if (line.starts_with("\xEF\xBB\xBF")) line.remove_prefix(3);
        split_fields(line, schema.delimiter, fields);
        if (schema.has_header) {
          for (auto f : fields) file_names.push_back(unquote_name(f));
          continue;
        }
        file_names = default_names(static_cast<Eigen::Index>(fields.size()));
      }
      if (!trim_spaces(line).empty()) ++data_lines;
    }
    if (first) throw Error(ErrorKind::ParseError, "'" + path.string() + "' is empty");
  }

  std::vector<std::size_t> selected;
  std::vector<std::string> names;
  if (schema.selected_columns) {
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t k = 0; k < file_names.size(); ++k) index.emplace(file_names[k], k);
    for (const auto& want : *schema.selected_columns) {
      const auto it = index.find(want);
      if (it == index.end()) throw Error(ErrorKind::MissingColumn, "column '" + want + "' not found in " + path.string());
      if (std::find(names.begin(), names.end(), want) != names.end())
        throw Error(ErrorKind::InvalidInput, "column '" + want + "' selected twice");
      selected.push_back(it->second);
      names.push_back(want);
    }
  } else {
    for (std::size_t k = 0; k < file_names.size(); ++k) selected.push_back(k);
    names = file_names;
  }
  if (selected.empty()) throw Error(ErrorKind::InvalidInput, "no columns selected");

  const auto m = static_cast<Eigen::Index>(selected.size());
  Eigen::MatrixXd values(static_cast<Eigen::Index>(data_lines), m);
  Eigen::Index row = 0;
  {
    ChunkedLineReader reader(path);
    std::string_view line;
    bool first = true;
    while (reader.next(line)) {
      if (first) {
        first = false;
        if (line.starts_with("\xEF\xBB\xBF")) line.remove_prefix(3);
        if (schema.has_header) continue;
      }
      if (trim_spaces(line).empty()) continue;
      split_fields(line, schema.delimiter, fields);
      if (fields.size() != file_names.size())
        throw Error(ErrorKind::ParseError, "line " + std::to_string(reader.line_number()) + ": expected " +
                                               std::to_string(file_names.size()) + " fields, found " +
                                               std::to_string(fields.size()));
      bool keep = true;
      for (Eigen::Index j = 0; j < m; ++j) {
        double v = 0.0;
        const auto cell = fields[selected[static_cast<std::size_t>(j)]];
        if (!parse_number(cell, v)) {
          if (schema.missing_policy == MissingPolicy::DropRow) {
            keep = false;
            break;
          }
          throw Error(ErrorKind::ParseError, "line " + std::to_string(reader.line_number()) + ", column '" +
                                                 names[static_cast<std::size_t>(j)] + "': cannot parse '" +
                                                 std::string(cell) + "' as a finite number");
        }
        values(row, j) = v;
      }
      if (keep) ++row;
    }
  }
  if (row != values.rows()) values.conservativeResize(row, m);
  return FeatureMatrix(std::move(values), std::move(names));
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_csv(const FeatureMatrix& f, const fs::path& path, const CsvSchema& schema) {
  write_csv(f.values(), f.names(), path, schema);
}

void write_csv(const Eigen::MatrixXd& x, const std::vector<std::string>& names, const fs::path& path,
               const CsvSchema& schema) {
  const Eigen::Index n = x.rows();
  const Eigen::Index m = x.cols();
  if (m < 1) throw Error(ErrorKind::InvalidInput, "refusing to write a table with no features");
  if (names.size() != static_cast<std::size_t>(m))
    throw Error(ErrorKind::InvalidInput, "expected " + std::to_string(m) + " column names");
  AtomicFileWriter out(path);
  std::string buffer;
  buffer.reserve(kCsvChunkBytes + 1024);
  for (Eigen::Index j = 0; j < m; ++j) {
    if (j > 0) buffer += schema.delimiter;
    buffer += quote_name(names[static_cast<std::size_t>(j)], schema.delimiter);
  }
  buffer += '\n';
  char num[64];
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      if (j > 0) buffer += schema.delimiter;
      const auto [ptr, ec] = std::to_chars(num, num + sizeof num, x(i, j));
      buffer.append(num, ptr);
    }
    buffer += '\n';
    if (buffer.size() >= kCsvChunkBytes) {
      out.write(buffer);
      buffer.clear();
    }
  }
  out.write(buffer);
  out.commit();
}

StatTargets read_targets_csv(const fs::path& path, const std::vector<std::string>& names) {
  ChunkedLineReader reader(path);
  std::string_view line;
  std::vector<std::string_view> fields;
  if (!reader.next(line)) throw Error(ErrorKind::ParseError, "targets file '" + path.string() + "' is empty");
  if (line.starts_with("\xEF\xBB\xBF")) line.remove_prefix(3);
  split_fields(line, ',', fields);
  std::unordered_map<std::string, std::size_t> header;
  for (std::size_t k = 0; k < fields.size(); ++k) header.emplace(std::string(fields[k]), k);
  for (const char* key : {"name", "mean", "variance"})
    if (!header.count(key))
      throw Error(ErrorKind::ParseError, "targets file needs columns name,mean,variance (missing '" +
                                             std::string(key) + "')");
  const std::size_t name_col = header["name"];
  const std::size_t mean_col = header["mean"];
  const std::size_t var_col = header["variance"];

  std::unordered_map<std::string, std::pair<double, double>> rows;
  while (reader.next(line)) {
    if (trim_spaces(line).empty()) continue;
    split_fields(line, ',', fields);
    if (fields.size() != header.size())
      throw Error(ErrorKind::ParseError, "targets line " + std::to_string(reader.line_number()) + " is ragged");
    double mean = 0.0;
    double var = 0.0;
    if (!parse_number(fields[mean_col], mean) || !parse_number(fields[var_col], var))
      throw Error(ErrorKind::ParseError, "targets line " + std::to_string(reader.line_number()) +
                                             ": mean and variance must be finite numbers");
    const std::string name = unquote_name(fields[name_col]);
    if (!rows.emplace(name, std::make_pair(mean, var)).second)
      throw Error(ErrorKind::InvalidInput, "targets file lists '" + name + "' twice");
  }
  if (rows.size() != names.size())
    throw Error(ErrorKind::InvalidInput, "targets file has " + std::to_string(rows.size()) + " entries for " +
                                             std::to_string(names.size()) + " features");
  const auto m = static_cast<Eigen::Index>(names.size());
  StatTargets targets{Eigen::VectorXd(m), Eigen::VectorXd(m)};
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto it = rows.find(names[static_cast<std::size_t>(j)]);
    if (it == rows.end())
      throw Error(ErrorKind::MissingColumn, "targets file has no entry for '" + names[static_cast<std::size_t>(j)] + "'");
    targets.means(j) = it->second.first;
    targets.variances(j) = it->second.second;
  }
  return targets;
}

AtomicFileWriter::AtomicFileWriter(fs::path path) : path_(std::move(path)) {
  temp_ = path_;
  temp_ += ".tmp." + std::to_string(::getpid());
  file_ = std::fopen(temp_.c_str(), "wb");
  if (file_ == nullptr)
    throw Error(ErrorKind::IoError, "cannot create '" + temp_.string() + "': " + std::strerror(errno));
}

AtomicFileWriter::~AtomicFileWriter() {
  if (file_ != nullptr) {
    std::fclose(file_);
    std::error_code ec;
    fs::remove(temp_, ec);
  }
}

void AtomicFileWriter::write(std::string_view bytes) {
  if (bytes.empty()) return;
  if (std::fwrite(bytes.data(), 1, bytes.size(), file_) != bytes.size())
    throw Error(ErrorKind::IoError, "write to '" + temp_.string() + "' failed: " + std::strerror(errno));
}

void AtomicFileWriter::commit() {
  std::FILE* f = std::exchange(file_, nullptr);
  if (std::fclose(f) != 0) {
    std::error_code ec;
    fs::remove(temp_, ec);
    throw Error(ErrorKind::IoError, "closing '" + temp_.string() + "' failed");
  }
  std::error_code ec;
  fs::rename(temp_, path_, ec);
  if (ec) {
    fs::remove(temp_, ec);
    throw Error(ErrorKind::IoError, "cannot move output into place at '" + path_.string() + "'");
  }
}

void write_text_atomic(const fs::path& path, std::string_view text) {
  AtomicFileWriter out(path);
  out.write(text);
  out.commit();
}

}  // namespace synthcorr
