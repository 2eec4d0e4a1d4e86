#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fsc/dataset.hpp"
#include "fsc/io/fsts.hpp"

namespace fsc::io {

struct ManifestRow {
  std::string path;  // as written; relative paths resolve against the manifest directory
  std::string label;
};

struct Manifest {
  std::filesystem::path base_dir;
  std::vector<ManifestRow> rows;

  std::filesystem::path resolve(const ManifestRow& r) const {
    const std::filesystem::path p(r.path);
    return p.is_absolute() ? p : base_dir / p;
  }
};

inline std::string trim(std::string s) {
  const auto ws = " \t\r\n";
  s.erase(0, s.find_first_not_of(ws));
  const auto last = s.find_last_not_of(ws);
  s.erase(last == std::string::npos ? 0 : last + 1);
  return s;
}

/// Parses "path,label" text with that exact header line. The label is the
/// text after the last comma.
inline Manifest parse_manifest(std::istream& in, const std::filesystem::path& base_dir, const std::string& source) {
  Manifest m;
  m.base_dir = base_dir;
  std::string line;
  if (!std::getline(in, line) || trim(line) != "path,label")
    fail(ErrorCode::ManifestError, source + ": first line must be the header 'path,label'");
  std::set<std::string> seen;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    const auto comma = line.rfind(',');
    if (comma == std::string::npos)
      fail(ErrorCode::ManifestError, source + ":" + std::to_string(lineno) + ": expected 'path,label'");
    ManifestRow row{trim(line.substr(0, comma)), trim(line.substr(comma + 1))};
    if (row.path.empty() || row.label.empty())
      fail(ErrorCode::ManifestError, source + ":" + std::to_string(lineno) + ": empty path or label");
    if (!seen.insert(row.path).second)
      fail(ErrorCode::ManifestError, source + ":" + std::to_string(lineno) + ": duplicate path '" + row.path + "'");
    m.rows.push_back(std::move(row));
  }
  return m;
}

inline Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::ManifestError, "cannot open manifest '" + path.string() + "'");
  return parse_manifest(in, path.parent_path(), path.string());
}

inline void write_manifest(const std::filesystem::path& path, const std::vector<ManifestRow>& rows) {
  std::ostringstream os;
  os << "path,label\n";
  for (const auto& r : rows) os << r.path << ',' << r.label << '\n';
  const auto text = os.str();
  write_file_atomic(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

/// Loads every FSTS file of the manifest. Class indices follow the sorted
/// label set unless `class_names` is supplied, in which case unknown labels
/// are a ManifestError.
inline LabeledDataset load_dataset(const Manifest& m, const std::vector<std::string>* class_names = nullptr) {
  std::vector<std::string> labels;
  for (const auto& r : m.rows) labels.push_back(r.label);
  LabeledDataset ds;
  ds.class_names = class_names ? *class_names : sorted_class_names(labels);
  for (const auto& r : m.rows) {
    const auto it = std::find(ds.class_names.begin(), ds.class_names.end(), r.label);
    if (it == ds.class_names.end()) fail(ErrorCode::ManifestError, "label '" + r.label + "' is not a known class");
    const auto path = m.resolve(r);
    if (!std::filesystem::exists(path)) fail(ErrorCode::ManifestError, "missing file '" + path.string() + "'");
    auto series = read_fsts(path);
    series.source_id = r.path;
    ds.items.push_back({std::move(series), static_cast<std::size_t>(it - ds.class_names.begin())});
  }
  return ds;
}

}  // namespace fsc::io
