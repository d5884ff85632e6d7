#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "matchboard/model.hpp"
#include "matchboard/scheduler.hpp"
#include "matchboard/score.hpp"

namespace matchboard {

inline constexpr int kManifestFormatVersion = 1;

// ---- CSV primitives --------------------------------------------------------

struct CsvRow {
  std::size_t line = 0;  // 1-based source line
  std::vector<std::string> fields;
};

// RFC 4180 style: comma separated, double-quoted fields may contain commas, quotes ("") and
// newlines. Blank lines are skipped. Throws kParseError with {line, column, reason}.
std::vector<CsvRow> parse_csv(std::string_view text);
std::string csv_field(std::string_view value);
std::string format_double(double value);  // shortest representation that round-trips

// Header-addressed view of a parsed CSV table.
class CsvTable {
 public:
  explicit CsvTable(std::string_view text);

  std::size_t size() const { return rows_.size(); }
  const CsvRow& row(std::size_t i) const { return rows_[i]; }
  bool has(std::string_view column) const;
  // Throws kParseError on the header line when the column is absent.
  std::size_t column(std::string_view name) const;
  const std::string& at(std::size_t row, std::string_view name) const;
  std::size_t line(std::size_t row) const { return rows_[row].line; }

  int int_at(std::size_t row, std::string_view name) const;
  double double_at(std::size_t row, std::string_view name) const;

  [[noreturn]] void fail(std::size_t row, std::string_view name, const std::string& reason) const;

 private:
  std::vector<std::string> header_;
  std::vector<CsvRow> rows_;
  std::size_t header_line_ = 1;
};

std::vector<std::string> split_list(std::string_view text, char separator);
std::string join_list(const auto& items, char separator) {
  std::string out;
  bool first = true;
  for (const auto& item : items) {
    if (!first) out += separator;
    out += item;
    first = false;
  }
  return out;
}

// ---- Files -----------------------------------------------------------------

std::string read_text_file(const std::filesystem::path& path);
// Writes to a sibling temporary file and renames it over `path`.
void write_text_file_atomic(const std::filesystem::path& path, std::string_view content);

struct FileManifest {
  std::filesystem::path cases;
  std::filesystem::path locations;
  std::optional<std::filesystem::path> history;
  std::optional<std::filesystem::path> meetings;
  int format_version = kManifestFormatVersion;
  ScoreMode mode = ScoreMode::kOutcomePredicted;
  std::size_t attribute_dimension = kDefaultAttributeDimension;
};

// Relative paths inside the manifest resolve against the manifest's directory.
FileManifest load_manifest(const std::filesystem::path& path);

// ---- Domain tables ---------------------------------------------------------

std::vector<Case> parse_cases_csv(std::string_view text);
std::vector<Location> parse_locations_csv(std::string_view text);
std::vector<HistoryRecord> parse_history_csv(std::string_view text);
std::vector<Meeting> parse_meetings_csv(std::string_view text);
std::map<std::string, std::string> parse_locks_csv(std::string_view text);

std::string format_cases_csv(const Instance& instance);
std::string format_locations_csv(const Instance& instance);
std::string format_meetings_csv(std::span<const Meeting> meetings);

// Parses, then validates; throws kParseError or kValidationFailed.
Instance load_instance(const FileManifest& manifest);
Instance load_instance(const std::filesystem::path& manifest_path);

// Writes manifest.json, cases.csv and locations.csv into `directory`; returns the manifest path.
std::filesystem::path export_instance(const Instance& instance, const std::filesystem::path& directory);

std::vector<HistoryRecord> load_history(const std::filesystem::path& path);
std::vector<Meeting> load_meetings(const std::filesystem::path& path);

}  // namespace matchboard
