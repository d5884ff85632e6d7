#include "matchboard/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace matchboard {

namespace {

[[noreturn]] void parse_error(std::size_t line, std::size_t column, const std::string& reason) {
  throw Error(ErrorCode::kParseError,
              "parse error at line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + reason,
              {{"line", line}, {"column", column}, {"reason", reason}});
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::vector<CsvRow> parse_csv(std::string_view text) {
  std::vector<CsvRow> rows;
  CsvRow row;
  std::string field;
  std::size_t line = 1;
  std::size_t row_line = 1;
  bool in_quotes = false;
  bool field_quoted = false;
  bool row_has_content = false;

  auto end_field = [&] {
    row.fields.push_back(field_quoted ? field : trim(field));
    field.clear();
    field_quoted = false;
  };
  auto end_row = [&] {
    end_field();
    bool blank = !row_has_content && row.fields.size() == 1 && row.fields[0].empty();
    if (!blank) {
      row.line = row_line;
      rows.push_back(std::move(row));
    }
    row = CsvRow{};
    row_has_content = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    char ch = text[i];
    if (in_quotes) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') ++line;
        field += ch;
      }
      continue;
    }
    switch (ch) {
      case '"':
        if (!trim(field).empty()) parse_error(line, row.fields.size() + 1, "unexpected quote inside field");
        field.clear();
        in_quotes = true;
        field_quoted = true;
        row_has_content = true;
        break;
      case ',':
        end_field();
        row_has_content = true;
        break;
      case '\n':
        end_row();
        ++line;
        row_line = line;
        break;
      case '\r':
        break;
      default:
        if (field_quoted) parse_error(line, row.fields.size() + 1, "characters after closing quote");
        field += ch;
        row_has_content = true;
    }
  }
  if (in_quotes) parse_error(line, row.fields.size() + 1, "unterminated quoted field");
  if (row_has_content || !field.empty()) end_row();
  return rows;
}

std::string csv_field(std::string_view value) {
  if (value.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(value);
  std::string out = "\"";
  for (char ch : value) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::vector<std::string> split_list(std::string_view text, char separator) {
  std::vector<std::string> out;
  if (trim(text).empty()) return out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = text.find(separator, start);
    std::string item = trim(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (!item.empty()) out.push_back(std::move(item));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

CsvTable::CsvTable(std::string_view text) {
  auto rows = parse_csv(text);
  if (rows.empty()) parse_error(1, 1, "missing header row");
  header_ = std::move(rows.front().fields);
  header_line_ = rows.front().line;
  rows_.assign(std::make_move_iterator(rows.begin() + 1), std::make_move_iterator(rows.end()));
  for (const CsvRow& row : rows_) {
    if (row.fields.size() != header_.size()) {
      parse_error(row.line, std::min(row.fields.size(), header_.size()) + 1,
                  "expected " + std::to_string(header_.size()) + " fields, found " + std::to_string(row.fields.size()));
    }
  }
}

bool CsvTable::has(std::string_view column) const {
  return std::find(header_.begin(), header_.end(), column) != header_.end();
}

std::size_t CsvTable::column(std::string_view name) const {
  auto it = std::find(header_.begin(), header_.end(), name);
  if (it == header_.end()) parse_error(header_line_, header_.size() + 1, "missing column '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - header_.begin());
}

const std::string& CsvTable::at(std::size_t row, std::string_view name) const {
  return rows_[row].fields[column(name)];
}

void CsvTable::fail(std::size_t row, std::string_view name, const std::string& reason) const {
  parse_error(rows_[row].line, column(name) + 1, reason);
}

int CsvTable::int_at(std::size_t row, std::string_view name) const {
  const std::string& text = at(row, name);
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    fail(row, name, "expected an integer for '" + std::string(name) + "', found '" + text + "'");
  }
  return value;
}

double CsvTable::double_at(std::size_t row, std::string_view name) const {
  const std::string& text = at(row, name);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) {
    fail(row, name, "expected a number for '" + std::string(name) + "', found '" + text + "'");
  }
  return value;
}

namespace {

std::vector<double> parse_levels(const CsvTable& table, std::size_t row, std::string_view name) {
  std::vector<double> levels;
  for (const std::string& item : split_list(table.at(row, name), ';')) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
    if (ec != std::errc() || ptr != item.data() + item.size()) {
      table.fail(row, name, "invalid attribute level '" + item + "'");
    }
    levels.push_back(value);
  }
  return levels;
}

std::set<std::string> parse_set(const CsvTable& table, std::size_t row, std::string_view name) {
  auto items = split_list(table.at(row, name), '|');
  return {items.begin(), items.end()};
}

std::set<FamilyFlag> parse_flags(const CsvTable& table, std::size_t row) {
  std::set<FamilyFlag> flags;
  for (const std::string& item : split_list(table.at(row, "flags"), '|')) {
    auto flag = parse_family_flag(item);
    if (!flag) table.fail(row, "flags", "unknown family flag '" + item + "'");
    flags.insert(*flag);
  }
  return flags;
}

bool parse_bool(const CsvTable& table, std::size_t row, std::string_view name) {
  std::string text = table.at(row, name);
  std::transform(text.begin(), text.end(), text.begin(), [](unsigned char c) { return std::tolower(c); });
  if (text == "1" || text == "true" || text == "yes") return true;
  if (text == "0" || text == "false" || text == "no") return false;
  table.fail(row, name, "expected a boolean for '" + std::string(name) + "', found '" + text + "'");
}

std::string format_levels(const std::vector<double>& levels) {
  std::vector<std::string> parts;
  for (double v : levels) parts.push_back(format_double(v));
  return join_list(parts, ';');
}

std::string format_flags(const std::set<FamilyFlag>& flags) {
  std::vector<std::string> parts;
  for (FamilyFlag f : flags) parts.emplace_back(to_string(f));
  return join_list(parts, '|');
}

}  // namespace

std::vector<Case> parse_cases_csv(std::string_view text) {
  CsvTable table(text);
  std::vector<Case> cases;
  for (std::size_t r = 0; r < table.size(); ++r) {
    Case c;
    c.id = table.at(r, "id");
    c.display_name = table.at(r, "name");
    c.member_count = table.int_at(r, "member_count");
    c.employable_count = table.int_at(r, "employable_count");
    c.attributes.languages = parse_set(table, r, "languages");
    c.attributes.nationality = table.at(r, "nationality");
    c.attributes.flags = parse_flags(table, r);
    c.attributes.levels = parse_levels(table, r, "levels");
    c.preference_ranks = split_list(table.at(r, "prefs"), '|');
    c.refusals = parse_set(table, r, "refusals");
    for (const std::string& item : split_list(table.at(r, "crossrefs"), '|')) {
      if (item.starts_with("c:")) {
        c.cross_refs.push_back({CrossRef::Kind::kCase, item.substr(2)});
      } else if (item.starts_with("l:")) {
        c.cross_refs.push_back({CrossRef::Kind::kLocation, item.substr(2)});
      } else {
        table.fail(r, "crossrefs", "cross-reference '" + item + "' must start with c: or l:");
      }
    }
    cases.push_back(std::move(c));
  }
  return cases;
}

std::vector<Location> parse_locations_csv(std::string_view text) {
  CsvTable table(text);
  std::vector<Location> locations;
  for (std::size_t r = 0; r < table.size(); ++r) {
    Location loc;
    loc.id = table.at(r, "id");
    loc.display_name = table.at(r, "name");
    loc.case_capacity = table.int_at(r, "case_capacity");
    loc.member_capacity = table.int_at(r, "member_capacity");
    loc.supported_languages = parse_set(table, r, "languages");
    loc.services = parse_set(table, r, "services");
    loc.desired_levels = parse_levels(table, r, "desired_levels");
    locations.push_back(std::move(loc));
  }
  return locations;
}

std::vector<HistoryRecord> parse_history_csv(std::string_view text) {
  CsvTable table(text);
  std::vector<HistoryRecord> history;
  for (std::size_t r = 0; r < table.size(); ++r) {
    HistoryRecord record;
    record.member_count = table.int_at(r, "member_count");
    record.attributes.languages = parse_set(table, r, "languages");
    record.attributes.flags = parse_flags(table, r);
    if (table.has("nationality")) record.attributes.nationality = table.at(r, "nationality");
    record.location_id = table.at(r, "location_id");
    record.employed = table.int_at(r, "employed");
    if (record.employed != 0 && record.employed != 1) table.fail(r, "employed", "employed must be 0 or 1");
    if (record.member_count < 1) table.fail(r, "member_count", "member_count must be at least 1");
    history.push_back(std::move(record));
  }
  return history;
}

std::vector<Meeting> parse_meetings_csv(std::string_view text) {
  CsvTable table(text);
  std::vector<Meeting> meetings;
  for (std::size_t r = 0; r < table.size(); ++r) {
    Meeting m;
    m.client_id = table.at(r, "client_id");
    if (m.client_id.empty()) table.fail(r, "client_id", "client_id is required");
    m.latitude = table.double_at(r, "lat");
    m.longitude = table.double_at(r, "lon");
    if (m.latitude < -90.0 || m.latitude > 90.0) table.fail(r, "lat", "latitude outside [-90, 90]");
    if (m.longitude < -180.0 || m.longitude > 180.0) table.fail(r, "lon", "longitude outside [-180, 180]");
    if (table.at(r, "duration_minutes").empty()) {
      table.fail(r, "duration_minutes", "meeting " + m.client_id + " has no duration");
    }
    m.duration_minutes = table.int_at(r, "duration_minutes");
    if (m.duration_minutes <= 0) table.fail(r, "duration_minutes", "duration must be positive");
    m.selected = parse_bool(table, r, "selected");
    meetings.push_back(std::move(m));
  }
  return meetings;
}

std::map<std::string, std::string> parse_locks_csv(std::string_view text) {
  CsvTable table(text);
  std::map<std::string, std::string> locks;
  for (std::size_t r = 0; r < table.size(); ++r) locks[table.at(r, "case_id")] = table.at(r, "location_id");
  return locks;
}

std::string format_cases_csv(const Instance& instance) {
  std::string out = "id,name,member_count,employable_count,languages,nationality,flags,levels,prefs,refusals,crossrefs\n";
  for (const Case& c : instance.cases) {
    std::vector<std::string> refs;
    for (const CrossRef& ref : c.cross_refs) {
      refs.push_back((ref.kind == CrossRef::Kind::kCase ? "c:" : "l:") + ref.target);
    }
    out += csv_field(c.id) + ',' + csv_field(c.display_name) + ',' + std::to_string(c.member_count) + ',' +
           std::to_string(c.employable_count) + ',' + csv_field(join_list(c.attributes.languages, '|')) + ',' +
           csv_field(c.attributes.nationality) + ',' + format_flags(c.attributes.flags) + ',' +
           format_levels(c.attributes.levels) + ',' + csv_field(join_list(c.preference_ranks, '|')) + ',' +
           csv_field(join_list(c.refusals, '|')) + ',' + csv_field(join_list(refs, '|')) + '\n';
  }
  return out;
}

std::string format_locations_csv(const Instance& instance) {
  std::string out = "id,name,case_capacity,member_capacity,languages,services,desired_levels\n";
  for (const Location& loc : instance.locations) {
    out += csv_field(loc.id) + ',' + csv_field(loc.display_name) + ',' + std::to_string(loc.case_capacity) + ',' +
           std::to_string(loc.member_capacity) + ',' + csv_field(join_list(loc.supported_languages, '|')) + ',' +
           csv_field(join_list(loc.services, '|')) + ',' + format_levels(loc.desired_levels) + '\n';
  }
  return out;
}

std::string format_meetings_csv(std::span<const Meeting> meetings) {
  std::string out = "client_id,lat,lon,duration_minutes,selected\n";
  for (const Meeting& m : meetings) {
    out += csv_field(m.client_id) + ',' + format_double(m.latitude) + ',' + format_double(m.longitude) + ',' +
           std::to_string(m.duration_minutes) + ',' + (m.selected ? "1" : "0") + '\n';
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path.string(), {{"path", path.string()}});
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file_atomic(const std::filesystem::path& path, std::string_view content) {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  std::filesystem::path tmp = path;
  tmp += ".tmp-" + std::to_string(rng());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write " + tmp.string(), {{"path", tmp.string()}});
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::kIoError, "short write to " + tmp.string(), {{"path", tmp.string()}});
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error(ErrorCode::kIoError, "cannot replace " + path.string() + ": " + ec.message(), {{"path", path.string()}});
  }
}

FileManifest load_manifest(const std::filesystem::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, "manifest " + path.string() + ": " + e.what(),
                {{"line", 0}, {"column", 0}, {"reason", e.what()}});
  }
  const std::filesystem::path base = path.parent_path();
  auto resolve = [&](const std::string& p) {
    std::filesystem::path fp(p);
    return fp.is_absolute() ? fp : base / fp;
  };
  FileManifest m;
  try {
    m.format_version = doc.value("format_version", kManifestFormatVersion);
    if (m.format_version != kManifestFormatVersion) {
      throw Error(ErrorCode::kParseError, "unsupported manifest format_version " + std::to_string(m.format_version),
                  {{"line", 0}, {"column", 0}, {"reason", "unsupported format_version"}});
    }
    m.cases = resolve(doc.at("cases").get<std::string>());
    m.locations = resolve(doc.at("locations").get<std::string>());
    if (doc.contains("history")) m.history = resolve(doc["history"].get<std::string>());
    if (doc.contains("meetings")) m.meetings = resolve(doc["meetings"].get<std::string>());
    m.mode = parse_score_mode(doc.value("mode", std::string("outcome_predicted")));
    m.attribute_dimension = doc.value("attribute_dimension", kDefaultAttributeDimension);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, "manifest " + path.string() + ": " + e.what(),
                {{"line", 0}, {"column", 0}, {"reason", e.what()}});
  }
  return m;
}

Instance load_instance(const FileManifest& manifest) {
  Instance instance;
  instance.mode = manifest.mode;
  instance.attribute_dimension = manifest.attribute_dimension;
  instance.cases = parse_cases_csv(read_text_file(manifest.cases));
  instance.locations = parse_locations_csv(read_text_file(manifest.locations));
  require_valid(instance);
  return instance;
}

Instance load_instance(const std::filesystem::path& manifest_path) {
  return load_instance(load_manifest(manifest_path));
}

std::filesystem::path export_instance(const Instance& instance, const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  write_text_file_atomic(directory / "cases.csv", format_cases_csv(instance));
  write_text_file_atomic(directory / "locations.csv", format_locations_csv(instance));
  nlohmann::json manifest = {{"format_version", kManifestFormatVersion},
                             {"mode", to_string(instance.mode)},
                             {"attribute_dimension", instance.attribute_dimension},
                             {"cases", "cases.csv"},
                             {"locations", "locations.csv"}};
  auto path = directory / "manifest.json";
  write_text_file_atomic(path, manifest.dump(2) + "\n");
  return path;
}

std::vector<HistoryRecord> load_history(const std::filesystem::path& path) {
  return parse_history_csv(read_text_file(path));
}

std::vector<Meeting> load_meetings(const std::filesystem::path& path) {
  return parse_meetings_csv(read_text_file(path));
}

}  // namespace matchboard
