#include <doctest.h>

#include <filesystem>

#include "matchboard/io.hpp"

using namespace matchboard;

namespace {

const std::filesystem::path kFixtures = MATCHBOARD_FIXTURES;

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("matchboard_io_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("csv parsing handles quotes, embedded commas and newlines") {
  auto rows = parse_csv("a,b\n\"x, y\",\"say \"\"hi\"\"\"\n\"multi\nline\",2\n\n");
  REQUIRE(rows.size() == 3);
  CHECK(rows[1].fields == std::vector<std::string>{"x, y", "say \"hi\""});
  CHECK(rows[2].fields[0] == "multi\nline");
  CHECK(rows[2].line == 3);
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("q\"") == "\"q\"\"\"");
}

TEST_CASE("csv errors carry line and column") {
  try {
    parse_csv("a,b\n\"open,1\n");
    FAIL("expected PARSE_ERROR");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParseError);
    CHECK(e.details().contains("line"));
    CHECK(e.details().contains("column"));
  }
  try {
    parse_cases_csv("id,name,member_count,employable_count,languages,nationality,flags,levels,prefs,refusals,crossrefs\n"
                    "x,X,two,0,,,,,,,\n");
    FAIL("expected PARSE_ERROR");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParseError);
    CHECK(e.details().at("line") == 2);
    CHECK(e.details().at("column") == 3);
  }
}

TEST_CASE("format_double round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, -0.0, 123.0}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(2.5) == "2.5");
}

TEST_CASE("fixture loads into a valid instance") {
  Instance inst = load_instance(kFixtures / "annie" / "manifest.json");
  CHECK(inst.cases.size() == 6);
  CHECK(inst.locations.size() == 3);
  CHECK(inst.mode == ScoreMode::kOutcomePredicted);
  CHECK(inst.cases[0].cross_refs.front().kind == CrossRef::Kind::kCase);
  CHECK(inst.cases[0].attributes.flags.contains(FamilyFlag::kLargeFamily));
  Instance goat = load_instance(kFixtures / "goat" / "manifest.json");
  CHECK(goat.mode == ScoreMode::kPreferenceAttribute);
  CHECK(goat.cases[0].attributes.levels.size() == 8);
}

TEST_CASE("member_count 0 fails validation") {
  try {
    load_instance(kFixtures / "invalid" / "manifest.json");
    FAIL("expected VALIDATION_FAILED");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kValidationFailed);
  }
}

TEST_CASE("export then load reproduces the instance") {
  for (const char* name : {"annie", "goat"}) {
    Instance original = load_instance(kFixtures / name / "manifest.json");
    auto dir = scratch_dir(name);
    auto manifest = export_instance(original, dir);
    CHECK(load_instance(manifest) == original);
  }
}

TEST_CASE("missing files raise IO_ERROR") {
  try {
    read_text_file(kFixtures / "does_not_exist.csv");
    FAIL("expected IO_ERROR");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIoError);
  }
}

TEST_CASE("atomic writes replace content without leaving temporaries") {
  auto dir = scratch_dir("atomic");
  auto path = dir / "out.txt";
  write_text_file_atomic(path, "first");
  write_text_file_atomic(path, "second");
  CHECK(read_text_file(path) == "second");
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& entry : std::filesystem::directory_iterator(dir)) ++files;
  CHECK(files == 1);
}

TEST_CASE("meetings parsing") {
  auto meetings = load_meetings(kFixtures / "meetings_15.csv");
  CHECK(meetings.size() == 17);
  CHECK_FALSE(meetings.back().selected);
  CHECK(parse_meetings_csv(format_meetings_csv(meetings)) == meetings);
  try {
    parse_meetings_csv("client_id,lat,lon,duration_minutes,selected\nx,1,1,,1\n");
    FAIL("expected PARSE_ERROR");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParseError);
  }
}

TEST_CASE("history and locks parsing") {
  auto history = load_history(kFixtures / "annie" / "history.csv");
  CHECK(history.size() == 120);
  auto locks = parse_locks_csv(read_text_file(kFixtures / "annie" / "locks.csv"));
  CHECK(locks.at("fam05") == "aff_denver");
  CHECK_THROWS_AS(parse_history_csv("member_count,languages,flags,location_id,employed\n2,ar,,x,3\n"), Error);
}

TEST_CASE("manifest with unsupported version is a parse error") {
  auto dir = scratch_dir("manifest");
  write_text_file_atomic(dir / "manifest.json", R"({"format_version": 9, "cases": "c.csv", "locations": "l.csv"})");
  try {
    load_manifest(dir / "manifest.json");
    FAIL("expected PARSE_ERROR");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParseError);
  }
}
