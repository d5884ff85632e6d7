#include <doctest.h>

#include <random>

#include "matchboard/io.hpp"
#include "matchboard/serialization.hpp"
#include "random_instances.hpp"

using namespace matchboard;
using namespace matchboard::testing;

namespace {

const EventContext kCtx{"tester", "2026-01-01T00:00:00.000Z"};

BoardState busy_board(std::mt19937_64& rng, int events) {
  BoardState s = random_board(rng);
  int recorded = 0;
  while (recorded < events) {
    const Instance& inst = s.instance();
    std::string c = inst.cases[rng() % inst.cases.size()].id;
    std::string l = inst.locations[rng() % inst.locations.size()].id;
    try {
      switch (rng() % 4) {
        case 0:
        case 1:
          s = apply_move(s, c, l, kCtx);
          break;
        case 2:
          s = toggle_lock(s, c, kCtx);
          break;
        default:
          s = adjust_capacity(s, l, CapacityDimension::kCases, 1, kCtx);
      }
      ++recorded;
    } catch (const Error&) {
    }
  }
  return s;
}

}  // namespace

TEST_CASE("fresh session snapshot round-trips") {
  std::mt19937_64 rng(1);
  BoardState s = random_board(rng);
  CHECK(restore_session(snapshot_session(s)) == s);
}

TEST_CASE("50-event session round-trips and still replays") {
  std::mt19937_64 rng(2);
  BoardState s = busy_board(rng, 50);
  CHECK(s.revision == 50);
  BoardState restored = restore_session(snapshot_session(s));
  CHECK(restored == s);
  CHECK(replay(restored) == s);
}

TEST_CASE("damaged snapshots raise SNAPSHOT_ERROR") {
  std::mt19937_64 rng(3);
  BoardState s = busy_board(rng, 5);
  std::string bytes = snapshot_session(s);
  auto expect_error = [](const std::string& text) {
    try {
      restore_session(text);
      FAIL("expected SNAPSHOT_ERROR");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kSnapshotError);
    }
  };
  expect_error(bytes.substr(0, bytes.size() / 2));
  expect_error("");
  expect_error("[1,2,3]");
  auto doc = nlohmann::json::parse(bytes);
  doc["version"] = 99;
  expect_error(doc.dump());
  doc = nlohmann::json::parse(bytes);
  doc["total_score"] = doc["total_score"].get<double>() + 1.0;
  expect_error(doc.dump());
  doc = nlohmann::json::parse(bytes);
  doc["placement"][0] = "nowhere";
  expect_error(doc.dump());
}

TEST_CASE("export has one row per case and a matching footer") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    BoardState s = busy_board(rng, 4);
    std::string csv = export_assignment(s, ExportFormat::kCsv);
    auto rows = parse_csv(csv);
    REQUIRE(rows.size() == s.instance().cases.size() + 2);
    CHECK(rows.front().fields == std::vector<std::string>{"case_id", "location_id", "pair_score", "locked", "violations"});
    CHECK(rows.back().fields[0] == "TOTAL");
    CHECK(std::stod(rows.back().fields[2]) == s.total_score);
    CHECK(std::stod(rows.back().fields[2]) == doctest::Approx(recompute_total(s)).epsilon(1e-12));
    auto json = nlohmann::json::parse(export_assignment(s, ExportFormat::kJson));
    CHECK(json.at("rows").size() == s.instance().cases.size());
    CHECK(json.at("total_score").get<double>() == s.total_score);
  }
}

TEST_CASE("empty board exports header and footer only") {
  auto instance = std::make_shared<Instance>();
  auto matrix = std::make_shared<ScoreMatrix>(0, 0);
  BoardState s = open_session(instance, matrix, {}, kCtx);
  CHECK(export_assignment(s, ExportFormat::kCsv) == "case_id,location_id,pair_score,locked,violations\nTOTAL,,0,,\n");
}

TEST_CASE("model documents are versioned and round-trip") {
  TrainedModel model{{"a", "b"}, {0.5, -1.25}, 0.125, {12, 0.5, 0.001, true}};
  nlohmann::json doc = model_to_json(model);
  CHECK(doc.at("format") == "matchboard-model");
  CHECK(model_from_json(nlohmann::json::parse(doc.dump())) == model);
  doc["version"] = 2;
  CHECK_THROWS_AS(model_from_json(doc), Error);
  doc = model_to_json(model);
  doc["weights"].push_back(1.0);
  CHECK_THROWS_AS(model_from_json(doc), Error);
}

TEST_CASE("instance JSON round-trips") {
  Instance inst = load_instance(std::filesystem::path(MATCHBOARD_FIXTURES) / "annie" / "manifest.json");
  nlohmann::json j = inst;
  CHECK(j.get<Instance>() == inst);
}

TEST_CASE("board view lists every case") {
  std::mt19937_64 rng(5);
  BoardState s = random_board(rng);
  auto view = board_view(s);
  CHECK(view.at("placement").size() == s.instance().cases.size());
  CHECK(view.at("revision") == s.revision);
  CHECK(view.at("subscription").size() == s.instance().locations.size());
}
