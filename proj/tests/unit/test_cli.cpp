#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>

#include "matchboard/io.hpp"
#include "matchboard/serialization.hpp"

using namespace matchboard;

namespace {

const std::filesystem::path kFixtures = MATCHBOARD_FIXTURES;
const std::string kCli = MATCHBOARD_CLI;

struct Run {
  int code = -1;
  std::string out;
};

// Runs the CLI with stderr folded into stdout.
Run run(const std::string& args) {
  Run r;
  std::string command = kCli + " " + args + " 2>&1";
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "matchboard_cli";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string fixture(const std::string& rel) { return (kFixtures / rel).string(); }

}  // namespace

TEST_CASE("solve on the oracle fixture prints the oracle objective") {
  Run r = run("solve --manifest " + fixture("goat/manifest.json"));
  REQUIRE(r.code == 0);
  auto instance = std::make_shared<const Instance>(load_instance(kFixtures / "goat" / "manifest.json"));
  auto matrix = std::make_shared<const ScoreMatrix>(build_score_matrix(*instance, ScoreWeights{0.5}));
  Assignment oracle = brute_force_oracle({instance, matrix, {}, {}, 0.0, true});
  CHECK(r.out.find("objective " + format_double(oracle.objective) + "\n") != std::string::npos);
}

TEST_CASE("train and solve outputs are byte-identical to library calls") {
  auto model_path = scratch("model.json");
  auto export_path = scratch("export.csv");
  Run t = run("train --history " + fixture("annie/history.csv") + " --manifest " + fixture("annie/manifest.json") +
              " --out " + model_path.string());
  REQUIRE(t.code == 0);
  Instance inst = load_instance(kFixtures / "annie" / "manifest.json");
  TrainedModel model = train_employment_model(load_history(kFixtures / "annie" / "history.csv"), inst.locations, {});
  CHECK(read_text_file(model_path) == model_to_json(model).dump(2) + "\n");

  Run s = run("solve --manifest " + fixture("annie/manifest.json") + " --model " + model_path.string() +
              " --bonus 0.5 --locks " + fixture("annie/locks.csv") + " --out " + export_path.string());
  REQUIRE(s.code == 0);
  OpenOptions options;
  options.session_id = "cli";
  options.cross_ref_bonus = 0.5;
  options.locks = {{"fam05", "aff_denver"}};
  auto instance = std::make_shared<const Instance>(inst);
  BoardState state = open_session(instance, std::make_shared<const ScoreMatrix>(build_score_matrix(inst, model)), options);
  CHECK(read_text_file(export_path) == export_assignment(state, ExportFormat::kCsv));
  CHECK(s.out.find("aff_boston,") != std::string::npos);  // subscription report
}

TEST_CASE("score writes the matrix csv") {
  auto out = scratch("matrix.csv");
  Run r = run("score --manifest " + fixture("goat/manifest.json") + " --alpha 0.5 --out " + out.string());
  REQUIRE(r.code == 0);
  Instance inst = load_instance(kFixtures / "goat" / "manifest.json");
  CHECK(read_text_file(out) == format_score_matrix_csv(inst, build_score_matrix(inst, ScoreWeights{0.5})));
}

TEST_CASE("schedule output matches the library for the default seed") {
  Run r = run("schedule --meetings " + fixture("meetings_15.csv") + " --days 5 --min 3 --max 9 --cap-minutes 360");
  REQUIRE(r.code == 0);
  Schedule s = build_schedule(load_meetings(kFixtures / "meetings_15.csv"), {5, 3, 9, 360}, kDefaultScheduleSeed);
  CHECK(r.out == nlohmann::json(s).dump(2) + "\n");
}

TEST_CASE("exit codes and single-line coded errors") {
  Run too_many = run("schedule --meetings " + fixture("meetings_15.csv") + " --days 1 --min 3 --max 9 --cap-minutes 360");
  CHECK(too_many.code == 2);
  CHECK(too_many.out.rfind("error: TOO_MANY_PER_DAY: ", 0) == 0);
  CHECK(std::count(too_many.out.begin(), too_many.out.end(), '\n') == 1);

  Run degenerate = run("train --history " + fixture("history_single_class.csv") + " --manifest " +
                       fixture("annie/manifest.json") + " --out " + scratch("x.json").string());
  CHECK(degenerate.code == 1);
  CHECK(degenerate.out.rfind("error: DEGENERATE_LABELS: ", 0) == 0);

  Run invalid = run("solve --manifest " + fixture("invalid/manifest.json"));
  CHECK(invalid.code == 1);
  CHECK(invalid.out.rfind("error: VALIDATION_FAILED: ", 0) == 0);

  auto model_path = scratch("model2.json");
  REQUIRE(run("train --history " + fixture("annie/history.csv") + " --manifest " + fixture("annie/manifest.json") +
              " --out " + model_path.string()).code == 0);
  Run locks = run("solve --manifest " + fixture("annie/manifest.json") + " --model " + model_path.string() +
                  " --locks " + fixture("annie/locks_over.csv"));
  CHECK(locks.code == 2);
  CHECK(locks.out.rfind("error: INFEASIBLE_LOCKS: ", 0) == 0);
}

TEST_CASE("replay verifies a snapshot") {
  auto instance = std::make_shared<const Instance>(load_instance(kFixtures / "goat" / "manifest.json"));
  auto matrix = std::make_shared<const ScoreMatrix>(build_score_matrix(*instance, ScoreWeights{0.5}));
  BoardState s = open_session(instance, matrix, {"snap", 0.25, true, {}, {}});
  s = apply_move(s, "s00", "UNASSIGNED");
  s = toggle_lock(s, "s01");
  s = reoptimize(s);
  auto path = scratch("snapshot.json");
  write_text_file_atomic(path, snapshot_session(s));
  Run ok = run("replay --snapshot " + path.string());
  CHECK(ok.code == 0);
  CHECK(ok.out.rfind("replay ok: 4 events", 0) == 0);

  auto doc = nlohmann::json::parse(snapshot_session(s));
  doc["opening"]["cross_ref_bonus"] = 3.0;  // log no longer explains the state
  write_text_file_atomic(path, doc.dump());
  Run bad = run("replay --snapshot " + path.string());
  CHECK(bad.code == 1);
  CHECK(bad.out.rfind("error: REPLAY_MISMATCH: ", 0) == 0);

  write_text_file_atomic(path, "{\"format\":");
  Run truncated = run("replay --snapshot " + path.string());
  CHECK(truncated.code == 1);
  CHECK(truncated.out.rfind("error: SNAPSHOT_ERROR: ", 0) == 0);
}
