#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <iostream>
#include <sstream>
#include <stop_token>
#include <thread>

#include "matchboard/board.hpp"
#include "matchboard/io.hpp"
#include "matchboard/scheduler.hpp"
#include "matchboard/score.hpp"
#include "matchboard/serialization.hpp"
#include "matchboard/service.hpp"

using namespace matchboard;
using nlohmann::json;

namespace {

volatile std::sig_atomic_t g_interrupted = 0;

extern "C" void on_signal(int) { g_interrupted = 1; }

// Forwards SIGINT/SIGTERM to a stop_source from an ordinary thread.
class InterruptBridge {
 public:
  InterruptBridge() {
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    watcher_ = std::jthread([this](std::stop_token self) {
      while (!self.stop_requested()) {
        if (g_interrupted) {
          source_.request_stop();
          return;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
      }
    });
  }
  std::stop_token token() const { return source_.get_token(); }
  bool interrupted() const { return g_interrupted != 0; }

 private:
  std::stop_source source_;
  std::jthread watcher_;
};

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInfeasible:
    case ErrorCode::kInfeasibleLocks:
    case ErrorCode::kTooManyPerDay:
    case ErrorCode::kTooFewMeetings:
    case ErrorCode::kCountPartitionImpossible:
    case ErrorCode::kMeetingTooLong:
    case ErrorCode::kTotalMinutesExceeded:
      return 2;
    default:
      return 1;
  }
}

void emit(const std::string& content, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << content;
  } else {
    write_text_file_atomic(out_path, content);
  }
}

ScoreSource score_source(const Instance& instance, const FileManifest& manifest, const std::string& model_path,
                         double alpha) {
  if (instance.mode == ScoreMode::kPreferenceAttribute) return ScoreWeights{alpha};
  if (!model_path.empty()) return model_from_json(json::parse(read_text_file(model_path), nullptr, false));
  if (manifest.history) {
    return train_employment_model(load_history(*manifest.history), instance.locations, TrainOptions{});
  }
  throw Error(ErrorCode::kInvalidRequest, "outcome_predicted instances need --model or a history file in the manifest");
}

std::string subscription_table(const BoardState& state) {
  std::ostringstream out;
  out << "location,placed_cases,placed_members,case_capacity,member_capacity,fill_ratio,state\n";
  for (const SubscriptionRow& r : subscription_report(state.placement, state.request)) {
    const char* label = r.over ? "over" : r.full ? "full" : r.undersubscribed ? "under" : "ok";
    out << r.location << ',' << r.placed_cases << ',' << r.placed_members << ',' << r.case_capacity << ','
        << r.member_capacity << ',' << format_double(r.fill_ratio) << ',' << label << '\n';
  }
  return out.str();
}

struct SolveArgs {
  std::string manifest;
  std::string locks;
  std::string model;
  std::string out;
  std::string format = "csv";
  double bonus = 0.0;
  double alpha = 0.5;
  bool no_unassigned = false;
  int time_limit_ms = 0;
};

int run_solve(const SolveArgs& args, const InterruptBridge& interrupt) {
  FileManifest manifest = load_manifest(args.manifest);
  auto instance = std::make_shared<const Instance>(load_instance(manifest));
  auto matrix =
      std::make_shared<const ScoreMatrix>(build_score_matrix(*instance, score_source(*instance, manifest, args.model, args.alpha)));
  OpenOptions options;
  options.session_id = "cli";
  options.cross_ref_bonus = args.bonus;
  options.allow_unassigned = !args.no_unassigned;
  if (!args.locks.empty()) options.locks = parse_locks_csv(read_text_file(args.locks));
  SolveOptions solve_options;
  solve_options.stop = interrupt.token();
  if (args.time_limit_ms > 0) solve_options.time_limit = std::chrono::milliseconds(args.time_limit_ms);

  BoardState state = open_session(instance, matrix, options, {"cli", ""}, solve_options);
  ExportFormat format = parse_export_format(args.format);
  emit(export_assignment(state, format), args.out);
  std::cout << (args.out.empty() ? "\n" : "") << "status " << state.event_log.front().payload.at("status").get<std::string>()
            << "\nobjective " << format_double(state.total_score) << "\n"
            << subscription_table(state);
  return 0;
}

int run_train(const std::string& history_path, const std::string& manifest_path, const std::string& locations_path,
              const std::string& out, double l2) {
  std::vector<Location> locations;
  if (!manifest_path.empty()) {
    locations = load_instance(manifest_path).locations;
  } else {
    locations = parse_locations_csv(read_text_file(locations_path));
  }
  TrainOptions options;
  options.l2_strength = l2;
  TrainedModel model = train_employment_model(load_history(history_path), locations, options);
  emit(model_to_json(model).dump(2) + "\n", out);
  std::cerr << "trained " << model.feature_schema.size() << " features in " << model.training_meta.iterations
            << " iterations, loss " << format_double(model.training_meta.final_loss)
            << (model.training_meta.converged ? "" : " (not converged)") << "\n";
  return 0;
}

int run_score(const std::string& manifest_path, const std::string& model, double alpha, const std::string& out) {
  FileManifest manifest = load_manifest(manifest_path);
  Instance instance = load_instance(manifest);
  ScoreMatrix matrix = build_score_matrix(instance, score_source(instance, manifest, model, alpha));
  emit(format_score_matrix_csv(instance, matrix), out);
  return 0;
}

int run_schedule(const std::string& meetings, const ScheduleConfig& config, std::uint64_t seed, int restarts,
                 const std::string& out) {
  ScheduleOptions options;
  options.restarts = restarts;
  Schedule schedule = build_schedule(load_meetings(meetings), config, seed, options);
  emit(json(schedule).dump(2) + "\n", out);
  return 0;
}

int run_serve(const std::string& bind, const std::string& data, int budget_ms) {
  auto colon = bind.rfind(':');
  if (colon == std::string::npos) throw Error(ErrorCode::kInvalidRequest, "--bind expects HOST:PORT");
  std::string host = bind.substr(0, colon);
  int port = std::stoi(bind.substr(colon + 1));
  if (!std::filesystem::is_directory(data)) {
    throw Error(ErrorCode::kIoError, "data directory '" + data + "' is not readable", {{"path", data}});
  }
  ServiceOptions options;
  options.data_dir = data;
  options.latency_budget = std::chrono::milliseconds(budget_ms);
  InterruptBridge interrupt;
  Service service(options);
  int bound = service.start(host, port);
  std::cerr << "listening on " << host << ":" << bound << "\n";
  while (!interrupt.interrupted()) std::this_thread::sleep_for(std::chrono::milliseconds(50));
  service.stop();
  std::cerr << "stopped\n";
  return 0;
}

int run_replay(const std::string& snapshot_path) {
  BoardState state = restore_session(read_text_file(snapshot_path));
  BoardState replayed = replay(state);
  if (!(replayed == state)) {
    std::int64_t first = 0;
    while (first < static_cast<std::int64_t>(std::min(replayed.event_log.size(), state.event_log.size())) &&
           replayed.event_log[first] == state.event_log[first]) {
      ++first;
    }
    throw Error(ErrorCode::kReplayMismatch, "replayed log does not reproduce the snapshot",
                {{"first_differing_event", first},
                 {"recorded_total", state.total_score},
                 {"replayed_total", replayed.total_score}});
  }
  std::cout << "replay ok: " << state.event_log.size() << " events, revision " << state.revision << ", total "
            << format_double(state.total_score) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"matchboard: capacitated matching, outcome scoring and visit scheduling"};
  app.require_subcommand(1);

  SolveArgs solve_args;
  auto* solve = app.add_subcommand("solve", "Solve an instance and export the assignment");
  solve->add_option("--manifest", solve_args.manifest, "Instance manifest (JSON)")->required()->check(CLI::ExistingFile);
  solve->add_option("--locks", solve_args.locks, "CSV of case_id,location_id locks")->check(CLI::ExistingFile);
  solve->add_option("--bonus", solve_args.bonus, "Bonus per satisfied cross reference");
  solve->add_option("--out", solve_args.out, "Write the export here instead of stdout");
  solve->add_option("--format", solve_args.format, "Export format")->check(CLI::IsMember({"csv", "json"}));
  solve->add_option("--model", solve_args.model, "Trained model for outcome_predicted instances")->check(CLI::ExistingFile);
  solve->add_option("--alpha", solve_args.alpha, "Preference weight for preference_attribute instances");
  solve->add_flag("--no-unassigned", solve_args.no_unassigned, "Every case must be placed");
  solve->add_option("--time-limit-ms", solve_args.time_limit_ms, "Stop the search after this many milliseconds");

  std::string history, train_manifest, train_locations, train_out;
  double l2 = TrainOptions{}.l2_strength;
  auto* train = app.add_subcommand("train", "Fit the employment model on placement history");
  train->add_option("--history", history, "history.csv")->required()->check(CLI::ExistingFile);
  auto* tm = train->add_option("--manifest", train_manifest, "Manifest supplying the locations")->check(CLI::ExistingFile);
  auto* tl = train->add_option("--locations", train_locations, "locations.csv")->check(CLI::ExistingFile);
  tm->excludes(tl);
  train->add_option("--out", train_out, "model.json")->required();
  train->add_option("--l2", l2, "L2 penalty strength");

  std::string score_manifest, score_model, score_out;
  double score_alpha = 0.5;
  auto* score = app.add_subcommand("score", "Write the score matrix");
  score->add_option("--manifest", score_manifest, "Instance manifest")->required()->check(CLI::ExistingFile);
  score->add_option("--model", score_model, "model.json")->check(CLI::ExistingFile);
  score->add_option("--alpha", score_alpha, "Preference weight for preference_attribute instances");
  score->add_option("--out", score_out, "matrix.csv");

  std::string meetings, schedule_out;
  ScheduleConfig config;
  std::uint64_t seed = kDefaultScheduleSeed;
  int restarts = ScheduleOptions{}.restarts;
  auto* schedule = app.add_subcommand("schedule", "Group meetings into travel-minimising days");
  schedule->add_option("--meetings", meetings, "meetings.csv")->required()->check(CLI::ExistingFile);
  schedule->add_option("--days", config.days, "Days available");
  schedule->add_option("--min", config.min_per_day, "Minimum meetings per used day");
  schedule->add_option("--max", config.max_per_day, "Maximum meetings per day");
  schedule->add_option("--cap-minutes", config.max_minutes_per_day, "Minutes available per day");
  schedule->add_option("--seed", seed, "Random seed")->capture_default_str();
  schedule->add_option("--restarts", restarts, "Independent restarts");
  schedule->add_option("--out", schedule_out, "Write the schedule JSON here");

  std::string bind = "127.0.0.1:8080", data = ".";
  int budget_ms = 2000;
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--bind", bind, "HOST:PORT")->capture_default_str();
  serve->add_option("--data", data, "Directory holding manifests and data files")->capture_default_str();
  serve->add_option("--budget-ms", budget_ms, "Answer 202 with a job token after this long")->capture_default_str();

  std::string snapshot;
  auto* replay_cmd = app.add_subcommand("replay", "Re-run a snapshot's event log and verify it reproduces the state");
  replay_cmd->add_option("--snapshot", snapshot, "Snapshot file")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*solve) {
      InterruptBridge interrupt;
      return run_solve(solve_args, interrupt);
    }
    if (*train) {
      if (train_manifest.empty() && train_locations.empty()) {
        throw Error(ErrorCode::kInvalidRequest, "train needs --manifest or --locations for the location features");
      }
      return run_train(history, train_manifest, train_locations, train_out, l2);
    }
    if (*score) return run_score(score_manifest, score_model, score_alpha, score_out);
    if (*schedule) return run_schedule(meetings, config, seed, restarts, schedule_out);
    if (*serve) return run_serve(bind, data, budget_ms);
    if (*replay_cmd) return run_replay(snapshot);
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: INTERNAL: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
