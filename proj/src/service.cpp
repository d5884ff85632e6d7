#include "matchboard/service.hpp"

#include <httplib.h>

#include <charconv>

#include "matchboard/io.hpp"
#include "matchboard/scheduler.hpp"
#include "matchboard/score.hpp"
#include "matchboard/serialization.hpp"

namespace matchboard {

using nlohmann::json;

int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSessionNotFound:
    case ErrorCode::kJobNotFound:
      return 404;
    case ErrorCode::kConflict:
      return 409;
    case ErrorCode::kRevisionRequired:
      return 428;
    case ErrorCode::kInvalidRequest:
    case ErrorCode::kParseError:
      return 400;
    case ErrorCode::kInternal:
      return 500;
    default:
      return 422;
  }
}

namespace {

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json body = json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) {
    throw Error(ErrorCode::kInvalidRequest, "request body must be a JSON object");
  }
  return body;
}

std::int64_t expected_revision(const httplib::Request& req) {
  if (!req.has_header(kRevisionHeader)) {
    throw Error(ErrorCode::kRevisionRequired, std::string("mutations require the ") + kRevisionHeader + " header");
  }
  std::string text = req.get_header_value(kRevisionHeader);
  std::int64_t value = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw Error(ErrorCode::kInvalidRequest, std::string(kRevisionHeader) + " must be an integer",
                {{"value", text}});
  }
  return value;
}

EventContext event_context(const httplib::Request& req) {
  EventContext context;
  context.actor = req.has_header(kActorHeader) ? req.get_header_value(kActorHeader) : "api";
  return context;
}

std::string required_string(const json& body, const char* field) {
  auto it = body.find(field);
  if (it == body.end() || !it->is_string()) {
    throw Error(ErrorCode::kInvalidRequest, std::string("field '") + field + "' must be a string",
                {{"field", field}});
  }
  return it->get<std::string>();
}

std::string required_query(const httplib::Request& req, const char* name) {
  if (!req.has_param(name)) {
    throw Error(ErrorCode::kInvalidRequest, std::string("query parameter '") + name + "' is required",
                {{"parameter", name}});
  }
  return req.get_param_value(name);
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

}  // namespace

Service::Service(ServiceOptions options) : options_(std::move(options)), server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

Service::~Service() {
  stop();
  std::lock_guard lock(jobs_mutex_);
  jobs_.clear();  // waits for background solves
}

int Service::bind(const std::string& host, int port) {
  int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) {
    throw Error(ErrorCode::kIoError, "cannot bind " + host + ":" + std::to_string(port),
                {{"host", host}, {"port", port}});
  }
  return bound;
}

void Service::run() { server_->listen_after_bind(); }

int Service::start(const std::string& host, int port) {
  int bound = bind(host, port);
  thread_ = std::thread([this] { run(); });
  server_->wait_until_ready();
  return bound;
}

void Service::stop() {
  if (server_->is_running()) server_->stop();
  if (thread_.joinable()) thread_.join();
}

std::filesystem::path Service::resolve_data_path(const std::string& relative) const {
  std::filesystem::path p(relative);
  if (p.is_absolute()) throw Error(ErrorCode::kInvalidRequest, "paths must be relative to the data directory");
  for (const auto& part : p) {
    if (part == "..") throw Error(ErrorCode::kInvalidRequest, "paths may not leave the data directory");
  }
  return options_.data_dir / p;
}

Service::JobResult Service::run_with_budget(Work work) {
  auto guarded = [work = std::move(work)]() -> JobResult {
    try {
      return work();
    } catch (const Error& e) {
      return {http_status_for(e.code()), error_to_json(e)};
    } catch (const std::exception& e) {
      return {500, error_to_json(Error(ErrorCode::kInternal, e.what()))};
    }
  };
  std::shared_future<JobResult> future = std::async(std::launch::async, std::move(guarded)).share();
  if (future.wait_for(options_.latency_budget) == std::future_status::ready) return future.get();
  std::string token = generate_session_id();
  {
    std::lock_guard lock(jobs_mutex_);
    jobs_[token] = future;
  }
  return {202, {{"job", token}, {"status", "running"}, {"poll", "/jobs/" + token}}};
}

void Service::install_routes() {
  httplib::Server& s = *server_;

  // Wraps a handler so engine errors become ApiError responses.
  auto handle = [](auto fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
      try {
        fn(req, res);
      } catch (const Error& e) {
        send_json(res, http_status_for(e.code()), error_to_json(e));
      } catch (const json::exception& e) {
        send_json(res, 400, error_to_json(Error(ErrorCode::kInvalidRequest, e.what())));
      } catch (const std::exception& e) {
        send_json(res, 500, error_to_json(Error(ErrorCode::kInternal, e.what())));
      }
    };
  };
  auto respond = [](httplib::Response& res, const JobResult& r) { send_json(res, r.status, r.body); };

  s.Get("/health", handle([](const httplib::Request&, httplib::Response& res) {
          send_json(res, 200, {{"status", "ok"}});
        }));

  s.Get("/sessions", handle([this](const httplib::Request&, httplib::Response& res) {
          send_json(res, 200, {{"sessions", sessions_.session_ids()}});
        }));

  s.Post("/sessions", handle([this, respond](const httplib::Request& req, httplib::Response& res) {
           json body = parse_body(req);
           std::shared_ptr<const Instance> instance;
           if (body.contains("manifest")) {
             instance = std::make_shared<const Instance>(
                 load_instance(resolve_data_path(required_string(body, "manifest"))));
           } else if (body.contains("instance")) {
             Instance parsed = body.at("instance").get<Instance>();
             require_valid(parsed);
             instance = std::make_shared<const Instance>(std::move(parsed));
           } else {
             throw Error(ErrorCode::kInvalidRequest, "provide either 'manifest' or 'instance'");
           }

           ScoreSource source = ScoreWeights{body.value("alpha", 0.5)};
           if (instance->mode == ScoreMode::kOutcomePredicted) {
             if (body.contains("model")) {
               source = model_from_json(body.at("model"));
             } else if (body.contains("model_path")) {
               json doc = json::parse(read_text_file(resolve_data_path(required_string(body, "model_path"))),
                                      nullptr, false);
               source = model_from_json(doc);
             } else {
               throw Error(ErrorCode::kInvalidRequest, "outcome_predicted instances need 'model' or 'model_path'");
             }
           }
           OpenOptions options = body.value("options", OpenOptions{});
           EventContext context = event_context(req);
           respond(res, run_with_budget([this, instance, source, options, context] {
                     auto matrix = std::make_shared<const ScoreMatrix>(build_score_matrix(*instance, source));
                     auto snapshot = sessions_.open(instance, matrix, options, context);
                     return JobResult{201, board_view(*snapshot)};
                   }));
         }));

  s.Get(R"(/sessions/([^/]+))", handle([this](const httplib::Request& req, httplib::Response& res) {
          send_json(res, 200, board_view(*sessions_.get(req.matches[1])));
        }));

  s.Get(R"(/sessions/([^/]+)/snapshot)", handle([this](const httplib::Request& req, httplib::Response& res) {
          res.status = 200;
          res.set_content(snapshot_session(*sessions_.get(req.matches[1])), "application/json");
        }));

  s.Get(R"(/sessions/([^/]+)/whatif)", handle([this](const httplib::Request& req, httplib::Response& res) {
          auto snapshot = sessions_.get(req.matches[1]);
          WhatIf w = whatif_score(*snapshot, required_query(req, "case"), required_query(req, "target"));
          json body = w;
          body["revision"] = snapshot->revision;
          send_json(res, 200, body);
        }));

  s.Get(R"(/sessions/([^/]+)/crossrefs/([^/]+))",
        handle([this](const httplib::Request& req, httplib::Response& res) {
          send_json(res, 200, cross_reference_view(*sessions_.get(req.matches[1]), std::string(req.matches[2])));
        }));

  s.Get(R"(/sessions/([^/]+)/export)", handle([this](const httplib::Request& req, httplib::Response& res) {
          ExportFormat format = parse_export_format(req.has_param("format") ? req.get_param_value("format") : "csv");
          res.status = 200;
          res.set_content(export_assignment(*sessions_.get(req.matches[1]), format),
                          format == ExportFormat::kCsv ? "text/csv" : "application/json");
        }));

  // Mutations: header-supplied expected revision, one writer per session.
  auto mutation = [this, handle, respond](std::function<BoardState(const BoardState&, const json&,
                                                                   const EventContext&)> apply) {
    return handle([this, respond, apply](const httplib::Request& req, httplib::Response& res) {
      std::string id = req.matches[1];
      std::int64_t revision = expected_revision(req);
      json body = parse_body(req);
      EventContext context = event_context(req);
      sessions_.get(id);  // 404 before any work
      respond(res, run_with_budget([this, id, revision, body, context, apply] {
                auto snapshot = sessions_.mutate(
                    id, revision, [&](const BoardState& state) { return apply(state, body, context); });
                return JobResult{200, board_view(*snapshot)};
              }));
    });
  };

  s.Post(R"(/sessions/([^/]+)/move)", mutation([](const BoardState& state, const json& body, const EventContext& ctx) {
           return apply_move(state, required_string(body, "case"), required_string(body, "target"), ctx);
         }));
  s.Post(R"(/sessions/([^/]+)/lock)", mutation([](const BoardState& state, const json& body, const EventContext& ctx) {
           return toggle_lock(state, required_string(body, "case"), ctx);
         }));
  s.Post(R"(/sessions/([^/]+)/capacity)",
         mutation([](const BoardState& state, const json& body, const EventContext& ctx) {
           if (!body.contains("delta") || !body.at("delta").is_number_integer()) {
             throw Error(ErrorCode::kInvalidRequest, "field 'delta' must be an integer", {{"field", "delta"}});
           }
           return adjust_capacity(state, required_string(body, "location"),
                                  parse_capacity_dimension(required_string(body, "dimension")),
                                  body.at("delta").get<int>(), ctx);
         }));
  s.Post(R"(/sessions/([^/]+)/reoptimize)",
         mutation([](const BoardState& state, const json&, const EventContext& ctx) { return reoptimize(state, ctx); }));

  s.Get(R"(/jobs/([^/]+))", handle([this](const httplib::Request& req, httplib::Response& res) {
          std::string token = req.matches[1];
          std::shared_future<JobResult> future;
          {
            std::lock_guard lock(jobs_mutex_);
            auto it = jobs_.find(token);
            if (it == jobs_.end()) {
              throw Error(ErrorCode::kJobNotFound, "no job '" + token + "'", {{"job", token}});
            }
            future = it->second;
          }
          if (future.wait_for(std::chrono::milliseconds(0)) != std::future_status::ready) {
            send_json(res, 202, {{"job", token}, {"status", "running"}});
            return;
          }
          const JobResult& result = future.get();
          send_json(res, 200, {{"job", token}, {"status", "done"}, {"http_status", result.status}, {"result", result.body}});
        }));

  s.Post("/train", handle([this](const httplib::Request& req, httplib::Response& res) {
           json body = parse_body(req);
           std::vector<HistoryRecord> history;
           if (body.contains("history")) {
             history = load_history(resolve_data_path(required_string(body, "history")));
           } else {
             history = body.at("records").get<std::vector<HistoryRecord>>();
           }
           std::vector<Location> locations;
           if (body.contains("manifest")) {
             locations = load_instance(resolve_data_path(required_string(body, "manifest"))).locations;
           } else {
             locations = body.at("locations").get<std::vector<Location>>();
           }
           TrainOptions options;
           options.l2_strength = body.value("l2", options.l2_strength);
           send_json(res, 200, model_to_json(train_employment_model(history, locations, options)));
         }));

  s.Post("/schedule", handle([this](const httplib::Request& req, httplib::Response& res) {
           json body = parse_body(req);
           std::vector<Meeting> meetings;
           if (body.contains("meetings_path")) {
             meetings = load_meetings(resolve_data_path(required_string(body, "meetings_path")));
           } else {
             meetings = body.at("meetings").get<std::vector<Meeting>>();
           }
           ScheduleConfig config = body.value("config", ScheduleConfig{});
           auto seed = body.value("seed", kDefaultScheduleSeed);
           send_json(res, 200, build_schedule(meetings, config, seed));
         }));

  s.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr) {
    send_json(res, 500, error_to_json(Error(ErrorCode::kInternal, "unhandled server fault")));
  });
}

}  // namespace matchboard
