#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include <json.hpp>

#include "matchboard/board.hpp"
#include "matchboard/error.hpp"

namespace httplib {
class Server;
}

namespace matchboard {

inline constexpr const char* kRevisionHeader = "X-Expected-Revision";
inline constexpr const char* kActorHeader = "X-Actor";

struct ServiceOptions {
  std::filesystem::path data_dir = ".";
  // Solves running longer than this answer 202 with a job token to poll.
  std::chrono::milliseconds latency_budget{2000};
};

int http_status_for(ErrorCode code);

// JSON-over-HTTP front end; each route delegates to one engine call.
class Service {
 public:
  explicit Service(ServiceOptions options);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Binds the listening socket; port 0 picks a free port. Returns the bound port.
  // Throws kIoError when binding fails.
  int bind(const std::string& host, int port);
  // Serves until stop(). Requires a prior bind().
  void run();
  // bind + run on a background thread; returns the port once the server accepts requests.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  // Stops accepting, lets in-flight requests finish, joins the background thread.
  void stop();

  SessionManager& sessions() { return sessions_; }

 private:
  struct JobResult {
    int status = 200;
    nlohmann::json body;
  };
  using Work = std::function<JobResult()>;

  void install_routes();
  // Runs `work` and answers inline, or answers 202 {job} when it exceeds the latency budget.
  JobResult run_with_budget(Work work);
  std::filesystem::path resolve_data_path(const std::string& relative) const;

  ServiceOptions options_;
  SessionManager sessions_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  std::mutex jobs_mutex_;
  std::map<std::string, std::shared_future<JobResult>> jobs_;
};

}  // namespace matchboard
