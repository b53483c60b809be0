#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <mutex>
#include <shared_mutex>
#include <string>

#include <json.hpp>

#include "refspect/diversity.hpp"
#include "refspect/workbench.hpp"

namespace refspect {

struct ApiRequest {
  std::string method = "GET";
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct ApiResponse {
  int status = 200;
  nlohmann::ordered_json body;  // {"revision": N, "payload" | "error": ...}
};

nlohmann::ordered_json SpectrumJson(const Spectrogram& spec);
nlohmann::ordered_json PeaksJson(const std::vector<Peak>& peaks, const ClusterState& state);

/// Transport-independent JSON API over a Workbench.
///
/// Reads share a lock; mutations are serialized, checked against the
/// optional expected_revision, and handed to `persist` before the response.
/// A failed persist rolls the mutation back.
class Api {
 public:
  using Persist = std::function<void(const Workbench&)>;
  using Clock = std::function<std::string()>;

  Api(Workbench& wb, std::optional<JournalMap> map = std::nullopt, Persist persist = nullptr,
      Clock clock = nullptr);

  ApiResponse Handle(const ApiRequest& request);

 private:
  ApiResponse Get(const std::vector<std::string>& parts, const ApiRequest& req);
  ApiResponse Post(const std::vector<std::string>& parts, const ApiRequest& req);

  Workbench& wb_;
  std::optional<JournalMap> map_;
  Persist persist_;
  Clock clock_;
  mutable std::shared_mutex mu_;
  std::mutex turnstile_;
};

/// Serves an Api over HTTP/1.1 on a background thread.
class HttpService {
 public:
  HttpService(Api& api, std::string host = "127.0.0.1", std::optional<std::string> static_dir = std::nullopt);
  ~HttpService();
  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  // port 0 picks a free port. Returns the bound port.
  int Start(int port);
  // Blocks until Stop() is called from another thread or a signal.
  void Wait();
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace refspect
