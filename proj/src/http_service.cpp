#include <httplib.h>

#include <thread>

#include "refspect/api.hpp"
#include "refspect/error.hpp"

namespace refspect {

struct HttpService::Impl {
  Api& api;
  std::string host;
  httplib::Server server;
  std::thread worker;

  explicit Impl(Api& a, std::string h) : api(a), host(std::move(h)) {}

  void Forward(const httplib::Request& req, httplib::Response& res) {
    ApiRequest r;
    r.method = req.method;
    r.path = req.path;
    for (const auto& [k, v] : req.params) r.query[k] = v;
    r.body = req.body;
    ApiResponse out = api.Handle(r);
    res.status = out.status;
    res.set_content(out.body.dump(), "application/json");
  }
};

HttpService::HttpService(Api& api, std::string host, std::optional<std::string> static_dir)
    : impl_(std::make_unique<Impl>(api, std::move(host))) {
  auto forward = [this](const httplib::Request& req, httplib::Response& res) { impl_->Forward(req, res); };
  impl_->server.Get(R"(/api/.*)", forward);
  impl_->server.Post(R"(/api/.*)", forward);
  if (static_dir && !impl_->server.set_mount_point("/", *static_dir)) {
    throw Error(ErrorCode::kIo, "cannot serve static directory " + *static_dir);
  }
}

HttpService::~HttpService() { Stop(); }

int HttpService::Start(int port) {
  int bound = port == 0 ? impl_->server.bind_to_any_port(impl_->host)
                        : (impl_->server.bind_to_port(impl_->host, port) ? port : -1);
  if (bound < 0) {
    throw Error(ErrorCode::kIo, "cannot bind " + impl_->host + ":" + std::to_string(port));
  }
  impl_->worker = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void HttpService::Wait() {
  if (impl_->worker.joinable()) impl_->worker.join();
}

void HttpService::Stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->worker.joinable()) impl_->worker.join();
}

}  // namespace refspect
