#pragma once

#include <cstdlib>
#include <memory>
#include <string>

#include <httplib.h>

#include "service.hpp"

namespace epiportrait {

struct BindAddress {
  std::string host = "127.0.0.1";
  int port = 8080;
};

// "host:port" or ":port"; empty input keeps the defaults.
inline BindAddress parse_bind(std::string_view s) {
  BindAddress b;
  if (s.empty()) return b;
  auto colon = s.rfind(':');
  if (colon == std::string_view::npos) throw InvalidArgument("bind address must be host:port");
  if (colon > 0) b.host = std::string(s.substr(0, colon));
  try {
    b.port = std::stoi(std::string(s.substr(colon + 1)));
  } catch (const std::exception&) {
    throw InvalidArgument("bind address has an invalid port");
  }
  return b;
}

inline BindAddress bind_from_env() {
  const char* v = std::getenv("EPIPORTRAIT_BIND");
  return parse_bind(v ? v : "");
}

// Binds `api` onto an httplib server. Every response carries the snapshot
// id in the X-Snapshot-Id header.
inline void mount(httplib::Server& server, const Api& api) {
  // SO_REUSEADDR only: with SO_REUSEPORT a second server could share a busy port.
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
  auto adapt = [&api](const httplib::Request& req, httplib::Response& res) {
    ApiRequest ar;
    ar.method = req.method;
    ar.path = req.path;
    for (const auto& [k, v] : req.params) ar.params[k] = v;
    ar.body = req.body;
    auto out = api.handle(ar);
    res.status = out.status;
    if (!out.snapshot.empty()) res.set_header("X-Snapshot-Id", out.snapshot);
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_content(out.body, out.content_type);
  };
  server.Get(R"(/.*)", adapt);
  server.Post(R"(/.*)", adapt);
  server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (!res.body.empty()) return;
    res.set_content(dump(Json{{"error", res.status == 404 ? "not found" : "request failed"}, {"path", req.path}}),
                    "application/json");
  });
}

}  // namespace epiportrait
