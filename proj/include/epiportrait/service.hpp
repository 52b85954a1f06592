#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>

#include "engine.hpp"
#include "error.hpp"
#include "json_format.hpp"

namespace epiportrait {

// Holds the served engine. Readers take a shared_ptr copy, so a swap is
// atomic from every client's view and in-flight requests finish against the
// snapshot they started with.
class SnapshotStore {
 public:
  std::shared_ptr<const Engine> current() const {
    std::lock_guard lock(mu_);
    return engine_;
  }

  void swap(std::shared_ptr<const Engine> next) {
    std::lock_guard lock(mu_);
    engine_ = std::move(next);
  }

 private:
  mutable std::mutex mu_;
  std::shared_ptr<const Engine> engine_;
};

struct ApiRequest {
  std::string method = "GET";
  std::string path;
  std::map<std::string, std::string> params;
  std::string body;
};

struct ApiResponse {
  int status = 200;
  std::string body;
  std::string snapshot;  // id of the snapshot that produced the body
  std::string content_type = "application/json";
};

// Transport-free request router. The HTTP server only adapts requests and
// responses; every number in a body comes from an Engine call.
class Api {
 public:
  explicit Api(const SnapshotStore& store) : store_(store) {}

  ApiResponse handle(const ApiRequest& req) const {
    auto engine = store_.current();
    ApiResponse res;
    if (!engine) {
      res.status = 503;
      res.body = dump(Json{{"error", "no snapshot loaded"}});
      return res;
    }
    res.snapshot = engine->id();
    try {
      res.body = dump(route(*engine, req, res.status));
    } catch (const NotFound& e) {
      res.status = 404;
      res.body = dump(Json{{"error", e.what()}});
    } catch (const Error& e) {
      res.status = 400;
      res.body = dump(Json{{"error", e.what()}});
    } catch (const nlohmann::json::exception& e) {
      res.status = 400;
      res.body = dump(Json{{"error", std::string("bad request body: ") + e.what()}});
    }
    return res;
  }

 private:
  static std::optional<std::string> param(const ApiRequest& r, const std::string& key) {
    auto it = r.params.find(key);
    if (it == r.params.end() || it->second.empty()) return std::nullopt;
    return it->second;
  }

  static long long int_param(const ApiRequest& r, const std::string& key, long long fallback) {
    auto v = param(r, key);
    if (!v) return fallback;
    try {
      std::size_t used = 0;
      auto n = std::stoll(*v, &used);
      if (used != v->size()) throw InvalidArgument("");
      return n;
    } catch (const std::exception&) {
      throw InvalidArgument("parameter '" + key + "' must be an integer");
    }
  }

  static double real_param(const ApiRequest& r, const std::string& key, double fallback) {
    auto v = param(r, key);
    if (!v) return fallback;
    try {
      std::size_t used = 0;
      auto x = std::stod(*v, &used);
      if (used != v->size()) throw InvalidArgument("");
      return x;
    } catch (const std::exception&) {
      throw InvalidArgument("parameter '" + key + "' must be a number");
    }
  }

  static Granularity granularity(const ApiRequest& r) {
    return parse_granularity(param(r, "granularity").value_or("weekly"));
  }

  static BoundaryLevel level(const ApiRequest& r) { return parse_level(param(r, "level").value_or("lga")); }

  static SpanRange window(const Engine& e, const ApiRequest& r, Granularity g) {
    const auto full = SpanRange::full(e.grid(g));
    auto from = int_param(r, "from", static_cast<long long>(full.from));
    auto to = int_param(r, "to", static_cast<long long>(full.to));
    if (from < 0 || to < 0) throw InvalidArgument("span indices must be non-negative");
    return e.resolve(g, SpanRange{static_cast<std::size_t>(from), static_cast<std::size_t>(to)});
  }

  static Json grid_json(const Engine& e, const ApiRequest& r) {
    auto g = granularity(r);
    const auto& grid = e.grid(g);
    Json spans = Json::array();
    for (const auto& s : grid.spans)
      spans.push_back({{"x", s.index}, {"start", format_date(s.start)}, {"end", format_date(s.end)}, {"partial", s.partial}});
    Json out = {{"granularity", to_string(g)},
                {"window", {format_date(grid.window.start), format_date(grid.window.end)}},
                {"spans", std::move(spans)}};
    if (auto d = param(r, "date")) {
      auto x = grid.span_of(parse_date(*d));
      out["index"] = x ? Json(*x) : Json(nullptr);
    }
    return out;
  }

  static Json route(const Engine& e, const ApiRequest& r, int& status) {
    const auto& p = r.path;
    const bool get = r.method == "GET", post = r.method == "POST";
    if (get && p == "/health") return {{"status", "ok"}, {"snapshot", e.id()}};
    if (get && p == "/grid") return grid_json(e, r);
    if (get && p == "/communities") {
      Json out = Json::array();
      for (const auto& [code, c] : e.snapshot().communities)
        out.push_back({{"code", code}, {"name", c.name}, {"population", c.population}, {"area_km2", c.area_km2}});
      return out;
    }
    if (get && p == "/search") {
      Json out = Json::array();
      for (const auto& h : e.find(param(r, "q").value_or(""), level(r)))
        out.push_back({{"code", h.code}, {"name", h.name}});
      return out;
    }
    if (get && p == "/portraits") {
      auto g = granularity(r);
      auto mode = parse_mode(param(r, "mode").value_or("actual"));
      Json out = Json::array();
      for (const auto& pg : e.portraits(g, mode, window(e, r, g))) out.push_back(portrait_to_json(pg));
      return out;
    }
    if (get && p == "/filter_trigger") {
      auto g = granularity(r);
      return portrait_to_json(e.filter_trigger(g, window(e, r, g)));
    }
    if ((get || post) && p == "/layout") {
      auto g = granularity(r);
      auto mode = parse_mode(param(r, "mode").value_or("actual"));
      std::vector<Engine::Pin> pins;
      if (post && !r.body.empty()) {
        auto body = nlohmann::json::parse(r.body);
        if (body.contains("pins"))
          for (const auto& pn : body["pins"])
            pins.push_back({pn.at("code").get<std::string>(), {pn.at("x").get<double>(), pn.at("y").get<double>()}});
      }
      Viewport vp{real_param(r, "viewport_w", 1600), real_param(r, "viewport_h", 1000)};
      auto seed = int_param(r, "seed", 42);
      if (seed < 0) throw InvalidArgument("seed must be non-negative");
      return layout_to_json(e.layout(g, mode, window(e, r, g), static_cast<std::uint64_t>(seed), vp, pins));
    }
    if (get && p == "/heatmap") {
      auto g = granularity(r);
      return heatmap_to_json(e.heatmap_frame(level(r), g, window(e, r, g)));
    }
    if (get && p == "/rankings") {
      auto g = granularity(r);
      return ranked_to_json(e.rankings(param(r, "metric").value_or("total_cases"), g, window(e, r, g)));
    }
    if (get && p == "/mdc") {
      auto g = granularity(r);
      return mdc_to_json(e.mdc(g, window(e, r, g)));
    }
    if (post && p == "/brush") {
      auto body = r.body.empty() ? nlohmann::json::object() : nlohmann::json::parse(r.body);
      auto g = parse_granularity(body.value("granularity", std::string("weekly")));
      std::optional<SpanRange> range;
      if (body.contains("from") || body.contains("to")) {
        auto full = SpanRange::full(e.grid(g));
        range = SpanRange{body.value("from", full.from), body.value("to", full.to)};
      }
      BrushIntervals iv;
      if (body.contains("intervals"))
        for (const auto& [axis, v] : body["intervals"].items()) iv[axis] = {v.at(0).get<double>(), v.at(1).get<double>()};
      Json codes = Json::array();
      for (const auto& c : brush_filter(e.mdc(g, e.resolve(g, range)), iv)) codes.push_back(c);
      return {{"codes", std::move(codes)}};
    }
    if (get && p == "/boundaries") {
      auto l = level(r);
      auto it = e.snapshot().boundaries.find(l);
      if (it == e.snapshot().boundaries.end()) throw NotFound("no boundaries at level " + std::string(to_string(l)));
      return boundaries_to_geojson(it->second);
    }
    status = 404;
    return {{"error", "not found"}, {"path", p}};
  }

  const SnapshotStore& store_;
};

}  // namespace epiportrait
