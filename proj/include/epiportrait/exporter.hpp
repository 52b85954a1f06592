#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "engine.hpp"
#include "svg.hpp"

namespace epiportrait {

enum class ExportKind { portraits_svg, portraits_json, rankings_csv, mdc_csv };

inline ExportKind parse_export_kind(std::string_view s) {
  if (s == "portraits_svg") return ExportKind::portraits_svg;
  if (s == "portraits_json") return ExportKind::portraits_json;
  if (s == "rankings_csv") return ExportKind::rankings_csv;
  if (s == "mdc_csv") return ExportKind::mdc_csv;
  throw InvalidArgument("unknown export kind '" + std::string(s) + "'");
}

struct ExportRequest {
  ExportKind kind = ExportKind::portraits_json;
  Granularity granularity = Granularity::weekly;
  CountMode mode = CountMode::actual;
  std::optional<SpanRange> range;
  std::string metric = "total_cases";
};

// Writes the requested artifact(s) into `dir`; returns the written paths.
inline std::vector<std::string> export_outputs(const Engine& e, const ExportRequest& req, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const auto range = e.resolve(req.granularity, req.range);
  std::vector<std::string> written;
  auto emit = [&](const std::string& name, std::string_view data) {
    auto path = (fs::path(dir) / name).string();
    write_file(path, data);
    written.push_back(path);
  };
  switch (req.kind) {
    case ExportKind::portraits_svg:
      for (const auto& p : e.portraits(req.granularity, req.mode, range)) emit("portrait_" + p.code + ".svg", portrait_to_svg(p));
      emit("filter_trigger.svg", portrait_to_svg(e.filter_trigger(req.granularity, range)));
      break;
    case ExportKind::portraits_json: {
      Json arr = Json::array();
      for (const auto& p : e.portraits(req.granularity, req.mode, range)) arr.push_back(portrait_to_json(p));
      emit("portraits.json", dump(arr) + "\n");
      break;
    }
    case ExportKind::rankings_csv:
      emit("rankings_" + req.metric + ".csv", ranked_to_csv(e.rankings(req.metric, req.granularity, range)));
      break;
    case ExportKind::mdc_csv:
      emit("mdc.csv", mdc_to_csv(e.mdc(req.granularity, range)));
      break;
  }
  return written;
}

}  // namespace epiportrait
