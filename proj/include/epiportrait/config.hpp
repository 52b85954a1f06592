#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "date.hpp"
#include "error.hpp"
#include "geometry.hpp"
#include "ingest.hpp"
#include "layout.hpp"
#include "temporal.hpp"

namespace epiportrait {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFound("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
}

// Everything tunable lives in one JSON file; every key is optional.
//
//   {
//     "window": {"start": "2020-01-01", "end": "2022-01-11"},
//     "portrait": {"core_radius": 12, "crown_radius": 40, ...},
//     "phase_rules": {"eased": [...], "restrict_controlled": [...]},
//     "rules_file": "rules.json",
//     "code_aliases": {"old": "new"},
//     "exclude_cases": [{"field": "likely_source", "contains": "crew"}],
//     "per_capita_divisor": 10000,
//     "layout": {"max_iter": 2000}
//   }
struct Config {
  std::optional<DateRange> window;
  PortraitConfig portrait;
  ChannelAssignment channels = ChannelAssignment::defaults();
  PhaseRules rules = PhaseRules::defaults();
  IngestOptions ingest;
  double per_capita_divisor = 10000.0;
  LayoutParams layout;

  static Config from_json(const nlohmann::json& j, const std::string& base_dir = ".") {
    Config c;
    try {
      if (j.contains("window"))
        c.window = make_window(j["window"].at("start").get<std::string>(), j["window"].at("end").get<std::string>());
      if (j.contains("portrait")) c.portrait = PortraitConfig::from_json(j["portrait"]);
      if (j.contains("rules_file")) {
        auto path = j["rules_file"].get<std::string>();
        if (!path.empty() && path.front() != '/') path = base_dir + "/" + path;
        c.rules = PhaseRules::from_json(nlohmann::json::parse(read_file(path)));
      }
      if (j.contains("phase_rules")) c.rules = PhaseRules::from_json(j["phase_rules"]);
      if (j.contains("code_aliases"))
        c.ingest.code_aliases = j["code_aliases"].get<std::map<std::string, std::string>>();
      if (j.contains("exclude_cases")) {
        for (const auto& r : j["exclude_cases"]) {
          RowExclusion ex;
          ex.field = r.at("field").get<std::string>();
          if (r.contains("contains")) {
            ex.value = r["contains"].get<std::string>();
            ex.contains = true;
          } else {
            ex.value = r.at("equals").get<std::string>();
          }
          c.ingest.exclusions.push_back(std::move(ex));
        }
      }
      if (j.contains("per_capita_divisor")) c.per_capita_divisor = j["per_capita_divisor"].get<double>();
      if (!(c.per_capita_divisor > 0)) throw InvalidArgument("config: per_capita_divisor must be positive");
      if (j.contains("layout")) {
        const auto& l = j["layout"];
        if (l.contains("max_iter")) c.layout.max_iter = l["max_iter"].get<int>();
        if (l.contains("damping")) c.layout.damping = l["damping"].get<double>();
        if (l.contains("stiffness")) c.layout.stiffness = l["stiffness"].get<double>();
        if (l.contains("centering")) c.layout.centering = l["centering"].get<double>();
      }
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("config: ") + e.what());
    }
    c.channels.validate();
    return c;
  }

  static Config load(const std::string& path) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError("config '" + path + "': " + e.what());
    }
    auto slash = path.find_last_of('/');
    return from_json(j, slash == std::string::npos ? "." : path.substr(0, slash));
  }
};

}  // namespace epiportrait
