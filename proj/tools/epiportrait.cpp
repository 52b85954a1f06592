// Command-line entry point: fixture generation, snapshot build, batch export
// and the HTTP service.

#include <atomic>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "epiportrait/epiportrait.hpp"
#include "epiportrait/server.hpp"

namespace ep = epiportrait;
namespace fs = std::filesystem;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitInvalidInput = 2;
constexpr int kExitNotFound = 3;

int report(int code, const std::string& message, const std::string& file = {}) {
  ep::Json err = {{"error", message}};
  if (!file.empty()) err["file"] = file;
  std::cerr << ep::dump(err) << '\n';
  return code;
}

// Attaches the offending file to parse failures.
struct InputError : ep::Error {
  std::string file;
  InputError(const std::string& f, const std::string& what) : ep::Error(what), file(f) {}
};

template <typename F>
auto parse_input(const std::string& path, F&& parse) {
  std::string text;
  try {
    text = ep::read_file(path);
  } catch (const ep::NotFound& e) {
    throw InputError(path, e.what());
  }
  try {
    return parse(text);
  } catch (const ep::FormatError& e) {
    throw InputError(path, e.what());
  } catch (const ep::ValidationError& e) {
    throw InputError(path, e.what());
  }
}

ep::Config load_config(const std::string& path) { return path.empty() ? ep::Config{} : ep::Config::load(path); }

std::shared_ptr<const ep::Engine> load_engine(const std::string& snapshot_path, const ep::Config& cfg) {
  if (!fs::exists(snapshot_path)) throw ep::NotFound("snapshot '" + snapshot_path + "' not found");
  auto snap = ep::deserialize_snapshot(ep::read_file(snapshot_path));
  return std::make_shared<const ep::Engine>(std::move(snap), cfg);
}

std::atomic<bool> g_reload{false};
std::atomic<bool> g_stop{false};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Community portrait analytics: build snapshots, export glyphs, serve the explorer API"};
  app.require_subcommand(1);

  // fixture
  auto* fixture = app.add_subcommand("fixture", "Write a synthetic input set in the real file formats");
  ep::FixtureOptions fopts;
  std::string fixture_out;
  fixture->add_option("--seed", fopts.seed, "RNG seed")->default_val(42);
  fixture->add_option("--communities", fopts.n_communities, "Number of communities")->default_val(10);
  fixture->add_option("--days", fopts.n_days, "Length of the study window in days")->default_val(140);
  fixture->add_option("--start", fopts.start, "First day (YYYY-MM-DD)")->default_val("2020-01-01");
  fixture->add_option("--out", fixture_out, "Output directory")->required();

  // build
  auto* build = app.add_subcommand("build", "Validate inputs and write a snapshot file");
  std::string inputs_dir, cases_path, profiles_path, lga_path, postal_path, events_path, start, end, config_path,
      snapshot_out;
  build->add_option("--inputs", inputs_dir, "Directory holding cases.csv, profiles.csv, boundaries_*.geojson, events.jsonl");
  build->add_option("--cases", cases_path, "Case CSV");
  build->add_option("--profiles", profiles_path, "Community profile CSV");
  build->add_option("--boundaries-lga", lga_path, "LGA boundary GeoJSON");
  build->add_option("--boundaries-postal", postal_path, "Postal-area boundary GeoJSON");
  build->add_option("--events", events_path, "Event JSON lines");
  build->add_option("--start", start, "Window start (overrides config)");
  build->add_option("--end", end, "Window end, inclusive (overrides config)");
  build->add_option("--config", config_path, "Config JSON");
  build->add_option("--out", snapshot_out, "Snapshot file to write")->required();

  // export
  auto* exp = app.add_subcommand("export", "Batch-export portraits or tables from a snapshot");
  std::string exp_snapshot, exp_what, exp_gran = "weekly", exp_mode = "actual", exp_out, exp_metric = "total_cases",
                            exp_config;
  std::optional<std::size_t> exp_from, exp_to;
  exp->add_option("--snapshot", exp_snapshot, "Snapshot file")->required();
  exp->add_option("--what", exp_what, "portraits_svg | portraits_json | rankings_csv | mdc_csv")->required();
  exp->add_option("--granularity", exp_gran, "weekly | fortnightly");
  exp->add_option("--mode", exp_mode, "actual | per_10k");
  exp->add_option("--from", exp_from, "First span index");
  exp->add_option("--to", exp_to, "Last span index (inclusive)");
  exp->add_option("--metric", exp_metric, "Ranking metric for rankings_csv");
  exp->add_option("--config", exp_config, "Config JSON");
  exp->add_option("--out", exp_out, "Output directory")->required();

  // serve
  auto* serve = app.add_subcommand("serve", "Serve the read-only API (bind address from EPIPORTRAIT_BIND)");
  std::string serve_snapshot, serve_config;
  serve->add_option("--snapshot", serve_snapshot, "Snapshot file")->required();
  serve->add_option("--config", serve_config, "Config JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fixture) {
      auto files = ep::generate_fixture_files(fopts);
      fs::create_directories(fixture_out);
      auto out = fs::path(fixture_out);
      ep::write_file((out / "cases.csv").string(), files.cases_csv);
      ep::write_file((out / "profiles.csv").string(), files.profiles_csv);
      ep::write_file((out / "boundaries_lga.geojson").string(), files.boundaries_lga);
      ep::write_file((out / "boundaries_postal.geojson").string(), files.boundaries_postal);
      ep::write_file((out / "events.jsonl").string(), files.events_jsonl);
      std::cout << ep::dump({{"window", {ep::format_date(files.window.start), ep::format_date(files.window.end)}},
                             {"out", fixture_out}})
                << '\n';
      return 0;
    }

    if (*build) {
      auto cfg = load_config(config_path);
      auto pick = [&](std::string& path, const char* name) {
        if (path.empty() && !inputs_dir.empty() && fs::exists(fs::path(inputs_dir) / name))
          path = (fs::path(inputs_dir) / name).string();
      };
      pick(cases_path, "cases.csv");
      pick(profiles_path, "profiles.csv");
      pick(lga_path, "boundaries_lga.geojson");
      pick(postal_path, "boundaries_postal.geojson");
      pick(events_path, "events.jsonl");
      if (cases_path.empty() || profiles_path.empty() || lga_path.empty())
        return report(kExitInvalidInput, "build needs cases, profiles and LGA boundaries");
      if (!start.empty() || !end.empty()) {
        if (start.empty() || end.empty()) return report(kExitInvalidInput, "--start and --end go together");
        cfg.window = ep::make_window(start, end);
      }
      if (!cfg.window) return report(kExitInvalidInput, "no study window: pass --start/--end or set it in the config");
      const auto window = *cfg.window;

      std::shared_ptr<const ep::DatasetSnapshot> snap;
      try {
        auto cases = parse_input(cases_path, [&](const std::string& t) {
          return ep::parse_cases(t, window, cfg.ingest.exclusions);
        });
        auto profiles = parse_input(profiles_path, [](const std::string& t) { return ep::parse_profiles(t); });
        std::vector<ep::BoundarySet> bounds;
        bounds.push_back(parse_input(lga_path, [](const std::string& t) {
          return ep::parse_boundaries(t, ep::BoundaryLevel::lga);
        }));
        if (!postal_path.empty())
          bounds.push_back(parse_input(postal_path, [](const std::string& t) {
            return ep::parse_boundaries(t, ep::BoundaryLevel::postal_area);
          }));
        ep::ParsedEvents events;
        if (!events_path.empty())
          events = parse_input(events_path, [&](const std::string& t) { return ep::parse_events(t, window); });
        snap = ep::build_snapshot(std::move(cases), std::move(profiles), std::move(bounds), std::move(events), window,
                                  cfg.ingest);
      } catch (const InputError& e) {
        return report(kExitInvalidInput, e.what(), e.file);
      } catch (const ep::ValidationError& e) {
        return report(kExitInvalidInput, e.what());
      }
      ep::write_file(snapshot_out, ep::serialize_snapshot(*snap));
      ep::Engine engine(snap, cfg);
      std::cout << ep::dump(engine.summary()) << '\n';
      return 0;
    }

    if (*exp) {
      auto cfg = load_config(exp_config);
      auto engine = load_engine(exp_snapshot, cfg);
      ep::ExportRequest req;
      req.kind = ep::parse_export_kind(exp_what);
      req.granularity = ep::parse_granularity(exp_gran);
      req.mode = ep::parse_mode(exp_mode);
      req.metric = exp_metric;
      if (exp_from || exp_to) {
        auto full = ep::SpanRange::full(engine->grid(req.granularity));
        req.range = ep::SpanRange{exp_from.value_or(full.from), exp_to.value_or(full.to)};
      }
      ep::Json files = ep::Json::array();
      for (const auto& f : ep::export_outputs(*engine, req, exp_out)) files.push_back(f);
      std::cout << ep::dump({{"snapshot", engine->id()}, {"files", files}}) << '\n';
      return 0;
    }

    if (*serve) {
      auto cfg = load_config(serve_config);
      ep::SnapshotStore store;
      store.swap(load_engine(serve_snapshot, cfg));
      ep::Api api(store);
      httplib::Server server;
      ep::mount(server, api);
      auto bind = ep::bind_from_env();

      // SIGHUP reloads the snapshot file and swaps it in atomically.
      std::signal(SIGHUP, [](int) { g_reload = true; });
      std::signal(SIGINT, [](int) { g_stop = true; });
      std::signal(SIGTERM, [](int) { g_stop = true; });
      std::thread watcher([&] {
        while (!g_stop) {
          std::this_thread::sleep_for(std::chrono::milliseconds(200));
          if (g_reload.exchange(false)) {
            try {
              store.swap(load_engine(serve_snapshot, cfg));
              std::cerr << ep::dump({{"reloaded", store.current()->id()}}) << '\n';
            } catch (const std::exception& e) {
              report(kExitFailure, std::string("reload failed: ") + e.what());
            }
          }
        }
        server.stop();
      });
      if (!server.bind_to_port(bind.host, bind.port)) {
        g_stop = true;
        watcher.join();
        return report(kExitFailure, "cannot bind " + bind.host + ":" + std::to_string(bind.port));
      }
      std::cerr << ep::dump({{"listening", bind.host + ":" + std::to_string(bind.port)},
                             {"snapshot", store.current()->id()}})
                << '\n';
      server.listen_after_bind();
      g_stop = true;
      watcher.join();
      return 0;
    }
  } catch (const ep::NotFound& e) {
    return report(kExitNotFound, e.what());
  } catch (const ep::FormatError& e) {
    return report(kExitInvalidInput, e.what());
  } catch (const ep::ValidationError& e) {
    return report(kExitInvalidInput, e.what());
  } catch (const std::exception& e) {
    return report(kExitFailure, e.what());
  }
  return 0;
}
