// demoforge: serve the demonstration service and operate on recorded data.
//
// Exit codes: 0 success, 1 data or validation failure, 2 usage, config or
// environment failure.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "demoforge/service/client.hpp"
#include "demoforge/service/demo_service.hpp"
#include "demoforge/service/http_server.hpp"
#include "demoforge/service/script.hpp"
#include "demoforge/service/service_config.hpp"
#include "demoforge/store/catalog.hpp"
#include "demoforge/store/export.hpp"
#include "demoforge/store/records.hpp"
#include "demoforge/store/replay.hpp"
#include "demoforge/store/validate.hpp"
#include "demoforge/wire/json_io.hpp"

namespace fs = std::filesystem;
using namespace demoforge;

namespace {

constexpr int kOk = 0;
constexpr int kDataFailure = 1;
constexpr int kEnvFailure = 2;

struct Globals {
  std::optional<fs::path> config;
  std::optional<fs::path> data_dir;
  std::optional<fs::path> assets;
};

service::ServiceConfig resolve(const Globals& g, service::ConfigOverrides flags = {}) {
  flags.data_dir = g.data_dir;
  flags.assets_dir = g.assets;
  service::ServiceConfig defaults;
  defaults.assets_dir = DEMOFORGE_DEFAULT_ASSETS_DIR;
  return service::resolve_config(g.config, service::process_env(), flags, defaults);
}

store::Catalog load_catalog(const fs::path& assets) {
  if (!fs::is_directory(assets)) throw service::ConfigError("assets directory " + assets.string() + " does not exist");
  return store::Catalog::load(assets);
}

// Episode directories named by `paths`: an episode directory itself, or any
// directory whose children (or episodes/ children) are episodes.
std::vector<fs::path> expand_episodes(const std::vector<std::string>& paths) {
  std::vector<fs::path> out;
  for (const auto& p : paths) {
    const fs::path path(p);
    if (fs::exists(path / store::layout::kProvisional) || !fs::is_directory(path)) {
      out.push_back(path);
      continue;
    }
    const fs::path root = fs::is_directory(path / "episodes") ? path / "episodes" : path;
    std::vector<fs::path> found;
    for (const auto& e : fs::directory_iterator(root)) {
      if (e.is_directory() && fs::exists(e.path() / store::layout::kProvisional)) found.push_back(e.path());
    }
    std::sort(found.begin(), found.end());
    if (found.empty()) found.push_back(path);
    out.insert(out.end(), found.begin(), found.end());
  }
  return out;
}

int cmd_serve(const Globals& g, const service::ConfigOverrides& flags) {
  const service::ServiceConfig cfg = resolve(g, flags);
  store::Catalog catalog = load_catalog(cfg.assets_dir);
  service::DemoService svc(std::move(catalog), cfg.data_dir, cfg.max_sessions, cfg.media_cap_bytes);
  svc.recover();
  service::HttpServer server(svc, cfg.bind_host, cfg.bind_port);
  server.start();
  std::cout << "listening on " << cfg.bind_host << ":" << server.port() << std::endl;
  server.wait_for_signal([&](int) { svc.shutdown(); });
  std::cout << "stopped" << std::endl;
  return kOk;
}

int cmd_validate(const std::vector<std::string>& paths) {
  bool all_ok = true;
  for (const auto& dir : expand_episodes(paths)) {
    const store::ValidationReport r = store::validate_episode(dir);
    all_ok = all_ok && r.ok;
    std::cout << "episode " << dir.string() << ": " << (r.ok ? "ok" : "FAILED") << "\n";
    for (const auto& w : r.warnings) std::cout << "  warning " << w.locator << ": " << w.message << "\n";
    for (const auto& e : r.errors) std::cout << "  error " << e.locator << ": " << e.message << "\n";
  }
  std::cout.flush();
  return all_ok ? kOk : kDataFailure;
}

int cmd_replay(const Globals& g, const std::string& episode, bool check) {
  const service::ServiceConfig cfg = resolve(g);
  const store::Catalog catalog = load_catalog(cfg.assets_dir);
  try {
    if (!check) {
      for (const auto& f : store::replay_episode(episode, catalog)) {
        std::cout << wire::encode_canonical(wire::frame_to_json(f)) << "\n";
      }
      return kOk;
    }
    const store::ReplayCheck c = store::check_replay(episode, catalog);
    if (c.equal) {
      std::cout << "replay ok: " << c.frames_compared << " frames identical\n";
      return kOk;
    }
    std::cout << "replay diverged at tick " << *c.first_divergent_tick << "\n";
    std::cerr << c.detail << "\n";
    return kDataFailure;
  } catch (const store::StoreError& e) {
    std::cerr << (e.kind() == store::StoreError::Kind::digest_mismatch ? "digest mismatch: " : "replay failed: ")
              << e.what() << "\n";
    return kDataFailure;
  }
}

int cmd_export(const Globals& g, const store::ExportFilter& filter, const fs::path& out) {
  const service::ServiceConfig cfg = resolve(g);
  const store::EpisodeStore st(cfg.data_dir);
  const store::ExportResult r = store::export_dataset(st, filter, out);
  for (const auto& id : r.episode_ids) std::cout << "exported " << id << "\n";
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << r.episode_ids.size() << " episodes -> " << out.string() << "\n";
  return kOk;
}

int cmd_scenes(const Globals& g) {
  const service::ServiceConfig cfg = resolve(g);
  const store::Catalog catalog = load_catalog(cfg.assets_dir);
  for (const auto& [name, cs] : catalog.scenes()) {
    std::cout << name << " robot=" << cs.scene->robot.name << " objects=" << cs.scene->spec.objects.size()
              << " digest=" << cs.scene_digest << "\n";
  }
  return kOk;
}

int cmd_script_client(const Globals& g, const std::string& script_path, const std::optional<std::string>& server,
                      const service::ScriptRunOptions& base) {
  service::ScriptRunOptions opt = base;
  const service::ServiceConfig cfg = resolve(g);
  auto [host, port] = service::parse_bind(server.value_or(cfg.bind_host + ":" + std::to_string(cfg.bind_port)));
  opt.host = host == "0.0.0.0" ? "127.0.0.1" : host;
  opt.port = port;
  service::Script script;
  try {
    script = service::load_script(script_path);
  } catch (const config::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kEnvFailure;
  }
  try {
    const service::ScriptRunResult r = service::run_script(script, opt);
    std::cout << "session " << r.session_id << "\n";
    if (r.episode_id) {
      std::cout << "episode " << *r.episode_id << " ticks " << r.start_tick << ".." << r.end_tick << "\n";
    }
    return kOk;
  } catch (const service::ScriptAborted& e) {
    std::cerr << "server error " << e.what() << "\n";
    return kDataFailure;
  } catch (const service::ClientError& e) {
    std::cerr << e.what() << "\n";
    return kEnvFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("demoforge"));

  CLI::App app{"demoforge: teleoperation demonstration service and episode tools"};
  app.require_subcommand(1);
  Globals g;
  std::string config_path, data_dir, assets;
  app.add_option("--config", config_path, "service config file");
  app.add_option("--data-dir", data_dir, "storage root (DEMOFORGE_DATA_DIR)");
  app.add_option("--assets", assets, "robots/ and scenes/ directory");

  service::ConfigOverrides serve_flags;
  std::string bind;
  std::int64_t max_sessions = 0, media_cap = 0;
  auto* serve = app.add_subcommand("serve", "run the HTTP and streaming service until SIGINT/SIGTERM");
  serve->add_option("--bind", bind, "host:port (DEMOFORGE_BIND)");
  serve->add_option("--max-sessions", max_sessions, "concurrent session cap (DEMOFORGE_MAX_SESSIONS)");
  serve->add_option("--media-cap-bytes", media_cap, "media upload cap (DEMOFORGE_MEDIA_CAP_BYTES)");

  std::vector<std::string> validate_paths;
  auto* validate = app.add_subcommand("validate", "check episode directories");
  validate->add_option("paths", validate_paths, "episode directories or a data dir")->required();

  std::string replay_path;
  bool replay_check = false;
  auto* replay = app.add_subcommand("replay", "re-simulate an episode");
  replay->add_option("episode", replay_path, "episode directory")->required();
  replay->add_flag("--check", replay_check, "compare against the stored frame log");

  std::string out_dir, f_scene, f_robot, f_label;
  bool include_unfinalized = false;
  auto* exp = app.add_subcommand("export", "write an aligned dataset bundle");
  exp->add_option("--out", out_dir, "bundle directory")->required();
  exp->add_option("--scene", f_scene, "only this scene");
  exp->add_option("--robot", f_robot, "only this robot");
  exp->add_option("--label", f_label, "only this label");
  exp->add_flag("--include-unfinalized", include_unfinalized, "also export truncated episodes");

  auto* scenes = app.add_subcommand("scenes", "list the scene catalog");

  std::string script_path, server;
  service::ScriptRunOptions script_opt;
  auto* sc = app.add_subcommand("script-client", "drive a session from a command script");
  sc->add_option("script", script_path, "script file")->required();
  sc->add_option("--server", server, "host:port of a running service");
  sc->add_option("--session", script_opt.session_id, "existing session id (default: create one)");
  sc->add_option("--contributor", script_opt.contributor, "contributor id");
  sc->add_flag("--close-session", script_opt.close_session, "close the session afterwards");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kEnvFailure;
  }
  if (!config_path.empty()) g.config = config_path;
  if (!data_dir.empty()) g.data_dir = data_dir;
  if (!assets.empty()) g.assets = assets;

  try {
    if (serve->parsed()) {
      if (!bind.empty()) serve_flags.bind = bind;
      if (max_sessions != 0) serve_flags.max_sessions = max_sessions;
      if (media_cap != 0) serve_flags.media_cap_bytes = media_cap;
      return cmd_serve(g, serve_flags);
    }
    if (validate->parsed()) return cmd_validate(validate_paths);
    if (replay->parsed()) return cmd_replay(g, replay_path, replay_check);
    if (exp->parsed()) {
      store::ExportFilter filter;
      if (!f_scene.empty()) filter.scene = f_scene;
      if (!f_robot.empty()) filter.robot = f_robot;
      if (!f_label.empty()) filter.label = f_label;
      filter.finalized_only = !include_unfinalized;
      return cmd_export(g, filter, out_dir);
    }
    if (scenes->parsed()) return cmd_scenes(g);
    if (sc->parsed()) return cmd_script_client(g, script_path, server.empty() ? std::nullopt : std::optional(server), script_opt);
  } catch (const service::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kEnvFailure;
  } catch (const service::BindError& e) {
    std::cerr << e.what() << "\n";
    return kEnvFailure;
  } catch (const config::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kEnvFailure;
  } catch (const sim::SceneError& e) {
    std::cerr << "catalog error: " << e.what() << "\n";
    return kEnvFailure;
  } catch (const kinematics::KinematicsError& e) {
    std::cerr << "catalog error: " << e.what() << "\n";
    return kEnvFailure;
  } catch (const store::StoreError& e) {
    std::cerr << "store error: " << e.what() << "\n";
    return e.kind() == store::StoreError::Kind::storage ? kEnvFailure : kDataFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataFailure;
  }
  return kEnvFailure;
}
