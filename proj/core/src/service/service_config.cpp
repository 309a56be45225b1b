#include "demoforge/service/service_config.hpp"

#include <cerrno>
#include <cstdlib>

#include "demoforge/config/document.hpp"

namespace demoforge::service {

EnvLookup process_env() {
  return [](const std::string& name) -> std::optional<std::string> {
    const char* v = std::getenv(name.c_str());
    if (v == nullptr || *v == '\0') return std::nullopt;
    return std::string(v);
  };
}

std::pair<std::string, std::uint16_t> parse_bind(const std::string& bind) {
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos) throw ConfigError("bind address '" + bind + "' must be host:port");
  std::string host = bind.substr(0, colon);
  if (host.empty()) host = "0.0.0.0";
  const std::string port_text = bind.substr(colon + 1);
  char* end = nullptr;
  const long port = std::strtol(port_text.c_str(), &end, 10);
  if (port_text.empty() || *end != '\0' || port < 0 || port > 65535) {
    throw ConfigError("bind address '" + bind + "' has an invalid port");
  }
  return {host, static_cast<std::uint16_t>(port)};
}

namespace {

std::int64_t positive(std::int64_t v, const std::string& what) {
  if (v <= 0) throw ConfigError(what + " must be positive");
  return v;
}

std::int64_t parse_int(const std::string& text, const std::string& what) {
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(text.c_str(), &end, 10);
  if (text.empty() || *end != '\0' || errno != 0) throw ConfigError(what + " must be an integer, got '" + text + "'");
  return positive(v, what);
}

void apply_bind(ServiceConfig& c, const std::string& bind) {
  auto [host, port] = parse_bind(bind);
  c.bind_host = host;
  c.bind_port = port;
}

}  // namespace

ServiceConfig resolve_config(const std::optional<std::filesystem::path>& file, const EnvLookup& env,
                             const ConfigOverrides& flags, ServiceConfig c) {
  if (file) {
    try {
      const config::Document doc = config::parse_file(*file);
      const config::Node& root = doc.root;
      root.expect_only({"data_dir", "assets_dir", "bind", "max_sessions", "media_cap_bytes"});
      if (auto v = root.optional_text("data_dir")) c.data_dir = *v;
      if (auto v = root.optional_text("assets_dir")) c.assets_dir = *v;
      if (auto v = root.optional_text("bind")) {
        try {
          apply_bind(c, *v);
        } catch (const ConfigError& e) {
          root.require("bind").fail(e.what());
        }
      }
      if (root.find("max_sessions")) {
        const auto v = root.integer("max_sessions");
        if (v <= 0) root.require("max_sessions").fail("max_sessions must be positive");
        c.max_sessions = v;
      }
      if (root.find("media_cap_bytes")) {
        const auto v = root.integer("media_cap_bytes");
        if (v <= 0) root.require("media_cap_bytes").fail("media_cap_bytes must be positive");
        c.media_cap_bytes = v;
      }
    } catch (const config::ParseError& e) {
      throw ConfigError(e.what());
    }
  }

  if (auto v = env("DEMOFORGE_DATA_DIR")) c.data_dir = *v;
  if (auto v = env("DEMOFORGE_ASSETS_DIR")) c.assets_dir = *v;
  if (auto v = env("DEMOFORGE_BIND")) apply_bind(c, *v);
  if (auto v = env("DEMOFORGE_MAX_SESSIONS")) c.max_sessions = parse_int(*v, "DEMOFORGE_MAX_SESSIONS");
  if (auto v = env("DEMOFORGE_MEDIA_CAP_BYTES")) c.media_cap_bytes = parse_int(*v, "DEMOFORGE_MEDIA_CAP_BYTES");

  if (flags.data_dir) c.data_dir = *flags.data_dir;
  if (flags.assets_dir) c.assets_dir = *flags.assets_dir;
  if (flags.bind) apply_bind(c, *flags.bind);
  if (flags.max_sessions) c.max_sessions = positive(*flags.max_sessions, "--max-sessions");
  if (flags.media_cap_bytes) c.media_cap_bytes = positive(*flags.media_cap_bytes, "--media-cap-bytes");
  return c;
}

}  // namespace demoforge::service
