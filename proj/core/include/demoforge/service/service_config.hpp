#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

namespace demoforge::service {

struct ServiceConfig {
  std::filesystem::path data_dir = "demoforge-data";
  std::filesystem::path assets_dir;
  std::string bind_host = "127.0.0.1";
  std::uint16_t bind_port = 8080;
  std::int64_t max_sessions = 32;
  std::int64_t media_cap_bytes = std::int64_t{256} * 1024 * 1024;
};

/// Values given on the command line; unset fields fall through to env, then file.
struct ConfigOverrides {
  std::optional<std::filesystem::path> data_dir;
  std::optional<std::filesystem::path> assets_dir;
  std::optional<std::string> bind;
  std::optional<std::int64_t> max_sessions;
  std::optional<std::int64_t> media_cap_bytes;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

/// Reads the process environment.
EnvLookup process_env();

/// Flags > DEMOFORGE_* environment > config file > defaults. The config file
/// uses the scene/robot text format with keys data_dir, assets_dir, bind,
/// max_sessions, media_cap_bytes. Errors name the offending source and line.
ServiceConfig resolve_config(const std::optional<std::filesystem::path>& file, const EnvLookup& env,
                             const ConfigOverrides& flags, ServiceConfig defaults = {});

/// "host:port" (host may be empty for all interfaces) -> (host, port).
std::pair<std::string, std::uint16_t> parse_bind(const std::string& bind);

}  // namespace demoforge::service
