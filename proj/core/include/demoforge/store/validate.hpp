#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "demoforge/wire/canonical.hpp"

namespace demoforge::store {

struct ValidationIssue {
  /// "<file>:<line>" or just "<file>".
  std::string locator;
  std::string message;
};

struct ValidationReport {
  bool ok = true;
  std::vector<ValidationIssue> warnings;
  std::vector<ValidationIssue> errors;

  void warn(std::string locator, std::string message);
  void error(std::string locator, std::string message);
};

/// Read-only structural check of one episode directory. Problems are report
/// entries; this never throws for bad content.
ValidationReport validate_episode(const std::filesystem::path& episode_dir);

wire::Json to_json(const ValidationReport& report);

}  // namespace demoforge::store
