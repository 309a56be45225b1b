#pragma once

#include <map>
#include <string>

#include "demoforge/service/demo_service.hpp"

namespace demoforge::service {

struct ApiRequest {
  std::string method;  // upper case
  std::string path;    // without query
  std::map<std::string, std::string> query;
  std::map<std::string, std::string> headers;  // lower-case names
  std::string body;

  std::string header(const std::string& name, const std::string& fallback = "") const;
};

struct ApiResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
  /// When set, the body is the content of this file (frame streams).
  std::string file;
};

/// Routes one /api/v1 request. Never throws; failures become
/// {"detail":...,"error":<code>} bodies with the mapped status.
ApiResponse handle_api(DemoService& service, const ApiRequest& request);

/// Splits "path?a=b&c=d" (percent-decoding the values).
void split_target(const std::string& target, std::string& path, std::map<std::string, std::string>& query);

}  // namespace demoforge::service
