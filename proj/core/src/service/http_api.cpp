#include "demoforge/service/http_api.hpp"

#include <cstdlib>
#include <vector>

#include <spdlog/spdlog.h>

#include "demoforge/store/digest.hpp"
#include "demoforge/store/records.hpp"
#include "demoforge/wire/json_io.hpp"

namespace demoforge::service {

using wire::Json;

std::string ApiRequest::header(const std::string& name, const std::string& fallback) const {
  const auto it = headers.find(name);
  return it == headers.end() ? fallback : it->second;
}

namespace {

std::string percent_decode(const std::string& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%' && i + 2 < s.size()) {
      const std::string hex = s.substr(i + 1, 2);
      char* end = nullptr;
      const long v = std::strtol(hex.c_str(), &end, 16);
      if (end == hex.c_str() + 2) {
        out.push_back(static_cast<char>(v));
        i += 2;
        continue;
      }
    }
    out.push_back(s[i] == '+' ? ' ' : s[i]);
  }
  return out;
}

std::vector<std::string> segments(const std::string& path) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < path.size()) {
    const std::size_t slash = path.find('/', pos);
    const std::size_t end = slash == std::string::npos ? path.size() : slash;
    if (end > pos) out.push_back(path.substr(pos, end - pos));
    pos = end + 1;
  }
  return out;
}

ApiResponse json_response(int status, const Json& body) {
  ApiResponse r;
  r.status = status;
  r.body = wire::encode_canonical(body);
  return r;
}

ApiResponse error_response(int status, const std::string& code, const std::string& detail) {
  return json_response(status, Json{{"detail", detail}, {"error", code}});
}

Json body_object(const ApiRequest& req) {
  if (req.body.find_first_not_of(" \t\r\n") == std::string::npos) return Json::object();
  Json j = wire::parse_text(req.body);
  if (!j.is_object()) throw ServiceError("bad_request", 400, "request body must be an object");
  return j;
}

std::string contributor_of(const ApiRequest& req) { return req.header("x-contributor", "anonymous"); }

Json scene_entry(const store::CatalogScene& cs) {
  return Json{{"name", cs.scene->spec.name},
              {"robot", cs.scene->robot.name},
              {"robot_digest", cs.robot_digest},
              {"scene_digest", cs.scene_digest},
              {"spec", wire::scene_to_json(cs.scene->spec)}};
}

ApiResponse recording_json(const RecordingResult& r) {
  if (r.manifest) return json_response(200, store::to_json(*r.manifest));
  return json_response(200, Json{{"episode_id", r.episode_id}, {"tick", r.tick}});
}

ApiResponse route(DemoService& svc, const ApiRequest& req) {
  const auto seg = segments(req.path);
  const std::string& m = req.method;
  if (seg.size() < 2 || seg[0] != "api" || seg[1] != "v1") throw ServiceError("not_found", 404, "no route " + req.path);
  const std::size_t n = seg.size();

  if (n == 3 && seg[2] == "scenes" && m == "GET") {
    Json list = Json::array();
    for (const auto& [name, cs] : svc.catalog().scenes()) list.push_back(scene_entry(cs));
    return json_response(200, Json{{"scenes", list}});
  }
  if (n == 3 && seg[2] == "robots" && m == "GET") {
    Json list = Json::array();
    for (const auto& [name, model] : svc.catalog().models().models()) {
      list.push_back(Json{{"digest", store::sha256_hex(store::canonical_robot_text(model))},
                          {"dof", model.dof()},
                          {"name", name},
                          {"spec", wire::robot_to_json(model)}});
    }
    return json_response(200, Json{{"robots", list}});
  }
  if (n == 3 && seg[2] == "sessions") {
    if (m == "GET") {
      Json list = Json::array();
      for (const auto& d : svc.list_sessions()) list.push_back(to_json(d));
      return json_response(200, Json{{"sessions", list}});
    }
    if (m == "POST") {
      const Json body = body_object(req);
      wire::FieldReader r(body, "session");
      const std::string scene = r.string("scene");
      const std::string robot = r.string("robot");
      ClockMode clock = ClockMode::realtime;
      if (r.has("clock")) {
        const auto c = clock_mode_from(r.string("clock"));
        if (!c) r.fail("clock must be realtime or lockstep");
        clock = *c;
      }
      r.finish();
      return json_response(201, to_json(svc.create_session(scene, robot, clock)));
    }
  }
  if (n >= 4 && seg[2] == "sessions") {
    const std::string& id = seg[3];
    if (n == 4 && m == "GET") return json_response(200, to_json(svc.describe_session(id)));
    if (n == 5 && seg[4] == "close" && m == "POST") return json_response(200, to_json(svc.close_session(id)));
    if (n == 5 && seg[4] == "advance" && m == "POST") {
      const Json body = body_object(req);
      wire::FieldReader r(body, "advance");
      const std::int64_t ticks = r.integer("ticks", 1, wire::kMaxAdvanceTicks);
      r.finish();
      return json_response(200, Json{{"tick", svc.advance(id, ticks)}});
    }
    if (n == 6 && seg[4] == "recording" && m == "POST") {
      if (seg[5] == "start") {
        const Json body = body_object(req);
        wire::FieldReader r(body, "recording");
        const std::string label = r.has("label") ? r.string("label") : "";
        r.finish();
        return recording_json(svc.start_recording(id, label, contributor_of(req)));
      }
      if (seg[5] == "stop") return recording_json(svc.stop_recording(id));
    }
  }
  if (n == 3 && seg[2] == "annotations" && m == "POST") {
    const Json body = body_object(req);
    wire::FieldReader r(body, "annotation");
    AnnotationRequest a;
    a.target = r.string("target");
    a.kind = r.string("kind");
    a.text = r.string("text");
    if (r.has("anchor") && !r.raw("anchor").is_null()) {
      const Json& an = r.raw("anchor");
      if (!an.is_array() || an.size() != 2 || !an[0].is_number_integer() || !an[1].is_number_integer()) {
        r.fail("anchor must be [t0, t1] integers");
      }
      a.anchor = std::make_pair(an[0].get<std::int64_t>(), an[1].get<std::int64_t>());
    }
    r.finish();
    a.author = contributor_of(req);
    return json_response(201, store::to_json(svc.submit_annotation(a)));
  }
  if (n == 4 && seg[2] == "media" && m == "POST") {
    MediaRequest mr;
    mr.target = seg[3];
    mr.contributor = contributor_of(req);
    mr.declared_mime = req.header("content-type", "application/octet-stream");
    if (auto d = req.header("x-declared-digest"); !d.empty()) mr.declared_digest = d;
    if (auto s = req.header("x-media-source"); !s.empty()) {
      if (s == "upload") {
        mr.source = store::MediaSource::upload;
      } else if (s == "sim_capture") {
        mr.source = store::MediaSource::sim_capture;
      } else {
        throw ServiceError("bad_request", 400, "X-Media-Source must be upload or sim_capture");
      }
    }
    if (auto l = req.header("x-task-label"); !l.empty()) mr.task_label = l;
    if (auto d = req.header("x-duration-s"); !d.empty()) {
      char* end = nullptr;
      const double v = std::strtod(d.c_str(), &end);
      if (*end != '\0' || !(v >= 0.0) || v > 1e9) throw ServiceError("bad_request", 400, "invalid X-Duration-S");
      mr.duration_s = v;
    }
    const UploadResult u = svc.upload_media(mr, req.body);
    return json_response(u.created ? 201 : 200, store::to_json(u.record));
  }
  if (n == 3 && seg[2] == "episodes" && m == "GET") {
    Json list = Json::array();
    for (const auto& e : svc.list_episodes()) list.push_back(store::to_json(e));
    return json_response(200, Json{{"episodes", list}});
  }
  if (n == 4 && seg[2] == "episodes" && m == "GET") return json_response(200, store::to_json(svc.get_episode(seg[3])));
  if (n == 5 && seg[2] == "episodes" && seg[4] == "frames" && m == "GET") {
    ApiResponse r;
    r.content_type = "application/x-ndjson";
    r.file = svc.episode_frames_path(seg[3]).string();
    return r;
  }
  throw ServiceError("not_found", 404, "no route " + m + " " + req.path);
}

}  // namespace

void split_target(const std::string& target, std::string& path, std::map<std::string, std::string>& query) {
  const auto q = target.find('?');
  path = target.substr(0, q);
  if (q == std::string::npos) return;
  std::size_t pos = q + 1;
  while (pos <= target.size()) {
    const std::size_t amp = target.find('&', pos);
    const std::size_t end = amp == std::string::npos ? target.size() : amp;
    const std::string pair = target.substr(pos, end - pos);
    if (!pair.empty()) {
      const auto eq = pair.find('=');
      if (eq == std::string::npos) {
        query[percent_decode(pair)] = "";
      } else {
        query[percent_decode(pair.substr(0, eq))] = percent_decode(pair.substr(eq + 1));
      }
    }
    pos = end + 1;
  }
}

ApiResponse handle_api(DemoService& service, const ApiRequest& request) {
  try {
    return route(service, request);
  } catch (const ServiceError& e) {
    return error_response(e.status(), e.code(), e.what());
  } catch (const wire::WireError& e) {
    return error_response(400, e.code(), e.what());
  } catch (const store::StoreError& e) {
    return error_response(500, store::to_string(e.kind()), e.what());
  } catch (const std::exception& e) {
    spdlog::error("{} {}: {}", request.method, request.path, e.what());
    return error_response(500, "internal", e.what());
  }
}

}  // namespace demoforge::service
