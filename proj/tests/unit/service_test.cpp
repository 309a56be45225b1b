#include <chrono>
#include <mutex>
#include <thread>

#include <gtest/gtest.h>

#include "demoforge/service/demo_service.hpp"
#include "demoforge/service/http_api.hpp"
#include "demoforge/service/outbound_queue.hpp"
#include "demoforge/store/digest.hpp"
#include "demoforge/store/replay.hpp"
#include "demoforge/store/validate.hpp"
#include "demoforge/wire/codec.hpp"
#include "test_support.hpp"

namespace demoforge::service {
namespace {

namespace fs = std::filesystem;
using wire::Json;

class CollectingSink : public ClientSink {
 public:
  void deliver(std::shared_ptr<const std::string> text, bool state) override {
    std::lock_guard lock(mu_);
    (state ? frames_ : others_).push_back(*text);
  }
  void close() override {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  std::vector<std::string> frames() const {
    std::lock_guard lock(mu_);
    return frames_;
  }
  std::vector<std::string> others() const {
    std::lock_guard lock(mu_);
    return others_;
  }
  bool closed() const {
    std::lock_guard lock(mu_);
    return closed_;
  }

 private:
  mutable std::mutex mu_;
  std::vector<std::string> frames_, others_;
  bool closed_ = false;
};

store::Catalog fresh_catalog() { return store::Catalog::load(testing::assets_dir()); }

struct ServiceFixture : ::testing::Test {
  testing::TempDir dir{"svc"};
  DemoService svc{fresh_catalog(), dir / "data", 32, 4096};

  // Round-trips an item through the session queue so earlier submissions are handled.
  static void drain(Session& s) { s.advance(1).get(); }
};

// ---- outbound queue ----

std::shared_ptr<const std::string> text(const std::string& s) { return std::make_shared<const std::string>(s); }

TEST(OutboundQueue, DropsOldestStateFrameOnly) {
  OutboundQueue q;
  q.push(text("err"), false, false);
  for (int i = 0; i < 63; ++i) q.push(text("f" + std::to_string(i)), true, false);
  EXPECT_EQ(q.size(), 64u);
  EXPECT_EQ(q.dropped(), 0u);
  q.push(text("f63"), true, false);
  EXPECT_EQ(q.size(), 64u);
  EXPECT_EQ(q.dropped(), 1u);
  EXPECT_EQ(*q.front().text, "err");
  q.pop();
  EXPECT_EQ(*q.front().text, "f1");
}

TEST(OutboundQueue, NeverDropsControlMessagesOrInFlightFront) {
  OutboundQueue q;
  q.push(text("f-front"), true, false);
  for (int i = 0; i < 70; ++i) q.push(text("c" + std::to_string(i)), false, true);
  EXPECT_EQ(q.size(), 71u);
  EXPECT_EQ(q.dropped(), 0u);
  EXPECT_EQ(*q.front().text, "f-front");
  q.push(text("f-new"), true, true);
  // the only droppable frame besides the in-flight front is the newest
  EXPECT_EQ(q.dropped(), 1u);
  EXPECT_EQ(*q.front().text, "f-front");
}

// ---- sessions ----

TEST_F(ServiceFixture, CreateDescriptor) {
  const SessionDescriptor d = svc.create_session("tabletop", "planar3", ClockMode::lockstep);
  EXPECT_EQ(d.state, SessionState::lobby);
  EXPECT_EQ(d.scene, "tabletop");
  const Json j = to_json(d);
  EXPECT_EQ(j["dt"].get<double>(), 1.0 / 60.0);
  EXPECT_EQ(j["stream_rate_hz"], 20);
  EXPECT_EQ(svc.list_sessions().size(), 1u);
}

TEST_F(ServiceFixture, CreateErrors) {
  auto code_of = [&](const std::string& scene, const std::string& robot) {
    try {
      svc.create_session(scene, robot, ClockMode::lockstep);
    } catch (const ServiceError& e) {
      return e.code() + "/" + std::to_string(e.status());
    }
    return std::string("ok");
  };
  EXPECT_EQ(code_of("nope", "planar3"), "unknown_scene/404");
  EXPECT_EQ(code_of("tabletop", "nope"), "unknown_robot/404");
  EXPECT_EQ(code_of("tabletop", "arm7"), "robot_mismatch/400");
}

TEST_F(ServiceFixture, CapacityAtDefaultCap) {
  for (int i = 0; i < 32; ++i) svc.create_session("planar2_open", "planar2", ClockMode::lockstep);
  try {
    svc.create_session("planar2_open", "planar2", ClockMode::lockstep);
    FAIL();
  } catch (const ServiceError& e) {
    EXPECT_EQ(e.code(), "capacity");
    EXPECT_EQ(e.status(), 503);
  }
  svc.close_session(svc.list_sessions().front().session_id);
  EXPECT_NO_THROW(svc.create_session("planar2_open", "planar2", ClockMode::lockstep));
}

TEST_F(ServiceFixture, LockstepNoClientsAdvances) {
  const auto d = svc.create_session("tabletop", "planar3", ClockMode::lockstep);
  EXPECT_EQ(svc.advance(d.session_id, 60), 60);
  EXPECT_EQ(svc.describe_session(d.session_id).tick, 60);
  EXPECT_THROW(svc.advance(d.session_id, 0), ServiceError);
  EXPECT_THROW(svc.advance(d.session_id, 36001), ServiceError);
}

TEST_F(ServiceFixture, RealtimeClockTicksAtSixtyHertz) {
  const auto d = svc.create_session("tabletop", "planar3", ClockMode::realtime);
  const auto t0 = std::chrono::steady_clock::now();
  const auto tick0 = svc.describe_session(d.session_id).tick;
  std::this_thread::sleep_for(std::chrono::milliseconds(500));
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto ticks = svc.describe_session(d.session_id).tick - tick0;
  EXPECT_NEAR(static_cast<double>(ticks), elapsed * 60.0, 6.0);
  try {
    svc.advance(d.session_id, 1);
    FAIL();
  } catch (const ServiceError& e) {
    EXPECT_EQ(e.code(), "not_lockstep");
  }
}

TEST_F(ServiceFixture, RecordingLifecycleCounts) {
  const auto d = svc.create_session("tabletop", "planar3", ClockMode::lockstep);
  auto s = svc.session(d.session_id);
  auto sink = std::make_shared<CollectingSink>();
  const std::string conn = s->attach(sink, "alice");
  EXPECT_EQ(conn, "c1");
  svc.advance(d.session_id, 7);

  try {
    svc.stop_recording(d.session_id);
    FAIL();
  } catch (const ServiceError& e) {
    EXPECT_EQ(e.code(), "not_recording");
    EXPECT_EQ(e.status(), 409);
  }

  const RecordingResult started = svc.start_recording(d.session_id, "pick", "alice");
  EXPECT_EQ(started.tick, 8);
  EXPECT_THROW(svc.start_recording(d.session_id, "again", "alice"), ServiceError);

  std::int64_t seq = 1, actions = 0;
  for (int k = 0; k < 120; ++k) {
    if (k % 4 == 0) {
      s->submit(conn, wire::TeleopCommand{seq++, sim::EeDelta{0.002, 0, 0, 0, 0, 0}});
      ++actions;
    }
    if (k == 50) {
      s->submit(conn, wire::ControlCommand{seq++, wire::ControlOp::reset, "", 0});
      ++actions;
    }
    s->submit(conn, wire::ControlCommand{seq++, wire::ControlOp::advance, "", 1});
  }
  const RecordingResult stopped = svc.stop_recording(d.session_id);
  ASSERT_TRUE(stopped.manifest.has_value());
  EXPECT_EQ(stopped.manifest->frame_count, 120);
  EXPECT_EQ(stopped.manifest->action_count, actions);
  EXPECT_EQ(stopped.manifest->start_tick, 8);
  EXPECT_EQ(stopped.manifest->end_tick, 127);
  EXPECT_EQ(stopped.manifest->contributors, std::vector<std::string>{"alice"});

  const fs::path ep = svc.store().episode_dir(started.episode_id);
  EXPECT_TRUE(store::validate_episode(ep).ok);
  EXPECT_TRUE(store::check_replay(ep, svc.catalog()).equal);

  // RecordingEvents reach the client, and the started tick is the first recorded frame
  std::vector<wire::RecordingEvent> events;
  for (const auto& t : sink->others()) {
    const auto m = wire::decode_message(t);
    if (auto* e = std::get_if<wire::RecordingEvent>(&m)) events.push_back(*e);
  }
  ASSERT_EQ(events.size(), 2u);
  EXPECT_TRUE(events[0].started);
  EXPECT_EQ(events[0].tick, 8);
  EXPECT_FALSE(events[1].started);
  EXPECT_EQ(events[1].tick, 127);
}

TEST_F(ServiceFixture, BroadcastDecimationAndEquality) {
  const auto d = svc.create_session("tabletop", "planar3", ClockMode::lockstep);
  auto s = svc.session(d.session_id);
  auto a = std::make_shared<CollectingSink>();
  auto b = std::make_shared<CollectingSink>();
  const std::string ca = s->attach(a, "a");
  s->attach(b, "b");
  s->submit(ca, wire::TeleopCommand{1, sim::EeDelta{0.05, 0, 0, 0, 0, 0}});
  svc.advance(d.session_id, 90);
  const auto fa = a->frames();
  EXPECT_EQ(fa, b->frames());
  ASSERT_EQ(fa.size(), 30u);
  std::uint64_t last_seq = 0;
  for (std::size_t i = 0; i < fa.size(); ++i) {
    const auto m = wire::decode_message(fa[i]);
    const auto& f = std::get<wire::StateFrame>(m).frame;
    EXPECT_EQ(f.tick, static_cast<std::int64_t>(3 * (i + 1)));
    EXPECT_GT(f.seq, last_seq);
    last_seq = f.seq;
  }
}

TEST_F(ServiceFixture, PingAndBadControl) {
  const auto d = svc.create_session("tabletop", "planar3", ClockMode::realtime);
  auto s = svc.session(d.session_id);
  auto sink = std::make_shared<CollectingSink>();
  const std::string c = s->attach(sink, "x");
  s->submit(c, wire::Ping{42});
  s->submit(c, wire::ControlCommand{1, wire::ControlOp::advance, "", 5});
  s->submit(c, wire::ControlCommand{2, wire::ControlOp::record_stop, "", 0});
  for (int i = 0; i < 100 && sink->others().size() < 3; ++i) std::this_thread::sleep_for(std::chrono::milliseconds(10));
  const auto others = sink->others();
  ASSERT_EQ(others.size(), 3u);
  EXPECT_EQ(wire::decode_message(others[0]), wire::Message(wire::Pong{42}));
  EXPECT_EQ(std::get<wire::ErrorMessage>(wire::decode_message(others[1])).code, "protocol_violation");
  EXPECT_EQ(std::get<wire::ErrorMessage>(wire::decode_message(others[2])).code, "protocol_violation");
}

TEST_F(ServiceFixture, CloseFinalizesAndNotifies) {
  const auto d = svc.create_session("tabletop", "planar3", ClockMode::lockstep);
  auto s = svc.session(d.session_id);
  auto sink = std::make_shared<CollectingSink>();
  s->attach(sink, "x");
  const auto r = svc.start_recording(d.session_id, "l", "x");
  svc.advance(d.session_id, 10);
  svc.close_session(d.session_id);
  EXPECT_TRUE(sink->closed());
  const auto last = wire::decode_message(sink->others().back());
  EXPECT_EQ(std::get<wire::ErrorMessage>(last).code, "session_closed");
  EXPECT_TRUE(svc.get_episode(r.episode_id).finalized);
  EXPECT_EQ(svc.get_episode(r.episode_id).frame_count, 10);
  try {
    svc.session(d.session_id);
    FAIL();
  } catch (const ServiceError& e) {
    EXPECT_EQ(e.status(), 410);
  }
  EXPECT_EQ(svc.describe_session(d.session_id).state, SessionState::closed);
}

TEST_F(ServiceFixture, SessionIsolationInProcess) {
  auto run = [&](bool interleave) {
    const auto a = svc.create_session("tabletop", "planar3", ClockMode::lockstep);
    const auto b = svc.create_session("planar2_open", "planar2", ClockMode::lockstep);
    auto sa = svc.session(a.session_id), sb = svc.session(b.session_id);
    auto ka = std::make_shared<CollectingSink>(), kb = std::make_shared<CollectingSink>();
    const auto ca = sa->attach(ka, "a"), cb = sb->attach(kb, "b");
    std::int64_t qa = 1, qb = 1;
    auto step_a = [&](int i) {
      sa->submit(ca, wire::TeleopCommand{qa++, sim::EeDelta{0.01 * (i % 3), -0.005, 0, 0, 0, 0}});
      sa->advance(5).get();
    };
    auto step_b = [&](int i) {
      sb->submit(cb, wire::TeleopCommand{qb++, sim::EeDelta{-0.02, 0.01 * (i % 2), 0, 0, 0, 0}});
      if (i == 7) sb->submit(cb, wire::ControlCommand{qb++, wire::ControlOp::reset, "", 0});
      sb->advance(4).get();
    };
    if (interleave) {
      for (int i = 0; i < 20; ++i) {
        step_a(i);
        step_b(i);
      }
    } else {
      for (int i = 0; i < 20; ++i) step_a(i);
      for (int i = 0; i < 20; ++i) step_b(i);
    }
    std::string da, db;
    for (const auto& f : ka->frames()) da += f + "\n";
    for (const auto& f : kb->frames()) db += f + "\n";
    svc.close_session(a.session_id);
    svc.close_session(b.session_id);
    return std::make_pair(store::sha256_hex(da), store::sha256_hex(db));
  };
  EXPECT_EQ(run(false), run(true));
}

// ---- annotations and media through the service ----

TEST_F(ServiceFixture, Annotations) {
  const auto d = svc.create_session("tabletop", "planar3", ClockMode::lockstep);
  const auto r = svc.start_recording(d.session_id, "l", "x");
  svc.advance(d.session_id, 60);
  svc.stop_recording(d.session_id);
  const auto before = svc.get_episode(r.episode_id).annotations.size();

  AnnotationRequest req{r.episode_id, "bob", "task_description", "pick the box", std::nullopt};
  const auto rec = svc.submit_annotation(req);
  EXPECT_EQ(rec.annotation_id.rfind("an-", 0), 0u);
  EXPECT_EQ(svc.get_episode(r.episode_id).annotations.size(), before + 1);

  auto code = [&](AnnotationRequest q) {
    try {
      svc.submit_annotation(q);
    } catch (const ServiceError& e) {
      return e.code();
    }
    return std::string("ok");
  };
  EXPECT_EQ(code({r.episode_id, "bob", "procedure", "   ", std::nullopt}), "invalid_annotation");
  EXPECT_EQ(code({r.episode_id, "bob", "procedure", "x", std::make_pair(50, 40)}), "invalid_annotation");
  EXPECT_EQ(code({r.episode_id, "bob", "procedure", "x", std::make_pair(1, 400)}), "invalid_annotation");
  EXPECT_EQ(code({r.episode_id, "bob", "poem", "x", std::nullopt}), "invalid_annotation");
  EXPECT_EQ(code({"nobody", "bob", "procedure", "x", std::nullopt}), "unknown_target");
  EXPECT_EQ(code({r.episode_id, "bob", "constraint", "x", std::make_pair(r.tick, r.tick + 59)}), "ok");
  EXPECT_EQ(code({d.session_id, "bob", "rationale", "live note", std::make_pair(0, 10)}), "ok");
  EXPECT_TRUE(store::validate_episode(svc.store().episode_dir(r.episode_id)).ok);
}

// ---- HTTP API routing without a socket ----

ApiResponse call(DemoService& svc, const std::string& method, const std::string& target, const std::string& body = "",
                 std::map<std::string, std::string> headers = {}) {
  ApiRequest req;
  req.method = method;
  split_target(target, req.path, req.query);
  req.headers = std::move(headers);
  req.body = body;
  return handle_api(svc, req);
}

TEST(HttpApi, SplitTarget) {
  std::string path;
  std::map<std::string, std::string> q;
  split_target("/ws/v1/sessions/s1?contributor=a%20b&x=1", path, q);
  EXPECT_EQ(path, "/ws/v1/sessions/s1");
  EXPECT_EQ(q["contributor"], "a b");
  EXPECT_EQ(q["x"], "1");
}

TEST_F(ServiceFixture, ApiScenesRobotsSessions) {
  auto r = call(svc, "GET", "/api/v1/scenes");
  ASSERT_EQ(r.status, 200);
  const Json scenes = wire::parse_text(r.body)["scenes"];
  ASSERT_EQ(scenes.size(), 3u);
  EXPECT_EQ(scenes[0]["name"], "planar2_open");
  EXPECT_EQ(wire::encode_canonical(wire::parse_text(r.body)), r.body);

  r = call(svc, "GET", "/api/v1/robots");
  EXPECT_EQ(wire::parse_text(r.body)["robots"].size(), 3u);

  r = call(svc, "POST", "/api/v1/sessions", R"({"clock":"lockstep","robot":"planar3","scene":"tabletop"})");
  ASSERT_EQ(r.status, 201) << r.body;
  const std::string id = wire::parse_text(r.body)["session_id"];
  EXPECT_EQ(call(svc, "GET", "/api/v1/sessions/" + id).status, 200);
  EXPECT_EQ(wire::parse_text(call(svc, "GET", "/api/v1/sessions").body)["sessions"].size(), 1u);

  r = call(svc, "POST", "/api/v1/sessions/" + id + "/advance", R"({"ticks":30})");
  EXPECT_EQ(r.status, 200) << r.body;
  r = call(svc, "POST", "/api/v1/sessions/" + id + "/recording/start", R"({"label":"demo"})");
  ASSERT_EQ(r.status, 200) << r.body;
  const std::string ep = wire::parse_text(r.body)["episode_id"];
  EXPECT_EQ(wire::parse_text(r.body)["tick"], 31);
  EXPECT_EQ(call(svc, "POST", "/api/v1/sessions/" + id + "/recording/start", "{}").status, 409);
  call(svc, "POST", "/api/v1/sessions/" + id + "/advance", R"({"ticks":12})");
  r = call(svc, "POST", "/api/v1/sessions/" + id + "/recording/stop", "");
  ASSERT_EQ(r.status, 200) << r.body;
  EXPECT_EQ(wire::parse_text(r.body)["frame_count"], 12);

  r = call(svc, "GET", "/api/v1/episodes");
  EXPECT_EQ(wire::parse_text(r.body)["episodes"].size(), 1u);
  r = call(svc, "GET", "/api/v1/episodes/" + ep);
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(wire::parse_text(r.body)["episode_id"], ep);
  r = call(svc, "GET", "/api/v1/episodes/" + ep + "/frames");
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(testing::read_lines(r.file).size(), 12u);
  EXPECT_EQ(call(svc, "GET", "/api/v1/episodes/nope").status, 404);

  r = call(svc, "POST", "/api/v1/annotations", wire::encode_canonical(Json{{"kind", "procedure"}, {"target", ep}, {"text", "grab"}, {"anchor", {31, 35}}}));
  EXPECT_EQ(r.status, 201) << r.body;
  r = call(svc, "POST", "/api/v1/annotations", wire::encode_canonical(Json{{"kind", "procedure"}, {"target", ep}, {"text", "x"}, {"anchor", {50, 40}}}));
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(wire::parse_text(r.body)["error"], "invalid_annotation");

  EXPECT_EQ(call(svc, "POST", "/api/v1/sessions/" + id + "/close", "").status, 200);
  EXPECT_EQ(call(svc, "POST", "/api/v1/sessions/" + id + "/advance", R"({"ticks":1})").status, 410);
}

TEST_F(ServiceFixture, ApiErrors) {
  EXPECT_EQ(call(svc, "GET", "/api/v1/nothing").status, 404);
  EXPECT_EQ(call(svc, "GET", "/other").status, 404);
  EXPECT_EQ(call(svc, "POST", "/api/v1/sessions", "{not json").status, 400);
  EXPECT_EQ(call(svc, "POST", "/api/v1/sessions", R"({"scene":"tabletop"})").status, 400);
  EXPECT_EQ(call(svc, "POST", "/api/v1/sessions", R"({"robot":"planar3","scene":"nope"})").status, 404);
  EXPECT_EQ(call(svc, "POST", "/api/v1/sessions", R"({"clock":"warp","robot":"planar3","scene":"tabletop"})").status,
            400);
  const auto r = call(svc, "GET", "/api/v1/sessions/zzz");
  EXPECT_EQ(r.status, 404);
  const Json body = wire::parse_text(r.body);
  EXPECT_EQ(body["error"], "unknown_session");
  EXPECT_TRUE(body["detail"].is_string());
}

TEST_F(ServiceFixture, ApiMediaIdempotentAndCapped) {
  const auto d = svc.create_session("tabletop", "planar3", ClockMode::lockstep);
  const auto rec = svc.start_recording(d.session_id, "pick", "x");
  svc.advance(d.session_id, 5);
  svc.stop_recording(d.session_id);
  const std::string bytes(1024, 'v');
  const std::map<std::string, std::string> h{{"x-contributor", "carol"}, {"content-type", "video/mp4"}};
  auto r1 = call(svc, "POST", "/api/v1/media/" + rec.episode_id, bytes, h);
  ASSERT_EQ(r1.status, 201) << r1.body;
  auto r2 = call(svc, "POST", "/api/v1/media/" + rec.episode_id, bytes, h);
  EXPECT_EQ(r2.status, 200);
  const Json j1 = wire::parse_text(r1.body), j2 = wire::parse_text(r2.body);
  EXPECT_EQ(j1["media_id"], j2["media_id"]);
  EXPECT_EQ(j1["content_digest"], testing::sodium_sha256_hex(bytes));
  EXPECT_EQ(j1["metadata"]["scene"], "tabletop");
  EXPECT_EQ(j1["metadata"]["embodiment"], "planar3");
  EXPECT_EQ(j1["metadata"]["task_label"], "pick");
  EXPECT_EQ(j1["metadata"]["contributor"], "carol");

  EXPECT_EQ(call(svc, "POST", "/api/v1/media/" + rec.episode_id, std::string(4097, 'x'), h).status, 413);
  auto bad = h;
  bad["x-declared-digest"] = std::string(64, '0');
  EXPECT_EQ(call(svc, "POST", "/api/v1/media/" + rec.episode_id, "abc", bad).status, 422);
  EXPECT_EQ(call(svc, "POST", "/api/v1/media/nobody", "abc", h).status, 404);
  const auto m = svc.get_episode(rec.episode_id);
  EXPECT_EQ(m.media.size(), 1u);
  EXPECT_NE(std::find(m.contributors.begin(), m.contributors.end(), "carol"), m.contributors.end());
}

}  // namespace
}  // namespace demoforge::service
