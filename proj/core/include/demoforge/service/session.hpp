#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "demoforge/sim/world.hpp"
#include "demoforge/store/catalog.hpp"
#include "demoforge/store/episode_store.hpp"
#include "demoforge/wire/message.hpp"

namespace demoforge::service {

enum class ClockMode {
  /// Ticks on a monotonic 60 Hz clock.
  realtime,
  /// Ticks only on ControlCommand advance; every queued item is handled on
  /// arrival. Used for scripted, reproducible runs.
  lockstep,
};

enum class SessionState { lobby, live, closed };

const char* to_string(ClockMode m);
const char* to_string(SessionState s);
std::optional<ClockMode> clock_mode_from(const std::string& s);

inline constexpr std::int64_t kBroadcastDecimation = 3;  // 60 Hz / 3 = 20 Hz
inline constexpr std::int64_t kStreamRateHz = 20;
inline constexpr int kMaxCatchUpTicks = 5;

struct SessionDescriptor {
  std::string session_id;
  std::string scene;
  std::string robot;
  std::int64_t created_at = 0;
  SessionState state = SessionState::lobby;
  std::optional<std::string> recording;
  ClockMode clock = ClockMode::realtime;
  std::int64_t tick = 0;
  std::int64_t clients = 0;
};

wire::Json to_json(const SessionDescriptor& d);

/// Outbound side of one attached client. deliver() must not block.
class ClientSink {
 public:
  virtual ~ClientSink() = default;
  /// `state` marks StateFrames, which the sink may drop under backpressure.
  virtual void deliver(std::shared_ptr<const std::string> text, bool state) = 0;
  /// Flushes what is queued, then closes.
  virtual void close() = 0;
};

/// Result of a recording control, from HTTP or a streaming client.
struct RecordingResult {
  bool ok = false;
  /// Service error code when !ok: already_recording, not_recording, session_closed, storage.
  std::string error;
  std::string detail;
  std::string episode_id;
  std::int64_t tick = 0;
  std::optional<store::EpisodeManifest> manifest;
};

/// One live simulation. A dedicated thread owns the world; everything else
/// talks to it through an ordered queue.
class Session {
 public:
  Session(std::string session_id, const store::CatalogScene& scene, store::EpisodeStore& store, ClockMode clock);
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  const std::string& id() const { return id_; }
  ClockMode clock() const { return clock_; }
  const store::CatalogScene& scene() const { return scene_; }
  SessionDescriptor descriptor() const;

  /// Registers an outbound sink; returns the connection id ("c1", "c2", ...).
  std::string attach(std::shared_ptr<ClientSink> sink, std::string contributor);
  void detach(const std::string& connection_id);

  /// Hands a decoded, guard-admitted client message (teleop, control or
  /// ping) to the loop. Replies and errors go to the connection's sink.
  void submit(const std::string& connection_id, wire::Message message);

  std::future<RecordingResult> start_recording(std::string label, std::string contributor);
  std::future<RecordingResult> stop_recording();

  /// Lockstep only: steps `ticks` times and resolves once done.
  std::future<std::int64_t> advance(std::int64_t ticks);

  /// Stops the loop, finalizing any open recording, then closes all sinks
  /// after an Error{session_closed}. Idempotent.
  void close();
  bool closed() const { return state_.load() == SessionState::closed; }

 private:
  struct Item;
  struct Client {
    std::shared_ptr<ClientSink> sink;
    std::string contributor;
  };

  void run();
  void enqueue(Item item);
  void handle(Item& item);
  void handle_message(const std::string& conn, wire::Message& m);
  void apply(const std::string& conn, std::int64_t client_seq, const sim::Action& action);
  void tick_once();
  RecordingResult begin_recording(const std::string& label, const std::string& contributor);
  RecordingResult end_recording();
  void send_to(const std::string& conn, const wire::Message& m);
  void broadcast(const std::shared_ptr<const std::string>& text, bool state);
  void abort_recording(const std::exception& e);

  const std::string id_;
  const store::CatalogScene& scene_;
  store::EpisodeStore& store_;
  const ClockMode clock_;
  const std::int64_t created_at_;

  // loop-owned
  sim::WorldState world_;
  std::unique_ptr<store::EpisodeWriter> writer_;
  std::vector<store::ActionEvent> pending_actions_;

  mutable std::mutex clients_mu_;
  std::map<std::string, Client> clients_;
  std::int64_t next_connection_ = 1;

  std::mutex queue_mu_;
  std::condition_variable queue_cv_;
  std::deque<Item> queue_;
  bool stopping_ = false;

  std::atomic<SessionState> state_{SessionState::lobby};
  std::atomic<std::int64_t> tick_{0};
  mutable std::mutex recording_mu_;
  std::optional<std::string> recording_id_;

  std::thread thread_;
};

}  // namespace demoforge::service
