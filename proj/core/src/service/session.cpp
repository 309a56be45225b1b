#include "demoforge/service/session.hpp"

#include <chrono>

#include <spdlog/spdlog.h>

#include "demoforge/store/records.hpp"
#include "demoforge/wire/codec.hpp"

namespace demoforge::service {

const char* to_string(ClockMode m) { return m == ClockMode::lockstep ? "lockstep" : "realtime"; }

const char* to_string(SessionState s) {
  switch (s) {
    case SessionState::lobby: return "lobby";
    case SessionState::live: return "live";
    case SessionState::closed: return "closed";
  }
  return "lobby";
}

std::optional<ClockMode> clock_mode_from(const std::string& s) {
  if (s == "realtime") return ClockMode::realtime;
  if (s == "lockstep") return ClockMode::lockstep;
  return std::nullopt;
}

wire::Json to_json(const SessionDescriptor& d) {
  return wire::Json{{"clients", d.clients},
                    {"clock", to_string(d.clock)},
                    {"created_at", d.created_at},
                    {"dt", sim::kTickDt.seconds()},
                    {"recording", d.recording ? wire::Json(*d.recording) : wire::Json(nullptr)},
                    {"robot", d.robot},
                    {"scene", d.scene},
                    {"session_id", d.session_id},
                    {"state", to_string(d.state)},
                    {"stream_rate_hz", kStreamRateHz},
                    {"tick", d.tick}};
}

struct Session::Item {
  enum class Kind { message, start, stop, advance };
  Kind kind = Kind::message;
  std::string conn;
  wire::Message message;
  std::string label;
  std::string contributor;
  std::int64_t ticks = 0;
  std::shared_ptr<std::promise<RecordingResult>> recording;
  std::shared_ptr<std::promise<std::int64_t>> advanced;
};

namespace {

RecordingResult failure(std::string code, std::string detail) {
  RecordingResult r;
  r.error = std::move(code);
  r.detail = std::move(detail);
  return r;
}

}  // namespace

Session::Session(std::string session_id, const store::CatalogScene& scene, store::EpisodeStore& store, ClockMode clock)
    : id_(std::move(session_id)),
      scene_(scene),
      store_(store),
      clock_(clock),
      created_at_(store::utc_now_ms()),
      world_(sim::load_scene(scene.scene)) {
  thread_ = std::thread([this] { run(); });
}

Session::~Session() { close(); }

SessionDescriptor Session::descriptor() const {
  SessionDescriptor d;
  d.session_id = id_;
  d.scene = scene_.scene->spec.name;
  d.robot = scene_.scene->robot.name;
  d.created_at = created_at_;
  d.state = state_.load();
  d.clock = clock_;
  d.tick = tick_.load();
  {
    std::lock_guard lock(recording_mu_);
    d.recording = recording_id_;
  }
  std::lock_guard lock(clients_mu_);
  d.clients = static_cast<std::int64_t>(clients_.size());
  return d;
}

std::string Session::attach(std::shared_ptr<ClientSink> sink, std::string contributor) {
  std::lock_guard lock(clients_mu_);
  const std::string id = "c" + std::to_string(next_connection_++);
  clients_[id] = Client{std::move(sink), std::move(contributor)};
  SessionState lobby = SessionState::lobby;
  state_.compare_exchange_strong(lobby, SessionState::live);
  return id;
}

void Session::detach(const std::string& connection_id) {
  std::lock_guard lock(clients_mu_);
  clients_.erase(connection_id);
}

void Session::enqueue(Item item) {
  {
    std::lock_guard lock(queue_mu_);
    if (stopping_) {
      if (item.recording) item.recording->set_value(failure("session_closed", "session is closed"));
      if (item.advanced) item.advanced->set_value(tick_.load());
      return;
    }
    queue_.push_back(std::move(item));
  }
  queue_cv_.notify_one();
}

void Session::submit(const std::string& connection_id, wire::Message message) {
  Item item;
  item.conn = connection_id;
  item.message = std::move(message);
  enqueue(std::move(item));
}

std::future<RecordingResult> Session::start_recording(std::string label, std::string contributor) {
  Item item;
  item.kind = Item::Kind::start;
  item.label = std::move(label);
  item.contributor = std::move(contributor);
  item.recording = std::make_shared<std::promise<RecordingResult>>();
  auto f = item.recording->get_future();
  enqueue(std::move(item));
  return f;
}

std::future<RecordingResult> Session::stop_recording() {
  Item item;
  item.kind = Item::Kind::stop;
  item.recording = std::make_shared<std::promise<RecordingResult>>();
  auto f = item.recording->get_future();
  enqueue(std::move(item));
  return f;
}

std::future<std::int64_t> Session::advance(std::int64_t ticks) {
  Item item;
  item.kind = Item::Kind::advance;
  item.ticks = ticks;
  item.advanced = std::make_shared<std::promise<std::int64_t>>();
  auto f = item.advanced->get_future();
  enqueue(std::move(item));
  return f;
}

void Session::close() {
  {
    std::lock_guard lock(queue_mu_);
    stopping_ = true;
  }
  queue_cv_.notify_all();
  if (thread_.joinable() && thread_.get_id() != std::this_thread::get_id()) thread_.join();

  std::map<std::string, Client> clients;
  {
    std::lock_guard lock(clients_mu_);
    clients.swap(clients_);
  }
  if (!clients.empty()) {
    const auto text = std::make_shared<const std::string>(
        wire::encode_message(wire::ErrorMessage{wire::error_code::session_closed, "session " + id_ + " closed"}));
    for (auto& [id, c] : clients) {
      c.sink->deliver(text, false);
      c.sink->close();
    }
  }
}

void Session::run() {
  using clock = std::chrono::steady_clock;
  auto epoch = clock::now();
  std::int64_t ticks_since_epoch = 1;
  auto deadline = [&] {
    // scale the tick count rather than accumulate a rounded period
    return epoch + std::chrono::nanoseconds(ticks_since_epoch * 1'000'000'000 * sim::kTickDt.num / sim::kTickDt.den);
  };

  std::deque<Item> batch;
  for (;;) {
    {
      std::unique_lock lock(queue_mu_);
      if (clock_ == ClockMode::lockstep) {
        queue_cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
      } else {
        queue_cv_.wait_until(lock, deadline(), [&] { return stopping_; });
      }
      if (stopping_) break;
      if (clock_ == ClockMode::lockstep) {
        batch.swap(queue_);
      }
    }

    if (clock_ == ClockMode::lockstep) {
      for (auto& item : batch) handle(item);
      batch.clear();
      continue;
    }

    int ran = 0;
    while (clock::now() >= deadline() && ran < kMaxCatchUpTicks) {
      {
        std::lock_guard lock(queue_mu_);
        batch.swap(queue_);
      }
      for (auto& item : batch) handle(item);
      batch.clear();
      tick_once();
      ++ticks_since_epoch;
      ++ran;
    }
    if (clock::now() >= deadline()) {
      spdlog::warn("session {}: clock rebase at tick {} after {} catch-up ticks", id_, world_.tick, ran);
      epoch = clock::now();
      ticks_since_epoch = 1;
    }
  }

  if (writer_) {
    const RecordingResult r = end_recording();
    if (r.ok) spdlog::info("session {}: finalized episode {} on close", id_, r.episode_id);
  }
  state_.store(SessionState::closed);

  std::lock_guard lock(queue_mu_);
  for (auto& item : queue_) {
    if (item.recording) item.recording->set_value(failure("session_closed", "session is closed"));
    if (item.advanced) item.advanced->set_value(tick_.load());
  }
  queue_.clear();
}

void Session::handle(Item& item) {
  switch (item.kind) {
    case Item::Kind::message:
      handle_message(item.conn, item.message);
      return;
    case Item::Kind::start:
      item.recording->set_value(begin_recording(item.label, item.contributor));
      return;
    case Item::Kind::stop:
      item.recording->set_value(end_recording());
      return;
    case Item::Kind::advance:
      if (clock_ == ClockMode::lockstep) {
        for (std::int64_t i = 0; i < item.ticks; ++i) tick_once();
      }
      item.advanced->set_value(world_.tick);
      return;
  }
}

void Session::handle_message(const std::string& conn, wire::Message& m) {
  using namespace wire;
  if (auto* t = std::get_if<TeleopCommand>(&m)) {
    apply(conn, t->client_seq, sim::to_action(t->payload));
  } else if (auto* c = std::get_if<ControlCommand>(&m)) {
    switch (c->op) {
      case ControlOp::reset:
        apply(conn, c->client_seq, sim::ResetAction{});
        break;
      case ControlOp::record_start: {
        std::string contributor;
        {
          std::lock_guard lock(clients_mu_);
          if (auto it = clients_.find(conn); it != clients_.end()) contributor = it->second.contributor;
        }
        const RecordingResult r = begin_recording(c->label, contributor);
        if (!r.ok) send_to(conn, ErrorMessage{error_code::protocol_violation, r.detail});
        break;
      }
      case ControlOp::record_stop: {
        const RecordingResult r = end_recording();
        if (!r.ok) send_to(conn, ErrorMessage{error_code::protocol_violation, r.detail});
        break;
      }
      case ControlOp::advance:
        if (clock_ != ClockMode::lockstep) {
          send_to(conn, ErrorMessage{error_code::protocol_violation, "advance requires a lockstep session"});
          break;
        }
        for (std::int64_t i = 0; i < c->ticks; ++i) tick_once();
        break;
    }
  } else if (auto* p = std::get_if<Ping>(&m)) {
    send_to(conn, Pong{p->nonce});
  } else {
    send_to(conn, ErrorMessage{error_code::protocol_violation, std::string("unexpected message '") + type_tag(m) + "'"});
  }
}

void Session::apply(const std::string& conn, std::int64_t client_seq, const sim::Action& action) {
  world_ = sim::apply_action(std::move(world_), action);
  if (!writer_) return;
  store::ActionEvent ev;
  ev.tick = world_.tick + 1;
  ev.payload = action;
  ev.client_seq = client_seq;
  ev.origin = conn;
  pending_actions_.push_back(std::move(ev));
  std::lock_guard lock(clients_mu_);
  if (auto it = clients_.find(conn); it != clients_.end()) writer_->add_contributor(it->second.contributor);
}

void Session::tick_once() {
  auto [next, frame] = sim::step(std::move(world_), sim::kTickDt);
  world_ = std::move(next);
  tick_.store(world_.tick);
  if (writer_) {
    try {
      writer_->append_frame(frame);
      for (const auto& a : pending_actions_) writer_->append_action(a);
    } catch (const std::exception& e) {
      abort_recording(e);
    }
  }
  pending_actions_.clear();
  if (frame.tick % kBroadcastDecimation != 0) return;
  {
    std::lock_guard lock(clients_mu_);
    if (clients_.empty()) return;
  }
  broadcast(std::make_shared<const std::string>(wire::encode_message(wire::StateFrame{std::move(frame)})), true);
}

RecordingResult Session::begin_recording(const std::string& label, const std::string& contributor) {
  if (writer_) {
    return failure("already_recording", "session " + id_ + " is already recording " + writer_->episode_id());
  }
  try {
    writer_ = store_.open_episode(store::SessionMeta{id_, &scene_}, label, world_.tick + 1, world_);
  } catch (const store::StoreError& e) {
    return failure(e.kind() == store::StoreError::Kind::already_open ? "already_recording" : "storage", e.what());
  }
  writer_->add_contributor(contributor);
  pending_actions_.clear();
  {
    std::lock_guard lock(recording_mu_);
    recording_id_ = writer_->episode_id();
  }
  RecordingResult r;
  r.ok = true;
  r.episode_id = writer_->episode_id();
  r.tick = writer_->start_tick();
  spdlog::info("session {}: recording {} from tick {}", id_, r.episode_id, r.tick);
  broadcast(std::make_shared<const std::string>(wire::encode_message(wire::RecordingEvent{r.episode_id, true, r.tick})),
            false);
  return r;
}

RecordingResult Session::end_recording() {
  if (!writer_) return failure("not_recording", "session " + id_ + " is not recording");
  pending_actions_.clear();
  RecordingResult r;
  r.episode_id = writer_->episode_id();
  try {
    r.manifest = writer_->finalize();
  } catch (const std::exception& e) {
    abort_recording(e);
    return failure("storage", e.what());
  }
  writer_.reset();
  {
    std::lock_guard lock(recording_mu_);
    recording_id_.reset();
  }
  r.ok = true;
  r.tick = r.manifest->end_tick;
  spdlog::info("session {}: stopped {} at tick {} ({} frames)", id_, r.episode_id, r.tick, r.manifest->frame_count);
  broadcast(
      std::make_shared<const std::string>(wire::encode_message(wire::RecordingEvent{r.episode_id, false, r.tick})),
      false);
  return r;
}

void Session::abort_recording(const std::exception& e) {
  spdlog::error("session {}: recording {} aborted: {}", id_, writer_ ? writer_->episode_id() : "", e.what());
  writer_.reset();
  pending_actions_.clear();
  std::lock_guard lock(recording_mu_);
  recording_id_.reset();
}

void Session::send_to(const std::string& conn, const wire::Message& m) {
  auto text = std::make_shared<const std::string>(wire::encode_message(m));
  std::lock_guard lock(clients_mu_);
  if (auto it = clients_.find(conn); it != clients_.end()) it->second.sink->deliver(std::move(text), false);
}

void Session::broadcast(const std::shared_ptr<const std::string>& text, bool state) {
  std::lock_guard lock(clients_mu_);
  for (auto& [id, c] : clients_) c.sink->deliver(text, state);
}

}  // namespace demoforge::service
