#pragma once

#include <cstddef>
#include <deque>
#include <memory>
#include <string>

namespace demoforge::service {

/// Per-connection send queue. Beyond kMaxQueued entries the oldest queued
/// StateFrame is dropped; other messages are never dropped.
class OutboundQueue {
 public:
  static constexpr std::size_t kMaxQueued = 64;

  struct Entry {
    std::shared_ptr<const std::string> text;
    bool state = false;
  };

  /// `in_flight` protects the front entry while a write is using it.
  void push(std::shared_ptr<const std::string> text, bool state, bool in_flight) {
    entries_.push_back({std::move(text), state});
    if (entries_.size() <= kMaxQueued) return;
    for (auto it = entries_.begin() + (in_flight ? 1 : 0); it != entries_.end(); ++it) {
      if (it->state) {
        entries_.erase(it);
        ++dropped_;
        return;
      }
    }
  }

  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  const Entry& front() const { return entries_.front(); }
  void pop() { entries_.pop_front(); }
  std::size_t dropped() const { return dropped_; }

 private:
  std::deque<Entry> entries_;
  std::size_t dropped_ = 0;
};

}  // namespace demoforge::service
