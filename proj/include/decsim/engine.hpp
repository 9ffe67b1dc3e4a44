#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "decsim/time_inf.hpp"

namespace decsim {

// Raised when a simulation trips the livelock guard or another runtime
// diagnostic; mapped to exit code 3 by the CLI.
class SimDiagnostic : public std::runtime_error {
 public:
  explicit SimDiagnostic(const std::string& what) : std::runtime_error(what) {}
};

enum class EventKind { kComputeDone, kMessageDelivered, kSendDone, kCustom };

const char* event_kind_name(EventKind k);

struct EventLogRow {
  double time;
  uint64_t seq;
  EventKind kind;
  int src;
  int dst;
  long long iteration;
};

// Deterministic event queue: pops in (time, seq) lexicographic order, seq
// being the monotone insertion counter, so equal-time events dispatch in
// scheduling order regardless of floating-point noise.
class Engine {
 public:
  using Action = std::function<void()>;
  using LogSink = std::function<void(const EventLogRow&)>;

  double now() const { return clock_; }
  uint64_t events_dispatched() const { return dispatched_; }
  uint64_t messages_sent() const { return messages_sent_; }
  void count_message() { ++messages_sent_; }

  void set_event_cap(uint64_t cap) { event_cap_ = cap; }
  void set_log_sink(LogSink sink) { log_ = std::move(sink); }

  // Schedules an action; returns a handle usable with cancel(). Events in
  // the past are rejected. Infinite times are silently dropped (they would
  // never fire).
  uint64_t schedule(double time, EventKind kind, int src, int dst,
                    long long iteration, Action action);
  void cancel(uint64_t handle);

  // Dispatches events in order until the predicate holds (checked before
  // every dispatch) or the queue drains. Returns the clock at the halt.
  double run_until(const std::function<bool()>& stop);

 private:
  struct Item {
    double time;
    uint64_t seq;
    EventKind kind;
    int src;
    int dst;
    long long iteration;
    Action action;
  };
  struct Later {
    bool operator()(const Item& a, const Item& b) const {
      if (a.time != b.time) return a.time > b.time;
      return a.seq > b.seq;
    }
  };

  std::priority_queue<Item, std::vector<Item>, Later> queue_;
  std::unordered_set<uint64_t> cancelled_;
  double clock_ = 0.0;
  uint64_t next_seq_ = 1;
  uint64_t dispatched_ = 0;
  uint64_t messages_sent_ = 0;
  uint64_t event_cap_ = 200000000ULL;
  LogSink log_;
};

// One directed communication line. At most one transmission is on the wire;
// a send enqueued at time t while the line is busy until b is delivered at
// max(t, b) + delay. Infinite delay swallows the payload (no event).
struct Channel {
  int src = 0;
  int dst = 0;
  double delay = 0.0;
  double busy_until = 0.0;

  // Returns the delivery time, or kInf when the payload will never arrive.
  double send(Engine& engine, double now) {
    if (is_inf(delay)) return kInf;
    const double delivered = std::fmax(now, busy_until) + delay;
    busy_until = delivered;
    engine.count_message();
    return delivered;
  }
};

// One gradient in flight per worker; an interrupted computation is
// discarded (a fresh point supersedes it).
struct ComputeUnit {
  int worker = 0;
  double duration = 0.0;  // base seconds per gradient (h[worker])
  uint64_t pending = 0;   // engine handle of the in-flight ComputeDone

  bool busy() const { return pending != 0; }

  // actual_duration lets callers apply jitter; infinite durations never
  // complete, zero durations are clamped to 1e-12 to avoid event storms.
  void start(Engine& engine, double actual_duration, long long iteration,
             Engine::Action on_done);
  void interrupt(Engine& engine);
};

}  // namespace decsim
