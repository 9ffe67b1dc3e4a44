#include "decsim/engine.hpp"

namespace decsim {

const char* event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::kComputeDone: return "compute_done";
    case EventKind::kMessageDelivered: return "message_delivered";
    case EventKind::kSendDone: return "send_done";
    case EventKind::kCustom: return "custom";
  }
  return "?";
}

uint64_t Engine::schedule(double time, EventKind kind, int src, int dst,
                          long long iteration, Action action) {
  if (is_inf(time)) return 0;
  if (time < clock_) throw std::logic_error("Engine::schedule: event in the past");
  const uint64_t seq = next_seq_++;
  queue_.push(Item{time, seq, kind, src, dst, iteration, std::move(action)});
  return seq;
}

void Engine::cancel(uint64_t handle) {
  if (handle != 0) cancelled_.insert(handle);
}

double Engine::run_until(const std::function<bool()>& stop) {
  while (!queue_.empty()) {
    if (stop()) return clock_;
    Item item = queue_.top();
    queue_.pop();
    if (!cancelled_.empty()) {
      auto it = cancelled_.find(item.seq);
      if (it != cancelled_.end()) {
        cancelled_.erase(it);
        continue;
      }
    }
    clock_ = item.time;
    if (++dispatched_ > event_cap_) {
      throw SimDiagnostic("event cap exceeded (livelock guard) at t=" +
                          std::to_string(clock_));
    }
    if (log_) {
      log_(EventLogRow{item.time, item.seq, item.kind, item.src, item.dst,
                       item.iteration});
    }
    item.action();
  }
  return clock_;
}

void ComputeUnit::start(Engine& engine, double actual_duration,
                        long long iteration, Engine::Action on_done) {
  if (pending != 0) throw std::logic_error("ComputeUnit: already computing");
  if (is_inf(actual_duration)) return;  // a straggler that never finishes
  if (actual_duration <= 0.0) actual_duration = 1e-12;
  pending = engine.schedule(engine.now() + actual_duration,
                            EventKind::kComputeDone, worker, worker, iteration,
                            std::move(on_done));
}

void ComputeUnit::interrupt(Engine& engine) {
  if (pending != 0) {
    engine.cancel(pending);
    pending = 0;
  }
}

}  // namespace decsim
