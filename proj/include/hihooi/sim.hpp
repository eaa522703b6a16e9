#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <queue>
#include <vector>

namespace hihooi {

using SimTime = uint64_t;

// Deterministic discrete-event loop. Ties on time break by insertion order,
// so a fixed schedule of callbacks replays identically.
class Simulation {
 public:
  SimTime now() const { return now_; }

  void at(SimTime when, std::function<void()> fn) {
    if (when < now_) when = now_;
    heap_.push(Event{when, seq_++, std::move(fn)});
  }
  void in(SimTime delay, std::function<void()> fn) { at(now_ + delay, std::move(fn)); }

  bool step() {
    if (heap_.empty()) return false;
    Event e = std::move(const_cast<Event&>(heap_.top()));
    heap_.pop();
    now_ = e.time;
    e.fn();
    return true;
  }

  void run() {
    while (step()) {
    }
  }

  void run_until(SimTime t) {
    while (!heap_.empty() && heap_.top().time <= t) step();
    if (now_ < t) now_ = t;
  }

  size_t pending() const { return heap_.size(); }

 private:
  struct Event {
    SimTime time;
    uint64_t seq;
    std::function<void()> fn;
    bool operator>(const Event& o) const {
      return time != o.time ? time > o.time : seq > o.seq;
    }
  };
  std::priority_queue<Event, std::vector<Event>, std::greater<Event>> heap_;
  SimTime now_ = 0;
  uint64_t seq_ = 0;
};

// A database node modeled as `slots` execution workers sharing one FIFO
// queue. Task work runs when a slot opens (engine effects happen there);
// the completion callback fires after the task's cost in ticks. clear()
// drops queued tasks and returns their ids so in-flight reads can be
// transparently re-submitted elsewhere.
class SimNode {
 public:
  SimNode(Simulation& sim, int slots) : sim_(sim), slots_(slots) {}

  struct Task {
    uint64_t id;
    uint64_t cost;
    std::function<uint64_t()> work;  // returns extra cost discovered at execution
    std::function<void()> done;
  };

  uint64_t submit(uint64_t cost, std::function<uint64_t()> work, std::function<void()> done) {
    uint64_t id = next_id_++;
    queue_.push_back(Task{id, cost, std::move(work), std::move(done)});
    pump();
    return id;
  }

  std::vector<uint64_t> clear() {
    std::vector<uint64_t> dropped;
    for (const auto& t : queue_) dropped.push_back(t.id);
    queue_.clear();
    ++epoch_;  // in-flight completions from the old life are ignored
    busy_ = 0;
    return dropped;
  }

  int busy() const { return busy_; }
  size_t queued() const { return queue_.size(); }

 private:
  void pump() {
    while (busy_ < slots_ && !queue_.empty()) {
      Task t = std::move(queue_.front());
      queue_.pop_front();
      ++busy_;
      uint64_t extra = t.work ? t.work() : 0;
      uint64_t epoch = epoch_;
      sim_.in(t.cost + extra, [this, epoch, done = std::move(t.done)] {
        if (epoch != epoch_) return;
        --busy_;
        if (done) done();
        pump();
      });
    }
  }

  Simulation& sim_;
  int slots_;
  std::deque<Task> queue_;
  int busy_ = 0;
  uint64_t epoch_ = 0;
  uint64_t next_id_ = 1;
};

}  // namespace hihooi
