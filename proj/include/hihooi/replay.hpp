#pragma once

#include <condition_variable>
#include <deque>
#include <functional>
#include <mutex>
#include <set>
#include <thread>
#include <vector>

#include "hihooi/engine.hpp"
#include "hihooi/tstate.hpp"

namespace hihooi {

// Extractor-side scheduling state machine. TStates arrive in TSID order;
// a new transaction runs immediately when independent of both the combined
// running state and the combined waiting state, otherwise it queues. When a
// running transaction completes, queued heads independent of the running
// state drain in FIFO order. Rollbacks never execute; they only count toward
// the gap-free watermark. The caller owns execution: dispatch lists say what
// to run, on_transaction_complete reports what finished.
class ReplayScheduler {
 public:
  explicit ReplayScheduler(Tsid base = 0, std::set<Tsid> already_applied = {});

  std::vector<TStatePtr> on_new_transaction(TStatePtr ts);
  std::vector<TStatePtr> on_transaction_complete(Tsid tsid);

  Tsid watermark() const { return watermark_; }
  Tsid last_seen() const { return last_seen_; }
  size_t running_count() const { return running_set_.size(); }
  size_t queue_size() const { return queue_.size(); }
  bool idle() const { return running_set_.empty() && queue_.empty(); }
  const RWSet& running_state() const { return running_; }
  const RWSet& waiting_state() const { return waiting_; }
  std::vector<Tsid> running_tsids() const;
  std::vector<Tsid> queued_tsids() const;

  // Optional event trace: "dispatch 11", "enqueue 13", "noop 14", "complete 11"
  std::function<void(const std::string&)> trace;

 private:
  void mark_applied(Tsid tsid);
  void emit(const char* what, Tsid tsid);

  RWSet running_, waiting_;
  std::deque<TStatePtr> queue_;
  std::map<Tsid, TStatePtr> running_set_;
  Tsid last_seen_ = 0;
  Tsid watermark_ = 0;
  std::set<Tsid> applied_above_;   // applied but not yet contiguous
  std::set<Tsid> preapplied_;      // applied before this scheduler existed
};

// Executes one committed TState's statements as a single engine transaction.
// Write-write conflicts (possible when column-disjoint updates of the same
// row overlap in wall time) retry from a fresh snapshot; replaying against
// the latest state is exactly what re-running the statement would do.
// Returns the rows-touched cost. Noop TStates return 0.
uint64_t apply_tstate(Engine& engine, const TState& ts, int max_attempts = 16);

// Correctness oracle and the serial-replication baseline: applies the batch
// one at a time in TSID order.
void serial_replay(Engine& engine, const std::vector<TStatePtr>& tstates);

// Worker-pool executor around ReplayScheduler for real-thread replay.
// feed() accepts TStates in TSID order; drain() blocks until everything
// applied. An engine error (other than retried conflicts) poisons the
// executor and rethrows from drain().
class ThreadedReplayExecutor {
 public:
  ThreadedReplayExecutor(Engine& engine, int workers, Tsid base = 0);
  ~ThreadedReplayExecutor();

  void feed(TStatePtr ts);
  void drain();
  Tsid watermark();

 private:
  void worker_loop();
  void dispatch_locked(std::vector<TStatePtr> ts);

  Engine& engine_;
  ReplayScheduler sched_;
  std::mutex mu_;
  std::condition_variable work_cv_, idle_cv_;
  std::deque<TStatePtr> ready_;
  std::vector<std::thread> workers_;
  int in_flight_ = 0;
  bool stop_ = false;
  std::exception_ptr error_;
};

}  // namespace hihooi
