#include "hihooi/replay.hpp"

#include <cassert>

#include "hihooi/errors.hpp"
#include "hihooi/parser.hpp"

namespace hihooi {

ReplayScheduler::ReplayScheduler(Tsid base, std::set<Tsid> already_applied)
    : last_seen_(base), watermark_(base), preapplied_(std::move(already_applied)) {
  // preapplied TSIDs (all above base) count toward the watermark only when
  // they are fed again; the feed resumes from base + 1
  preapplied_.erase(preapplied_.begin(), preapplied_.upper_bound(base));
}

void ReplayScheduler::emit(const char* what, Tsid tsid) {
  if (trace) trace(std::string(what) + " " + std::to_string(tsid));
}

void ReplayScheduler::mark_applied(Tsid tsid) {
  if (tsid == watermark_ + 1) {
    ++watermark_;
    while (true) {
      if (applied_above_.count(watermark_ + 1)) {
        applied_above_.erase(watermark_ + 1);
        ++watermark_;
      } else if (preapplied_.count(watermark_ + 1)) {
        preapplied_.erase(watermark_ + 1);
        ++watermark_;
      } else {
        break;
      }
    }
  } else {
    applied_above_.insert(tsid);
  }
}

std::vector<TStatePtr> ReplayScheduler::on_new_transaction(TStatePtr ts) {
  if (ts->tsid <= last_seen_)
    throw SchedulerError(SchedulerError::Kind::OutOfOrderDelivery,
                         "tsid " + std::to_string(ts->tsid) + " not above " +
                             std::to_string(last_seen_));
  last_seen_ = ts->tsid;

  if (preapplied_.count(ts->tsid)) {
    // already applied before a restart; only the watermark bookkeeping runs
    preapplied_.erase(ts->tsid);
    mark_applied(ts->tsid);
    emit("skip", ts->tsid);
    return {};
  }
  if (ts->is_noop()) {
    mark_applied(ts->tsid);
    emit("noop", ts->tsid);
    return {};
  }
  if (are_independent(running_, ts->rwset) && are_independent(waiting_, ts->rwset)) {
    running_.merge(ts->rwset);
    running_set_.emplace(ts->tsid, ts);
    emit("dispatch", ts->tsid);
    return {ts};
  }
  waiting_.merge(ts->rwset);
  queue_.push_back(ts);
  emit("enqueue", ts->tsid);
  return {};
}

std::vector<TStatePtr> ReplayScheduler::on_transaction_complete(Tsid tsid) {
  auto it = running_set_.find(tsid);
  if (it == running_set_.end())
    throw SchedulerError(SchedulerError::Kind::UnknownTransaction,
                         "tsid " + std::to_string(tsid) + " is not running");
  TStatePtr ts = it->second;
  running_set_.erase(it);
  running_.remove(ts->rwset);
  mark_applied(tsid);
  emit("complete", tsid);

  std::vector<TStatePtr> dispatch;
  while (!queue_.empty() && are_independent(running_, queue_.front()->rwset)) {
    TStatePtr next = queue_.front();
    queue_.pop_front();
    waiting_.remove(next->rwset);
    running_.merge(next->rwset);
    running_set_.emplace(next->tsid, next);
    emit("dispatch", next->tsid);
    dispatch.push_back(next);
  }
  return dispatch;
}

std::vector<Tsid> ReplayScheduler::running_tsids() const {
  std::vector<Tsid> out;
  for (const auto& [tsid, ts] : running_set_) {
    (void)ts;
    out.push_back(tsid);
  }
  return out;
}

std::vector<Tsid> ReplayScheduler::queued_tsids() const {
  std::vector<Tsid> out;
  for (const auto& ts : queue_) out.push_back(ts->tsid);
  return out;
}

uint64_t apply_tstate(Engine& engine, const TState& ts, int max_attempts) {
  if (ts.is_noop()) return 0;
  for (int attempt = 0;; ++attempt) {
    Engine::Txn txn = engine.begin();
    uint64_t cost = 0;
    try {
      for (const auto& text : ts.write_statements) {
        Statement stmt = parse(text, engine.catalog());
        if (stmt.kind == StmtKind::CreateTable) {
          engine.create_table(*stmt.create_def);
          cost += 1;
          continue;
        }
        ExecStats stats;
        engine.execute(txn, stmt, &stats);
        cost += stats.rows_touched;
      }
      engine.commit(txn);
      return cost;
    } catch (const EngineError& e) {
      if (e.kind == EngineError::Kind::WriteWriteConflict && attempt + 1 < max_attempts) {
        continue;  // overlapping independent writers; re-run on fresh snapshot
      }
      throw;
    }
  }
}

void serial_replay(Engine& engine, const std::vector<TStatePtr>& tstates) {
  Tsid prev = 0;
  for (const auto& ts : tstates) {
    if (ts->tsid != 0) {
      assert(prev == 0 || ts->tsid > prev);
      prev = ts->tsid;
    }
    apply_tstate(engine, *ts);
  }
}

ThreadedReplayExecutor::ThreadedReplayExecutor(Engine& engine, int workers, Tsid base)
    : engine_(engine), sched_(base) {
  for (int i = 0; i < workers; ++i) workers_.emplace_back([this] { worker_loop(); });
}

ThreadedReplayExecutor::~ThreadedReplayExecutor() {
  {
    std::lock_guard lk(mu_);
    stop_ = true;
  }
  work_cv_.notify_all();
  for (auto& w : workers_) w.join();
}

void ThreadedReplayExecutor::dispatch_locked(std::vector<TStatePtr> ts) {
  for (auto& t : ts) {
    ready_.push_back(std::move(t));
    ++in_flight_;
  }
  work_cv_.notify_all();
}

void ThreadedReplayExecutor::feed(TStatePtr ts) {
  std::lock_guard lk(mu_);
  if (error_) return;
  dispatch_locked(sched_.on_new_transaction(std::move(ts)));
}

void ThreadedReplayExecutor::worker_loop() {
  std::unique_lock lk(mu_);
  while (true) {
    work_cv_.wait(lk, [this] { return stop_ || !ready_.empty(); });
    if (stop_ && ready_.empty()) return;
    TStatePtr ts = std::move(ready_.front());
    ready_.pop_front();
    lk.unlock();
    std::exception_ptr err;
    try {
      apply_tstate(engine_, *ts);
    } catch (...) {
      err = std::current_exception();
    }
    lk.lock();
    --in_flight_;
    if (err && !error_) error_ = err;
    if (!error_) {
      try {
        dispatch_locked(sched_.on_transaction_complete(ts->tsid));
      } catch (...) {
        error_ = std::current_exception();
      }
    }
    if (in_flight_ == 0 && ready_.empty()) idle_cv_.notify_all();
  }
}

void ThreadedReplayExecutor::drain() {
  std::unique_lock lk(mu_);
  idle_cv_.wait(lk, [this] { return (in_flight_ == 0 && ready_.empty()) || error_; });
  if (error_) std::rethrow_exception(error_);
}

Tsid ThreadedReplayExecutor::watermark() {
  std::lock_guard lk(mu_);
  return sched_.watermark();
}

}  // namespace hihooi
