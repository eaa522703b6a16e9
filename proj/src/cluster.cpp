#include "hihooi/cluster.hpp"

#include <algorithm>
#include <cassert>

#include "hihooi/errors.hpp"

namespace hihooi {

SimCluster::SimCluster(const ClusterConfig& cfg, const WorkloadSpec& spec)
    : cfg_(cfg), spec_(spec), rng_(cfg.rng_seed) {
  if (!cfg.archiver_file.empty()) archiver_ = ArchiverBuffer(cfg.archiver_file);
  primary_ = std::make_unique<Engine>(spec.catalog());
  preload_engine(*primary_, spec);
  primary_seq_base_ = primary_->latest_seq();
  primary_node_ = std::make_unique<SimNode>(sim_, cfg_.node_slots);
  tm_ = std::make_unique<TransactionManager>(*primary_, cfg_.tm);
  wire_tm();

  create_seed();  // seed 0 carries the preloaded state
  for (int i = 0; i < cfg_.replicas; ++i) add_replica();

  if (cfg_.archive_period > 0) schedule_archive();
  if (cfg_.seed_period > 0) schedule_seed();
}

void SimCluster::schedule_archive() {
  sim_.in(cfg_.archive_period, [this] {
    if (background_stopped_) return;
    archive_step();
    schedule_archive();
  });
}

void SimCluster::schedule_seed() {
  sim_.in(cfg_.seed_period, [this] {
    if (background_stopped_) return;
    create_seed();
    schedule_seed();
  });
}

SimCluster::~SimCluster() = default;

uint64_t SimCluster::jitter() {
  if (cfg_.response_jitter == 0) return 0;
  return rng_() % (cfg_.response_jitter + 1);
}

void SimCluster::wire_tm() {
  tm_->set_clock([this] { return static_cast<int64_t>(sim_.now()); });
  tm_->set_publish_fn([this](TStatePtr ts) {
    buffer_.publish(ts);  // throws BufferUnavailable during an outage
    publish_time_[ts->tsid] = sim_.now();
    notify_replicas();
  });
}

void SimCluster::notify_replicas() {
  for (auto& [id, r] : replicas_) {
    if (!r->alive) continue;
    Replica* rp = r.get();
    sim_.in(cfg_.net_delay, [this, rp] {
      if (rp->alive) pump_fetch(*rp);
    });
  }
}

SimCluster::Replica& SimCluster::replica_ref(int id) {
  auto it = replicas_.find(id);
  if (it == replicas_.end())
    throw TmError(TmError::Kind::UnknownReplica, "replica " + std::to_string(id));
  return *it->second;
}

const SimCluster::Replica& SimCluster::replica_ref(int id) const {
  auto it = replicas_.find(id);
  if (it == replicas_.end())
    throw TmError(TmError::Kind::UnknownReplica, "replica " + std::to_string(id));
  return *it->second;
}

void SimCluster::pump_fetch(Replica& r) {
  while (r.alive) {
    auto res = buffer_.fetch(r.next_fetch);
    if (res.status == TransactionsBuffer::FetchResult::Status::Ok) {
      assert(res.ts->tsid <= tm_->latest_tsid());  // never ahead of the indexes
      feed_replica(r, res.ts);
      r.next_fetch++;
    } else if (res.status == TransactionsBuffer::FetchResult::Status::Behind) {
      // trimmed away: the archiver holds it
      auto range = archiver_.range(r.next_fetch - 1, r.next_fetch);
      if (range.empty())
        throw ClusterError(ClusterError::Kind::InvariantViolation,
                           "tsid " + std::to_string(r.next_fetch) +
                               " in neither buffer nor archiver");
      feed_replica(r, range.front());
      r.next_fetch++;
    } else {
      break;  // Empty or Unavailable: resume on the next notify
    }
  }
}

void SimCluster::feed_replica(Replica& r, TStatePtr ts) {
  if (cfg_.serial_replay) {
    r.serial_queue.push_back(std::move(ts));
    pump_serial(r);
    return;
  }
  auto dispatch = r.sched->on_new_transaction(std::move(ts));
  for (auto& d : dispatch) submit_replay(r, std::move(d));
  report_watermark(r);  // noops may have advanced it
}

void SimCluster::submit_replay(Replica& r, TStatePtr ts) {
  uint64_t cost = std::max<uint64_t>(1, ts->total_exec_units);
  r.replay_units += cost;
  if (r.replay_inflight++ == 0) r.replay_busy_start = sim_.now();
  Replica* rp = &r;
  r.node->submit(
      cost,
      [rp, ts] {
        apply_tstate(*rp->engine, *ts);
        rp->applied_log.insert(ts->tsid);
        return uint64_t{0};
      },
      [this, rp, ts] {
        if (--rp->replay_inflight == 0)
          rp->replay_busy_ticks += sim_.now() - rp->replay_busy_start;
        auto dispatch = rp->sched->on_transaction_complete(ts->tsid);
        for (auto& d : dispatch) submit_replay(*rp, std::move(d));
        after_apply(*rp, ts->tsid);
      });
}

void SimCluster::pump_serial(Replica& r) {
  if (r.serial_busy || r.serial_queue.empty() || !r.alive) return;
  TStatePtr ts = r.serial_queue.front();
  r.serial_queue.pop_front();
  if (r.applied_log.count(ts->tsid) || ts->is_noop()) {
    // already applied before a restart, or an ordering no-op
    r.watermark = std::max(r.watermark, ts->tsid);
    after_apply(r, ts->tsid);
    pump_serial(r);
    return;
  }
  r.serial_busy = true;
  uint64_t cost = std::max<uint64_t>(1, ts->total_exec_units);
  r.replay_units += cost;
  if (r.replay_inflight++ == 0) r.replay_busy_start = sim_.now();
  Replica* rp = &r;
  r.node->submit(
      cost,
      [rp, ts] {
        apply_tstate(*rp->engine, *ts);
        rp->applied_log.insert(ts->tsid);
        return uint64_t{0};
      },
      [this, rp, ts] {
        if (--rp->replay_inflight == 0)
          rp->replay_busy_ticks += sim_.now() - rp->replay_busy_start;
        rp->serial_busy = false;
        rp->watermark = std::max(rp->watermark, ts->tsid);
        after_apply(*rp, ts->tsid);
        pump_serial(*rp);
      });
}

void SimCluster::after_apply(Replica& r, Tsid tsid) {
  auto pt = publish_time_.find(tsid);
  if (pt != publish_time_.end()) {
    lag_sum_ += sim_.now() - pt->second;
    lag_count_++;
  }
  if (!cfg_.serial_replay) r.watermark = r.sched->watermark();
  // the applied log only needs entries above the gap-free watermark
  for (auto it = r.applied_log.begin();
       it != r.applied_log.end() && *it <= r.watermark;)
    it = r.applied_log.erase(it);
  report_watermark(r);
}

void SimCluster::maybe_register(Replica& r) {
  if (r.registered || !r.alive) return;
  if (r.watermark >= tm_->prune_floor()) {
    tm_->add_replica(r.id, r.watermark);
    r.registered = true;
    r.reported = r.watermark;
  }
}

void SimCluster::report_watermark(Replica& r) {
  if (!cfg_.serial_replay) r.watermark = r.sched->watermark();
  maybe_register(r);
  if (!r.registered || r.watermark <= r.reported) return;
  Tsid wm = r.watermark;
  r.reported = wm;
  int id = r.id;
  sim_.in(cfg_.net_delay, [this, id, wm] {
    auto it = replicas_.find(id);
    if (it == replicas_.end() || !it->second->registered) return;
    process_wake(tm_->on_watermark(id, wm));
  });
}

void SimCluster::process_wake(const WakeResult& wake) {
  for (uint64_t token : wake.matured_reads) {
    auto it = parked_conts_.find(token);
    if (it == parked_conts_.end()) continue;
    auto fn = std::move(it->second);
    parked_conts_.erase(it);
    sim_.in(0, std::move(fn));
  }
  for (int sid : wake.ack_sessions) {
    auto it = onesr_conts_.find(sid);
    if (it == onesr_conts_.end()) continue;
    auto fn = std::move(it->second);
    onesr_conts_.erase(it);
    sim_.in(0, std::move(fn));
  }
}

// ---------------------------------------------------------------------------
// client transaction runners

struct SimCluster::ReadRun : std::enable_shared_from_this<SimCluster::ReadRun> {
  SimCluster& c;
  std::shared_ptr<Session> s;
  GeneratedTxn g;
  TxnDone done;
  RWSet read_set;

  ReadRun(SimCluster& cluster, std::shared_ptr<Session> session, GeneratedTxn txn, TxnDone cb)
      : c(cluster), s(std::move(session)), g(std::move(txn)), done(std::move(cb)) {
    for (const auto& st : g.stmts)
      read_set.merge(RWSet::extract(st, c.primary_->catalog(), s->granularity()));
  }

  uint64_t cost() const {
    return c.cfg_.stmt_base_cost * g.stmts.size() + 2 * c.cfg_.net_delay;
  }

  void route() {
    Tsid consistent = c.tm_->find_latest_consistent_tsid(read_set);
    RoutingDecision d = c.tm_->route_and_acquire(read_set, s->level());
    if (d.target == RoutingDecision::Target::Wait) {
      uint64_t token = c.tm_->park_read(d.wait_for);
      auto self = shared_from_this();
      c.parked_conts_[token] = [self] { self->route(); };
      return;
    }
    uint64_t ticket = 0;
    if (c.probe_) {
      Tsid wm = d.is_replica() ? c.replica_ref(d.replica_id).watermark : c.tm_->latest_tsid();
      ticket = c.probe_->routed(g.stmts, read_set, consistent, d, wm);
    }
    if (d.target == RoutingDecision::Target::Primary) {
      auto self = shared_from_this();
      c.primary_node_->submit(
          cost(),
          [self, ticket] {
            Engine::Txn txn = self->c.primary_->begin();
            std::vector<ResultSet> results;
            for (const auto& st : self->g.stmts)
              results.push_back(self->c.primary_->execute(txn, st));
            self->c.primary_->commit(txn);
            if (self->c.probe_)
              self->c.probe_->executed(ticket, self->c.tm_->latest_tsid(), results);
            return uint64_t{0};
          },
          [self, d] {
            self->c.tm_->read_finished(d);
            self->done(TxnOutcome{Completion::Commit, 0, false});
          });
      return;
    }
    run_on_replica(d, ticket);
  }

  void run_on_replica(RoutingDecision d, uint64_t ticket) {
    Replica& r = c.replica_ref(d.replica_id);
    auto self = shared_from_this();
    uint64_t read_id = c.next_ticket_++;
    c.outstanding_reads_[r.id][read_id] = [self] {
      self->c.reroutes_++;
      self->route();  // replica vanished: route again from scratch
    };
    Replica* rp = &r;
    r.node->submit(
        cost(),
        [self, rp, ticket] {
          Engine::Txn txn = rp->engine->begin();
          std::vector<ResultSet> results;
          for (const auto& st : self->g.stmts) results.push_back(rp->engine->execute(txn, st));
          rp->engine->commit(txn);
          if (self->c.probe_) self->c.probe_->executed(ticket, rp->watermark, results);
          return uint64_t{0};
        },
        [self, rp, d, read_id] {
          self->c.outstanding_reads_[rp->id].erase(read_id);
          self->c.tm_->read_finished(d);
          self->done(TxnOutcome{Completion::Commit, 0, false});
        });
  }
};

struct SimCluster::WriteRun : std::enable_shared_from_this<SimCluster::WriteRun> {
  SimCluster& c;
  std::shared_ptr<Session> s;
  GeneratedTxn g;
  TxnDone done;
  size_t i = 0;
  bool failed = false;
  CompletionRecord rec;

  WriteRun(SimCluster& cluster, std::shared_ptr<Session> session, GeneratedTxn txn, TxnDone cb)
      : c(cluster), s(std::move(session)), g(std::move(txn)), done(std::move(cb)) {}

  void start() {
    c.tm_->begin_write(*s);
    step();
  }

  void step() {
    if (i >= g.stmts.size()) {
      commit_phase();
      return;
    }
    const Statement& st = g.stmts[i];
    if (st.is_write()) {
      auto self = shared_from_this();
      c.primary_node_->submit(
          c.cfg_.stmt_base_cost,
          [self] {
            try {
              auto [rs, cost] = self->c.tm_->exec_write_statement(*self->s, self->g.stmts[self->i]);
              (void)rs;
              return cost;
            } catch (const EngineError&) {
              self->failed = true;  // surfaces as a rollback completion
              return uint64_t{0};
            }
          },
          [self] {
            if (self->failed) {
              self->rollback_phase();
            } else {
              self->i++;
              self->step();
            }
          });
      return;
    }
    // read statement inside the write transaction
    RWSet rw = RWSet::extract(st, c.primary_->catalog(), s->granularity());
    RoutingDecision d = c.tm_->route_statement_in_write_txn(*s, rw);
    if (d.target == RoutingDecision::Target::Wait) {
      uint64_t token = c.tm_->park_read(d.wait_for);
      auto self = shared_from_this();
      c.parked_conts_[token] = [self] { self->retry_read(); };
      return;
    }
    if (d.target == RoutingDecision::Target::Primary) {
      auto self = shared_from_this();
      c.primary_node_->submit(
          c.cfg_.stmt_base_cost,
          [self] {
            self->c.tm_->exec_read_in_txn(*self->s, self->g.stmts[self->i]);
            return uint64_t{0};
          },
          [self] {
            self->i++;
            self->step();
          });
      return;
    }
    run_read_on_replica(st, rw, d);
  }

  void retry_read() { step(); }

  void run_read_on_replica(const Statement& st, const RWSet& rw, RoutingDecision d) {
    Replica& r = c.replica_ref(d.replica_id);
    uint64_t ticket = 0;
    if (c.probe_) {
      std::vector<Statement> one{st};
      ticket = c.probe_->routed(one, rw, c.tm_->find_latest_consistent_tsid(rw), d, r.watermark);
    }
    auto self = shared_from_this();
    uint64_t read_id = c.next_ticket_++;
    c.outstanding_reads_[r.id][read_id] = [self] {
      self->c.reroutes_++;
      self->step();  // re-route this statement
    };
    Replica* rp = &r;
    r.node->submit(
        c.cfg_.stmt_base_cost,
        [self, rp, ticket, st] {
          Engine::Txn txn = rp->engine->begin();
          std::vector<ResultSet> results{rp->engine->execute(txn, st)};
          rp->engine->commit(txn);
          if (self->c.probe_) self->c.probe_->executed(ticket, rp->watermark, results);
          return uint64_t{0};
        },
        [self, rp, d, read_id] {
          self->c.outstanding_reads_[rp->id].erase(read_id);
          self->c.tm_->read_finished(d);
          self->i++;
          self->step();
        });
  }

  void rollback_phase() {
    auto self = shared_from_this();
    c.primary_node_->submit(
        c.cfg_.commit_cost,
        [self] {
          self->rec = self->c.tm_->request_rollback(*self->s);
          return uint64_t{0};
        },
        [self] { self->response_phase(); });
  }

  void commit_phase() {
    auto self = shared_from_this();
    c.primary_node_->submit(
        c.cfg_.commit_cost,
        [self] {
          self->rec = self->c.tm_->request_commit(*self->s);
          return uint64_t{0};
        },
        [self] { self->response_phase(); });
  }

  void response_phase() {
    auto self = shared_from_this();
    c.sim_.in(c.jitter(), [self] {
      AckPlan plan = self->c.tm_->on_completion_response(*self->s);
      Tsid my_tsid = 0;
      for (const auto& [sid, tsid] : plan.assigned) {
        if (sid == self->s->id()) my_tsid = tsid;
      }
      if (plan.ack_now) {
        self->done(TxnOutcome{self->rec.completion, my_tsid, true});
      } else {
        self->c.onesr_conts_[self->s->id()] = [self, my_tsid] {
          self->done(TxnOutcome{self->rec.completion, my_tsid, true});
        };
      }
    });
  }
};

void SimCluster::submit_txn(const std::shared_ptr<Session>& session, GeneratedTxn txn,
                            TxnDone done) {
  if (txn.read_only) {
    auto run = std::make_shared<ReadRun>(*this, session, std::move(txn), std::move(done));
    sim_.in(cfg_.net_delay, [run] { run->route(); });
  } else {
    auto run = std::make_shared<WriteRun>(*this, session, std::move(txn), std::move(done));
    sim_.in(cfg_.net_delay, [run] { run->start(); });
  }
}

// ---------------------------------------------------------------------------
// management operations

void SimCluster::archive_step() {
  Tsid floor = tm_->min_alive_watermark();
  if (floor > 0) {
    auto moved = buffer_.trim_upto(floor);
    archiver_.append(moved);
  }
  archiver_.delete_upto(seed_tsid_);
}

void SimCluster::create_seed() {
  uint64_t cut = tm_->latest_assigned_commit_seq();
  seed_image_ = primary_->export_seed(cut);
  seed_tsid_ = tm_->latest_tsid();
  seed_export_seq_ = cut;
  // the archiver no longer needs anything the seed covers
  archiver_.delete_upto(seed_tsid_);
}

int SimCluster::add_replica() {
  if (seed_image_.empty()) create_seed();
  int id = next_replica_id_++;
  auto r = std::make_unique<Replica>();
  r->id = id;
  r->engine = Engine::import_seed(seed_image_);
  r->node = std::make_unique<SimNode>(sim_, cfg_.node_slots);
  r->sched = std::make_unique<ReplayScheduler>(seed_tsid_);
  r->watermark = seed_tsid_;
  r->reported = seed_tsid_;
  r->next_fetch = seed_tsid_ + 1;
  Replica* rp = r.get();
  replicas_[id] = std::move(r);

  uint64_t transfer =
      seed_image_.size() / std::max<uint64_t>(1, cfg_.bandwidth_bytes_per_tick);
  sim_.in(transfer, [this, rp] {
    if (!rp->alive) return;
    maybe_register(*rp);  // nothing to catch up on an idle cluster
    pump_fetch(*rp);
    report_watermark(*rp);
  });
  return id;
}

void SimCluster::remove_replica(int id) {
  Replica& r = replica_ref(id);
  if (!r.alive) return;
  r.alive = false;
  r.node->clear();
  r.serial_queue.clear();
  r.serial_busy = false;
  if (r.registered) {
    process_wake(tm_->remove_replica(id));
    r.registered = false;
  }
  // transparently re-submit reads that were queued or in flight there
  auto out = std::move(outstanding_reads_[id]);
  outstanding_reads_[id].clear();
  for (auto& [rid, resubmit] : out) {
    (void)rid;
    sim_.in(cfg_.net_delay, std::move(resubmit));
  }
}

void SimCluster::readd_replica(int id) {
  Replica& r = replica_ref(id);
  if (r.alive) return;
  r.alive = true;
  // resume from the logged extractor position; skip TSIDs already applied
  r.sched = std::make_unique<ReplayScheduler>(r.watermark, r.applied_log);
  r.next_fetch = r.watermark + 1;
  r.reported = r.watermark;
  Replica* rp = &r;
  sim_.in(cfg_.net_delay, [this, rp] {
    if (!rp->alive) return;
    maybe_register(*rp);
    pump_fetch(*rp);
    report_watermark(*rp);
  });
}

void SimCluster::fail_buffer() { buffer_.fail(); }

void SimCluster::recover_buffer() {
  buffer_.recover();
  tm_->flush_retained();
  notify_replicas();
}

void SimCluster::recover_tm() {
  // crash: in-memory TM state is gone, including outage-retained TStates
  tm_->clear_retained();

  std::vector<TStatePtr> store;
  for (const auto& ts : archiver_.records()) store.push_back(ts);
  for (const auto& ts : buffer_.contents()) store.push_back(ts);
  std::sort(store.begin(), store.end(),
            [](const TStatePtr& a, const TStatePtr& b) { return a->tsid < b->tsid; });

  uint64_t commits_in_store = 0;
  Tsid rebuilt_latest = seed_tsid_;
  ConsistencyIndexes idx;
  if (seed_tsid_ > 0) {
    // conservative baseline: everything in the seed was last written at seed_tsid
    TState baseline;
    baseline.tsid = seed_tsid_;
    baseline.completion = Completion::Commit;
    for (const TableSchema* t : primary_->catalog().tables()) {
      Statement del;
      del.kind = StmtKind::Delete;
      del.target_tables.push_back(t->name);
      baseline.rwset.merge(RWSet::extract(del, primary_->catalog(), Granularity::TasOnly));
    }
    idx.update(baseline, primary_->catalog());
  }
  for (const auto& ts : store) {
    if (ts->tsid <= seed_tsid_) continue;
    idx.update(*ts, primary_->catalog());
    rebuilt_latest = std::max(rebuilt_latest, ts->tsid);
    if (ts->completion == Completion::Commit) ++commits_in_store;
  }

  uint64_t commits_in_seed = seed_export_seq_ - primary_seq_base_;
  uint64_t primary_commits = primary_->latest_seq() - primary_seq_base_;
  if (commits_in_seed + commits_in_store != primary_commits) {
    // transactions committed on the primary never reached the stores:
    // refresh everything from a brand-new seed
    Tsid new_seed_tsid = rebuilt_latest + (primary_commits - commits_in_seed - commits_in_store);
    tm_->restore_state(ConsistencyIndexes{}, new_seed_tsid, new_seed_tsid);
    seed_image_ = primary_->export_seed(primary_->latest_seq());
    seed_tsid_ = new_seed_tsid;
    seed_export_seq_ = primary_->latest_seq();
    buffer_.trim_upto(new_seed_tsid);
    archiver_.delete_upto(new_seed_tsid);
    // full replica refresh from the new image
    for (auto& [id, r] : replicas_) {
      (void)id;
      bool was_registered = r->registered;
      if (was_registered) tm_->remove_replica(r->id);
      r->registered = false;
      r->node->clear();
      r->serial_queue.clear();
      r->serial_busy = false;
      r->engine = Engine::import_seed(seed_image_);
      r->sched = std::make_unique<ReplayScheduler>(new_seed_tsid);
      r->applied_log.clear();
      r->watermark = new_seed_tsid;
      r->reported = new_seed_tsid;
      r->next_fetch = new_seed_tsid + 1;
      if (r->alive) {
        Replica* rp = r.get();
        sim_.in(cfg_.net_delay, [this, rp] {
          if (!rp->alive) return;
          maybe_register(*rp);
          pump_fetch(*rp);
        });
      }
    }
    ConsistencyIndexes fresh;
    if (new_seed_tsid > 0) {
      TState baseline;
      baseline.tsid = new_seed_tsid;
      baseline.completion = Completion::Commit;
      for (const TableSchema* t : primary_->catalog().tables()) {
        Statement del;
        del.kind = StmtKind::Delete;
        del.target_tables.push_back(t->name);
        baseline.rwset.merge(RWSet::extract(del, primary_->catalog(), Granularity::TasOnly));
      }
      fresh.update(baseline, primary_->catalog());
    }
    tm_->restore_state(std::move(fresh), new_seed_tsid, new_seed_tsid);
    return;
  }

  tm_->restore_state(std::move(idx), rebuilt_latest, seed_tsid_);
}

uint64_t sync_time_estimate(uint64_t image_bytes, uint64_t bandwidth_bytes_per_tick,
                            uint64_t pending_units, double dp) {
  uint64_t transfer = image_bytes / std::max<uint64_t>(1, bandwidth_bytes_per_tick);
  if (dp < 1.0) dp = 1.0;
  return transfer + static_cast<uint64_t>(static_cast<double>(pending_units) / dp);
}

uint64_t SimCluster::estimate_sync_time() const {
  uint64_t pending_units = 0;
  for (const auto& ts : archiver_.records())
    if (ts->tsid > seed_tsid_) pending_units += std::max<uint64_t>(1, ts->total_exec_units);
  for (const auto& ts : buffer_.contents())
    pending_units += std::max<uint64_t>(1, ts->total_exec_units);
  return sync_time_estimate(seed_image_.size(), cfg_.bandwidth_bytes_per_tick, pending_units,
                            replay_dp_estimate());
}

double SimCluster::replay_dp_estimate() const {
  // a catch-up run drives the pool flat out, so the best rate observed in a
  // recent busy window is the predictor; an idle history predicts dp = 1
  double best = 1.0;
  for (const auto& [id, r] : replicas_) {
    (void)id;
    if (r->replay_units == 0 || r->replay_busy_ticks == 0) continue;
    double dp = static_cast<double>(r->replay_units) / static_cast<double>(r->replay_busy_ticks);
    best = std::max(best, dp);
  }
  return std::min(best, static_cast<double>(cfg_.node_slots));
}

double SimCluster::mean_replay_lag() const {
  return lag_count_ == 0 ? 0.0 : static_cast<double>(lag_sum_) / static_cast<double>(lag_count_);
}

// ---------------------------------------------------------------------------
// invariants and introspection

void SimCluster::check_no_loss() const {
  Tsid latest = tm_->latest_tsid();
  std::set<Tsid> in_buffer;
  for (const auto& ts : buffer_.contents()) in_buffer.insert(ts->tsid);
  std::set<Tsid> in_arch;
  for (const auto& ts : archiver_.records()) in_arch.insert(ts->tsid);
  std::set<Tsid> in_retained;
  for (const auto& ts : tm_->retained()) in_retained.insert(ts->tsid);

  for (Tsid t = 1; t <= latest; ++t) {
    int where = 0;
    if (t <= seed_tsid_) ++where;
    if (in_arch.count(t)) ++where;
    if (in_buffer.count(t)) ++where;
    if (in_retained.count(t)) ++where;
    if (where != 1)
      throw ClusterError(ClusterError::Kind::InvariantViolation,
                         "tsid " + std::to_string(t) + " present in " + std::to_string(where) +
                             " stores");
  }
}

std::vector<int> SimCluster::replica_ids(bool alive_only) const {
  std::vector<int> out;
  for (const auto& [id, r] : replicas_) {
    if (!alive_only || r->alive) out.push_back(id);
  }
  return out;
}

Tsid SimCluster::replica_watermark(int id) const { return replica_ref(id).watermark; }

bool SimCluster::replica_alive(int id) const { return replica_ref(id).alive; }

std::string SimCluster::replica_dump(int id) const { return replica_ref(id).engine->dump_state(); }

bool SimCluster::quiesced() const {
  Tsid latest = tm_->latest_tsid();
  for (const auto& [id, r] : replicas_) {
    (void)id;
    if (!r->alive) continue;
    if (r->watermark < latest) return false;
  }
  return true;
}

}  // namespace hihooi
