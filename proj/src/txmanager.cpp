#include "hihooi/txmanager.hpp"

#include <algorithm>
#include <limits>

#include "hihooi/errors.hpp"

namespace hihooi {

const char* level_name(ConsistencyLevel l) {
  switch (l) {
    case ConsistencyLevel::WeakSI: return "weak-si";
    case ConsistencyLevel::GSSI: return "gssi";
    case ConsistencyLevel::RSIPC: return "rsi-pc";
    case ConsistencyLevel::OneSR: return "1sr";
  }
  return "gssi";
}

std::optional<ConsistencyLevel> level_from(const std::string& name) {
  if (name == "weak-si" || name == "weaksi") return ConsistencyLevel::WeakSI;
  if (name == "gssi") return ConsistencyLevel::GSSI;
  if (name == "rsi-pc" || name == "rsipc") return ConsistencyLevel::RSIPC;
  if (name == "1sr") return ConsistencyLevel::OneSR;
  return std::nullopt;
}

std::optional<Granularity> granularity_from(const std::string& name) {
  if (name == "tas" || name == "tas-only") return Granularity::TasOnly;
  if (name == "cas" || name == "tas+cas") return Granularity::TasCas;
  if (name == "all") return Granularity::All;
  return std::nullopt;
}

std::optional<LbMode> lb_mode_from(const std::string& name) {
  if (name == "txn" || name == "transaction") return LbMode::Transaction;
  if (name == "stmt" || name == "statement") return LbMode::Statement;
  return std::nullopt;
}

RoutingDecision route_read_decision(Tsid consistent_tsid, Tsid latest_issued,
                                    ConsistencyLevel level,
                                    std::span<const ReplicaState> replicas) {
  Tsid required = 0;
  switch (level) {
    case ConsistencyLevel::WeakSI:
    case ConsistencyLevel::OneSR:
      required = 0;
      break;
    case ConsistencyLevel::GSSI:
      required = consistent_tsid;
      break;
    case ConsistencyLevel::RSIPC:
      required = latest_issued;
      break;
  }
  const ReplicaState* best = nullptr;
  for (const auto& r : replicas) {
    if (!r.alive || r.applied < required) continue;
    if (!best || r.active_reads < best->active_reads ||
        (r.active_reads == best->active_reads && r.id < best->id))
      best = &r;
  }
  if (best) return {RoutingDecision::Target::Replica, best->id, 0};
  if (level == ConsistencyLevel::RSIPC)
    return {RoutingDecision::Target::Wait, -1, latest_issued};
  return {RoutingDecision::Target::Primary, -1, 0};
}

TransactionManager::TransactionManager(Engine& primary, TmConfig config)
    : primary_(primary),
      config_(config),
      next_tsid_(config.initial_tsid),
      assigned_seq_(primary.latest_seq()),
      rand_rng_(config.rng_seed) {}

std::shared_ptr<Session> TransactionManager::open_session(ConsistencyLevel level) {
  return open_session(level, config_.granularity, config_.lb);
}

std::shared_ptr<Session> TransactionManager::open_session(ConsistencyLevel level,
                                                          Granularity gran, LbMode lb) {
  std::lock_guard lk(mu_);
  auto s = std::make_shared<Session>();
  s->id_ = next_session_id_++;
  s->level_ = level;
  s->gran_ = gran;
  s->lb_ = lb;
  sessions_[s->id_] = s;
  return s;
}

void TransactionManager::add_replica(int id, Tsid initial_watermark) {
  std::lock_guard lk(mu_);
  if (initial_watermark < prune_floor_)
    throw ClusterError(ClusterError::Kind::InvariantViolation,
                       "replica " + std::to_string(id) + " registered below the prune floor");
  ReplicaState rs;
  rs.id = id;
  rs.applied = initial_watermark;
  replicas_[id] = rs;
}

WakeResult TransactionManager::remove_replica(int id) {
  std::lock_guard lk(mu_);
  auto it = replicas_.find(id);
  if (it == replicas_.end())
    throw TmError(TmError::Kind::UnknownReplica, "replica " + std::to_string(id));
  replicas_.erase(it);
  // 1SR acks blocked on the removed replica may now be satisfiable
  WakeResult wake;
  Tsid min_wm = min_alive_watermark();
  bool any_alive = false;
  for (const auto& [rid, r] : replicas_) {
    (void)rid;
    any_alive |= r.alive;
  }
  for (auto pit = onesr_pending_.begin(); pit != onesr_pending_.end();) {
    if (!any_alive || min_wm >= pit->second) {
      wake.ack_sessions.push_back(pit->first);
      pit = onesr_pending_.erase(pit);
    } else {
      ++pit;
    }
  }
  return wake;
}

WakeResult TransactionManager::on_watermark(int replica_id, Tsid watermark) {
  std::lock_guard lk(mu_);
  WakeResult wake;
  auto it = replicas_.find(replica_id);
  if (it == replicas_.end()) return wake;  // removed while the report was in flight
  if (watermark > it->second.applied) it->second.applied = watermark;

  Tsid max_wm = 0;
  Tsid min_wm = std::numeric_limits<Tsid>::max();
  bool any_alive = false;
  for (const auto& [rid, r] : replicas_) {
    (void)rid;
    if (!r.alive) continue;
    any_alive = true;
    max_wm = std::max(max_wm, r.applied);
    min_wm = std::min(min_wm, r.applied);
  }
  if (!any_alive) min_wm = 0;

  for (auto pit = parked_.begin(); pit != parked_.end();) {
    if (any_alive && max_wm >= pit->wait_for) {
      wake.matured_reads.push_back(pit->token);
      pit = parked_.erase(pit);
    } else {
      ++pit;
    }
  }
  for (auto pit = onesr_pending_.begin(); pit != onesr_pending_.end();) {
    if (!any_alive || min_wm >= pit->second) {
      wake.ack_sessions.push_back(pit->first);
      pit = onesr_pending_.erase(pit);
    } else {
      ++pit;
    }
  }
  return wake;
}

std::vector<ReplicaState> TransactionManager::replicas() const {
  std::lock_guard lk(mu_);
  std::vector<ReplicaState> out;
  for (const auto& [id, r] : replicas_) {
    (void)id;
    out.push_back(r);
  }
  return out;
}

Tsid TransactionManager::min_alive_watermark() const {
  Tsid min_wm = std::numeric_limits<Tsid>::max();
  bool any = false;
  for (const auto& [id, r] : replicas_) {
    (void)id;
    if (!r.alive) continue;
    any = true;
    min_wm = std::min(min_wm, r.applied);
  }
  return any ? min_wm : 0;
}

Tsid TransactionManager::find_latest_consistent_tsid(const RWSet& read_set) const {
  std::lock_guard lk(mu_);
  return indexes_.find_latest_consistent(read_set, primary_.catalog());
}

RoutingDecision TransactionManager::route_locked(const RWSet& read_set, ConsistencyLevel level) {
  Tsid consistent = indexes_.find_latest_consistent(read_set, primary_.catalog());
  std::vector<ReplicaState> snapshot;
  for (const auto& [id, r] : replicas_) {
    (void)id;
    snapshot.push_back(r);
  }
  RoutingDecision d = route_read_decision(consistent, next_tsid_, level, snapshot);
  switch (d.target) {
    case RoutingDecision::Target::Replica:
      replicas_[d.replica_id].active_reads++;
      metrics_.reads_replica++;
      break;
    case RoutingDecision::Target::Primary:
      metrics_.reads_primary++;
      break;
    case RoutingDecision::Target::Wait:
      metrics_.waits++;
      break;
  }
  for (auto* obs : observers_) obs->on_read_routed(read_set, consistent, d);
  return d;
}

RoutingDecision TransactionManager::route_and_acquire(const RWSet& read_set,
                                                      ConsistencyLevel level) {
  std::lock_guard lk(mu_);
  return route_locked(read_set, level);
}

RoutingDecision TransactionManager::route_statement_in_write_txn(Session& s,
                                                                 const RWSet& stmt_rwset) {
  std::lock_guard lk(mu_);
  if (s.lb_ == LbMode::Transaction || !are_independent(s.running_state_, stmt_rwset)) {
    metrics_.reads_primary++;
    return {RoutingDecision::Target::Primary, -1, 0};
  }
  return route_locked(stmt_rwset, s.level_);
}

void TransactionManager::read_finished(const RoutingDecision& d) {
  if (!d.is_replica()) return;
  std::lock_guard lk(mu_);
  auto it = replicas_.find(d.replica_id);
  if (it != replicas_.end() && it->second.active_reads > 0) it->second.active_reads--;
}

uint64_t TransactionManager::park_read(Tsid wait_for) {
  std::lock_guard lk(mu_);
  uint64_t token = next_token_++;
  parked_.push_back(ParkedRead{token, wait_for});
  return token;
}

void TransactionManager::begin_write(Session& s) {
  std::lock_guard lk(mu_);
  if (s.write_active_) return;
  s.txn_ = primary_.begin();
  s.write_active_ = true;
  s.completion_pending_ = false;
  s.response_seen_ = false;
  s.running_state_ = RWSet{};
  s.wset_ = RWSet{};
  s.stmts_.clear();
  s.costs_.clear();
  s.total_cost_ = 0;
}

std::pair<ResultSet, uint64_t> TransactionManager::exec_write_statement(Session& s,
                                                                        const Statement& bound) {
  if (!s.write_active_) begin_write(s);
  std::lock_guard lk(mu_);
  Statement stmt = rewrite_nondeterministic(
      bound, clock_ ? clock_ : [] { return int64_t{0}; }, rand_rng_);
  if (stmt.kind == StmtKind::CreateTable)
    throw ParseError(ParseError::Kind::SyntaxError,
                     "CREATE TABLE is a setup-phase statement, not part of a transaction");
  ExecStats stats;
  ResultSet rs = primary_.execute(*s.txn_, stmt, &stats);
  RWSet rw = RWSet::extract(stmt, primary_.catalog(), s.gran_);
  s.running_state_.merge(rw);
  s.wset_.merge(rw);
  std::string text = render(stmt);
  s.stmts_.push_back(std::move(text));
  s.costs_.push_back(stats.rows_touched);
  s.total_cost_ += stats.rows_touched;
  return {std::move(rs), stats.rows_touched};
}

ResultSet TransactionManager::exec_read_in_txn(Session& s, const Statement& bound) {
  std::lock_guard lk(mu_);
  if (!s.write_active_)
    throw EngineError(EngineError::Kind::TxnInactive, "no write transaction in progress");
  return primary_.execute(*s.txn_, bound, nullptr);
}

CompletionRecord TransactionManager::complete_locked(Session& s, Completion completion,
                                                     uint64_t seq, uint64_t txn_id) {
  Pending p;
  p.session = sessions_.at(s.id_);
  p.completion = completion;
  p.seq = seq;
  p.is_rollback = completion == Completion::Rollback;
  p.txn_id = txn_id;
  p.tstate.completion = completion;
  p.tstate.write_statements = s.stmts_;
  p.tstate.rwset = s.wset_;
  p.tstate.stmt_exec_units = s.costs_;
  p.tstate.total_exec_units = s.total_cost_;
  p.tstate.primary_commit_seq = completion == Completion::Commit ? seq : 0;
  pending_[s.id_] = std::move(p);
  s.completion_pending_ = true;
  s.write_active_ = false;
  s.txn_.reset();
  return CompletionRecord{completion, seq};
}

CompletionRecord TransactionManager::request_commit(Session& s) {
  std::lock_guard lk(mu_);
  if (!s.write_active_)
    throw EngineError(EngineError::Kind::TxnInactive, "no write transaction in progress");
  uint64_t txn_id = s.txn_->id();
  if (s.stmts_.empty()) {
    // never wrote anything: a read transaction in disguise, no TState
    uint64_t seq = primary_.commit(*s.txn_);
    s.write_active_ = false;
    s.txn_.reset();
    return CompletionRecord{Completion::Commit, seq};
  }
  try {
    uint64_t seq = primary_.commit(*s.txn_);
    return complete_locked(s, Completion::Commit, seq, txn_id);
  } catch (const EngineError& e) {
    if (e.kind != EngineError::Kind::WriteWriteConflict) throw;
    return complete_locked(s, Completion::Rollback, primary_.latest_seq(), txn_id);
  }
}

CompletionRecord TransactionManager::request_rollback(Session& s) {
  std::lock_guard lk(mu_);
  if (!s.write_active_)
    throw EngineError(EngineError::Kind::TxnInactive, "no write transaction in progress");
  uint64_t txn_id = s.txn_->id();
  primary_.rollback(*s.txn_);
  if (s.stmts_.empty()) {
    s.write_active_ = false;
    s.txn_.reset();
    return CompletionRecord{Completion::Rollback, primary_.latest_seq()};
  }
  return complete_locked(s, Completion::Rollback, primary_.latest_seq(), txn_id);
}

void TransactionManager::publish_locked(TStatePtr ts) {
  for (auto* obs : observers_) obs->on_published(ts);
  if (!publish_fn_) return;
  if (!retained_.empty()) {
    retained_.push_back(std::move(ts));
    return;
  }
  try {
    publish_fn_(ts);
  } catch (const ClusterError& e) {
    if (e.kind != ClusterError::Kind::BufferUnavailable) throw;
    retained_.push_back(std::move(ts));
  }
}

void TransactionManager::assign_pending_locked(AckPlan* plan) {
  std::vector<Pending*> batch;
  for (auto& [sid, p] : pending_) {
    (void)sid;
    if (!p.assigned) batch.push_back(&p);
  }
  std::sort(batch.begin(), batch.end(), [](const Pending* a, const Pending* b) {
    if (a->seq != b->seq) return a->seq < b->seq;
    if (a->is_rollback != b->is_rollback) return !a->is_rollback;  // commit created the seq
    return a->txn_id < b->txn_id;
  });
  for (Pending* p : batch) {
    Tsid tsid = ++next_tsid_;
    p->tsid = tsid;
    p->assigned = true;
    p->tstate.tsid = tsid;
    if (p->seq > assigned_seq_) assigned_seq_ = p->seq;
    auto ts = std::make_shared<const TState>(p->tstate);
    indexes_.update(*ts, primary_.catalog());
    publish_locked(ts);
    if (plan) plan->assigned.emplace_back(p->session->id_, tsid);
    if (config_.prune_every != 0 && tsid % config_.prune_every == 0) {
      Tsid floor = min_alive_watermark();
      indexes_.prune_rows(floor);
      prune_floor_ = std::max(prune_floor_, floor);
    }
  }
}

AckPlan TransactionManager::on_completion_response(Session& s) {
  std::lock_guard lk(mu_);
  if (s.response_seen_)
    throw TmError(TmError::Kind::DuplicateCompletion,
                  "session " + std::to_string(s.id_) + " already acknowledged");
  s.response_seen_ = true;

  AckPlan plan;
  assign_pending_locked(&plan);

  auto it = pending_.find(s.id_);
  if (it == pending_.end()) return plan;  // read-only commit: nothing published
  Pending p = std::move(it->second);
  pending_.erase(it);
  s.completion_pending_ = false;
  if (p.completion == Completion::Commit) metrics_.commits++;
  else metrics_.aborts++;

  if (s.level_ == ConsistencyLevel::OneSR && p.completion == Completion::Commit) {
    bool any_alive = false;
    for (const auto& [rid, r] : replicas_) {
      (void)rid;
      any_alive |= r.alive;
    }
    if (any_alive && min_alive_watermark() < p.tsid) {
      onesr_pending_[s.id_] = p.tsid;
      plan.ack_now = false;
      plan.ack_after = p.tsid;
    }
  }
  return plan;
}

void TransactionManager::exec_setup_ddl(const Statement& create) {
  std::lock_guard lk(mu_);
  if (create.kind != StmtKind::CreateTable)
    throw ParseError(ParseError::Kind::SyntaxError, "setup DDL must be CREATE TABLE");
  if (next_tsid_ != config_.initial_tsid)
    throw ParseError(ParseError::Kind::SyntaxError,
                     "CREATE TABLE is only allowed before the workload starts");
  primary_.create_table(*create.create_def);
}

Tsid TransactionManager::latest_tsid() const {
  std::lock_guard lk(mu_);
  return next_tsid_;
}

uint64_t TransactionManager::latest_assigned_commit_seq() const {
  std::lock_guard lk(mu_);
  return assigned_seq_;
}

std::string TransactionManager::dump_indexes() const {
  std::lock_guard lk(mu_);
  return indexes_.dump();
}

std::vector<TStatePtr> TransactionManager::retained() const {
  std::lock_guard lk(mu_);
  return retained_;
}

void TransactionManager::flush_retained() {
  std::lock_guard lk(mu_);
  size_t published = 0;
  for (auto& ts : retained_) {
    try {
      publish_fn_(ts);
      ++published;
    } catch (const ClusterError& e) {
      if (e.kind != ClusterError::Kind::BufferUnavailable) throw;
      break;
    }
  }
  retained_.erase(retained_.begin(), retained_.begin() + static_cast<long>(published));
}

void TransactionManager::clear_retained() {
  std::lock_guard lk(mu_);
  retained_.clear();
}

void TransactionManager::restore_state(ConsistencyIndexes idx, Tsid latest, Tsid prune_floor) {
  std::lock_guard lk(mu_);
  indexes_ = std::move(idx);
  next_tsid_ = latest;
  prune_floor_ = prune_floor;
  assigned_seq_ = primary_.latest_seq();
}

ResultSet TransactionManager::submit(Session& s, const Statement& bound) {
  switch (bound.kind) {
    case StmtKind::Begin:
      begin_write(s);
      return {};
    case StmtKind::Commit:
    case StmtKind::Rollback:
      throw ParseError(ParseError::Kind::SyntaxError,
                       "use commit_session/rollback_session to finish a transaction");
    case StmtKind::CreateTable:
      exec_setup_ddl(bound);
      return {};
    default:
      break;
  }
  if (bound.is_write()) return exec_write_statement(s, bound).first;

  RWSet rw = RWSet::extract(bound, primary_.catalog(), s.gran_);
  RoutingDecision d = s.write_active_ ? route_statement_in_write_txn(s, rw)
                                      : route_and_acquire(rw, s.level_);
  if (d.target == RoutingDecision::Target::Wait)
    throw TmError(TmError::Kind::WouldWait, "no fully consistent replica for this read");
  if (d.target == RoutingDecision::Target::Primary) {
    if (s.write_active_) return exec_read_in_txn(s, bound);
    Engine::Txn txn = primary_.begin();
    ResultSet rs = primary_.execute(txn, bound);
    primary_.commit(txn);
    return rs;
  }
  ResultSet rs = replica_read_fn_(d.replica_id, {bound})[0];
  read_finished(d);
  return rs;
}

TransactionManager::TxnResult TransactionManager::commit_session(Session& s) {
  TxnResult out;
  if (!s.write_active_) return out;  // nothing pending: an empty transaction
  CompletionRecord rec = request_commit(s);
  out.completion = rec.completion;
  AckPlan plan = on_completion_response(s);
  for (const auto& [sid, tsid] : plan.assigned) {
    if (sid == s.id_) out.tsid = tsid;
  }
  if (!plan.ack_now)
    throw TmError(TmError::Kind::WouldWait,
                  "1SR acknowledgment requires replica watermarks; use the simulation driver");
  return out;
}

TransactionManager::TxnResult TransactionManager::rollback_session(Session& s) {
  TxnResult out;
  out.completion = Completion::Rollback;
  if (!s.write_active_) return out;
  request_rollback(s);
  AckPlan plan = on_completion_response(s);
  for (const auto& [sid, tsid] : plan.assigned) {
    if (sid == s.id_) out.tsid = tsid;
  }
  return out;
}

void TransactionManager::close_session(Session& s) {
  if (s.write_active_) rollback_session(s);
  std::lock_guard lk(mu_);
  sessions_.erase(s.id_);
}

TransactionManager::TxnResult TransactionManager::run_transaction(
    Session& s, const std::vector<Statement>& stmts) {
  TxnResult out;
  bool any_write = false;
  for (const auto& st : stmts) any_write |= st.is_write();

  if (!any_write) {
    RWSet read_set;
    for (const auto& st : stmts)
      read_set.merge(RWSet::extract(st, primary_.catalog(), s.gran_));
    RoutingDecision d = route_and_acquire(read_set, s.level_);
    if (d.target == RoutingDecision::Target::Wait)
      throw TmError(TmError::Kind::WouldWait, "RSI-PC read has no fully consistent replica");
    if (d.target == RoutingDecision::Target::Primary) {
      Engine::Txn txn = primary_.begin();
      for (const auto& st : stmts) out.results.push_back(primary_.execute(txn, st));
      primary_.commit(txn);
    } else {
      out.results = replica_read_fn_(d.replica_id, stmts);
      read_finished(d);
    }
    out.completion = Completion::Commit;
    return out;
  }

  begin_write(s);
  bool aborted = false;
  try {
    for (const auto& st : stmts) {
      if (st.is_write()) {
        out.results.push_back(exec_write_statement(s, st).first);
      } else {
        RWSet rw = RWSet::extract(st, primary_.catalog(), s.gran_);
        RoutingDecision d = route_statement_in_write_txn(s, rw);
        if (d.target == RoutingDecision::Target::Primary) {
          out.results.push_back(exec_read_in_txn(s, st));
        } else if (d.target == RoutingDecision::Target::Replica) {
          out.results.push_back(replica_read_fn_(d.replica_id, {st})[0]);
          read_finished(d);
        } else {
          throw TmError(TmError::Kind::WouldWait, "RSI-PC statement read would wait");
        }
      }
    }
  } catch (const EngineError&) {
    aborted = true;  // surfaces as a rollback completion below
  }

  CompletionRecord rec = aborted ? request_rollback(s) : request_commit(s);
  AckPlan plan = on_completion_response(s);
  out.completion = rec.completion;
  for (const auto& [sid, tsid] : plan.assigned) {
    if (sid == s.id_) out.tsid = tsid;
  }
  return out;
}

}  // namespace hihooi
