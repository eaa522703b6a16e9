#include "hihooi/harness.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>

#include "hihooi/errors.hpp"
#include "hihooi/parser.hpp"

namespace hihooi {

double PhaseStats::throughput() const {
  uint64_t dur = end > start ? end - start : 1;
  return static_cast<double>(committed) * 1000.0 / static_cast<double>(dur);
}

double PhaseStats::write_throughput() const {
  uint64_t dur = end > start ? end - start : 1;
  return static_cast<double>(committed_writes) * 1000.0 / static_cast<double>(dur);
}

double PhaseStats::lat_mean() const {
  if (latencies.empty()) return 0;
  uint64_t sum = 0;
  for (uint64_t l : latencies) sum += l;
  return static_cast<double>(sum) / static_cast<double>(latencies.size());
}

uint64_t PhaseStats::lat_p99() const {
  if (latencies.empty()) return 0;
  std::vector<uint64_t> sorted = latencies;
  std::sort(sorted.begin(), sorted.end());
  size_t idx = (sorted.size() * 99) / 100;
  if (idx >= sorted.size()) idx = sorted.size() - 1;
  return sorted[idx];
}

std::string MetricsReport::to_csv() const {
  std::string out =
      "phase,txns_committed,txns_aborted,throughput,lat_mean,lat_p99,"
      "reads_primary,reads_replica,waits,min_watermark,max_tsid\n";
  char buf[256];
  for (const auto& p : phases) {
    snprintf(buf, sizeof(buf),
             "%s,%" PRIu64 ",%" PRIu64 ",%.4f,%.2f,%" PRIu64 ",%" PRIu64 ",%" PRIu64 ",%" PRIu64
             ",%" PRIu64 ",%" PRIu64 "\n",
             p.name.c_str(), p.committed, p.aborted, p.throughput(), p.lat_mean(), p.lat_p99(),
             p.reads_primary, p.reads_replica, p.waits, p.min_watermark, p.max_tsid);
    out += buf;
  }
  return out;
}

namespace {

// ---------------------------------------------------------------------------
// online read checkers

class MultiProbe;

class GssiProbe : public ReadProbe, public TransactionManager::Observer {
 public:
  GssiProbe(TransactionManager& tm, ConsistencyLevel level) : tm_(tm), level_(level) {}

  void on_published(const TStatePtr& ts) override { history_[ts->tsid] = ts; }

  uint64_t routed(const std::vector<Statement>& stmts, const RWSet& read_set, Tsid consistent,
                  const RoutingDecision& d, Tsid target_wm_at_route) override {
    Ticket t;
    t.read_set = read_set;
    t.consistent = consistent;
    t.replica = d.is_replica();
    t.wm_at_route = target_wm_at_route;
    if (level_ == ConsistencyLevel::GSSI && t.replica && target_wm_at_route < consistent) {
      ++violations_;  // freshness condition broken at routing time
    }
    // Primary-snapshot oracle at routing time, cut at the last *assigned*
    // commit: engine commits whose TSIDs are still unassigned are not yet
    // part of the middleware-visible state.
    Engine::Txn txn = tm_.primary().begin_at(tm_.latest_assigned_commit_seq());
    for (const auto& st : stmts) t.oracle.push_back(tm_.primary().execute(txn, st));
    tm_.primary().commit(txn);
    uint64_t id = next_id_++;
    tickets_[id] = std::move(t);
    return id;
  }

  void executed(uint64_t ticket, Tsid wm_at_exec,
                const std::vector<ResultSet>& results) override {
    auto it = tickets_.find(ticket);
    if (it == tickets_.end()) return;
    Ticket t = std::move(it->second);
    tickets_.erase(it);
    if (!t.replica) return;  // the primary serves its own snapshot; nothing to compare
    ++checked_;
    bool equal = results.size() == t.oracle.size();
    for (size_t i = 0; equal && i < results.size(); ++i) equal &= results[i] == t.oracle[i];
    if (equal) return;

    // rows differ from the routing-time primary snapshot; legal only if a
    // relevant write landed between routing and execution
    bool legal = false;
    for (Tsid ts = t.consistent + 1; ts <= wm_at_exec && !legal; ++ts) {
      auto h = history_.find(ts);
      if (h == history_.end()) continue;
      if (!are_independent(h->second->rwset, t.read_set)) legal = true;
    }
    if (level_ == ConsistencyLevel::WeakSI) {
      if (t.wm_at_route < t.consistent) ++staleness_;
      return;  // Weak-SI promises nothing; only tally observations
    }
    if (legal) ++legal_newer_;
    else ++violations_;
  }

  uint64_t checked() const { return checked_; }
  uint64_t violations() const { return violations_; }
  uint64_t legal_newer() const { return legal_newer_; }
  uint64_t staleness() const { return staleness_; }

 private:
  struct Ticket {
    RWSet read_set;
    Tsid consistent = 0;
    bool replica = false;
    Tsid wm_at_route = 0;
    std::vector<ResultSet> oracle;
  };
  TransactionManager& tm_;
  ConsistencyLevel level_;
  std::map<Tsid, TStatePtr> history_;
  std::map<uint64_t, Ticket> tickets_;
  uint64_t next_id_ = 1;
  uint64_t checked_ = 0, violations_ = 0, legal_newer_ = 0, staleness_ = 0;
};

// Shadow indexes at the finest and coarsest granularity; finer extraction
// must never demand a larger consistent TSID.
class AblationProbe : public ReadProbe, public TransactionManager::Observer {
 public:
  explicit AblationProbe(const SchemaCatalog& catalog) : catalog_(catalog) {}

  void on_published(const TStatePtr& ts) override {
    if (ts->is_noop()) return;
    update_shadow(*ts, Granularity::All, all_);
    update_shadow(*ts, Granularity::TasOnly, tas_);
  }

  uint64_t routed(const std::vector<Statement>& stmts, const RWSet&, Tsid,
                  const RoutingDecision&, Tsid) override {
    RWSet fine, coarse;
    for (const auto& st : stmts) {
      fine.merge(RWSet::extract(st, catalog_, Granularity::All));
      coarse.merge(RWSet::extract(st, catalog_, Granularity::TasOnly));
    }
    Tsid c_fine = all_.find_latest_consistent(fine, catalog_);
    Tsid c_coarse = tas_.find_latest_consistent(coarse, catalog_);
    ++checked_;
    if (c_fine > c_coarse) ++violations_;
    return 0;
  }

  void executed(uint64_t, Tsid, const std::vector<ResultSet>&) override {}

  uint64_t checked() const { return checked_; }
  uint64_t violations() const { return violations_; }

 private:
  void update_shadow(const TState& ts, Granularity g, ConsistencyIndexes& idx) {
    TState shadow;
    shadow.tsid = ts.tsid;
    shadow.completion = ts.completion;
    for (const auto& text : ts.write_statements) {
      Statement st = parse(text, catalog_);
      shadow.rwset.merge(RWSet::extract(st, catalog_, g));
    }
    idx.update(shadow, catalog_);
  }

  const SchemaCatalog& catalog_;
  ConsistencyIndexes all_, tas_;
  uint64_t checked_ = 0, violations_ = 0;
};

class MultiProbe : public ReadProbe {
 public:
  void add(ReadProbe* p) { children_.push_back(p); }
  bool empty() const { return children_.empty(); }

  uint64_t routed(const std::vector<Statement>& stmts, const RWSet& rs, Tsid consistent,
                  const RoutingDecision& d, Tsid wm) override {
    std::vector<uint64_t> sub;
    for (auto* c : children_) sub.push_back(c->routed(stmts, rs, consistent, d, wm));
    uint64_t id = next_id_++;
    tickets_[id] = std::move(sub);
    return id;
  }

  void executed(uint64_t ticket, Tsid wm, const std::vector<ResultSet>& results) override {
    auto it = tickets_.find(ticket);
    if (it == tickets_.end()) return;
    for (size_t i = 0; i < children_.size(); ++i) children_[i]->executed(it->second[i], wm, results);
    tickets_.erase(it);
  }

 private:
  std::vector<ReadProbe*> children_;
  std::map<uint64_t, std::vector<uint64_t>> tickets_;
  uint64_t next_id_ = 1;
};

struct PhaseTracker {
  std::vector<PhaseStats> phases;
  TmMetrics last_tm;

  void open(const std::string& name, SimTime now) {
    PhaseStats p;
    p.name = name;
    p.start = now;
    phases.push_back(std::move(p));
  }

  void close(SimTime now, const TmMetrics& tm, Tsid min_wm, Tsid max_tsid) {
    PhaseStats& p = phases.back();
    p.end = now;
    p.reads_primary = tm.reads_primary - last_tm.reads_primary;
    p.reads_replica = tm.reads_replica - last_tm.reads_replica;
    p.waits = tm.waits - last_tm.waits;
    p.min_watermark = min_wm;
    p.max_tsid = max_tsid;
    last_tm = tm;
  }
};

}  // namespace

MetricsReport run_experiment(const ExperimentConfig& cfg) {
  WorkloadSpec spec = load_workload(cfg.mix);
  spec.clients = cfg.clients;
  spec.total_txns = cfg.txns;
  spec.seed = cfg.seed;

  SimCluster cluster(cfg.cluster, spec);
  Simulation& sim = cluster.sim();

  GssiProbe gssi(cluster.tm(), cfg.level);
  AblationProbe ablation(cluster.primary().catalog());
  MultiProbe probes;
  if (cfg.check_reads) {
    cluster.tm().add_observer(&gssi);
    probes.add(&gssi);
  }
  if (cfg.check_ablation) {
    cluster.tm().add_observer(&ablation);
    probes.add(&ablation);
  }
  if (!probes.empty()) cluster.set_read_probe(&probes);

  WorkloadGenerator gen(spec, cfg.seed);
  std::vector<std::shared_ptr<Session>> sessions;
  for (int i = 0; i < cfg.clients; ++i) sessions.push_back(cluster.tm().open_session(cfg.level));

  PhaseTracker tracker;
  tracker.open("p0", 0);

  uint64_t issued = 0, completed = 0;
  bool background_stopped = false;

  std::function<void(int)> issue = [&](int ci) {
    if (issued >= cfg.txns) return;
    ++issued;
    GeneratedTxn g = gen.next();
    SimTime t0 = sim.now();
    cluster.submit_txn(sessions[static_cast<size_t>(ci)], std::move(g),
                       [&, ci, t0](const TxnOutcome& out) {
                         PhaseStats& p = tracker.phases.back();
                         p.latencies.push_back(sim.now() - t0);
                         if (out.completion == Completion::Commit) {
                           ++p.committed;
                           if (out.was_write) ++p.committed_writes;
                         } else {
                           ++p.aborted;
                         }
                         ++completed;
                         issue(ci);
                       });
  };
  for (int ci = 0; ci < cfg.clients; ++ci) {
    sim.in(0, [&issue, ci] { issue(ci); });
  }

  // fault schedule; each boundary also closes the current metrics phase
  std::vector<std::pair<SimTime, std::function<void()>>> events;
  if (cfg.fail_buffer_at) events.push_back({cfg.fail_buffer_at, [&] { cluster.fail_buffer(); }});
  if (cfg.recover_buffer_at)
    events.push_back({cfg.recover_buffer_at, [&] { cluster.recover_buffer(); }});
  if (cfg.remove_replica_at)
    events.push_back({cfg.remove_replica_at, [&] {
                        auto ids = cluster.replica_ids();
                        if (!ids.empty()) cluster.remove_replica(ids.back());
                      }});
  if (cfg.readd_replica_at)
    events.push_back({cfg.readd_replica_at, [&] {
                        auto all = cluster.replica_ids(false);
                        for (int id : all) {
                          if (!cluster.replica_alive(id)) {
                            cluster.readd_replica(id);
                            break;
                          }
                        }
                      }});
  if (cfg.add_replica_at) events.push_back({cfg.add_replica_at, [&] { cluster.add_replica(); }});
  if (cfg.recover_tm_at) events.push_back({cfg.recover_tm_at, [&] { cluster.recover_tm(); }});
  std::sort(events.begin(), events.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  int phase_no = 0;
  for (auto& [when, fn] : events) {
    sim.at(when, [&, fn = fn] {
      Tsid min_wm = cluster.tm().min_alive_watermark();
      tracker.close(sim.now(), cluster.tm().metrics(), min_wm, cluster.tm().latest_tsid());
      ++phase_no;
      tracker.open("p" + std::to_string(phase_no), sim.now());
      fn();
      if (cfg.check_no_loss) cluster.check_no_loss();
    });
  }

  // drive to completion; background upkeep stops once the budget is done
  while (sim.step()) {
    if (completed >= cfg.txns && !background_stopped) {
      cluster.stop_background_tasks();
      background_stopped = true;
    }
  }
  if (completed < cfg.txns)
    throw ClusterError(ClusterError::Kind::InvariantViolation,
                       "run stalled: " + std::to_string(completed) + "/" +
                           std::to_string(cfg.txns) + " transactions completed");

  tracker.close(sim.now(), cluster.tm().metrics(), cluster.tm().min_alive_watermark(),
                cluster.tm().latest_tsid());
  if (cfg.check_no_loss) cluster.check_no_loss();

  MetricsReport report;
  report.phases = tracker.phases;
  // synthesized total
  PhaseStats total;
  total.name = "total";
  total.start = 0;
  total.end = sim.now();
  for (const auto& p : report.phases) {
    total.committed += p.committed;
    total.aborted += p.aborted;
    total.committed_writes += p.committed_writes;
    total.reads_primary += p.reads_primary;
    total.reads_replica += p.reads_replica;
    total.waits += p.waits;
    total.latencies.insert(total.latencies.end(), p.latencies.begin(), p.latencies.end());
  }
  total.min_watermark = cluster.tm().min_alive_watermark();
  total.max_tsid = cluster.tm().latest_tsid();
  report.phases.push_back(std::move(total));

  report.mean_replay_lag = cluster.mean_replay_lag();
  report.dp_estimate = cluster.replay_dp_estimate();
  report.reroutes = cluster.reroutes();
  report.client_errors = cluster.client_errors();
  report.checked_reads = gssi.checked();
  report.gssi_violations = gssi.violations();
  report.legal_newer = gssi.legal_newer();
  report.staleness_observed = gssi.staleness();
  report.ablation_checked = ablation.checked();
  report.ablation_violations = ablation.violations();
  report.quiesced = cluster.quiesced();
  report.final_primary_dump = cluster.primary_dump();
  for (int id : cluster.replica_ids()) report.final_replica_dumps.push_back(cluster.replica_dump(id));

  if (cfg.check_reads && cfg.level == ConsistencyLevel::GSSI && report.gssi_violations > 0)
    throw ClusterError(ClusterError::Kind::InvariantViolation,
                       std::to_string(report.gssi_violations) + " GSSI violations observed");
  if (cfg.check_ablation && report.ablation_violations > 0)
    throw ClusterError(ClusterError::Kind::InvariantViolation,
                       "granularity monotonicity violated");
  return report;
}

CompareReport compare_replay_modes(ExperimentConfig cfg) {
  CompareReport out;
  cfg.cluster.serial_replay = false;
  out.parallel = run_experiment(cfg);
  cfg.cluster.serial_replay = true;
  out.serial = run_experiment(cfg);

  auto converged = [](const MetricsReport& r) {
    for (const auto& d : r.final_replica_dumps) {
      if (d != r.final_primary_dump) return false;
    }
    return r.quiesced;
  };
  out.states_equal = converged(out.parallel) && converged(out.serial) &&
                     out.parallel.final_primary_dump == out.serial.final_primary_dump;
  return out;
}

// ---------------------------------------------------------------------------
// randomized replay batches

ReplayBatch make_replay_batch(uint64_t seed, size_t max_txns) {
  std::mt19937_64 rng(seed);
  ReplayBatch batch;

  int ntables = 2 + static_cast<int>(rng() % 4);
  std::vector<int> preload_rows;
  std::vector<int64_t> fresh_pk;
  for (int t = 0; t < ntables; ++t) {
    TableSchema s;
    s.name = "T" + std::to_string(t + 1);
    s.columns.push_back("K");
    s.types.push_back(ColType::Int);
    int ncols = 2 + static_cast<int>(rng() % 4);
    for (int c = 0; c < ncols; ++c) {
      s.columns.push_back("C" + std::to_string(c + 1));
      s.types.push_back(ColType::Int);
    }
    s.pk = "K";
    batch.catalog.add_table(s);
    preload_rows.push_back(8 + static_cast<int>(rng() % 16));
    fresh_pk.push_back(1000);
  }

  for (int t = 0; t < ntables; ++t) {
    const TableSchema& s = batch.catalog.table("T" + std::to_string(t + 1));
    for (int pk = 1; pk <= preload_rows[static_cast<size_t>(t)]; ++pk) {
      std::string text = "INSERT INTO " + s.name + " VALUES (" + std::to_string(pk);
      for (size_t c = 1; c < s.columns.size(); ++c)
        text += ", " + std::to_string(static_cast<int64_t>(rng() % 100));
      text += ")";
      batch.preload.push_back(parse(text, batch.catalog));
    }
  }

  size_t ntxns = 1 + rng() % max_txns;
  for (size_t i = 0; i < ntxns; ++i) {
    auto ts = std::make_shared<TState>();
    ts->tsid = 11 + i;
    ts->completion = rng() % 100 < 5 ? Completion::Rollback : Completion::Commit;
    size_t nstmts = 1 + rng() % 3;
    for (size_t j = 0; j < nstmts; ++j) {
      int t = static_cast<int>(rng() % static_cast<uint64_t>(ntables));
      const TableSchema& s = batch.catalog.table("T" + std::to_string(t + 1));
      auto data_col = [&] {
        return s.columns[1 + rng() % (s.columns.size() - 1)];
      };
      int64_t pk = 1 + static_cast<int64_t>(rng() % static_cast<uint64_t>(
                                                preload_rows[static_cast<size_t>(t)]));
      std::string text;
      uint64_t roll = rng() % 100;
      if (roll < 30) {  // RAS update by key
        text = "UPDATE " + s.name + " SET " + data_col() + " = " +
               std::to_string(static_cast<int64_t>(rng() % 1000)) + " WHERE K = " +
               std::to_string(pk);
      } else if (roll < 50) {  // CAS update by data-column range
        text = "UPDATE " + s.name + " SET " + data_col() + " = " +
               std::to_string(static_cast<int64_t>(rng() % 1000)) + " WHERE " + data_col() +
               " < " + std::to_string(static_cast<int64_t>(rng() % 100));
      } else if (roll < 65) {  // RAS insert of a fresh key
        int64_t k = fresh_pk[static_cast<size_t>(t)]++;
        text = "INSERT INTO " + s.name + " VALUES (" + std::to_string(k);
        for (size_t c = 1; c < s.columns.size(); ++c)
          text += ", " + std::to_string(static_cast<int64_t>(rng() % 100));
        text += ")";
      } else if (roll < 75) {  // RAS delete by key
        text = "DELETE FROM " + s.name + " WHERE K = " + std::to_string(pk);
      } else if (roll < 85) {  // TAS whole-table update
        text = "UPDATE " + s.name + " SET " + data_col() + " = " +
               std::to_string(static_cast<int64_t>(rng() % 1000));
      } else {  // TAS ranged delete
        text = "DELETE FROM " + s.name + " WHERE " + data_col() + " < " +
               std::to_string(static_cast<int64_t>(rng() % 20));
      }
      Statement st = parse(text, batch.catalog);
      ts->write_statements.push_back(render(st));
      ts->rwset.merge(RWSet::extract(st, batch.catalog));
      ts->stmt_exec_units.push_back(1);
      ts->total_exec_units += 1;
    }
    batch.tstates.push_back(std::move(ts));
  }
  return batch;
}

std::unique_ptr<Engine> batch_engine(const ReplayBatch& batch) {
  auto engine = std::make_unique<Engine>(batch.catalog);
  Engine::Txn txn = engine->begin();
  for (const auto& st : batch.preload) engine->execute(txn, st);
  engine->commit(txn);
  return engine;
}

std::string serial_replay_dump(const ReplayBatch& batch) {
  auto engine = batch_engine(batch);
  serial_replay(*engine, batch.tstates);
  return engine->dump_state();
}

std::string fuzz_parallel_replay(const ReplayBatch& batch, uint64_t fuzz_seed) {
  auto engine = batch_engine(batch);
  ReplayScheduler sched(10);
  std::mt19937_64 rng(fuzz_seed);

  std::vector<TStatePtr> running;
  size_t next = 0;
  auto admit = [&](std::vector<TStatePtr> dispatched) {
    for (auto& d : dispatched) {
      for (const auto& r : running) {
        if (!are_independent(d->rwset, r->rwset))
          throw ClusterError(ClusterError::Kind::InvariantViolation,
                             "dependent transactions running concurrently");
      }
      running.push_back(std::move(d));
    }
  };

  while (next < batch.tstates.size() || !running.empty()) {
    bool can_arrive = next < batch.tstates.size();
    bool arrive = can_arrive && (running.empty() || rng() % 100 < 55);
    if (arrive) {
      admit(sched.on_new_transaction(batch.tstates[next++]));
    } else {
      size_t pick = rng() % running.size();
      TStatePtr ts = running[static_cast<size_t>(pick)];
      running.erase(running.begin() + static_cast<long>(pick));
      apply_tstate(*engine, *ts);
      admit(sched.on_transaction_complete(ts->tsid));
    }
  }
  if (sched.queue_size() != 0)
    throw ClusterError(ClusterError::Kind::InvariantViolation, "scheduler queue not drained");
  return engine->dump_state();
}

// ---------------------------------------------------------------------------
// golden fixtures

namespace {

SchemaCatalog golden_catalog() {
  SchemaCatalog cat;
  cat.add_table(TableSchema{"R", {"A1", "A2", "A3", "A4"},
                            {ColType::Int, ColType::Int, ColType::Int, ColType::Int}, "A1", 0});
  cat.add_table(TableSchema{"S", {"B1", "B2", "B3", "B4", "B5"},
                            {ColType::Int, ColType::Int, ColType::Int, ColType::Int, ColType::Int},
                            "B1", 0});
  return cat;
}

const std::vector<std::string>& golden_write_texts() {
  static const std::vector<std::string> texts = {
      "UPDATE R SET A2 = 7, A3 = 8 WHERE A1 = 100",
      "UPDATE S SET B2 = 3 WHERE B5 > 50",
      "UPDATE R SET A3 = 1, A4 = 2 WHERE A2 < 9",
      "DELETE FROM R WHERE A1 = 120",
      "UPDATE S SET B4 = 4 WHERE B5 < 10",
  };
  return texts;
}

const std::vector<std::string>& golden_read_texts() {
  static const std::vector<std::string> texts = {
      "SELECT * FROM R WHERE A2 > 5",
      "SELECT A3, A4 FROM R WHERE A1 = 100",
      "SELECT B2, B3 FROM S WHERE B5 < 4",
      "SELECT A1, B2, B3 FROM R JOIN S ON A1 = B2",
  };
  return texts;
}

}  // namespace

std::vector<std::string> golden_expected_trace() {
  return {"dispatch 11", "dispatch 12", "enqueue 13", "enqueue 14", "dispatch 15",
          "complete 11", "dispatch 13", "complete 13", "dispatch 14"};
}

GoldenResult run_golden() {
  GoldenResult out;
  SchemaCatalog cat = golden_catalog();
  Engine primary(cat);
  {
    Engine::Txn txn = primary.begin();
    primary.execute(txn, parse("INSERT INTO R VALUES (100, 1, 2, 3)", cat));
    primary.execute(txn, parse("INSERT INTO R VALUES (120, 4, 5, 6)", cat));
    primary.execute(txn, parse("INSERT INTO S VALUES (1, 100, 7, 8, 9)", cat));
    primary.commit(txn);
  }

  TmConfig tc;
  tc.initial_tsid = 10;
  tc.prune_every = 0;
  TransactionManager tm(primary, tc);

  std::vector<TStatePtr> published;
  tm.set_publish_fn([&](TStatePtr ts) { published.push_back(std::move(ts)); });

  auto session = tm.open_session(ConsistencyLevel::GSSI);
  for (const auto& text : golden_write_texts()) {
    Statement st = parse(text, cat);
    RWSet rw = RWSet::extract(st, cat);
    for (const auto& [tname, e] : rw.tables()) {
      if (e.in_write()) out.write_classes.push_back(affecting_class_name(e.cls()));
    }
    out.rwset_dumps += text + "\n" + rw.dump() + "\n";
    auto result = tm.run_transaction(*session, {st});
    out.tsids.push_back(result.tsid);
  }
  out.index_dump = tm.dump_indexes();

  for (const auto& text : golden_read_texts()) {
    Statement st = parse(text, cat);
    RWSet rw = RWSet::extract(st, cat);
    out.read_tsids.push_back(tm.find_latest_consistent_tsid(rw));
  }

  // the worked scheduling example: arrivals 11..15, then complete 11 and 13
  ReplayScheduler sched(10);
  sched.trace = [&](const std::string& ev) { out.schedule_trace.push_back(ev); };
  for (const auto& ts : published) sched.on_new_transaction(ts);
  sched.on_transaction_complete(11);
  sched.on_transaction_complete(13);
  return out;
}

}  // namespace hihooi
