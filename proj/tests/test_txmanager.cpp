#include <gtest/gtest.h>

#include "hihooi/errors.hpp"
#include "hihooi/parser.hpp"
#include "hihooi/txmanager.hpp"

using namespace hihooi;

namespace {

SchemaCatalog rs_catalog() {
  SchemaCatalog cat;
  cat.add_table(TableSchema{"R", {"A1", "A2", "A3", "A4"},
                            {ColType::Int, ColType::Int, ColType::Int, ColType::Int}, "A1", 0});
  cat.add_table(TableSchema{"S", {"B1", "B2", "B3", "B4", "B5"},
                            {ColType::Int, ColType::Int, ColType::Int, ColType::Int, ColType::Int},
                            "B1", 0});
  return cat;
}

struct TmFixture {
  Engine engine;
  TransactionManager tm;
  std::vector<TStatePtr> published;

  explicit TmFixture(TmConfig cfg = {}) : engine(rs_catalog()), tm(engine, cfg) {
    tm.set_publish_fn([this](TStatePtr ts) { published.push_back(std::move(ts)); });
    Engine::Txn txn = engine.begin();
    engine.execute(txn, parse("INSERT INTO R VALUES (100, 1, 2, 3)", engine.catalog()));
    engine.execute(txn, parse("INSERT INTO R VALUES (120, 4, 5, 6)", engine.catalog()));
    engine.execute(txn, parse("INSERT INTO S VALUES (1, 100, 7, 8, 9)", engine.catalog()));
    engine.commit(txn);
  }

  Statement st(const std::string& sql) { return parse(sql, engine.catalog()); }
  RWSet rw(const std::string& sql) { return RWSet::extract(st(sql), engine.catalog()); }
};

TEST(AssignTsids, SequentialCounter) {
  TmConfig cfg;
  cfg.initial_tsid = 10;
  TmFixture f(cfg);
  auto s = f.tm.open_session(ConsistencyLevel::GSSI);
  auto result = f.tm.run_transaction(*s, {f.st("UPDATE R SET A2 = 9 WHERE A1 = 100")});
  EXPECT_EQ(result.tsid, 11u);
  EXPECT_EQ(result.completion, Completion::Commit);
  EXPECT_EQ(f.tm.latest_tsid(), 11u);
}

// commit responses arriving out of seq order still assign TSIDs by seq
TEST(AssignTsids, ResponseReorderingSortsBySeq) {
  TmFixture f;
  auto sa = f.tm.open_session(ConsistencyLevel::GSSI);
  auto sb = f.tm.open_session(ConsistencyLevel::GSSI);

  f.tm.begin_write(*sa);
  f.tm.begin_write(*sb);
  f.tm.exec_write_statement(*sa, f.st("UPDATE R SET A2 = 1 WHERE A1 = 100"));
  f.tm.exec_write_statement(*sb, f.st("UPDATE S SET B2 = 2 WHERE B1 = 1"));

  CompletionRecord ra = f.tm.request_commit(*sa);  // lower engine seq
  CompletionRecord rb = f.tm.request_commit(*sb);  // higher engine seq
  ASSERT_LT(ra.commit_seq, rb.commit_seq);

  // the later transaction's response arrives first
  AckPlan plan = f.tm.on_completion_response(*sb);
  ASSERT_EQ(plan.assigned.size(), 2u);
  EXPECT_EQ(plan.assigned[0].first, sa->id());  // seq order, not response order
  EXPECT_EQ(plan.assigned[0].second, 1u);
  EXPECT_EQ(plan.assigned[1].first, sb->id());
  EXPECT_EQ(plan.assigned[1].second, 2u);

  AckPlan plan_a = f.tm.on_completion_response(*sa);
  EXPECT_TRUE(plan_a.assigned.empty());  // already assigned
  EXPECT_TRUE(plan_a.ack_now);
}

TEST(AssignTsids, RollbackReceivesTsidAndLeavesIndexesAlone) {
  TmFixture f;
  auto s = f.tm.open_session(ConsistencyLevel::GSSI);
  std::string before = f.tm.dump_indexes();
  f.tm.begin_write(*s);
  f.tm.exec_write_statement(*s, f.st("UPDATE R SET A2 = 1 WHERE A1 = 100"));
  f.tm.request_rollback(*s);
  AckPlan plan = f.tm.on_completion_response(*s);
  ASSERT_EQ(plan.assigned.size(), 1u);
  EXPECT_EQ(plan.assigned[0].second, 1u);
  EXPECT_EQ(f.tm.dump_indexes(), before);
  ASSERT_EQ(f.published.size(), 1u);
  EXPECT_EQ(f.published[0]->completion, Completion::Rollback);
  EXPECT_FALSE(f.published[0]->write_statements.empty());
}

TEST(AssignTsids, DuplicateCompletionThrows) {
  TmFixture f;
  auto s = f.tm.open_session(ConsistencyLevel::GSSI);
  f.tm.begin_write(*s);
  f.tm.exec_write_statement(*s, f.st("UPDATE R SET A2 = 1 WHERE A1 = 100"));
  f.tm.request_commit(*s);
  f.tm.on_completion_response(*s);
  try {
    f.tm.on_completion_response(*s);
    FAIL();
  } catch (const TmError& e) {
    EXPECT_EQ(e.kind, TmError::Kind::DuplicateCompletion);
  }
}

TEST(UpdateIndexes, TasStarWriteExpandsAllColumns) {
  TmConfig cfg;
  cfg.initial_tsid = 19;
  TmFixture f(cfg);
  auto s = f.tm.open_session(ConsistencyLevel::GSSI);
  // ranged delete: star column write with no row set, i.e. a TAS write
  auto result = f.tm.run_transaction(*s, {f.st("DELETE FROM R WHERE A2 < 999")});
  EXPECT_EQ(result.tsid, 20u);
  std::string dump = f.tm.dump_indexes();
  EXPECT_NE(dump.find("T|R|20"), std::string::npos);
  EXPECT_NE(dump.find("C|R.A1|20"), std::string::npos);
  EXPECT_NE(dump.find("C|R.A4|20"), std::string::npos);
}

TEST(FindLatest, NeverWrittenTableIsZero) {
  TmFixture f;
  EXPECT_EQ(f.tm.find_latest_consistent_tsid(f.rw("SELECT * FROM R")), 0u);
}

// row miss in the rows index: the column lookups dominate
TEST(FindLatest, RasReadOfAbsentRowUsesColumnIndex) {
  TmConfig cfg;
  cfg.initial_tsid = 10;
  TmFixture f(cfg);
  auto s = f.tm.open_session(ConsistencyLevel::GSSI);
  for (const char* sql : {
           "UPDATE R SET A2 = 7, A3 = 8 WHERE A1 = 100",  // 11
           "UPDATE S SET B2 = 3 WHERE B5 > 50",            // 12
           "UPDATE R SET A3 = 1, A4 = 2 WHERE A2 < 9",     // 13
           "DELETE FROM R WHERE A1 = 120",                 // 14
           "UPDATE S SET B4 = 4 WHERE B5 < 10",            // 15
       }) {
    f.tm.run_transaction(*s, {f.st(sql)});
  }
  EXPECT_EQ(f.tm.find_latest_consistent_tsid(f.rw("SELECT A3, A4 FROM R WHERE A1 = 500")), 13u);
}

TEST(RouteRead, LevelRules) {
  std::vector<ReplicaState> replicas = {
      {1, 10, 3, true},
      {2, 13, 5, true},
  };
  // GSSI: freshest-enough replica, else primary
  auto d = route_read_decision(12, 15, ConsistencyLevel::GSSI, replicas);
  EXPECT_EQ(d.target, RoutingDecision::Target::Replica);
  EXPECT_EQ(d.replica_id, 2);
  d = route_read_decision(15, 15, ConsistencyLevel::GSSI, replicas);
  EXPECT_EQ(d.target, RoutingDecision::Target::Primary);
  // Weak-SI ignores freshness
  d = route_read_decision(15, 15, ConsistencyLevel::WeakSI, replicas);
  EXPECT_EQ(d.target, RoutingDecision::Target::Replica);
  EXPECT_EQ(d.replica_id, 1);  // least loaded
  // RSI-PC needs a fully consistent replica, else waits
  d = route_read_decision(0, 15, ConsistencyLevel::RSIPC, replicas);
  EXPECT_EQ(d.target, RoutingDecision::Target::Wait);
  EXPECT_EQ(d.wait_for, 15u);
  replicas[1].applied = 15;
  d = route_read_decision(0, 15, ConsistencyLevel::RSIPC, replicas);
  EXPECT_EQ(d.target, RoutingDecision::Target::Replica);
  EXPECT_EQ(d.replica_id, 2);
  // 1SR reads go to any alive replica
  d = route_read_decision(15, 15, ConsistencyLevel::OneSR, replicas);
  EXPECT_EQ(d.target, RoutingDecision::Target::Replica);
}

TEST(RouteRead, LeastLoadedTieBreaksByLowestId) {
  std::vector<ReplicaState> replicas = {
      {3, 20, 2, true},
      {1, 20, 2, true},
      {2, 20, 5, true},
      {4, 20, 1, false},  // dead replicas never qualify
  };
  auto d = route_read_decision(5, 20, ConsistencyLevel::GSSI, replicas);
  EXPECT_EQ(d.replica_id, 1);
}

// argmin choice is invariant under uniform shifts of the load counts
TEST(RouteRead, ArgminShiftInvariance) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<ReplicaState> replicas;
    int n = 1 + static_cast<int>(rng() % 6);
    for (int i = 0; i < n; ++i) {
      replicas.push_back(ReplicaState{i + 1, rng() % 30, static_cast<int>(rng() % 10),
                                      (rng() % 4) != 0});
    }
    Tsid consistent = rng() % 30;
    auto base = route_read_decision(consistent, 30, ConsistencyLevel::GSSI, replicas);
    int shift = static_cast<int>(rng() % 50);
    for (auto& r : replicas) r.active_reads += shift;
    auto shifted = route_read_decision(consistent, 30, ConsistencyLevel::GSSI, replicas);
    ASSERT_EQ(base.target, shifted.target);
    ASSERT_EQ(base.replica_id, shifted.replica_id);
  }
}

TEST(RouteStatement, IndependentReadsAreRoutable) {
  TmFixture f;
  f.tm.add_replica(1, 0);
  auto s = f.tm.open_session(ConsistencyLevel::GSSI, Granularity::All, LbMode::Statement);
  f.tm.begin_write(*s);
  f.tm.exec_write_statement(*s, f.st("UPDATE S SET B2 = 1 WHERE B1 = 1"));

  // read of R is independent of the S write
  auto d = f.tm.route_statement_in_write_txn(*s, f.rw("SELECT A2 FROM R WHERE A1 = 100"));
  EXPECT_EQ(d.target, RoutingDecision::Target::Replica);
  f.tm.read_finished(d);

  // read of the written column goes to the primary
  d = f.tm.route_statement_in_write_txn(*s, f.rw("SELECT B2 FROM S WHERE B1 = 1"));
  EXPECT_EQ(d.target, RoutingDecision::Target::Primary);
  f.tm.request_rollback(*s);
  f.tm.on_completion_response(*s);
}

TEST(RouteStatement, TransactionModeAlwaysPrimary) {
  TmFixture f;
  f.tm.add_replica(1, 0);
  auto s = f.tm.open_session(ConsistencyLevel::GSSI, Granularity::All, LbMode::Transaction);
  f.tm.begin_write(*s);
  f.tm.exec_write_statement(*s, f.st("UPDATE S SET B2 = 1 WHERE B1 = 1"));
  auto d = f.tm.route_statement_in_write_txn(*s, f.rw("SELECT A2 FROM R WHERE A1 = 100"));
  EXPECT_EQ(d.target, RoutingDecision::Target::Primary);
  f.tm.request_rollback(*s);
  f.tm.on_completion_response(*s);
}

TEST(RunTransaction, ReadOwnWritesInsideWriteTxn) {
  TmFixture f;
  auto s = f.tm.open_session(ConsistencyLevel::GSSI);
  auto result = f.tm.run_transaction(
      *s, {f.st("UPDATE R SET A2 = 42 WHERE A1 = 100"),
           f.st("SELECT A2 FROM R WHERE A1 = 100")});
  EXPECT_EQ(result.completion, Completion::Commit);
  ASSERT_EQ(result.results.size(), 2u);
  ASSERT_EQ(result.results[1].rows.size(), 1u);
  EXPECT_EQ(result.results[1].rows[0][0], Value{int64_t{42}});
}

TEST(RunTransaction, EngineAbortSurfacesAsRollback) {
  TmFixture f;
  auto s = f.tm.open_session(ConsistencyLevel::GSSI);
  std::string before = f.tm.dump_indexes();
  auto result = f.tm.run_transaction(
      *s, {f.st("UPDATE R SET A2 = 1 WHERE A1 = 100"),
           f.st("INSERT INTO R VALUES (100, 0, 0, 0)")});  // duplicate key
  EXPECT_EQ(result.completion, Completion::Rollback);
  EXPECT_GT(result.tsid, 0u);  // still published as an ordering no-op
  EXPECT_EQ(f.tm.dump_indexes(), before);
  EXPECT_EQ(f.tm.metrics().aborts, 1u);
}

TEST(RunTransaction, ReadOnlyRoutedWholesaleToReplica) {
  TmFixture f;
  f.tm.add_replica(1, 0);
  int called_with = -1;
  f.tm.set_replica_read_fn([&](int id, const std::vector<Statement>& stmts) {
    called_with = id;
    std::vector<ResultSet> out(stmts.size());
    return out;
  });
  auto s = f.tm.open_session(ConsistencyLevel::GSSI);
  auto result = f.tm.run_transaction(
      *s, {f.st("SELECT A2 FROM R WHERE A1 = 100"), f.st("SELECT B2 FROM S WHERE B1 = 1")});
  EXPECT_EQ(result.completion, Completion::Commit);
  EXPECT_EQ(called_with, 1);
  EXPECT_EQ(f.tm.metrics().reads_replica, 1u);  // one wholesale routing decision
}

TEST(OneSr, AckDeferredUntilWatermarksCover) {
  TmFixture f;
  f.tm.add_replica(1, 0);
  f.tm.add_replica(2, 0);
  auto s = f.tm.open_session(ConsistencyLevel::OneSR);
  f.tm.begin_write(*s);
  f.tm.exec_write_statement(*s, f.st("UPDATE R SET A2 = 1 WHERE A1 = 100"));
  f.tm.request_commit(*s);
  AckPlan plan = f.tm.on_completion_response(*s);
  EXPECT_FALSE(plan.ack_now);
  EXPECT_EQ(plan.ack_after, 1u);

  WakeResult w1 = f.tm.on_watermark(1, 1);
  EXPECT_TRUE(w1.ack_sessions.empty());  // replica 2 still behind
  WakeResult w2 = f.tm.on_watermark(2, 1);
  ASSERT_EQ(w2.ack_sessions.size(), 1u);
  EXPECT_EQ(w2.ack_sessions[0], s->id());
}

TEST(Watermarks, ParkAndWake) {
  TmFixture f;
  f.tm.add_replica(1, 0);
  uint64_t token = f.tm.park_read(5);
  WakeResult w = f.tm.on_watermark(1, 4);
  EXPECT_TRUE(w.matured_reads.empty());
  w = f.tm.on_watermark(1, 5);
  ASSERT_EQ(w.matured_reads.size(), 1u);
  EXPECT_EQ(w.matured_reads[0], token);
}

TEST(Pruning, RowEntriesDropAndHighWatermarkCoversCas) {
  TmConfig cfg;
  cfg.prune_every = 2;  // prune on every other TSID
  TmFixture f(cfg);
  f.tm.add_replica(1, 0);
  auto s = f.tm.open_session(ConsistencyLevel::GSSI);
  f.tm.run_transaction(*s, {f.st("UPDATE R SET A2 = 1 WHERE A1 = 100")});  // tsid 1
  f.tm.on_watermark(1, 1);
  f.tm.run_transaction(*s, {f.st("UPDATE R SET A2 = 2 WHERE A1 = 120")});  // tsid 2, prunes <=1
  std::string dump = f.tm.dump_indexes();
  EXPECT_EQ(dump.find("R|R|100|1"), std::string::npos);  // pruned
  EXPECT_NE(dump.find("R|R|120|2"), std::string::npos);  // above the floor
  EXPECT_NE(dump.find("HWM|R|2"), std::string::npos);
  // CAS read of R still sees the high watermark
  EXPECT_EQ(f.tm.find_latest_consistent_tsid(f.rw("SELECT A3 FROM R WHERE A2 < 5")), 2u);
  EXPECT_EQ(f.tm.prune_floor(), 1u);
  // registration below the prune floor is rejected
  EXPECT_THROW(f.tm.add_replica(9, 0), ClusterError);
  f.tm.add_replica(9, 1);
}

TEST(Retained, BufferOutageAbsorbsAndFlushes) {
  TmFixture f;
  bool down = true;
  std::vector<Tsid> delivered;
  f.tm.set_publish_fn([&](TStatePtr ts) {
    if (down)
      throw ClusterError(ClusterError::Kind::BufferUnavailable, "down");
    delivered.push_back(ts->tsid);
  });
  auto s = f.tm.open_session(ConsistencyLevel::GSSI);
  f.tm.run_transaction(*s, {f.st("UPDATE R SET A2 = 1 WHERE A1 = 100")});
  f.tm.run_transaction(*s, {f.st("UPDATE R SET A2 = 2 WHERE A1 = 100")});
  EXPECT_EQ(f.tm.retained().size(), 2u);
  EXPECT_TRUE(delivered.empty());
  down = false;
  f.tm.flush_retained();
  EXPECT_EQ(delivered, (std::vector<Tsid>{1, 2}));
  EXPECT_TRUE(f.tm.retained().empty());
}

TEST(Sessions, SetupDdlOnlyBeforeWorkload) {
  TmFixture f;
  f.tm.exec_setup_ddl(parse("CREATE TABLE NU (X INT PRIMARY KEY, Y INT)", SchemaCatalog{}));
  EXPECT_TRUE(f.tm.catalog().has_table("NU"));
  auto s = f.tm.open_session(ConsistencyLevel::GSSI);
  f.tm.run_transaction(*s, {f.st("UPDATE R SET A2 = 1 WHERE A1 = 100")});
  EXPECT_THROW(f.tm.exec_setup_ddl(parse("CREATE TABLE NU2 (X INT PRIMARY KEY)", SchemaCatalog{})),
               ParseError);
}

TEST(RouteRead, NoReplicasFallsBackToPrimaryUnderGssi) {
  std::vector<ReplicaState> none;
  auto d = route_read_decision(7, 9, ConsistencyLevel::GSSI, none);
  EXPECT_EQ(d.target, RoutingDecision::Target::Primary);
  d = route_read_decision(0, 9, ConsistencyLevel::WeakSI, none);
  EXPECT_EQ(d.target, RoutingDecision::Target::Primary);
}

TEST(SessionFacade, SubmitCommitRollbackClose) {
  TmFixture f;
  auto s = f.tm.open_session(ConsistencyLevel::GSSI);

  // auto-routed single read outside any transaction
  ResultSet rs = f.tm.submit(*s, f.st("SELECT A2 FROM R WHERE A1 = 100"));
  ASSERT_EQ(rs.rows.size(), 1u);

  // explicit write transaction via BEGIN ... COMMIT
  f.tm.submit(*s, f.st("BEGIN"));
  f.tm.submit(*s, f.st("UPDATE R SET A2 = 77 WHERE A1 = 100"));
  ResultSet own = f.tm.submit(*s, f.st("SELECT A2 FROM R WHERE A1 = 100"));
  EXPECT_EQ(own.rows[0][0], Value{int64_t{77}});  // sees its own write
  auto done = f.tm.commit_session(*s);
  EXPECT_EQ(done.completion, Completion::Commit);
  EXPECT_EQ(done.tsid, 1u);

  // rollback leaves no trace
  f.tm.submit(*s, f.st("BEGIN"));
  f.tm.submit(*s, f.st("UPDATE R SET A2 = 1234 WHERE A1 = 100"));
  f.tm.rollback_session(*s);
  ResultSet after = f.tm.submit(*s, f.st("SELECT A2 FROM R WHERE A1 = 100"));
  EXPECT_EQ(after.rows[0][0], Value{int64_t{77}});

  f.tm.close_session(*s);
}

// TSID/index atomicity: a published TState's effects are already indexed
TEST(Atomicity, PublishNeverPrecedesIndexUpdate) {
  TmFixture f;
  bool checked = false;
  f.tm.set_publish_fn([&](TStatePtr ts) {
    Tsid idx_entry = f.tm.indexes().table_entry("R");
    EXPECT_EQ(idx_entry, ts->tsid);
    checked = true;
  });
  auto s = f.tm.open_session(ConsistencyLevel::GSSI);
  f.tm.run_transaction(*s, {f.st("UPDATE R SET A2 = 1 WHERE A1 = 100")});
  EXPECT_TRUE(checked);
}

}  // namespace
