#include <gtest/gtest.h>

#include <filesystem>

#include "hihooi/buffers.hpp"
#include "hihooi/errors.hpp"
#include "hihooi/harness.hpp"
#include "hihooi/parser.hpp"

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

TStatePtr mini_ts(Tsid tsid, const std::string& sql, const SchemaCatalog& cat) {
  auto ts = std::make_shared<TState>();
  ts->tsid = tsid;
  ts->completion = Completion::Commit;
  Statement st = parse(sql, cat);
  ts->write_statements.push_back(render(st));
  ts->rwset.merge(RWSet::extract(st, cat));
  ts->stmt_exec_units.push_back(1);
  ts->total_exec_units = 1;
  return ts;
}

TEST(TransactionsBuffer, PublishFetchTrim) {
  auto cat = rs_catalog();
  TransactionsBuffer buf;
  for (Tsid t = 11; t <= 15; ++t)
    buf.publish(mini_ts(t, "UPDATE R SET A2 = 1 WHERE A1 = 100", cat));

  auto r = buf.fetch(13);
  ASSERT_EQ(r.status, TransactionsBuffer::FetchResult::Status::Ok);
  EXPECT_EQ(r.ts->tsid, 13u);
  EXPECT_EQ(buf.fetch(16).status, TransactionsBuffer::FetchResult::Status::Empty);

  auto moved = buf.trim_upto(12);
  ASSERT_EQ(moved.size(), 2u);
  EXPECT_EQ(moved[0]->tsid, 11u);
  EXPECT_EQ(buf.low(), 13u);
  EXPECT_EQ(buf.fetch(11).status, TransactionsBuffer::FetchResult::Status::Behind);

  // publishing must stay contiguous
  EXPECT_THROW(buf.publish(mini_ts(99, "UPDATE R SET A2 = 1 WHERE A1 = 100", cat)), ClusterError);
}

TEST(TransactionsBuffer, FailureStallsAndRecovers) {
  auto cat = rs_catalog();
  TransactionsBuffer buf;
  buf.publish(mini_ts(1, "UPDATE R SET A2 = 1 WHERE A1 = 100", cat));
  buf.fail();
  EXPECT_EQ(buf.fetch(1).status, TransactionsBuffer::FetchResult::Status::Unavailable);
  EXPECT_THROW(buf.publish(mini_ts(2, "UPDATE R SET A2 = 1 WHERE A1 = 100", cat)), ClusterError);
  buf.recover();
  EXPECT_EQ(buf.fetch(1).status, TransactionsBuffer::FetchResult::Status::Ok);
  buf.publish(mini_ts(2, "UPDATE R SET A2 = 1 WHERE A1 = 100", cat));
  EXPECT_EQ(buf.high(), 2u);
}

TEST(ArchiverBuffer, RecordRoundTripReextractsSets) {
  auto cat = rs_catalog();
  auto ts = std::make_shared<TState>();
  ts->tsid = 42;
  ts->completion = Completion::Commit;
  for (const char* sql : {"UPDATE R SET A2 = 7, A3 = 8 WHERE A1 = 100",
                          "INSERT INTO S VALUES (9, 1, 2, 3, 4)"}) {
    Statement st = parse(sql, cat);
    ts->write_statements.push_back(render(st));
    ts->rwset.merge(RWSet::extract(st, cat));
  }
  ts->total_exec_units = 5;

  std::string line = ArchiverBuffer::serialize_record(*ts);
  TState back = ArchiverBuffer::parse_record(line, cat);
  EXPECT_EQ(back.tsid, 42u);
  EXPECT_EQ(back.completion, Completion::Commit);
  EXPECT_EQ(back.total_exec_units, 5u);
  EXPECT_EQ(back.write_statements, ts->write_statements);
  EXPECT_EQ(back.rwset.dump(), ts->rwset.dump());  // extraction is deterministic
}

TEST(ArchiverBuffer, PersistLoadAndDelete) {
  auto cat = rs_catalog();
  auto path = std::filesystem::temp_directory_path() / "hihooi_archiver_test.log";
  std::filesystem::remove(path);
  {
    ArchiverBuffer arch(path);
    std::vector<TStatePtr> batch;
    for (Tsid t = 5; t <= 9; ++t)
      batch.push_back(mini_ts(t, "UPDATE R SET A2 = 1 WHERE A1 = 100", cat));
    arch.append(batch);
    EXPECT_EQ(arch.low(), 5u);
    EXPECT_EQ(arch.high(), 9u);
    arch.delete_upto(6);
    EXPECT_EQ(arch.low(), 7u);
  }
  auto loaded = ArchiverBuffer::load(path, cat);
  ASSERT_EQ(loaded.size(), 3u);
  EXPECT_EQ(loaded[0]->tsid, 7u);
  EXPECT_FALSE(loaded[0]->rwset.empty());
  std::filesystem::remove(path);
}

TEST(SyncEstimate, ArithmeticExamples) {
  EXPECT_EQ(sync_time_estimate(0, 1024, 0, 1.0), 0u);     // empty archive, empty seed
  EXPECT_EQ(sync_time_estimate(0, 1024, 100, 4.0), 25u);  // 100 units at dp=4
  EXPECT_EQ(sync_time_estimate(4096, 1024, 100, 4.0), 29u);  // plus transfer cost
}

struct MiniRun {
  ExperimentConfig cfg;
  MiniRun() {
    cfg.mix = "kv-writeheavy";
    cfg.clients = 8;
    cfg.txns = 300;
    cfg.cluster.replicas = 2;
    cfg.seed = 21;
  }
};

TEST(Cluster, ReplicasConvergeToPrimary) {
  MiniRun r;
  MetricsReport report = run_experiment(r.cfg);
  EXPECT_TRUE(report.quiesced);
  ASSERT_EQ(report.final_replica_dumps.size(), 2u);
  for (const auto& d : report.final_replica_dumps) EXPECT_EQ(d, report.final_primary_dump);
  EXPECT_EQ(report.gssi_violations, 0u);
  EXPECT_EQ(report.client_errors, 0u);
}

TEST(Cluster, ArchiveStepMovesAppliedPrefix) {
  MiniRun r;
  r.cfg.cluster.archive_period = 50;
  MetricsReport report = run_experiment(r.cfg);
  EXPECT_TRUE(report.quiesced);
  for (const auto& d : report.final_replica_dumps) EXPECT_EQ(d, report.final_primary_dump);
}

TEST(Cluster, SeedThenAddReplicaMatchesSerialOracle) {
  MiniRun r;
  r.cfg.cluster.archive_period = 40;
  r.cfg.add_replica_at = 200;
  MetricsReport report = run_experiment(r.cfg);
  EXPECT_TRUE(report.quiesced);
  ASSERT_EQ(report.final_replica_dumps.size(), 3u);  // the added one serves too
  for (const auto& d : report.final_replica_dumps) EXPECT_EQ(d, report.final_primary_dump);
}

TEST(Cluster, RemoveReplicaReroutesWithoutErrors) {
  MiniRun r;
  r.cfg.mix = "kv-balanced";
  r.cfg.remove_replica_at = 150;
  MetricsReport report = run_experiment(r.cfg);
  EXPECT_EQ(report.client_errors, 0u);
  ASSERT_EQ(report.final_replica_dumps.size(), 1u);
  EXPECT_EQ(report.final_replica_dumps[0], report.final_primary_dump);
}

TEST(Cluster, RemoveThenReaddReplaysOnlyMissed) {
  MiniRun r;
  r.cfg.remove_replica_at = 120;
  r.cfg.readd_replica_at = 400;
  MetricsReport report = run_experiment(r.cfg);
  EXPECT_EQ(report.client_errors, 0u);
  EXPECT_TRUE(report.quiesced);
  ASSERT_EQ(report.final_replica_dumps.size(), 2u);
  for (const auto& d : report.final_replica_dumps) EXPECT_EQ(d, report.final_primary_dump);
}

TEST(Cluster, BufferFailureIsTransparent) {
  MiniRun r;
  r.cfg.fail_buffer_at = 100;
  r.cfg.recover_buffer_at = 400;
  MetricsReport report = run_experiment(r.cfg);
  EXPECT_EQ(report.client_errors, 0u);
  EXPECT_TRUE(report.quiesced);
  for (const auto& d : report.final_replica_dumps) EXPECT_EQ(d, report.final_primary_dump);
}

TEST(Cluster, RecoverTmRebuildsIdenticalIndexes) {
  WorkloadSpec spec = load_workload("kv-writeheavy");
  spec.clients = 4;
  spec.total_txns = 120;
  ClusterConfig ccfg;
  ccfg.replicas = 2;
  ccfg.archive_period = 60;
  ccfg.tm.prune_every = 0;  // keep rows so the rebuild can be bit-identical
  SimCluster cluster(ccfg, spec);

  WorkloadGenerator gen(spec, 5);
  uint64_t done = 0, issued = 0;
  std::vector<std::shared_ptr<Session>> sessions;
  for (int i = 0; i < spec.clients; ++i)
    sessions.push_back(cluster.tm().open_session(ConsistencyLevel::GSSI));
  std::function<void(int)> issue = [&](int ci) {
    if (issued >= spec.total_txns) return;
    ++issued;
    cluster.submit_txn(sessions[static_cast<size_t>(ci)], gen.next(), [&, ci](const TxnOutcome&) {
      ++done;
      issue(ci);
    });
  };
  for (int i = 0; i < spec.clients; ++i) {
    int ci = i;
    cluster.sim().in(0, [&issue, ci] { issue(ci); });
  }
  while (cluster.sim().step()) {
    if (done >= spec.total_txns) cluster.stop_background_tasks();
  }
  ASSERT_EQ(done, spec.total_txns);

  std::string before = cluster.tm().dump_indexes();
  cluster.recover_tm();
  EXPECT_EQ(cluster.tm().dump_indexes(), before);
  cluster.check_no_loss();

  // losing a TState forces the seed-refresh path and still converges
  Tsid victim = cluster.buffer().low();
  if (victim > 0 && cluster.buffer().size() > 0) {
    cluster.buffer().drop(victim);
    cluster.recover_tm();
    cluster.sim().run();
    EXPECT_TRUE(cluster.quiesced());
    for (int id : cluster.replica_ids())
      EXPECT_EQ(cluster.replica_dump(id), cluster.primary_dump());
    cluster.check_no_loss();
  }
}

TEST(Cluster, NoLossPartitionHoldsThroughLifecycle) {
  MiniRun r;
  r.cfg.cluster.archive_period = 30;
  r.cfg.fail_buffer_at = 80;
  r.cfg.recover_buffer_at = 200;
  r.cfg.check_no_loss = true;
  MetricsReport report = run_experiment(r.cfg);  // boundary checks run inside
  EXPECT_EQ(report.client_errors, 0u);
}

TEST(Cluster, EstimateWithinTwoOfActualSync) {
  WorkloadSpec spec = load_workload("kv-writeheavy");
  spec.clients = 6;
  spec.total_txns = 500;
  ClusterConfig ccfg;
  ccfg.replicas = 1;
  ccfg.archive_period = 50;
  SimCluster cluster(ccfg, spec);

  WorkloadGenerator gen(spec, 31);
  uint64_t done = 0, issued = 0;
  std::vector<std::shared_ptr<Session>> sessions;
  for (int i = 0; i < spec.clients; ++i)
    sessions.push_back(cluster.tm().open_session(ConsistencyLevel::GSSI));
  std::function<void(int)> issue = [&](int ci) {
    if (issued >= spec.total_txns) return;
    ++issued;
    cluster.submit_txn(sessions[static_cast<size_t>(ci)], gen.next(), [&, ci](const TxnOutcome&) {
      ++done;
      issue(ci);
    });
  };
  for (int i = 0; i < spec.clients; ++i) {
    int ci = i;
    cluster.sim().in(0, [&issue, ci] { issue(ci); });
  }
  // run the workload to completion
  while (cluster.sim().step()) {
    if (done >= spec.total_txns) cluster.stop_background_tasks();
  }
  ASSERT_EQ(done, spec.total_txns);

  // a first catch-up burst populates the replay statistics the model uses
  Tsid target = cluster.tm().latest_tsid();
  int warm = cluster.add_replica();
  while (cluster.sim().step()) {
    if (cluster.replica_watermark(warm) >= target) break;
  }

  uint64_t estimate = cluster.estimate_sync_time();
  SimTime before = cluster.sim().now();
  int id = cluster.add_replica();
  while (cluster.sim().step()) {
    if (cluster.replica_watermark(id) >= target) break;
  }
  uint64_t actual = cluster.sim().now() - before;
  ASSERT_GT(actual, 0u);
  ASSERT_GT(estimate, 0u);
  EXPECT_LE(estimate, actual * 2);
  EXPECT_LE(actual, estimate * 2);
}

}  // namespace
