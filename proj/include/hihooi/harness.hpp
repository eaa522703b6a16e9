#pragma once

#include <string>
#include <vector>

#include "hihooi/cluster.hpp"

namespace hihooi {

struct PhaseStats {
  std::string name;
  SimTime start = 0, end = 0;
  uint64_t committed = 0, aborted = 0;
  uint64_t committed_writes = 0;
  uint64_t reads_primary = 0, reads_replica = 0, waits = 0;
  std::vector<uint64_t> latencies;
  Tsid min_watermark = 0, max_tsid = 0;

  double throughput() const;  // committed transactions per 1000 ticks
  double write_throughput() const;
  double lat_mean() const;
  uint64_t lat_p99() const;
};

struct MetricsReport {
  std::vector<PhaseStats> phases;  // last entry is the synthesized "total"
  double mean_replay_lag = 0;
  double dp_estimate = 1;
  uint64_t reroutes = 0;
  uint64_t client_errors = 0;
  // consistency checker tallies
  uint64_t checked_reads = 0;
  uint64_t gssi_violations = 0;
  uint64_t legal_newer = 0;
  uint64_t staleness_observed = 0;
  uint64_t ablation_checked = 0;
  uint64_t ablation_violations = 0;
  bool quiesced = false;
  std::string final_primary_dump;
  std::vector<std::string> final_replica_dumps;

  const PhaseStats& total() const { return phases.back(); }
  std::string to_csv() const;
};

struct ExperimentConfig {
  ClusterConfig cluster;
  std::string mix = "kv-balanced";  // builtin name or spec file path
  ConsistencyLevel level = ConsistencyLevel::GSSI;
  int clients = 16;
  uint64_t txns = 2000;
  uint64_t seed = 42;
  // fault schedule in ticks (0 = never)
  SimTime fail_buffer_at = 0;
  SimTime recover_buffer_at = 0;
  SimTime remove_replica_at = 0;
  SimTime readd_replica_at = 0;
  SimTime add_replica_at = 0;
  SimTime recover_tm_at = 0;
  bool check_reads = true;    // run the GSSI/staleness recorder
  bool check_no_loss = true;  // partition invariant at phase boundaries
  bool check_ablation = false;
};

// Boots a cluster, drives `clients` concurrent logical clients through
// `txns` generated transactions, applies the fault schedule, runs the online
// checkers, and returns per-phase metrics. InvariantViolation aborts the run.
MetricsReport run_experiment(const ExperimentConfig& cfg);

struct CompareReport {
  MetricsReport parallel;
  MetricsReport serial;
  bool states_equal = false;
};

// Same seed under parallel and serial extractors; asserts final replica
// states match the primary in both runs and compares lag/throughput.
CompareReport compare_replay_modes(ExperimentConfig cfg);

// ---------------------------------------------------------------------------
// randomized replay batches (oracle: serial_replay)

struct ReplayBatch {
  SchemaCatalog catalog;
  std::vector<Statement> preload;  // bound INSERTs establishing the base state
  std::vector<TStatePtr> tstates;  // TSIDs from 11 upward
};

// 2-5 tables, up to max_txns transactions mixing RAS/CAS/TAS statements and
// occasional rollbacks.
ReplayBatch make_replay_batch(uint64_t seed, size_t max_txns = 200);

std::unique_ptr<Engine> batch_engine(const ReplayBatch& batch);
std::string serial_replay_dump(const ReplayBatch& batch);

// Feeds the batch through ReplayScheduler under a seeded interleaver that
// randomly chooses between delivering the next TState and completing a
// random running one, asserting pairwise independence of the running set on
// every dispatch. Returns the final state dump.
std::string fuzz_parallel_replay(const ReplayBatch& batch, uint64_t fuzz_seed);

// ---------------------------------------------------------------------------
// golden fixtures: the worked example from the index/scheduling tables

struct GoldenResult {
  std::vector<std::string> write_classes;  // per W1..W5
  std::vector<Tsid> tsids;                 // 11..15
  std::string index_dump;
  std::vector<Tsid> read_tsids;            // consistent TSIDs of R1..R4
  std::vector<std::string> schedule_trace;
  std::string rwset_dumps;                 // concatenated per-transaction dumps
};

GoldenResult run_golden();

// Expected scheduler trace for the worked example (arrivals then drains).
std::vector<std::string> golden_expected_trace();

}  // namespace hihooi
