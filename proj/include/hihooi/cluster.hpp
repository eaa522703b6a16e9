#pragma once

#include <functional>
#include <map>
#include <memory>
#include <set>

#include "hihooi/buffers.hpp"
#include "hihooi/replay.hpp"
#include "hihooi/sim.hpp"
#include "hihooi/txmanager.hpp"
#include "hihooi/workload.hpp"

namespace hihooi {

struct ClusterConfig {
  int replicas = 2;
  int node_slots = 8;  // per-node worker pool
  bool serial_replay = false;
  uint64_t archive_period = 400;  // ticks between archive steps; 0 disables
  uint64_t seed_period = 0;       // ticks between seed refreshes; 0 = manual
  uint64_t net_delay = 1;
  uint64_t stmt_base_cost = 4;
  uint64_t commit_cost = 2;
  uint64_t response_jitter = 3;  // commit-response delay spread (reorder injection)
  uint64_t bandwidth_bytes_per_tick = 1 << 16;
  uint64_t rng_seed = 7;
  std::string archiver_file;  // empty = in-memory archiver
  TmConfig tm;
};

// Observation hook for routed reads; the harness's consistency checkers
// implement it. Tickets correlate a routing decision with its execution.
class ReadProbe {
 public:
  virtual ~ReadProbe() = default;
  virtual uint64_t routed(const std::vector<Statement>& stmts, const RWSet& read_set,
                          Tsid consistent, const RoutingDecision& d, Tsid target_wm_at_route) = 0;
  virtual void executed(uint64_t ticket, Tsid wm_at_exec,
                        const std::vector<ResultSet>& results) = 0;
};

struct TxnOutcome {
  Completion completion = Completion::Commit;
  Tsid tsid = 0;
  bool was_write = false;
};

// transfer cost plus pending replay work scaled by the observed degree of
// parallelism
uint64_t sync_time_estimate(uint64_t image_bytes, uint64_t bandwidth_bytes_per_tick,
                            uint64_t pending_units, double dp);

// One simulated deployment: primary node + TM, transactions buffer,
// archiver, seed images, and replica nodes running extractors. All activity
// is event-driven and deterministic under the config seed.
class SimCluster {
 public:
  SimCluster(const ClusterConfig& cfg, const WorkloadSpec& spec);
  ~SimCluster();

  Simulation& sim() { return sim_; }
  TransactionManager& tm() { return *tm_; }
  Engine& primary() { return *primary_; }
  TransactionsBuffer& buffer() { return buffer_; }
  ArchiverBuffer& archiver() { return archiver_; }

  // --- client API (asynchronous; done fires when the txn is acknowledged) ---
  using TxnDone = std::function<void(const TxnOutcome&)>;
  void submit_txn(const std::shared_ptr<Session>& session, GeneratedTxn txn, TxnDone done);

  void set_read_probe(ReadProbe* probe) { probe_ = probe; }

  // --- management operations ---
  void archive_step();
  void create_seed();
  int add_replica();               // clone the seed, catch up, register
  void remove_replica(int id);     // planned removal; reads transparently reroute
  void fail_replica(int id) { remove_replica(id); }
  void readd_replica(int id);      // resume a removed replica from its logged position
  void fail_buffer();
  void recover_buffer();
  void recover_tm();               // TM crash: rebuild indexes from durable stores

  uint64_t estimate_sync_time() const;

  // Stops the recurring archiver/seed events so a finished run can drain.
  void stop_background_tasks() { background_stopped_ = true; }

  // --- introspection / invariants ---
  void check_no_loss() const;  // committed-TSID partition invariant
  std::vector<int> replica_ids(bool alive_only = true) const;
  Tsid replica_watermark(int id) const;
  bool replica_alive(int id) const;
  std::string replica_dump(int id) const;
  std::string primary_dump() const { return primary_->dump_state(); }
  bool quiesced() const;  // every alive replica caught up, no pending work
  Tsid seed_tsid() const { return seed_tsid_; }
  double replay_dp_estimate() const;
  double mean_replay_lag() const;
  uint64_t reroutes() const { return reroutes_; }
  uint64_t client_errors() const { return client_errors_; }

 private:
  struct Replica {
    int id = 0;
    std::unique_ptr<Engine> engine;
    std::unique_ptr<SimNode> node;
    std::unique_ptr<ReplayScheduler> sched;
    Tsid next_fetch = 1;
    Tsid watermark = 0;
    Tsid reported = 0;
    bool alive = true;
    bool registered = false;
    std::set<Tsid> applied_log;  // engine-applied TSIDs above the watermark
    // serial-mode state: strict TSID-order application, one at a time
    std::deque<TStatePtr> serial_queue;
    bool serial_busy = false;
    // replay statistics: work units over busy wall time = observed dp
    uint64_t replay_units = 0;
    int replay_inflight = 0;
    SimTime replay_busy_start = 0;
    uint64_t replay_busy_ticks = 0;
  };

  struct WriteRun;
  struct ReadRun;

  void wire_tm();
  void schedule_archive();
  void schedule_seed();
  void notify_replicas();
  void pump_fetch(Replica& r);
  void feed_replica(Replica& r, TStatePtr ts);
  void submit_replay(Replica& r, TStatePtr ts);
  void pump_serial(Replica& r);
  void after_apply(Replica& r, Tsid tsid);
  void report_watermark(Replica& r);
  void process_wake(const WakeResult& wake);
  void maybe_register(Replica& r);
  Replica& replica_ref(int id);
  const Replica& replica_ref(int id) const;
  uint64_t jitter();

  ClusterConfig cfg_;
  WorkloadSpec spec_;
  Simulation sim_;
  std::unique_ptr<Engine> primary_;
  std::unique_ptr<SimNode> primary_node_;
  std::unique_ptr<TransactionManager> tm_;
  TransactionsBuffer buffer_;
  ArchiverBuffer archiver_;
  std::map<int, std::unique_ptr<Replica>> replicas_;
  int next_replica_id_ = 1;

  std::string seed_image_;
  Tsid seed_tsid_ = 0;
  uint64_t seed_export_seq_ = 0;
  uint64_t primary_seq_base_ = 0;

  std::mt19937_64 rng_;
  ReadProbe* probe_ = nullptr;

  // parked RSI-PC reads and deferred 1SR acks
  std::map<uint64_t, std::function<void()>> parked_conts_;
  std::map<int, std::function<void()>> onesr_conts_;
  // outstanding replica reads for transparent rerouting
  std::map<int, std::map<uint64_t, std::function<void()>>> outstanding_reads_;
  uint64_t next_ticket_ = 1;

  std::map<Tsid, SimTime> publish_time_;
  uint64_t lag_sum_ = 0, lag_count_ = 0;
  uint64_t reroutes_ = 0;
  uint64_t client_errors_ = 0;
  bool background_stopped_ = false;
};

}  // namespace hihooi
