#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>

#include "hihooi/engine.hpp"
#include "hihooi/indexes.hpp"
#include "hihooi/parser.hpp"
#include "hihooi/tstate.hpp"

namespace hihooi {

enum class ConsistencyLevel { WeakSI, GSSI, RSIPC, OneSR };
enum class LbMode { Transaction, Statement };

const char* level_name(ConsistencyLevel l);
std::optional<ConsistencyLevel> level_from(const std::string& name);
std::optional<Granularity> granularity_from(const std::string& name);
std::optional<LbMode> lb_mode_from(const std::string& name);

struct ReplicaState {
  int id = 0;
  Tsid applied = 0;      // gap-free watermark reported by the extractor
  int active_reads = 0;  // in-flight routed reads
  bool alive = true;
};

struct RoutingDecision {
  enum class Target { Primary, Replica, Wait };
  Target target = Target::Primary;
  int replica_id = -1;
  Tsid wait_for = 0;  // RSI-PC park target

  bool is_replica() const { return target == Target::Replica; }
};

// Pure routing core: least-loaded alive replica meeting the level's
// freshness bar, ties by lowest id. GSSI falls back to the Primary, RSI-PC
// waits, Weak-SI/1SR take any alive replica (Primary only when none exist).
RoutingDecision route_read_decision(Tsid consistent_tsid, Tsid latest_issued,
                                    ConsistencyLevel level,
                                    std::span<const ReplicaState> replicas);

struct TmMetrics {
  uint64_t reads_primary = 0;
  uint64_t reads_replica = 0;
  uint64_t waits = 0;
  uint64_t commits = 0;
  uint64_t aborts = 0;
  uint64_t rerouted = 0;
};

struct TmConfig {
  Granularity granularity = Granularity::All;
  LbMode lb = LbMode::Statement;
  uint64_t prune_every = 1000;  // r_index pruning period in TSIDs; 0 disables
  Tsid initial_tsid = 0;        // first issued TSID is initial_tsid + 1
  uint64_t rng_seed = 1;        // RAND() rewriting stream
};

class TransactionManager;

// One client session. Fixed consistency level for its lifetime; write
// transactions accumulate the TState parts as statements execute.
class Session {
 public:
  int id() const { return id_; }
  ConsistencyLevel level() const { return level_; }
  Granularity granularity() const { return gran_; }
  LbMode lb_mode() const { return lb_; }
  bool write_active() const { return write_active_; }
  const RWSet& txn_running_state() const { return running_state_; }

 private:
  friend class TransactionManager;
  int id_ = 0;
  ConsistencyLevel level_ = ConsistencyLevel::GSSI;
  Granularity gran_ = Granularity::All;
  LbMode lb_ = LbMode::Statement;

  bool write_active_ = false;
  std::optional<Engine::Txn> txn_;
  RWSet running_state_;  // merged sets of this txn's statements so far
  std::vector<std::string> stmts_;
  std::vector<uint64_t> costs_;
  uint64_t total_cost_ = 0;
  RWSet wset_;  // merged sets of the write statements (TState payload)
  bool completion_pending_ = false;
  bool response_seen_ = false;
};

struct CompletionRecord {
  Completion completion = Completion::Commit;
  uint64_t commit_seq = 0;  // engine seq for commits; seq at rollback time otherwise
};

struct AckPlan {
  std::vector<std::pair<int, Tsid>> assigned;  // (session id, tsid) issued by this call
  bool ack_now = true;
  Tsid ack_after = 0;  // 1SR: ack once every alive replica's watermark covers this
};

struct WakeResult {
  std::vector<uint64_t> matured_reads;  // park tokens ready for re-routing
  std::vector<int> ack_sessions;        // 1SR commits now acknowledgeable
};

// Middleware core: executes write transactions on the primary engine, mints
// TSIDs in commit-timestamp order, maintains the hash indexes atomically
// with publication, tracks replica watermarks, and routes reads. Thread-safe
// behind one serializer mutex; replica read execution stays with the caller.
class TransactionManager {
 public:
  TransactionManager(Engine& primary, TmConfig config);

  using PublishFn = std::function<void(TStatePtr)>;  // may throw BufferUnavailable
  using ReplicaReadFn = std::function<std::vector<ResultSet>(int replica_id,
                                                             const std::vector<Statement>&)>;
  void set_publish_fn(PublishFn fn) { publish_fn_ = std::move(fn); }
  void set_replica_read_fn(ReplicaReadFn fn) { replica_read_fn_ = std::move(fn); }
  void set_clock(ClockFn fn) { clock_ = std::move(fn); }

  std::shared_ptr<Session> open_session(ConsistencyLevel level);
  std::shared_ptr<Session> open_session(ConsistencyLevel level, Granularity gran, LbMode lb);

  // --- replica registry ---
  void add_replica(int id, Tsid initial_watermark);
  WakeResult remove_replica(int id);  // also used for failure
  WakeResult on_watermark(int replica_id, Tsid watermark);
  std::vector<ReplicaState> replicas() const;
  Tsid min_alive_watermark() const;  // 0 when no replica is alive
  Tsid prune_floor() const { return prune_floor_; }

  // --- read routing ---
  Tsid find_latest_consistent_tsid(const RWSet& read_set) const;
  RoutingDecision route_and_acquire(const RWSet& read_set, ConsistencyLevel level);
  RoutingDecision route_statement_in_write_txn(Session& s, const RWSet& stmt_rwset);
  void read_finished(const RoutingDecision& d);
  uint64_t park_read(Tsid wait_for);  // RSI-PC wait queue; token matures via on_watermark

  // --- write path ---
  void begin_write(Session& s);
  std::pair<ResultSet, uint64_t> exec_write_statement(Session& s, const Statement& bound);
  ResultSet exec_read_in_txn(Session& s, const Statement& bound);
  CompletionRecord request_commit(Session& s);    // engine conflict surfaces as Rollback
  CompletionRecord request_rollback(Session& s);
  AckPlan on_completion_response(Session& s);     // assigns TSIDs to every pending completion

  // Setup-phase DDL, applied before the workload starts.
  void exec_setup_ddl(const Statement& create);

  // --- state the cluster consumes ---
  Tsid latest_tsid() const;
  // Engine commit seq covered by the last TSID assignment; a consistent cut
  // for seed exports (effects of unassigned in-flight commits excluded).
  uint64_t latest_assigned_commit_seq() const;
  const ConsistencyIndexes& indexes() const { return indexes_; }
  std::string dump_indexes() const;
  std::vector<TStatePtr> retained() const;  // absorbed during a buffer outage
  void flush_retained();                    // re-publish after buffer recovery
  void clear_retained();                    // simulated TM crash loses these

  // TM-failover support: replace index/counter state from a rebuilt image.
  void restore_state(ConsistencyIndexes idx, Tsid latest, Tsid prune_floor);

  TmMetrics& metrics() { return metrics_; }
  Engine& primary() { return primary_; }
  const SchemaCatalog& catalog() const { return primary_.catalog(); }
  const TmConfig& config() const { return config_; }

  // Observer hooks for experiment checkers.
  struct Observer {
    virtual ~Observer() = default;
    virtual void on_published(const TStatePtr&) {}
    virtual void on_read_routed(const RWSet& read_set, Tsid consistent,
                                const RoutingDecision& d) {}
  };
  void add_observer(Observer* obs) { observers_.push_back(obs); }

  // Synchronous convenience driver used by tests and the golden CLI: runs a
  // whole transaction (statements already bound). RSI-PC waits raise
  // WouldWait here; the simulation harness parks instead.
  struct TxnResult {
    std::vector<ResultSet> results;
    Completion completion = Completion::Commit;
    Tsid tsid = 0;  // 0 for read-only transactions
  };
  TxnResult run_transaction(Session& s, const std::vector<Statement>& stmts);

  // Statement-at-a-time session facade. BEGIN opens a write transaction,
  // reads route per the session's level (inside a write transaction, per its
  // load-balancing mode), writes execute on the primary, COMMIT/ROLLBACK
  // finish the transaction synchronously.
  ResultSet submit(Session& s, const Statement& bound);
  TxnResult commit_session(Session& s);
  TxnResult rollback_session(Session& s);
  void close_session(Session& s);

 private:
  struct Pending {
    std::shared_ptr<Session> session;
    Completion completion = Completion::Commit;
    uint64_t seq = 0;
    bool is_rollback = false;
    uint64_t txn_id = 0;
    TState tstate;  // tsid filled in at assignment
    bool assigned = false;
    Tsid tsid = 0;
  };

  void assign_pending_locked(AckPlan* plan);
  void publish_locked(TStatePtr ts);
  CompletionRecord complete_locked(Session& s, Completion completion, uint64_t seq,
                                   uint64_t txn_id);
  RoutingDecision route_locked(const RWSet& read_set, ConsistencyLevel level);

  Engine& primary_;
  TmConfig config_;
  mutable std::mutex mu_;
  ConsistencyIndexes indexes_;
  Tsid next_tsid_;
  uint64_t assigned_seq_ = 0;
  Tsid prune_floor_ = 0;
  std::map<int, ReplicaState> replicas_;
  std::map<int, std::shared_ptr<Session>> sessions_;
  int next_session_id_ = 1;
  std::map<int, Pending> pending_;  // session id -> pending completion
  std::vector<TStatePtr> retained_;
  struct ParkedRead {
    uint64_t token;
    Tsid wait_for;
  };
  std::vector<ParkedRead> parked_;
  uint64_t next_token_ = 1;
  std::map<int, Tsid> onesr_pending_;  // session id -> tsid awaiting replica coverage
  PublishFn publish_fn_;
  ReplicaReadFn replica_read_fn_;
  ClockFn clock_;
  std::mt19937_64 rand_rng_;
  TmMetrics metrics_;
  std::vector<Observer*> observers_;
};

}  // namespace hihooi
