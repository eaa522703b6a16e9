#pragma once

#include <map>
#include <memory>
#include <shared_mutex>
#include <vector>

#include "hihooi/catalog.hpp"
#include "hihooi/statement.hpp"
#include "hihooi/value.hpp"

namespace hihooi {

struct ResultSet {
  std::vector<std::string> columns;
  std::vector<std::vector<Value>> rows;
  size_t affected = 0;

  bool operator==(const ResultSet& o) const { return rows == o.rows; }
};

struct ExecStats {
  uint64_t rows_touched = 0;
};

// In-memory multi-version storage engine offering per-node Strong Snapshot
// Isolation: transactions read the newest committed snapshot as of begin(),
// see their own writes, and abort at commit when another transaction
// committed a version of a key they wrote (first-committer-wins).
class Engine {
 public:
  explicit Engine(SchemaCatalog catalog);

  class Txn {
   public:
    Txn() = default;
    Txn(Txn&&) = default;
    Txn& operator=(Txn&&) = default;
    Txn(const Txn&) = delete;
    Txn& operator=(const Txn&) = delete;

    uint64_t snapshot_seq() const { return snapshot_seq_; }
    uint64_t id() const { return id_; }
    bool active() const { return active_; }

   private:
    friend class Engine;
    struct WriteOp {
      enum class Kind { Insert, Delete, Update };
      Kind kind = Kind::Update;
      std::vector<Value> row;            // Insert: full image
      std::map<size_t, Value> patches;   // Update: column index -> new value
    };
    uint64_t id_ = 0;
    uint64_t snapshot_seq_ = 0;
    bool active_ = false;
    std::map<std::string, std::map<Value, WriteOp, ValueLess>> writes_;
  };

  Txn begin();
  // Historical snapshot at a given commit seq (clamped to the latest);
  // MVCC makes any past cut readable. Used by checkers and seed logic.
  Txn begin_at(uint64_t snapshot_seq);
  ResultSet execute(Txn& txn, const Statement& stmt, ExecStats* stats = nullptr);
  uint64_t commit(Txn& txn);  // throws WriteWriteConflict; txn is dead either way
  void rollback(Txn& txn);

  // Setup-phase DDL; also used when replaying CREATE TABLE statements.
  void create_table(const TableSchema& schema);

  uint64_t latest_seq() const;
  const SchemaCatalog& catalog() const { return catalog_; }

  // Seed image: visible state at upto_seq plus the catalog. Byte-exact
  // round-trip: export(import(img), ...) == img.
  std::string export_seed(uint64_t upto_seq) const;
  static std::unique_ptr<Engine> import_seed(const std::string& image);

  // Deterministic dump of the visible committed state (no sequence numbers);
  // equal dumps mean equal logical database states across nodes.
  std::string dump_state() const;

  // Debug check: version chains strictly increase in commit seq.
  bool check_version_chains() const;

 private:
  struct Version {
    uint64_t seq = 0;
    bool tombstone = false;
    std::vector<Value> row;
  };
  struct Table {
    TableSchema schema;
    std::map<Value, std::vector<Version>, ValueLess> chains;
  };

  const Table& table_for(const std::string& name) const;
  Table& table_for(const std::string& name);
  const std::vector<Value>* visible(const Table& t, const Value& pk, uint64_t snap) const;

  // Effective row set a transaction sees: committed snapshot overlaid with
  // its own write buffer. Calls fn(pk, row) in key order.
  template <typename Fn>
  void scan(const Txn& txn, const Table& t, Fn&& fn) const;

  ResultSet exec_select(Txn& txn, const Statement& stmt, ExecStats* stats) const;
  ResultSet exec_insert(Txn& txn, const Statement& stmt, ExecStats* stats);
  ResultSet exec_update(Txn& txn, const Statement& stmt, ExecStats* stats);
  ResultSet exec_delete(Txn& txn, const Statement& stmt, ExecStats* stats);

  mutable std::shared_mutex mu_;
  SchemaCatalog catalog_;
  std::map<std::string, Table> tables_;
  uint64_t commit_seq_ = 0;
  uint64_t next_txn_id_ = 1;
};

}  // namespace hihooi
