#pragma once

#include <map>
#include <string>

#include "hihooi/catalog.hpp"
#include "hihooi/rwset.hpp"
#include "hihooi/tstate.hpp"

namespace hihooi {

// The Transaction Manager's three hash indexes mapping tables, qualified
// columns, and PK rows to the TSID of the last write transaction that
// modified them. Row entries already applied on every replica may be pruned;
// the per-table row high-watermark keeps the CAS lookup correct afterwards.
class ConsistencyIndexes {
 public:
  // Adds one completed write transaction; must be called in TSID order.
  void update(const TState& ts, const SchemaCatalog& catalog);

  // Largest TSID that modified anything in the read set (0 when untouched).
  Tsid find_latest_consistent(const RWSet& read_set, const SchemaCatalog& catalog) const;

  // Drops row entries with TSID <= floor (already applied everywhere).
  void prune_rows(Tsid floor);

  std::string dump() const;
  bool operator==(const ConsistencyIndexes& o) const;

  Tsid table_entry(const std::string& t) const;

 private:
  std::map<std::string, Tsid> t_index_;
  std::map<std::string, Tsid> c_index_;  // "table.column"
  struct RowIdx {
    std::map<Value, Tsid, ValueLess> rows;
    Tsid hwm = 0;  // survives pruning
  };
  std::map<std::string, RowIdx> r_index_;
};

}  // namespace hihooi
