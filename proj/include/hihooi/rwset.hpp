#pragma once

#include <map>
#include <string>

#include "hihooi/statement.hpp"
#include "hihooi/value.hpp"

namespace hihooi {

// Granularity at which statements touch a table. Coarseness order
// RAS < CAS < TAS drives the multi-statement merge rule.
enum class AffectingClass : uint8_t { RAS = 0, CAS = 1, TAS = 2 };

const char* affecting_class_name(AffectingClass c);

// Extraction granularity knob: coarser modes deliberately degrade the sets
// (TasOnly classifies everything TAS; TasCas discards row sets).
enum class Granularity { TasOnly, TasCas, All };

// Counter-valued column set; star stands for "all columns" and intersects
// any non-empty set.
struct ColSet {
  std::map<std::string, int> cols;
  int star = 0;

  bool empty() const { return cols.empty() && star == 0; }
  bool intersects(const ColSet& o) const;
  void add(const std::string& col, int n = 1);
  void merge(const ColSet& o);
};

struct RowSet {
  std::map<Value, int, ValueLess> rows;

  bool empty() const { return rows.empty(); }
  bool intersects(const RowSet& o) const;
  void add(const Value& pk, int n = 1);
  void merge(const RowSet& o);
};

// Counter-based read/write sets of one statement or of any number of merged
// statements. remove() undoes a prior merge() exactly, including the
// affecting class, which is why constituent classes are kept as a multiset.
class RWSet {
 public:
  struct TableEntry {
    int read_cnt = 0;
    int write_cnt = 0;
    ColSet col_read, col_write;
    RowSet row_read, row_write;
    int cls_cnt[3] = {0, 0, 0};  // constituent statement classes, RAS/CAS/TAS

    AffectingClass cls() const;
    bool in_read() const { return read_cnt > 0; }
    bool in_write() const { return write_cnt > 0; }
  };

  // Statement must carry no placeholders (macros are permitted; a non-literal
  // key simply produces no row entry, which coarsens the class soundly).
  static RWSet extract(const Statement& stmt, const SchemaCatalog& catalog,
                       Granularity g = Granularity::All);

  void merge(const RWSet& other);
  void remove(const RWSet& other);  // throws UnderflowViolation on misuse

  bool empty() const { return tables_.empty(); }
  const std::map<std::string, TableEntry>& tables() const { return tables_; }
  const TableEntry* find(const std::string& table) const;

  // Deterministic text form for debug dumps and golden tests.
  std::string dump() const;

  friend bool are_independent(const RWSet& a, const RWSet& b);

 private:
  std::map<std::string, TableEntry> tables_;
};

// Algorithm: two transactions are independent when their table write sets
// do not meet the other's read/write tables, or every commonly touched table
// passes the CAS/CAS column-disjointness or RAS/RAS row-disjointness check.
bool are_independent(const RWSet& a, const RWSet& b);

}  // namespace hihooi
