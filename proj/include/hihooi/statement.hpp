#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hihooi/catalog.hpp"
#include "hihooi/value.hpp"

namespace hihooi {

enum class StmtKind {
  SelectRead,
  Insert,
  Update,
  Delete,
  Begin,
  Commit,
  Rollback,
  CreateTable,
};

enum class Cmp { Eq, Lt, Gt, Le, Ge, Ne };

const char* cmp_text(Cmp c);

// A literal, a '?' placeholder awaiting binding, or one of the
// nondeterministic macros that query rewriting replaces with literals.
struct Scalar {
  enum class Kind { Lit, Placeholder, TimeMacro, RandMacro };
  Kind kind = Kind::Lit;
  Value lit;

  static Scalar literal(Value v) { return {Kind::Lit, std::move(v)}; }
  bool operator==(const Scalar&) const = default;
};

struct PredAtom {
  std::string table;   // canonical table name
  std::string column;  // canonical column name
  Cmp op = Cmp::Eq;
  Scalar rhs;
  bool operator==(const PredAtom&) const = default;
};

struct Projection {
  enum class Kind { Star, Column, CountStar, CountCol, SumCol };
  Kind kind = Kind::Column;
  std::string table;   // empty for Star / CountStar
  std::string column;
  bool operator==(const Projection&) const = default;
};

struct SetClause {
  std::string column;
  Scalar value;
  bool operator==(const SetClause&) const = default;
};

struct JoinSpec {
  std::string left_table, left_column;
  std::string right_table, right_column;
  bool operator==(const JoinSpec&) const = default;
};

struct Statement {
  StmtKind kind = StmtKind::SelectRead;
  std::string text;  // original input; canonical form comes from render()

  std::vector<std::string> target_tables;  // canonical names, ordered
  std::vector<Projection> projections;     // SelectRead
  std::vector<PredAtom> predicate;         // conjunction of atoms
  std::vector<SetClause> set_clauses;      // Update
  std::vector<Scalar> values;              // Insert tuple
  std::optional<JoinSpec> join_spec;
  std::optional<TableSchema> create_def;   // CreateTable payload

  bool is_write() const {
    return kind == StmtKind::Insert || kind == StmtKind::Update ||
           kind == StmtKind::Delete || kind == StmtKind::CreateTable;
  }
  bool is_read() const { return kind == StmtKind::SelectRead; }

  bool bound() const;       // no placeholders remain
  bool has_macros() const;
  size_t placeholder_count() const;

  // Replaces placeholders left to right. Throws ArityMismatch when the
  // count differs from placeholder_count().
  Statement bind(std::span<const Value> vals) const;

  // Structural equality ignoring the original text.
  bool equal_structure(const Statement& o) const;
};

// Deterministic canonical serialization: uppercase keywords, single spaces,
// literals as-typed. This is the form stored in the archiver buffer.
std::string render(const Statement& stmt);

}  // namespace hihooi
