#include "hihooi/engine.hpp"

#include <algorithm>
#include <cassert>
#include <charconv>
#include <mutex>
#include <sstream>

#include "hihooi/errors.hpp"

namespace hihooi {

namespace {

Value coerce(const Value& v, ColType type, const std::string& col) {
  if (is_null(v)) return v;
  switch (type) {
    case ColType::Int:
      if (value_type(v) == ValueType::Int) return v;
      break;
    case ColType::Float:
      if (value_type(v) == ValueType::Float) return v;
      if (value_type(v) == ValueType::Int)
        return Value{static_cast<double>(std::get<int64_t>(v))};
      break;
    case ColType::Text:
      if (value_type(v) == ValueType::Text) return v;
      break;
  }
  throw EngineError(EngineError::Kind::TypeError,
                    "value " + render_value(v) + " does not fit column " + col);
}

const Value& literal_of(const Scalar& s, const std::string& where) {
  if (s.kind != Scalar::Kind::Lit)
    throw EngineError(EngineError::Kind::UnboundPlaceholder,
                      "non-literal scalar in " + where + "; bind and rewrite first");
  return s.lit;
}

bool atom_matches(const Value& lhs, Cmp op, const Value& rhs) {
  auto c = compare_values(lhs, rhs);
  if (!c) return false;  // NULL never matches
  switch (op) {
    case Cmp::Eq: return *c == 0;
    case Cmp::Lt: return *c < 0;
    case Cmp::Gt: return *c > 0;
    case Cmp::Le: return *c <= 0;
    case Cmp::Ge: return *c >= 0;
    case Cmp::Ne: return *c != 0;
  }
  return false;
}

// Splits "A1=100,A2='x,y'" into col=val pieces, respecting quoted text.
std::vector<std::string> split_fields(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  bool in_quote = false;
  for (size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c == '\'') {
      if (in_quote && i + 1 < s.size() && s[i + 1] == '\'') {
        cur += "''";
        ++i;
        continue;
      }
      in_quote = !in_quote;
      cur += c;
      continue;
    }
    if (c == ',' && !in_quote) {
      out.push_back(cur);
      cur.clear();
      continue;
    }
    cur += c;
  }
  if (!cur.empty() || !out.empty()) out.push_back(cur);
  return out;
}

Value parse_rendered_value(const std::string& s) {
  if (s == "NULL") return Value{};
  if (!s.empty() && s.front() == '\'') {
    if (s.size() < 2 || s.back() != '\'')
      throw EngineError(EngineError::Kind::CorruptImage, "bad text literal " + s);
    std::string out;
    for (size_t i = 1; i + 1 < s.size(); ++i) {
      if (s[i] == '\'' && i + 1 < s.size() - 1 && s[i + 1] == '\'') {
        out += '\'';
        ++i;
      } else {
        out += s[i];
      }
    }
    return Value{out};
  }
  if (s.find('.') != std::string::npos || s.find('e') != std::string::npos ||
      s.find("inf") != std::string::npos || s.find("nan") != std::string::npos) {
    try {
      return Value{std::stod(s)};
    } catch (...) {
      throw EngineError(EngineError::Kind::CorruptImage, "bad float literal " + s);
    }
  }
  int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw EngineError(EngineError::Kind::CorruptImage, "bad int literal " + s);
  return Value{v};
}

}  // namespace

Engine::Engine(SchemaCatalog catalog) : catalog_(std::move(catalog)) {
  for (const TableSchema* t : catalog_.tables()) tables_[t->name].schema = *t;
}

void Engine::create_table(const TableSchema& schema) {
  std::unique_lock lk(mu_);
  if (catalog_.has_table(schema.name)) return;  // replay of setup DDL is idempotent
  catalog_.add_table(schema);
  tables_[catalog_.table(schema.name).name].schema = catalog_.table(schema.name);
}

const Engine::Table& Engine::table_for(const std::string& name) const {
  auto it = tables_.find(name);
  if (it == tables_.end())
    throw EngineError(EngineError::Kind::TableMissing, "table " + name + " does not exist");
  return it->second;
}

Engine::Table& Engine::table_for(const std::string& name) {
  auto it = tables_.find(name);
  if (it == tables_.end())
    throw EngineError(EngineError::Kind::TableMissing, "table " + name + " does not exist");
  return it->second;
}

Engine::Txn Engine::begin() {
  std::unique_lock lk(mu_);
  Txn t;
  t.id_ = next_txn_id_++;
  t.snapshot_seq_ = commit_seq_;
  t.active_ = true;
  return t;
}

Engine::Txn Engine::begin_at(uint64_t snapshot_seq) {
  std::unique_lock lk(mu_);
  Txn t;
  t.id_ = next_txn_id_++;
  t.snapshot_seq_ = std::min(snapshot_seq, commit_seq_);
  t.active_ = true;
  return t;
}

uint64_t Engine::latest_seq() const {
  std::shared_lock lk(mu_);
  return commit_seq_;
}

const std::vector<Value>* Engine::visible(const Table& t, const Value& pk, uint64_t snap) const {
  auto it = t.chains.find(pk);
  if (it == t.chains.end()) return nullptr;
  const Version* best = nullptr;
  for (const Version& v : it->second) {
    if (v.seq > snap) break;
    best = &v;
  }
  if (!best || best->tombstone) return nullptr;
  return &best->row;
}

template <typename Fn>
void Engine::scan(const Txn& txn, const Table& t, Fn&& fn) const {
  auto wit = txn.writes_.find(t.schema.name);
  const std::map<Value, Txn::WriteOp, ValueLess>* writes =
      wit == txn.writes_.end() ? nullptr : &wit->second;

  auto emit_overlaid = [&](const Value& pk, const std::vector<Value>* base) {
    if (writes) {
      auto ow = writes->find(pk);
      if (ow != writes->end()) {
        const Txn::WriteOp& op = ow->second;
        switch (op.kind) {
          case Txn::WriteOp::Kind::Insert:
            fn(pk, op.row);
            return;
          case Txn::WriteOp::Kind::Delete:
            return;
          case Txn::WriteOp::Kind::Update: {
            assert(base);
            std::vector<Value> patched = *base;
            for (const auto& [idx, v] : op.patches) patched[idx] = v;
            fn(pk, patched);
            return;
          }
        }
      }
    }
    if (base) fn(pk, *base);
  };

  auto cit = t.chains.begin();
  auto oit = writes ? writes->begin() : std::map<Value, Txn::WriteOp, ValueLess>::const_iterator{};
  while (cit != t.chains.end() || (writes && oit != writes->end())) {
    bool take_chain;
    if (cit == t.chains.end()) take_chain = false;
    else if (!writes || oit == writes->end()) take_chain = true;
    else if (value_less(cit->first, oit->first)) take_chain = true;
    else take_chain = false;

    if (take_chain) {
      emit_overlaid(cit->first, visible(t, cit->first, txn.snapshot_seq_));
      ++cit;
    } else {
      if (cit != t.chains.end() && !value_less(oit->first, cit->first)) {
        // same key present in both; overlay handles it once
        emit_overlaid(cit->first, visible(t, cit->first, txn.snapshot_seq_));
        ++cit;
        ++oit;
      } else {
        emit_overlaid(oit->first, nullptr);
        ++oit;
      }
    }
  }
}

namespace {

// Optional PK-equality fast path: returns the literal when the predicate
// pins the table's primary key.
const Value* pk_point(const Statement& stmt, const TableSchema& schema) {
  for (const auto& a : stmt.predicate) {
    if (a.table == schema.name && a.column == schema.pk && a.op == Cmp::Eq &&
        a.rhs.kind == Scalar::Kind::Lit)
      return &a.rhs.lit;
  }
  return nullptr;
}

}  // namespace

ResultSet Engine::exec_select(Txn& txn, const Statement& stmt, ExecStats* stats) const {
  const Table& left = table_for(stmt.target_tables[0]);
  const Table* right = stmt.target_tables.size() > 1 ? &table_for(stmt.target_tables[1]) : nullptr;

  struct Joined {
    const std::vector<Value>* l;
    const std::vector<Value>* r;
  };

  auto col_value = [&](const std::string& table, const std::string& col,
                       const std::vector<Value>& lrow,
                       const std::vector<Value>* rrow) -> const Value& {
    if (table == left.schema.name) {
      int i = left.schema.column_index(col);
      return lrow[static_cast<size_t>(i)];
    }
    int i = right->schema.column_index(col);
    return (*rrow)[static_cast<size_t>(i)];
  };

  auto matches = [&](const std::vector<Value>& lrow, const std::vector<Value>* rrow) {
    for (const auto& a : stmt.predicate) {
      const Value& lhs = col_value(a.table, a.column, lrow, rrow);
      if (!atom_matches(lhs, a.op, literal_of(a.rhs, "predicate"))) return false;
    }
    return true;
  };

  // materialize matching rows (joined when a second table is present)
  std::vector<std::pair<std::vector<Value>, std::vector<Value>>> matched;
  uint64_t touched = 0;

  if (!right) {
    if (const Value* pk = pk_point(stmt, left.schema)) {
      // point lookup: committed version overlaid by this txn's write op
      touched = 1;
      const std::vector<Value>* base = visible(left, *pk, txn.snapshot_seq_);
      auto wit = txn.writes_.find(left.schema.name);
      if (wit != txn.writes_.end()) {
        auto ow = wit->second.find(*pk);
        if (ow != wit->second.end()) {
          const Txn::WriteOp& op = ow->second;
          if (op.kind == Txn::WriteOp::Kind::Insert) {
            if (matches(op.row, nullptr)) matched.emplace_back(op.row, std::vector<Value>{});
          } else if (op.kind == Txn::WriteOp::Kind::Update && base) {
            std::vector<Value> patched = *base;
            for (const auto& [idx, v] : op.patches) patched[idx] = v;
            if (matches(patched, nullptr)) matched.emplace_back(patched, std::vector<Value>{});
          }
          base = nullptr;
        }
      }
      if (base && matches(*base, nullptr)) matched.emplace_back(*base, std::vector<Value>{});
    } else {
      scan(txn, left, [&](const Value&, const std::vector<Value>& row) {
        ++touched;
        if (matches(row, nullptr)) matched.emplace_back(row, std::vector<Value>{});
      });
    }
  } else {
    const JoinSpec& js = *stmt.join_spec;
    // nested loop join over both effective row sets
    std::vector<std::vector<Value>> rrows;
    scan(txn, *right, [&](const Value&, const std::vector<Value>& row) { rrows.push_back(row); });
    scan(txn, left, [&](const Value&, const std::vector<Value>& lrow) {
      for (const auto& rrow : rrows) {
        ++touched;
        const Value& lv = col_value(js.left_table, js.left_column, lrow, &rrow);
        const Value& rv = col_value(js.right_table, js.right_column, lrow, &rrow);
        auto c = compare_values(lv, rv);
        if (!c || *c != 0) continue;
        if (matches(lrow, &rrow)) matched.emplace_back(lrow, rrow);
      }
    });
  }

  if (stats) stats->rows_touched += std::max<uint64_t>(touched, 1);

  ResultSet rs;
  bool aggregate = !stmt.projections.empty() &&
                   stmt.projections[0].kind != Projection::Kind::Star &&
                   stmt.projections[0].kind != Projection::Kind::Column;

  auto label = [&](const Projection& p) {
    switch (p.kind) {
      case Projection::Kind::Star: return std::string("*");
      case Projection::Kind::Column:
        return right ? p.table + "." + p.column : p.column;
      case Projection::Kind::CountStar: return std::string("COUNT(*)");
      case Projection::Kind::CountCol: return "COUNT(" + p.column + ")";
      case Projection::Kind::SumCol: return "SUM(" + p.column + ")";
    }
    return std::string();
  };

  if (aggregate) {
    std::vector<Value> out;
    for (const auto& p : stmt.projections) {
      rs.columns.push_back(label(p));
      if (p.kind == Projection::Kind::CountStar) {
        out.emplace_back(static_cast<int64_t>(matched.size()));
        continue;
      }
      int64_t count = 0;
      int64_t isum = 0;
      double fsum = 0;
      bool is_float = false;
      for (const auto& [lrow, rrow] : matched) {
        const Value& v = col_value(p.table, p.column, lrow, right ? &rrow : nullptr);
        if (is_null(v)) continue;
        ++count;
        if (value_type(v) == ValueType::Float) {
          is_float = true;
          fsum += std::get<double>(v);
        } else if (value_type(v) == ValueType::Int) {
          isum += std::get<int64_t>(v);
        } else if (p.kind == Projection::Kind::SumCol) {
          throw EngineError(EngineError::Kind::TypeError, "SUM over text column " + p.column);
        }
      }
      if (p.kind == Projection::Kind::CountCol) {
        out.emplace_back(count);
      } else {
        if (count == 0) out.emplace_back(Value{});
        else if (is_float) out.emplace_back(fsum + static_cast<double>(isum));
        else out.emplace_back(isum);
      }
    }
    rs.rows.push_back(std::move(out));
    return rs;
  }

  bool star = !stmt.projections.empty() && stmt.projections[0].kind == Projection::Kind::Star;
  if (star) {
    for (const auto& c : left.schema.columns)
      rs.columns.push_back(right ? left.schema.name + "." + c : c);
    if (right)
      for (const auto& c : right->schema.columns) rs.columns.push_back(right->schema.name + "." + c);
  } else {
    for (const auto& p : stmt.projections) rs.columns.push_back(label(p));
  }

  for (const auto& [lrow, rrow] : matched) {
    std::vector<Value> out;
    if (star) {
      out = lrow;
      if (right) out.insert(out.end(), rrow.begin(), rrow.end());
    } else {
      for (const auto& p : stmt.projections)
        out.push_back(col_value(p.table, p.column, lrow, right ? &rrow : nullptr));
    }
    rs.rows.push_back(std::move(out));
  }
  return rs;
}

ResultSet Engine::exec_insert(Txn& txn, const Statement& stmt, ExecStats* stats) {
  Table& t = table_for(stmt.target_tables[0]);
  const TableSchema& schema = t.schema;
  std::vector<Value> row;
  row.reserve(schema.columns.size());
  for (size_t i = 0; i < schema.columns.size(); ++i)
    row.push_back(coerce(literal_of(stmt.values[i], "INSERT"), schema.types[i], schema.columns[i]));
  const Value& pk = row[schema.pk_index];
  if (is_null(pk))
    throw EngineError(EngineError::Kind::TypeError, "NULL primary key in " + schema.name);

  auto& writes = txn.writes_[schema.name];
  auto ow = writes.find(pk);
  bool exists_committed = visible(t, pk, txn.snapshot_seq_) != nullptr;
  bool exists = exists_committed;
  if (ow != writes.end()) exists = ow->second.kind != Txn::WriteOp::Kind::Delete;
  if (exists)
    throw EngineError(EngineError::Kind::DuplicateKey,
                      "duplicate key " + render_value(pk) + " in " + schema.name);

  Txn::WriteOp op;
  op.kind = Txn::WriteOp::Kind::Insert;
  op.row = std::move(row);
  writes[pk] = std::move(op);
  if (stats) stats->rows_touched += 1;
  ResultSet rs;
  rs.affected = 1;
  return rs;
}

ResultSet Engine::exec_update(Txn& txn, const Statement& stmt, ExecStats* stats) {
  Table& t = table_for(stmt.target_tables[0]);
  const TableSchema& schema = t.schema;

  std::map<size_t, Value> patches;
  for (const auto& sc : stmt.set_clauses) {
    int idx = schema.column_index(sc.column);
    patches[static_cast<size_t>(idx)] =
        coerce(literal_of(sc.value, "SET"), schema.types[static_cast<size_t>(idx)], sc.column);
  }

  auto matches = [&](const std::vector<Value>& row) {
    for (const auto& a : stmt.predicate) {
      int idx = schema.column_index(a.column);
      if (!atom_matches(row[static_cast<size_t>(idx)], a.op, literal_of(a.rhs, "predicate")))
        return false;
    }
    return true;
  };

  std::vector<Value> hit_keys;
  uint64_t touched = 0;
  if (const Value* pk = pk_point(stmt, schema)) {
    touched = 1;
    const std::vector<Value>* base = visible(t, *pk, txn.snapshot_seq_);
    auto wit = txn.writes_.find(schema.name);
    if (wit != txn.writes_.end()) {
      auto ow = wit->second.find(*pk);
      if (ow != wit->second.end()) {
        const Txn::WriteOp& op = ow->second;
        if (op.kind == Txn::WriteOp::Kind::Insert) {
          if (matches(op.row)) hit_keys.push_back(*pk);
        } else if (op.kind == Txn::WriteOp::Kind::Update && base) {
          std::vector<Value> patched = *base;
          for (const auto& [idx, v] : op.patches) patched[idx] = v;
          if (matches(patched)) hit_keys.push_back(*pk);
        }
        base = nullptr;
      }
    }
    if (base && matches(*base)) hit_keys.push_back(*pk);
  } else {
    scan(txn, t, [&](const Value& key, const std::vector<Value>& row) {
      ++touched;
      if (matches(row)) hit_keys.push_back(key);
    });
  }

  auto& writes = txn.writes_[schema.name];
  for (const Value& key : hit_keys) {
    auto ow = writes.find(key);
    if (ow != writes.end()) {
      Txn::WriteOp& op = ow->second;
      if (op.kind == Txn::WriteOp::Kind::Insert) {
        for (const auto& [idx, v] : patches) op.row[idx] = v;
      } else {
        for (const auto& [idx, v] : patches) op.patches[idx] = v;
      }
    } else {
      Txn::WriteOp op;
      op.kind = Txn::WriteOp::Kind::Update;
      op.patches = patches;
      writes[key] = std::move(op);
    }
  }
  if (stats) stats->rows_touched += std::max<uint64_t>(touched, 1);
  ResultSet rs;
  rs.affected = hit_keys.size();
  return rs;
}

ResultSet Engine::exec_delete(Txn& txn, const Statement& stmt, ExecStats* stats) {
  Table& t = table_for(stmt.target_tables[0]);
  const TableSchema& schema = t.schema;

  auto matches = [&](const std::vector<Value>& row) {
    for (const auto& a : stmt.predicate) {
      int idx = schema.column_index(a.column);
      if (!atom_matches(row[static_cast<size_t>(idx)], a.op, literal_of(a.rhs, "predicate")))
        return false;
    }
    return true;
  };

  std::vector<Value> hit_keys;
  uint64_t touched = 0;
  scan(txn, t, [&](const Value& key, const std::vector<Value>& row) {
    ++touched;
    if (matches(row)) hit_keys.push_back(key);
  });

  auto& writes = txn.writes_[schema.name];
  for (const Value& key : hit_keys) {
    Txn::WriteOp op;
    op.kind = Txn::WriteOp::Kind::Delete;
    writes[key] = std::move(op);
  }
  if (stats) stats->rows_touched += std::max<uint64_t>(touched, 1);
  ResultSet rs;
  rs.affected = hit_keys.size();
  return rs;
}

ResultSet Engine::execute(Txn& txn, const Statement& stmt, ExecStats* stats) {
  if (!txn.active_)
    throw EngineError(EngineError::Kind::TxnInactive, "transaction is not active");
  std::shared_lock lk(mu_);
  switch (stmt.kind) {
    case StmtKind::SelectRead: return exec_select(txn, stmt, stats);
    case StmtKind::Insert: return exec_insert(txn, stmt, stats);
    case StmtKind::Update: return exec_update(txn, stmt, stats);
    case StmtKind::Delete: return exec_delete(txn, stmt, stats);
    default:
      throw EngineError(EngineError::Kind::TxnInactive,
                        "statement kind not executable inside a transaction: " + stmt.text);
  }
}

uint64_t Engine::commit(Txn& txn) {
  if (!txn.active_)
    throw EngineError(EngineError::Kind::TxnInactive, "transaction is not active");
  std::unique_lock lk(mu_);
  txn.active_ = false;

  if (txn.writes_.empty()) return commit_seq_;  // read-only: no new version

  // first-committer-wins over written keys
  for (const auto& [tname, ops] : txn.writes_) {
    const Table& t = table_for(tname);
    for (const auto& [pk, op] : ops) {
      (void)op;
      auto it = t.chains.find(pk);
      if (it != t.chains.end() && !it->second.empty() &&
          it->second.back().seq > txn.snapshot_seq_) {
        txn.writes_.clear();
        throw EngineError(EngineError::Kind::WriteWriteConflict,
                          "concurrent write to " + tname + " key " + render_value(pk));
      }
    }
  }

  uint64_t seq = ++commit_seq_;
  for (auto& [tname, ops] : txn.writes_) {
    Table& t = table_for(tname);
    for (auto& [pk, op] : ops) {
      auto& chain = t.chains[pk];
      switch (op.kind) {
        case Txn::WriteOp::Kind::Insert:
          chain.push_back(Version{seq, false, std::move(op.row)});
          break;
        case Txn::WriteOp::Kind::Delete:
          if (!chain.empty() && !chain.back().tombstone)
            chain.push_back(Version{seq, true, {}});
          else if (chain.empty())
            t.chains.erase(pk);
          break;
        case Txn::WriteOp::Kind::Update: {
          assert(!chain.empty() && !chain.back().tombstone);
          std::vector<Value> row = chain.back().row;
          for (const auto& [idx, v] : op.patches) row[idx] = v;
          chain.push_back(Version{seq, false, std::move(row)});
          break;
        }
      }
    }
  }
  txn.writes_.clear();
  return seq;
}

void Engine::rollback(Txn& txn) {
  txn.active_ = false;
  txn.writes_.clear();
}

bool Engine::check_version_chains() const {
  std::shared_lock lk(mu_);
  for (const auto& [name, t] : tables_) {
    (void)name;
    for (const auto& [pk, chain] : t.chains) {
      (void)pk;
      for (size_t i = 1; i < chain.size(); ++i) {
        if (chain[i].seq <= chain[i - 1].seq) return false;
        if (chain[i].tombstone && chain[i - 1].tombstone) return false;
      }
    }
  }
  return true;
}

namespace {

void write_catalog_line(std::ostream& out, const TableSchema& s, size_t rowcount) {
  out << "table|" << s.name << "|" << s.pk << "|";
  for (size_t i = 0; i < s.columns.size(); ++i) {
    if (i) out << ",";
    out << s.columns[i] << ":" << col_type_name(s.types[i]);
  }
  out << "|" << rowcount << "\n";
}

void write_row_line(std::ostream& out, const TableSchema& s, const Value& pk,
                    const std::vector<Value>& row) {
  out << "row|" << s.name << "|" << render_value(pk) << "|";
  for (size_t i = 0; i < s.columns.size(); ++i) {
    if (i) out << ",";
    out << s.columns[i] << "=" << render_value(row[i]);
  }
  out << "\n";
}

}  // namespace

std::string Engine::export_seed(uint64_t upto_seq) const {
  std::shared_lock lk(mu_);
  if (upto_seq > commit_seq_)
    throw std::invalid_argument("export_seed: seq " + std::to_string(upto_seq) +
                                " is beyond latest " + std::to_string(commit_seq_));
  std::ostringstream out;
  out << "HIHOOI-SEED v1 " << upto_seq << "\n";
  // catalog lines first (with row counts), then all rows; both sorted
  std::map<std::string, std::vector<std::pair<Value, const std::vector<Value>*>>> visible_rows;
  for (const auto& [name, t] : tables_) {
    auto& rows = visible_rows[name];
    for (const auto& [pk, chain] : t.chains) {
      (void)chain;
      const std::vector<Value>* r = visible(t, pk, upto_seq);
      if (r) rows.emplace_back(pk, r);
    }
  }
  for (const auto& [name, t] : tables_) write_catalog_line(out, t.schema, visible_rows[name].size());
  for (const auto& [name, t] : tables_) {
    for (const auto& [pk, r] : visible_rows[name]) write_row_line(out, t.schema, pk, *r);
  }
  return out.str();
}

std::unique_ptr<Engine> Engine::import_seed(const std::string& image) {
  std::istringstream in(image);
  std::string line;
  if (!std::getline(in, line) || line.rfind("HIHOOI-SEED v1 ", 0) != 0)
    throw EngineError(EngineError::Kind::CorruptImage, "bad seed header");

  SchemaCatalog catalog;
  std::map<std::string, size_t> expected;
  std::vector<std::string> row_lines;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("table|", 0) == 0) {
      std::vector<std::string> parts;
      size_t start = 0;
      for (size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == '|') {
          parts.push_back(line.substr(start, i - start));
          start = i + 1;
        }
      }
      if (parts.size() != 5)
        throw EngineError(EngineError::Kind::CorruptImage, "bad catalog line: " + line);
      TableSchema s;
      s.name = parts[1];
      s.pk = parts[2];
      for (const auto& cspec : split_fields(parts[3])) {
        auto colon = cspec.find(':');
        if (colon == std::string::npos)
          throw EngineError(EngineError::Kind::CorruptImage, "bad column spec: " + cspec);
        auto ct = col_type_from(cspec.substr(colon + 1));
        if (!ct) throw EngineError(EngineError::Kind::CorruptImage, "bad column type: " + cspec);
        s.columns.push_back(cspec.substr(0, colon));
        s.types.push_back(*ct);
      }
      try {
        catalog.add_table(s);
      } catch (const ParseError& e) {
        throw EngineError(EngineError::Kind::CorruptImage, e.what());
      }
      expected[s.name] = static_cast<size_t>(std::stoull(parts[4]));
    } else if (line.rfind("row|", 0) == 0) {
      row_lines.push_back(line);
    } else {
      throw EngineError(EngineError::Kind::CorruptImage, "unrecognized line: " + line);
    }
  }

  auto engine = std::make_unique<Engine>(catalog);
  std::map<std::string, size_t> seen;
  for (const auto& rl : row_lines) {
    size_t p1 = rl.find('|', 4);
    if (p1 == std::string::npos)
      throw EngineError(EngineError::Kind::CorruptImage, "bad row line: " + rl);
    std::string tname = rl.substr(4, p1 - 4);
    size_t p2 = rl.find('|', p1 + 1);
    if (p2 == std::string::npos)
      throw EngineError(EngineError::Kind::CorruptImage, "bad row line: " + rl);
    const TableSchema* schema = catalog.find_table(tname);
    if (!schema)
      throw EngineError(EngineError::Kind::CorruptImage, "row for unknown table " + tname);
    std::string fields = rl.substr(p2 + 1);
    std::vector<Value> row(schema->columns.size());
    std::vector<bool> got(schema->columns.size(), false);
    for (const auto& f : split_fields(fields)) {
      auto eq = f.find('=');
      if (eq == std::string::npos)
        throw EngineError(EngineError::Kind::CorruptImage, "bad field: " + f);
      int idx = schema->column_index(f.substr(0, eq));
      if (idx < 0)
        throw EngineError(EngineError::Kind::CorruptImage, "unknown column: " + f);
      row[static_cast<size_t>(idx)] = parse_rendered_value(f.substr(eq + 1));
      got[static_cast<size_t>(idx)] = true;
    }
    for (bool g : got)
      if (!g) throw EngineError(EngineError::Kind::CorruptImage, "incomplete row: " + rl);
    const Value& pk = row[schema->pk_index];
    Table& t = engine->tables_[schema->name];
    if (t.chains.count(pk))
      throw EngineError(EngineError::Kind::CorruptImage,
                        "duplicate row " + render_value(pk) + " in " + schema->name);
    t.chains[pk].push_back(Version{0, false, std::move(row)});
    seen[schema->name]++;
  }
  for (const auto& [name, count] : expected) {
    if (seen[name] != count)
      throw EngineError(EngineError::Kind::CorruptImage,
                        "table " + name + " expects " + std::to_string(count) + " rows, found " +
                            std::to_string(seen[name]));
  }
  return engine;
}

std::string Engine::dump_state() const {
  std::shared_lock lk(mu_);
  std::ostringstream out;
  std::map<std::string, std::vector<std::pair<Value, const std::vector<Value>*>>> visible_rows;
  for (const auto& [name, t] : tables_) {
    auto& rows = visible_rows[name];
    for (const auto& [pk, chain] : t.chains) {
      (void)chain;
      const std::vector<Value>* r = visible(t, pk, commit_seq_);
      if (r) rows.emplace_back(pk, r);
    }
  }
  for (const auto& [name, t] : tables_) write_catalog_line(out, t.schema, visible_rows[name].size());
  for (const auto& [name, t] : tables_) {
    for (const auto& [pk, r] : visible_rows[name]) write_row_line(out, t.schema, pk, *r);
  }
  return out.str();
}

}  // namespace hihooi
