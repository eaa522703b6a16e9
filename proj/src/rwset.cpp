#include "hihooi/rwset.hpp"

#include <sstream>

#include "hihooi/errors.hpp"

namespace hihooi {

const char* affecting_class_name(AffectingClass c) {
  switch (c) {
    case AffectingClass::RAS: return "RAS";
    case AffectingClass::CAS: return "CAS";
    case AffectingClass::TAS: return "TAS";
  }
  return "TAS";
}

bool ColSet::intersects(const ColSet& o) const {
  if (empty() || o.empty()) return false;
  if (star > 0 || o.star > 0) return true;
  const auto* small = &cols;
  const auto* big = &o.cols;
  if (small->size() > big->size()) std::swap(small, big);
  for (const auto& [k, n] : *small) {
    (void)n;
    if (big->count(k)) return true;
  }
  return false;
}

void ColSet::add(const std::string& col, int n) { cols[col] += n; }

void ColSet::merge(const ColSet& o) {
  star += o.star;
  for (const auto& [k, n] : o.cols) cols[k] += n;
}

bool RowSet::intersects(const RowSet& o) const {
  if (empty() || o.empty()) return false;
  const auto* small = &rows;
  const auto* big = &o.rows;
  if (small->size() > big->size()) std::swap(small, big);
  for (const auto& [k, n] : *small) {
    (void)n;
    if (big->count(k)) return true;
  }
  return false;
}

void RowSet::add(const Value& pk, int n) { rows[pk] += n; }

void RowSet::merge(const RowSet& o) {
  for (const auto& [k, n] : o.rows) rows[k] += n;
}

AffectingClass RWSet::TableEntry::cls() const {
  if (cls_cnt[2] > 0) return AffectingClass::TAS;
  if (cls_cnt[0] > 0 && cls_cnt[1] > 0) return AffectingClass::TAS;
  if (cls_cnt[0] > 0) return AffectingClass::RAS;
  if (cls_cnt[1] > 0) return AffectingClass::CAS;
  return AffectingClass::TAS;
}

const RWSet::TableEntry* RWSet::find(const std::string& table) const {
  auto it = tables_.find(table);
  return it == tables_.end() ? nullptr : &it->second;
}

namespace {

void require_bound(const Statement& stmt) {
  if (!stmt.bound())
    throw RWSetError(RWSetError::Kind::UnboundPlaceholder,
                     "cannot extract read/write sets from an unbound statement: " + stmt.text);
}

// PK-equality conjuncts with literal right-hand sides produce row entries.
void add_row_keys(const Statement& stmt, const TableSchema& schema, RowSet& rows) {
  for (const auto& a : stmt.predicate) {
    if (a.table != schema.name || a.op != Cmp::Eq) continue;
    if (a.column != schema.pk) continue;
    if (a.rhs.kind != Scalar::Kind::Lit) continue;
    rows.add(a.rhs.lit);
  }
}

void add_predicate_cols(const Statement& stmt, const std::string& table, ColSet& cols) {
  for (const auto& a : stmt.predicate) {
    if (a.table == table) cols.add(a.column);
  }
}

void classify(RWSet::TableEntry& e) {
  AffectingClass c;
  if (!e.row_read.empty() || !e.row_write.empty()) c = AffectingClass::RAS;
  else if (e.col_read.star > 0 || e.col_write.star > 0) c = AffectingClass::TAS;
  else c = AffectingClass::CAS;
  e.cls_cnt[static_cast<int>(c)] = 1;
}

void degrade(RWSet::TableEntry& e, Granularity g) {
  if (g == Granularity::All) return;
  e.row_read = RowSet{};
  e.row_write = RowSet{};
  if (g == Granularity::TasOnly) {
    e.col_read = ColSet{};
    e.col_write = ColSet{};
    if (e.read_cnt > 0) e.col_read.star = 1;
    if (e.write_cnt > 0) e.col_write.star = 1;
    e.cls_cnt[0] = e.cls_cnt[1] = 0;
    e.cls_cnt[2] = 1;
    return;
  }
  // TasCas: star access stays TAS, everything else becomes CAS
  e.cls_cnt[0] = e.cls_cnt[1] = e.cls_cnt[2] = 0;
  if (e.col_read.star > 0 || e.col_write.star > 0) e.cls_cnt[2] = 1;
  else e.cls_cnt[1] = 1;
}

}  // namespace

RWSet RWSet::extract(const Statement& stmt, const SchemaCatalog& catalog, Granularity g) {
  RWSet out;
  if (stmt.kind == StmtKind::Begin || stmt.kind == StmtKind::Commit ||
      stmt.kind == StmtKind::Rollback)
    return out;
  require_bound(stmt);

  switch (stmt.kind) {
    case StmtKind::SelectRead: {
      for (const auto& tname : stmt.target_tables) {
        const TableSchema& schema = catalog.table(tname);
        TableEntry e;
        e.read_cnt = 1;
        for (const auto& p : stmt.projections) {
          switch (p.kind) {
            case Projection::Kind::Star:
            case Projection::Kind::CountStar:
              e.col_read.star = 1;
              break;
            case Projection::Kind::Column:
            case Projection::Kind::CountCol:
            case Projection::Kind::SumCol:
              if (p.table == tname) e.col_read.add(p.column);
              break;
          }
        }
        if (stmt.join_spec) {
          if (stmt.join_spec->left_table == tname) e.col_read.add(stmt.join_spec->left_column);
          if (stmt.join_spec->right_table == tname) e.col_read.add(stmt.join_spec->right_column);
        }
        add_predicate_cols(stmt, tname, e.col_read);
        add_row_keys(stmt, schema, e.row_read);
        classify(e);
        degrade(e, g);
        out.tables_.emplace(tname, std::move(e));
      }
      break;
    }
    case StmtKind::Insert: {
      const TableSchema& schema = catalog.table(stmt.target_tables[0]);
      TableEntry e;
      e.write_cnt = 1;
      e.col_write.star = 1;
      const Scalar& pk = stmt.values[schema.pk_index];
      if (pk.kind == Scalar::Kind::Lit && !is_null(pk.lit)) e.row_write.add(pk.lit);
      classify(e);
      degrade(e, g);
      out.tables_.emplace(schema.name, std::move(e));
      break;
    }
    case StmtKind::Delete: {
      const TableSchema& schema = catalog.table(stmt.target_tables[0]);
      TableEntry e;
      e.write_cnt = 1;
      e.read_cnt = 1;
      e.col_write.star = 1;
      if (stmt.predicate.empty()) e.col_read.star = 1;
      else add_predicate_cols(stmt, schema.name, e.col_read);
      add_row_keys(stmt, schema, e.row_read);
      e.row_write = e.row_read;
      classify(e);
      degrade(e, g);
      out.tables_.emplace(schema.name, std::move(e));
      break;
    }
    case StmtKind::Update: {
      const TableSchema& schema = catalog.table(stmt.target_tables[0]);
      TableEntry e;
      e.write_cnt = 1;
      e.read_cnt = 1;
      for (const auto& sc : stmt.set_clauses) e.col_write.add(sc.column);
      if (stmt.predicate.empty()) e.col_read.star = 1;
      else add_predicate_cols(stmt, schema.name, e.col_read);
      add_row_keys(stmt, schema, e.row_read);
      e.row_write = e.row_read;
      classify(e);
      degrade(e, g);
      out.tables_.emplace(schema.name, std::move(e));
      break;
    }
    case StmtKind::CreateTable: {
      TableEntry e;
      e.write_cnt = 1;
      e.col_write.star = 1;
      classify(e);
      degrade(e, g);
      out.tables_.emplace(stmt.create_def->name, std::move(e));
      break;
    }
    default:
      break;
  }
  return out;
}

void RWSet::merge(const RWSet& other) {
  for (const auto& [name, oe] : other.tables_) {
    TableEntry& e = tables_[name];
    e.read_cnt += oe.read_cnt;
    e.write_cnt += oe.write_cnt;
    e.col_read.merge(oe.col_read);
    e.col_write.merge(oe.col_write);
    e.row_read.merge(oe.row_read);
    e.row_write.merge(oe.row_write);
    for (int i = 0; i < 3; ++i) e.cls_cnt[i] += oe.cls_cnt[i];
  }
}

namespace {

void check_counts(const std::map<std::string, int>& have, const std::map<std::string, int>& sub,
                  const std::string& what) {
  for (const auto& [k, n] : sub) {
    auto it = have.find(k);
    if (it == have.end() || it->second < n)
      throw RWSetError(RWSetError::Kind::UnderflowViolation, "removing unknown " + what + " " + k);
  }
}

void check_counts(const std::map<Value, int, ValueLess>& have,
                  const std::map<Value, int, ValueLess>& sub, const std::string& what) {
  for (const auto& [k, n] : sub) {
    auto it = have.find(k);
    if (it == have.end() || it->second < n)
      throw RWSetError(RWSetError::Kind::UnderflowViolation,
                       "removing unknown " + what + " " + render_value(k));
  }
}

template <typename M>
void subtract(M& have, const M& sub) {
  for (const auto& [k, n] : sub) {
    auto it = have.find(k);
    it->second -= n;
    if (it->second == 0) have.erase(it);
  }
}

}  // namespace

void RWSet::remove(const RWSet& other) {
  // validate everything before mutating so a violation leaves *this intact
  for (const auto& [name, oe] : other.tables_) {
    auto it = tables_.find(name);
    if (it == tables_.end())
      throw RWSetError(RWSetError::Kind::UnderflowViolation, "removing unknown table " + name);
    const TableEntry& e = it->second;
    if (e.read_cnt < oe.read_cnt || e.write_cnt < oe.write_cnt ||
        e.col_read.star < oe.col_read.star || e.col_write.star < oe.col_write.star)
      throw RWSetError(RWSetError::Kind::UnderflowViolation, "counter underflow on " + name);
    for (int i = 0; i < 3; ++i)
      if (e.cls_cnt[i] < oe.cls_cnt[i])
        throw RWSetError(RWSetError::Kind::UnderflowViolation, "class underflow on " + name);
    check_counts(e.col_read.cols, oe.col_read.cols, "read column");
    check_counts(e.col_write.cols, oe.col_write.cols, "written column");
    check_counts(e.row_read.rows, oe.row_read.rows, "read row");
    check_counts(e.row_write.rows, oe.row_write.rows, "written row");
  }
  for (const auto& [name, oe] : other.tables_) {
    TableEntry& e = tables_[name];
    e.read_cnt -= oe.read_cnt;
    e.write_cnt -= oe.write_cnt;
    e.col_read.star -= oe.col_read.star;
    e.col_write.star -= oe.col_write.star;
    for (int i = 0; i < 3; ++i) e.cls_cnt[i] -= oe.cls_cnt[i];
    subtract(e.col_read.cols, oe.col_read.cols);
    subtract(e.col_write.cols, oe.col_write.cols);
    subtract(e.row_read.rows, oe.row_read.rows);
    subtract(e.row_write.rows, oe.row_write.rows);
    if (e.read_cnt == 0 && e.write_cnt == 0) tables_.erase(name);
  }
}

bool are_independent(const RWSet& a, const RWSet& b) {
  // fast path: write tables of one side never meet the other's tables
  bool disjoint = true;
  for (const auto& [name, e] : a.tables_) {
    const RWSet::TableEntry* o = b.find(name);
    if (!o) continue;
    if (e.in_write() || o->in_write()) {
      disjoint = false;
      break;
    }
  }
  if (disjoint) return true;

  for (const auto& [name, e] : a.tables_) {
    const RWSet::TableEntry* o = b.find(name);
    if (!o) continue;
    bool independent = false;
    AffectingClass ca = e.cls(), cb = o->cls();
    if (ca == AffectingClass::CAS && cb == AffectingClass::CAS) {
      bool w_rw = e.col_write.intersects(o->col_read) || e.col_write.intersects(o->col_write);
      bool rw_w = e.col_read.intersects(o->col_write) || e.col_write.intersects(o->col_write);
      independent = !w_rw && !rw_w;
    } else if (ca == AffectingClass::RAS && cb == AffectingClass::RAS) {
      bool w_rw = e.row_write.intersects(o->row_read) || e.row_write.intersects(o->row_write);
      bool rw_w = e.row_read.intersects(o->row_write) || e.row_write.intersects(o->row_write);
      independent = !w_rw && !rw_w;
    }
    if (!independent) return false;
  }
  return true;
}

std::string RWSet::dump() const {
  std::ostringstream out;
  for (const auto& [name, e] : tables_) {
    out << name << "|cls|" << affecting_class_name(e.cls()) << "|1\n";
    static const char* kMixNames[3] = {"RAS", "CAS", "TAS"};
    for (int i = 0; i < 3; ++i) {
      if (e.cls_cnt[i] > 0) out << name << "|mix|" << kMixNames[i] << "|" << e.cls_cnt[i] << "\n";
    }
    if (e.read_cnt > 0) out << name << "|tr|-|" << e.read_cnt << "\n";
    if (e.write_cnt > 0) out << name << "|tw|-|" << e.write_cnt << "\n";
    if (e.col_read.star > 0) out << name << "|sr|*|" << e.col_read.star << "\n";
    for (const auto& [c, n] : e.col_read.cols) out << name << "|cr|" << c << "|" << n << "\n";
    if (e.col_write.star > 0) out << name << "|sw|*|" << e.col_write.star << "\n";
    for (const auto& [c, n] : e.col_write.cols) out << name << "|cw|" << c << "|" << n << "\n";
    for (const auto& [r, n] : e.row_read.rows)
      out << name << "|rr|" << render_value(r) << "|" << n << "\n";
    for (const auto& [r, n] : e.row_write.rows)
      out << name << "|rw|" << render_value(r) << "|" << n << "\n";
  }
  return out.str();
}

}  // namespace hihooi
