#include "hihooi/statement.hpp"

#include <sstream>

#include "hihooi/errors.hpp"

namespace hihooi {

const char* cmp_text(Cmp c) {
  switch (c) {
    case Cmp::Eq: return "=";
    case Cmp::Lt: return "<";
    case Cmp::Gt: return ">";
    case Cmp::Le: return "<=";
    case Cmp::Ge: return ">=";
    case Cmp::Ne: return "<>";
  }
  return "=";
}

namespace {

// Placeholder-bearing scalars in the order they appear in canonical text:
// SET clauses precede WHERE for UPDATE; INSERT has only its tuple.
template <typename Stmt, typename Fn>
void for_each_scalar(Stmt& stmt, Fn&& fn) {
  for (auto& sc : stmt.set_clauses) fn(sc.value);
  for (auto& v : stmt.values) fn(v);
  for (auto& a : stmt.predicate) fn(a.rhs);
}

std::string render_scalar(const Scalar& s) {
  switch (s.kind) {
    case Scalar::Kind::Lit: return render_value(s.lit);
    case Scalar::Kind::Placeholder: return "?";
    case Scalar::Kind::TimeMacro: return "NOW()";
    case Scalar::Kind::RandMacro: return "RAND()";
  }
  return "?";
}

std::string render_colref(const Statement& stmt, const std::string& table,
                          const std::string& column) {
  if (stmt.target_tables.size() > 1) return table + "." + column;
  return column;
}

std::string render_predicate(const Statement& stmt) {
  std::string out;
  for (size_t i = 0; i < stmt.predicate.size(); ++i) {
    const auto& a = stmt.predicate[i];
    if (i) out += " AND ";
    out += render_colref(stmt, a.table, a.column);
    out += " ";
    out += cmp_text(a.op);
    out += " ";
    out += render_scalar(a.rhs);
  }
  return out;
}

std::string type_keyword(ColType t) {
  switch (t) {
    case ColType::Int: return "INT";
    case ColType::Float: return "FLOAT";
    case ColType::Text: return "TEXT";
  }
  return "INT";
}

}  // namespace

bool Statement::bound() const { return placeholder_count() == 0; }

bool Statement::has_macros() const {
  bool found = false;
  for_each_scalar(*this, [&](const Scalar& s) {
    if (s.kind == Scalar::Kind::TimeMacro || s.kind == Scalar::Kind::RandMacro) found = true;
  });
  return found;
}

size_t Statement::placeholder_count() const {
  size_t n = 0;
  for_each_scalar(*this, [&](const Scalar& s) {
    if (s.kind == Scalar::Kind::Placeholder) ++n;
  });
  return n;
}

Statement Statement::bind(std::span<const Value> vals) const {
  if (vals.size() != placeholder_count())
    throw ParseError(ParseError::Kind::ArityMismatch,
                     "bind expects " + std::to_string(placeholder_count()) + " values, got " +
                         std::to_string(vals.size()));
  Statement out = *this;
  size_t i = 0;
  for_each_scalar(out, [&](Scalar& s) {
    if (s.kind == Scalar::Kind::Placeholder) s = Scalar::literal(vals[i++]);
  });
  out.text = render(out);
  return out;
}

bool Statement::equal_structure(const Statement& o) const {
  return kind == o.kind && target_tables == o.target_tables && projections == o.projections &&
         predicate == o.predicate && set_clauses == o.set_clauses && values == o.values &&
         join_spec == o.join_spec &&
         (create_def.has_value() == o.create_def.has_value()) &&
         (!create_def ||
          (create_def->name == o.create_def->name && create_def->columns == o.create_def->columns &&
           create_def->types == o.create_def->types && create_def->pk == o.create_def->pk));
}

std::string render(const Statement& stmt) {
  std::string out;
  switch (stmt.kind) {
    case StmtKind::Begin: return "BEGIN";
    case StmtKind::Commit: return "COMMIT";
    case StmtKind::Rollback: return "ROLLBACK";
    case StmtKind::SelectRead: {
      out = "SELECT ";
      for (size_t i = 0; i < stmt.projections.size(); ++i) {
        const auto& p = stmt.projections[i];
        if (i) out += ", ";
        switch (p.kind) {
          case Projection::Kind::Star: out += "*"; break;
          case Projection::Kind::Column: out += render_colref(stmt, p.table, p.column); break;
          case Projection::Kind::CountStar: out += "COUNT(*)"; break;
          case Projection::Kind::CountCol:
            out += "COUNT(" + render_colref(stmt, p.table, p.column) + ")";
            break;
          case Projection::Kind::SumCol:
            out += "SUM(" + render_colref(stmt, p.table, p.column) + ")";
            break;
        }
      }
      out += " FROM " + stmt.target_tables[0];
      if (stmt.join_spec) {
        out += " JOIN " + stmt.target_tables[1] + " ON ";
        out += stmt.join_spec->left_table + "." + stmt.join_spec->left_column;
        out += " = ";
        out += stmt.join_spec->right_table + "." + stmt.join_spec->right_column;
      }
      if (!stmt.predicate.empty()) out += " WHERE " + render_predicate(stmt);
      return out;
    }
    case StmtKind::Insert: {
      out = "INSERT INTO " + stmt.target_tables[0] + " VALUES (";
      for (size_t i = 0; i < stmt.values.size(); ++i) {
        if (i) out += ", ";
        out += render_scalar(stmt.values[i]);
      }
      out += ")";
      return out;
    }
    case StmtKind::Update: {
      out = "UPDATE " + stmt.target_tables[0] + " SET ";
      for (size_t i = 0; i < stmt.set_clauses.size(); ++i) {
        if (i) out += ", ";
        out += stmt.set_clauses[i].column + " = " + render_scalar(stmt.set_clauses[i].value);
      }
      if (!stmt.predicate.empty()) out += " WHERE " + render_predicate(stmt);
      return out;
    }
    case StmtKind::Delete: {
      out = "DELETE FROM " + stmt.target_tables[0];
      if (!stmt.predicate.empty()) out += " WHERE " + render_predicate(stmt);
      return out;
    }
    case StmtKind::CreateTable: {
      const auto& def = *stmt.create_def;
      out = "CREATE TABLE " + def.name + " (";
      for (size_t i = 0; i < def.columns.size(); ++i) {
        if (i) out += ", ";
        out += def.columns[i] + " " + type_keyword(def.types[i]);
        if (i == def.pk_index) out += " PRIMARY KEY";
      }
      out += ")";
      return out;
    }
  }
  return out;
}

}  // namespace hihooi
