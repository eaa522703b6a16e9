#include "hihooi/parser.hpp"

#include <cctype>
#include <charconv>

#include "hihooi/errors.hpp"

namespace hihooi {

namespace {

struct Token {
  enum class Type { Ident, Int, Float, String, Sym, End };
  Type type = Type::End;
  std::string text;   // idents uppercased lazily via match(); symbols verbatim
  Value lit;
};

class Lexer {
 public:
  explicit Lexer(const std::string& s) : s_(s) { advance(); }

  const Token& cur() const { return cur_; }

  void advance() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    cur_ = Token{};
    if (pos_ >= s_.size()) return;
    char c = s_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
        ++pos_;
      cur_.type = Token::Type::Ident;
      cur_.text = s_.substr(start, pos_ - start);
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && pos_ + 1 < s_.size() &&
         std::isdigit(static_cast<unsigned char>(s_[pos_ + 1])))) {
      size_t start = pos_;
      if (c == '-') ++pos_;
      bool is_float = false;
      while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) ||
                                  s_[pos_] == '.' || s_[pos_] == 'e' || s_[pos_] == 'E' ||
                                  ((s_[pos_] == '+' || s_[pos_] == '-') && pos_ > start &&
                                   (s_[pos_ - 1] == 'e' || s_[pos_ - 1] == 'E')))) {
        if (s_[pos_] == '.' || s_[pos_] == 'e' || s_[pos_] == 'E') is_float = true;
        ++pos_;
      }
      std::string num = s_.substr(start, pos_ - start);
      if (is_float) {
        cur_.type = Token::Type::Float;
        cur_.lit = Value{std::stod(num)};
      } else {
        int64_t v = 0;
        auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), v);
        if (ec != std::errc{})
          throw ParseError(ParseError::Kind::SyntaxError, "bad integer literal " + num);
        cur_.type = Token::Type::Int;
        cur_.lit = Value{v};
      }
      cur_.text = num;
      return;
    }
    if (c == '\'') {
      ++pos_;
      std::string out;
      while (true) {
        if (pos_ >= s_.size())
          throw ParseError(ParseError::Kind::SyntaxError, "unterminated string literal");
        if (s_[pos_] == '\'') {
          if (pos_ + 1 < s_.size() && s_[pos_ + 1] == '\'') {
            out += '\'';
            pos_ += 2;
            continue;
          }
          ++pos_;
          break;
        }
        out += s_[pos_++];
      }
      cur_.type = Token::Type::String;
      cur_.lit = Value{out};
      cur_.text = out;
      return;
    }
    // multi-char comparators first
    if (c == '<' && pos_ + 1 < s_.size() && (s_[pos_ + 1] == '=' || s_[pos_ + 1] == '>')) {
      cur_.type = Token::Type::Sym;
      cur_.text = s_.substr(pos_, 2);
      pos_ += 2;
      return;
    }
    if (c == '>' && pos_ + 1 < s_.size() && s_[pos_ + 1] == '=') {
      cur_.type = Token::Type::Sym;
      cur_.text = ">=";
      pos_ += 2;
      return;
    }
    cur_.type = Token::Type::Sym;
    cur_.text = std::string(1, c);
    ++pos_;
  }

 private:
  const std::string& s_;
  size_t pos_ = 0;
  Token cur_;
};

std::string upper(const std::string& s) {
  std::string out;
  for (char c : s) out += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

class Parser {
 public:
  Parser(const std::string& sql, const SchemaCatalog& catalog) : lex_(sql), catalog_(catalog) {
    stmt_.text = sql;
  }

  Statement parse() {
    if (is_kw("SELECT")) parse_select();
    else if (is_kw("INSERT")) parse_insert();
    else if (is_kw("UPDATE")) parse_update();
    else if (is_kw("DELETE")) parse_delete();
    else if (is_kw("CREATE")) parse_create();
    else if (is_kw("BEGIN")) { next(); stmt_.kind = StmtKind::Begin; }
    else if (is_kw("COMMIT")) { next(); stmt_.kind = StmtKind::Commit; }
    else if (is_kw("ROLLBACK")) { next(); stmt_.kind = StmtKind::Rollback; }
    else throw err("expected a statement keyword");
    if (cur().type == Token::Type::Sym && cur().text == ";") next();
    if (cur().type != Token::Type::End) throw err("trailing input after statement");
    return std::move(stmt_);
  }

 private:
  const Token& cur() const { return lex_.cur(); }
  void next() { lex_.advance(); }

  bool is_kw(const char* kw) const {
    return cur().type == Token::Type::Ident && upper(cur().text) == kw;
  }
  void expect_kw(const char* kw) {
    if (!is_kw(kw)) throw err(std::string("expected ") + kw);
    next();
  }
  bool is_sym(const char* s) const {
    return cur().type == Token::Type::Sym && cur().text == s;
  }
  void expect_sym(const char* s) {
    if (!is_sym(s)) throw err(std::string("expected '") + s + "'");
    next();
  }
  ParseError err(const std::string& msg) const {
    return ParseError(ParseError::Kind::SyntaxError, msg + " near '" + cur().text + "'");
  }

  std::string parse_table_name() {
    if (cur().type != Token::Type::Ident) throw err("expected table name");
    std::string raw = cur().text;
    next();
    const TableSchema* t = catalog_.find_table(raw);
    if (!t) throw ParseError(ParseError::Kind::UnknownTable, "unknown table " + raw);
    return t->name;
  }

  // Returns (canonical table, canonical column); resolves bare names against
  // the statement's target tables and rejects ambiguity.
  std::pair<std::string, std::string> parse_colref() {
    if (cur().type != Token::Type::Ident) throw err("expected column reference");
    std::string first = cur().text;
    next();
    if (is_sym(".")) {
      next();
      if (cur().type != Token::Type::Ident) throw err("expected column after '.'");
      std::string colname = cur().text;
      next();
      const TableSchema* t = catalog_.find_table(first);
      if (!t) throw ParseError(ParseError::Kind::UnknownTable, "unknown table " + first);
      bool targeted = false;
      for (const auto& tt : stmt_.target_tables) targeted |= (tt == t->name);
      if (!targeted)
        throw ParseError(ParseError::Kind::UnknownColumn,
                         first + "." + colname + " does not reference a target table");
      int idx = t->column_index(colname);
      if (idx < 0)
        throw ParseError(ParseError::Kind::UnknownColumn,
                         "unknown column " + colname + " in " + t->name);
      return {t->name, t->columns[static_cast<size_t>(idx)]};
    }
    const TableSchema* owner = nullptr;
    int idx = -1;
    for (const auto& tt : stmt_.target_tables) {
      const TableSchema& t = catalog_.table(tt);
      int i = t.column_index(first);
      if (i >= 0) {
        if (owner) throw err("ambiguous column " + first);
        owner = &t;
        idx = i;
      }
    }
    if (!owner)
      throw ParseError(ParseError::Kind::UnknownColumn, "unknown column " + first);
    return {owner->name, owner->columns[static_cast<size_t>(idx)]};
  }

  Scalar parse_scalar() {
    if (cur().type == Token::Type::Int || cur().type == Token::Type::Float ||
        cur().type == Token::Type::String) {
      Scalar s = Scalar::literal(cur().lit);
      next();
      return s;
    }
    if (is_sym("?")) {
      next();
      return Scalar{Scalar::Kind::Placeholder, {}};
    }
    if (is_kw("NULL")) {
      next();
      return Scalar::literal(Value{});
    }
    if (is_kw("NOW")) {
      next();
      expect_sym("(");
      expect_sym(")");
      return Scalar{Scalar::Kind::TimeMacro, {}};
    }
    if (is_kw("CURRENT_TIMESTAMP")) {
      next();
      return Scalar{Scalar::Kind::TimeMacro, {}};
    }
    if (is_kw("RAND")) {
      next();
      expect_sym("(");
      expect_sym(")");
      return Scalar{Scalar::Kind::RandMacro, {}};
    }
    if (is_kw("SELECT")) throw err("subqueries are not supported");
    throw err("expected a literal, '?', or macro");
  }

  Cmp parse_cmp() {
    static const std::pair<const char*, Cmp> table[] = {
        {"=", Cmp::Eq},  {"<=", Cmp::Le}, {">=", Cmp::Ge},
        {"<>", Cmp::Ne}, {"<", Cmp::Lt},  {">", Cmp::Gt},
    };
    for (const auto& [sym, op] : table) {
      if (is_sym(sym)) {
        next();
        return op;
      }
    }
    throw err("expected comparator");
  }

  void parse_where() {
    if (!is_kw("WHERE")) return;
    next();
    while (true) {
      if (is_kw("NOT") || is_sym("("))
        throw err("only top-level conjunctions of comparisons are supported");
      auto [table, column] = parse_colref();
      Cmp op = parse_cmp();
      Scalar rhs = parse_scalar();
      stmt_.predicate.push_back(PredAtom{table, column, op, rhs});
      if (is_kw("AND")) {
        next();
        continue;
      }
      if (is_kw("OR")) throw err("OR is not supported in predicates");
      break;
    }
  }

  void parse_select() {
    next();
    stmt_.kind = StmtKind::SelectRead;
    // projection list is parsed before FROM, so collect raw items first
    struct RawProj {
      Projection::Kind kind;
      std::string first, second;  // colref pieces, unresolved
      bool qualified = false;
    };
    std::vector<RawProj> raw;
    bool star = false;
    if (is_sym("*")) {
      next();
      star = true;
    } else {
      while (true) {
        RawProj rp;
        if (is_kw("COUNT")) {
          next();
          expect_sym("(");
          if (is_sym("*")) {
            next();
            rp.kind = Projection::Kind::CountStar;
          } else {
            rp.kind = Projection::Kind::CountCol;
            read_raw_colref(rp);
          }
          expect_sym(")");
        } else if (is_kw("SUM")) {
          next();
          expect_sym("(");
          rp.kind = Projection::Kind::SumCol;
          read_raw_colref(rp);
          expect_sym(")");
        } else {
          rp.kind = Projection::Kind::Column;
          read_raw_colref(rp);
        }
        raw.push_back(rp);
        if (is_sym(",")) {
          next();
          continue;
        }
        break;
      }
      bool has_agg = false, has_plain = false;
      for (const auto& rp : raw) {
        if (rp.kind == Projection::Kind::Column) has_plain = true;
        else has_agg = true;
      }
      if (has_agg && has_plain)
        throw err("aggregates cannot be mixed with plain columns (no GROUP BY)");
    }
    expect_kw("FROM");
    stmt_.target_tables.push_back(parse_table_name());
    if (is_kw("JOIN")) {
      next();
      stmt_.target_tables.push_back(parse_table_name());
      expect_kw("ON");
      auto [lt, lc] = parse_colref();
      expect_sym("=");
      auto [rt, rc] = parse_colref();
      if (lt == rt) throw err("join condition must relate the two tables");
      stmt_.join_spec = JoinSpec{lt, lc, rt, rc};
    }
    if (star) {
      stmt_.projections.push_back(Projection{Projection::Kind::Star, "", ""});
    } else {
      for (const auto& rp : raw) {
        Projection p;
        p.kind = rp.kind;
        if (rp.kind != Projection::Kind::CountStar) {
          auto [t, c] = resolve_raw(rp);
          p.table = t;
          p.column = c;
        }
        stmt_.projections.push_back(p);
      }
    }
    parse_where();
  }

  struct RawRef {
    std::string first, second;
    bool qualified = false;
  };

  template <typename RP>
  void read_raw_colref(RP& rp) {
    if (cur().type != Token::Type::Ident) throw err("expected column reference");
    rp.first = cur().text;
    next();
    if (is_sym(".")) {
      next();
      if (cur().type != Token::Type::Ident) throw err("expected column after '.'");
      rp.second = cur().text;
      rp.qualified = true;
      next();
    }
  }

  template <typename RP>
  std::pair<std::string, std::string> resolve_raw(const RP& rp) {
    if (rp.qualified) {
      const TableSchema* t = catalog_.find_table(rp.first);
      if (!t) throw ParseError(ParseError::Kind::UnknownTable, "unknown table " + rp.first);
      bool targeted = false;
      for (const auto& tt : stmt_.target_tables) targeted |= (tt == t->name);
      if (!targeted)
        throw ParseError(ParseError::Kind::UnknownColumn,
                         rp.first + "." + rp.second + " does not reference a target table");
      int idx = t->column_index(rp.second);
      if (idx < 0)
        throw ParseError(ParseError::Kind::UnknownColumn,
                         "unknown column " + rp.second + " in " + t->name);
      return {t->name, t->columns[static_cast<size_t>(idx)]};
    }
    const TableSchema* owner = nullptr;
    int idx = -1;
    for (const auto& tt : stmt_.target_tables) {
      const TableSchema& t = catalog_.table(tt);
      int i = t.column_index(rp.first);
      if (i >= 0) {
        if (owner) throw err("ambiguous column " + rp.first);
        owner = &t;
        idx = i;
      }
    }
    if (!owner) throw ParseError(ParseError::Kind::UnknownColumn, "unknown column " + rp.first);
    return {owner->name, owner->columns[static_cast<size_t>(idx)]};
  }

  void parse_insert() {
    next();
    stmt_.kind = StmtKind::Insert;
    expect_kw("INTO");
    std::string table = parse_table_name();
    stmt_.target_tables.push_back(table);
    expect_kw("VALUES");
    expect_sym("(");
    while (true) {
      stmt_.values.push_back(parse_scalar());
      if (is_sym(",")) {
        next();
        continue;
      }
      break;
    }
    expect_sym(")");
    const TableSchema& t = catalog_.table(table);
    if (stmt_.values.size() != t.columns.size())
      throw ParseError(ParseError::Kind::ArityMismatch,
                       "INSERT into " + table + " expects " + std::to_string(t.columns.size()) +
                           " values, got " + std::to_string(stmt_.values.size()));
  }

  void parse_update() {
    next();
    stmt_.kind = StmtKind::Update;
    std::string table = parse_table_name();
    stmt_.target_tables.push_back(table);
    expect_kw("SET");
    const TableSchema& t = catalog_.table(table);
    while (true) {
      auto [tt, col] = parse_colref();
      (void)tt;
      if (col == t.pk) throw err("updating the primary key column is not supported");
      expect_sym("=");
      stmt_.set_clauses.push_back(SetClause{col, parse_scalar()});
      if (is_sym(",")) {
        next();
        continue;
      }
      break;
    }
    parse_where();
  }

  void parse_delete() {
    next();
    stmt_.kind = StmtKind::Delete;
    expect_kw("FROM");
    stmt_.target_tables.push_back(parse_table_name());
    parse_where();
  }

  void parse_create() {
    next();
    stmt_.kind = StmtKind::CreateTable;
    expect_kw("TABLE");
    if (cur().type != Token::Type::Ident) throw err("expected table name");
    TableSchema def;
    def.name = cur().text;
    next();
    expect_sym("(");
    std::optional<size_t> pk;
    while (true) {
      if (cur().type != Token::Type::Ident) throw err("expected column name");
      std::string col = cur().text;
      next();
      if (cur().type != Token::Type::Ident) throw err("expected column type");
      auto ct = col_type_from(cur().text);
      if (!ct) throw err("unknown column type " + cur().text);
      next();
      def.columns.push_back(col);
      def.types.push_back(*ct);
      if (is_kw("PRIMARY")) {
        next();
        expect_kw("KEY");
        if (pk) throw err("multiple PRIMARY KEY markers");
        pk = def.columns.size() - 1;
      }
      if (is_sym(",")) {
        next();
        continue;
      }
      break;
    }
    expect_sym(")");
    if (!pk) throw err("CREATE TABLE requires a PRIMARY KEY column");
    def.pk_index = *pk;
    def.pk = def.columns[*pk];
    stmt_.target_tables.push_back(def.name);
    stmt_.create_def = std::move(def);
  }

  Lexer lex_;
  const SchemaCatalog& catalog_;
  Statement stmt_;
};

}  // namespace

Statement parse(const std::string& sql, const SchemaCatalog& catalog) {
  return Parser(sql, catalog).parse();
}

double rand_macro_draw(std::mt19937_64& rng) {
  // 53-bit mantissa draw in [0,1); fully specified, unlike the
  // distribution adapters in <random>
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Statement rewrite_nondeterministic(const Statement& stmt, const ClockFn& clock,
                                   std::mt19937_64& rng) {
  if (!stmt.has_macros()) return stmt;
  Statement out = stmt;
  auto rewrite = [&](Scalar& s) {
    if (s.kind == Scalar::Kind::TimeMacro) s = Scalar::literal(Value{clock()});
    else if (s.kind == Scalar::Kind::RandMacro) s = Scalar::literal(Value{rand_macro_draw(rng)});
  };
  for (auto& sc : out.set_clauses) rewrite(sc.value);
  for (auto& v : out.values) rewrite(v);
  for (auto& a : out.predicate) rewrite(a.rhs);
  out.text = render(out);
  return out;
}

}  // namespace hihooi
