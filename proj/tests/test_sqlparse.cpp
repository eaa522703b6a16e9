#include <gtest/gtest.h>

#include "hihooi/errors.hpp"
#include "hihooi/parser.hpp"

using namespace hihooi;

namespace {

SchemaCatalog rs_catalog() {
  SchemaCatalog cat;
  cat.add_table(TableSchema{"R", {"A1", "A2", "A3", "A4"},
                            {ColType::Int, ColType::Int, ColType::Int, ColType::Int}, "A1", 0});
  cat.add_table(TableSchema{"S", {"B1", "B2", "B3", "B4", "B5"},
                            {ColType::Int, ColType::Int, ColType::Int, ColType::Int, ColType::Int},
                            "B1", 0});
  return cat;
}

TEST(Parse, UpdateWithSetAndKeyPredicate) {
  auto cat = rs_catalog();
  Statement st = parse("UPDATE R SET A2 = 7, A3 = 8 WHERE A1 = 100", cat);
  EXPECT_EQ(st.kind, StmtKind::Update);
  ASSERT_EQ(st.target_tables.size(), 1u);
  EXPECT_EQ(st.target_tables[0], "R");
  ASSERT_EQ(st.set_clauses.size(), 2u);
  EXPECT_EQ(st.set_clauses[0].column, "A2");
  EXPECT_EQ(st.set_clauses[0].value, Scalar::literal(Value{int64_t{7}}));
  EXPECT_EQ(st.set_clauses[1].column, "A3");
  ASSERT_EQ(st.predicate.size(), 1u);
  EXPECT_EQ(st.predicate[0].column, "A1");
  EXPECT_EQ(st.predicate[0].op, Cmp::Eq);
  EXPECT_EQ(st.predicate[0].rhs, Scalar::literal(Value{int64_t{100}}));
}

TEST(Parse, SelectStarKeepsStarMarker) {
  auto cat = rs_catalog();
  Statement st = parse("SELECT * FROM R", cat);
  EXPECT_EQ(st.kind, StmtKind::SelectRead);
  ASSERT_EQ(st.projections.size(), 1u);
  EXPECT_EQ(st.projections[0].kind, Projection::Kind::Star);
  EXPECT_TRUE(st.predicate.empty());
}

TEST(Parse, JoinResolvesQualifiedColumns) {
  auto cat = rs_catalog();
  Statement st = parse("SELECT A1, B2, B3 FROM R JOIN S ON A1 = B2", cat);
  EXPECT_EQ(st.kind, StmtKind::SelectRead);
  ASSERT_EQ(st.target_tables.size(), 2u);
  EXPECT_EQ(st.target_tables[0], "R");
  EXPECT_EQ(st.target_tables[1], "S");
  ASSERT_TRUE(st.join_spec.has_value());
  EXPECT_EQ(st.join_spec->left_table, "R");
  EXPECT_EQ(st.join_spec->left_column, "A1");
  EXPECT_EQ(st.join_spec->right_table, "S");
  EXPECT_EQ(st.join_spec->right_column, "B2");
  ASSERT_EQ(st.projections.size(), 3u);
  EXPECT_EQ(st.projections[0].table, "R");
  EXPECT_EQ(st.projections[1].table, "S");
}

TEST(Parse, PlaceholdersAndBinding) {
  auto cat = rs_catalog();
  Statement st = parse("UPDATE S SET B2 = ? WHERE B5 > ?", cat);
  EXPECT_FALSE(st.bound());
  EXPECT_EQ(st.placeholder_count(), 2u);
  std::vector<Value> vals{Value{int64_t{3}}, Value{int64_t{50}}};
  Statement bound = st.bind(vals);
  EXPECT_TRUE(bound.bound());
  EXPECT_EQ(bound.set_clauses[0].value, Scalar::literal(Value{int64_t{3}}));
  EXPECT_EQ(bound.predicate[0].rhs, Scalar::literal(Value{int64_t{50}}));
  EXPECT_THROW(st.bind(std::vector<Value>{Value{int64_t{1}}}), ParseError);
}

TEST(Parse, Errors) {
  auto cat = rs_catalog();
  EXPECT_THROW(parse("SELECT A1 FROM R WHERE A1 = 1 OR A2 = 2", cat), ParseError);
  EXPECT_THROW(parse("SELECT A1 FROM NOPE", cat), ParseError);
  EXPECT_THROW(parse("SELECT ZZ FROM R", cat), ParseError);
  EXPECT_THROW(parse("INSERT INTO R VALUES (1, 2)", cat), ParseError);
  EXPECT_THROW(parse("SELECT A1 FROM R WHERE A1 = (SELECT A1 FROM R)", cat), ParseError);
  EXPECT_THROW(parse("UPDATE R SET A1 = 5 WHERE A2 = 1", cat), ParseError);  // pk assignment
  try {
    parse("INSERT INTO R VALUES (1, 2)", cat);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.kind, ParseError::Kind::ArityMismatch);
  }
  try {
    parse("SELECT A1 FROM NOPE", cat);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.kind, ParseError::Kind::UnknownTable);
  }
}

TEST(Parse, CreateTable) {
  SchemaCatalog cat;
  Statement st = parse("CREATE TABLE R (A1 INT PRIMARY KEY, A2 INT, A3 TEXT)", cat);
  EXPECT_EQ(st.kind, StmtKind::CreateTable);
  ASSERT_TRUE(st.create_def.has_value());
  EXPECT_EQ(st.create_def->name, "R");
  EXPECT_EQ(st.create_def->pk, "A1");
  EXPECT_EQ(st.create_def->columns.size(), 3u);
  EXPECT_THROW(parse("CREATE TABLE X (A INT, B INT)", cat), ParseError);  // no pk
}

TEST(Parse, CaseInsensitiveResolution) {
  auto cat = rs_catalog();
  Statement st = parse("select a2 from r where a1 = 1", cat);
  EXPECT_EQ(st.target_tables[0], "R");
  EXPECT_EQ(st.projections[0].column, "A2");
  EXPECT_EQ(st.predicate[0].column, "A1");
}

TEST(Parse, PureAndDeterministic) {
  auto cat = rs_catalog();
  std::string sql = "SELECT A1, A2 FROM R WHERE A3 <= 9 AND A4 <> 2";
  Statement a = parse(sql, cat);
  Statement b = parse(sql, cat);
  EXPECT_TRUE(a.equal_structure(b));
  EXPECT_EQ(render(a), render(b));
}

TEST(Render, CanonicalForm) {
  auto cat = rs_catalog();
  Statement st = parse("update  r set A2=7 ,A3 = 8  where A1=100", cat);
  EXPECT_EQ(render(st), "UPDATE R SET A2 = 7, A3 = 8 WHERE A1 = 100");
  Statement sel = parse("SELECT * FROM R", cat);
  EXPECT_EQ(render(sel), "SELECT * FROM R");
  Statement join = parse("SELECT A1, B2, B3 FROM R JOIN S ON A1 = B2", cat);
  EXPECT_EQ(render(join), "SELECT R.A1, S.B2, S.B3 FROM R JOIN S ON R.A1 = S.B2");
}

// parse(render(stmt)) must reproduce the statement for everything the
// grammar accepts; exercised over a generated statement corpus.
TEST(Render, RoundTripProperty) {
  auto cat = rs_catalog();
  std::mt19937_64 rng(2024);
  auto rand_col = [&](const TableSchema& t) {
    return t.columns[rng() % t.columns.size()];
  };
  auto rand_scalar = [&]() -> std::string {
    switch (rng() % 4) {
      case 0: return std::to_string(static_cast<int64_t>(rng() % 1000));
      case 1: return "?";
      case 2: return "3.5";
      default: return "'t ex''t'";
    }
  };
  const char* cmps[] = {"=", "<", ">", "<=", ">=", "<>"};
  int checked = 0;
  for (int i = 0; i < 500; ++i) {
    const TableSchema& t = rng() % 2 ? cat.table("R") : cat.table("S");
    std::string sql;
    switch (rng() % 4) {
      case 0: {
        sql = "SELECT " + rand_col(t) + ", " + rand_col(t) + " FROM " + t.name;
        if (rng() % 2) {
          sql += " WHERE " + rand_col(t) + " " + cmps[rng() % 6] + " " + rand_scalar();
          if (rng() % 2) sql += " AND " + rand_col(t) + " " + cmps[rng() % 6] + " " + rand_scalar();
        }
        break;
      }
      case 1: {
        sql = "INSERT INTO " + t.name + " VALUES (";
        for (size_t c = 0; c < t.columns.size(); ++c) {
          if (c) sql += ", ";
          sql += std::to_string(static_cast<int64_t>(rng() % 100));
        }
        sql += ")";
        break;
      }
      case 2: {
        std::string col = rand_col(t);
        while (col == t.pk) col = rand_col(t);
        sql = "UPDATE " + t.name + " SET " + col + " = " + rand_scalar() + " WHERE " + t.pk +
              " = " + std::to_string(static_cast<int64_t>(rng() % 100));
        break;
      }
      default:
        sql = "DELETE FROM " + t.name + " WHERE " + rand_col(t) + " " + cmps[rng() % 6] + " " +
              std::to_string(static_cast<int64_t>(rng() % 100));
        break;
    }
    Statement st = parse(sql, cat);
    Statement again = parse(render(st), cat);
    ASSERT_TRUE(st.equal_structure(again)) << sql << " vs " << render(st);
    ++checked;
  }
  EXPECT_EQ(checked, 500);
}

TEST(Rewrite, TimeMacro) {
  auto cat = rs_catalog();
  Statement st = parse("UPDATE S SET B3 = NOW() WHERE B1 = 5", cat);
  std::mt19937_64 rng(1);
  Statement out = rewrite_nondeterministic(st, [] { return int64_t{1700000000}; }, rng);
  EXPECT_EQ(render(out), "UPDATE S SET B3 = 1700000000 WHERE B1 = 5");
  Statement ct = parse("UPDATE S SET B3 = CURRENT_TIMESTAMP WHERE B1 = 5", cat);
  Statement out2 = rewrite_nondeterministic(ct, [] { return int64_t{42}; }, rng);
  EXPECT_EQ(render(out2), "UPDATE S SET B3 = 42 WHERE B1 = 5");
}

TEST(Rewrite, NoMacrosPassThrough) {
  auto cat = rs_catalog();
  Statement st = parse("SELECT A2 FROM R WHERE A1 = 100", cat);
  std::mt19937_64 rng(7);
  Statement out = rewrite_nondeterministic(st, [] { return int64_t{9}; }, rng);
  EXPECT_TRUE(out.equal_structure(st));
  EXPECT_EQ(out.text, st.text);
}

TEST(Rewrite, RandMacroMatchesSeededOracle) {
  auto cat = rs_catalog();
  Statement st = parse("UPDATE S SET B4 = RAND() WHERE B1 = 2", cat);
  std::mt19937_64 rng(42);
  Statement out = rewrite_nondeterministic(st, [] { return int64_t{0}; }, rng);
  std::mt19937_64 oracle(42);
  double expected = rand_macro_draw(oracle);
  ASSERT_EQ(out.set_clauses[0].value.kind, Scalar::Kind::Lit);
  EXPECT_EQ(std::get<double>(out.set_clauses[0].value.lit), expected);
}

TEST(Rewrite, Idempotent) {
  auto cat = rs_catalog();
  Statement st = parse("UPDATE S SET B3 = NOW(), B4 = RAND() WHERE B1 = 1", cat);
  std::mt19937_64 rng(5);
  Statement once = rewrite_nondeterministic(st, [] { return int64_t{100}; }, rng);
  Statement twice = rewrite_nondeterministic(once, [] { return int64_t{999}; }, rng);
  EXPECT_TRUE(once.equal_structure(twice));
  EXPECT_EQ(once.text, twice.text);
}

}  // namespace
