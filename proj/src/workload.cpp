#include "hihooi/workload.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "hihooi/errors.hpp"
#include "hihooi/parser.hpp"

namespace hihooi {

namespace {

[[noreturn]] void spec_error(const std::string& msg) {
  throw ClusterError(ClusterError::Kind::SpecValidation, msg);
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

BindSpec parse_bind(const std::string& text) {
  auto open = text.find('(');
  auto close = text.rfind(')');
  if (open == std::string::npos || close == std::string::npos || close < open)
    spec_error("bad bind spec: " + text);
  std::string name = trim(text.substr(0, open));
  auto args = split(text.substr(open + 1, close - open - 1), ',');
  BindSpec b;
  try {
    if (name == "uniform") {
      if (args.size() != 2) spec_error("uniform(lo, hi): " + text);
      b.kind = BindSpec::Kind::UniformInt;
      b.a = std::stoll(args[0]);
      b.b = std::stoll(args[1]);
      if (b.b < b.a) spec_error("uniform range is empty: " + text);
    } else if (name == "zipf") {
      if (args.size() != 2) spec_error("zipf(n, theta): " + text);
      b.kind = BindSpec::Kind::Zipf;
      b.a = std::stoll(args[0]);
      b.theta = std::stod(args[1]);
      if (b.a < 1) spec_error("zipf needs n >= 1: " + text);
    } else if (name == "constant" || name == "const") {
      if (args.size() != 1) spec_error("constant(v): " + text);
      b.kind = BindSpec::Kind::Const;
      b.a = std::stoll(args[0]);
    } else if (name == "seq") {
      if (args.size() != 1) spec_error("seq(start): " + text);
      b.kind = BindSpec::Kind::Seq;
      b.a = std::stoll(args[0]);
    } else if (name == "same") {
      if (args.size() != 1) spec_error("same(i): " + text);
      b.kind = BindSpec::Kind::SameAs;
      b.a = std::stoll(args[0]);
    } else {
      spec_error("unknown bind kind: " + text);
    }
  } catch (const std::invalid_argument&) {
    spec_error("bad bind argument: " + text);
  }
  return b;
}

}  // namespace

SchemaCatalog WorkloadSpec::catalog() const {
  SchemaCatalog cat;
  for (const auto& t : tables) cat.add_table(t.schema);
  return cat;
}

const TxnTemplate& WorkloadSpec::find_template(const std::string& name) const {
  for (const auto& t : templates) {
    if (t.name == name) return t;
  }
  spec_error("unknown template " + name);
}

WorkloadSpec parse_workload(const std::string& text) {
  WorkloadSpec spec;
  std::istringstream in(text);
  std::string line;
  std::string section;       // "table", "template", "mix", "run"
  std::string section_name;  // current table/template name
  TableSpec* table = nullptr;
  TxnTemplate* tmpl = nullptr;

  // statements parse once all tables are known, so collect raw text first
  struct RawStmt {
    std::string tmpl;
    std::string stmt;
    std::string bind;
  };
  std::vector<RawStmt> raw_stmts;

  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') spec_error("bad section header: " + line);
      auto inner = trim(line.substr(1, line.size() - 2));
      auto space = inner.find(' ');
      section = space == std::string::npos ? inner : inner.substr(0, space);
      section_name = space == std::string::npos ? "" : trim(inner.substr(space + 1));
      table = nullptr;
      tmpl = nullptr;
      if (section == "table") {
        if (section_name.empty()) spec_error("[table] needs a name");
        spec.tables.push_back(TableSpec{});
        table = &spec.tables.back();
        table->schema.name = section_name;
      } else if (section == "template") {
        if (section_name.empty()) spec_error("[template] needs a name");
        spec.templates.push_back(TxnTemplate{});
        tmpl = &spec.templates.back();
        tmpl->name = section_name;
      } else if (section != "mix" && section != "run") {
        spec_error("unknown section: " + line);
      }
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) spec_error("expected key = value: " + line);
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));

    if (section == "table") {
      if (key == "columns") {
        for (const auto& cspec : split(value, ',')) {
          auto colon = cspec.find(':');
          if (colon == std::string::npos) spec_error("column needs name:type: " + cspec);
          auto ct = col_type_from(trim(cspec.substr(colon + 1)));
          if (!ct) spec_error("unknown column type: " + cspec);
          table->schema.columns.push_back(trim(cspec.substr(0, colon)));
          table->schema.types.push_back(*ct);
        }
      } else if (key == "pk") {
        table->schema.pk = value;
      } else if (key == "preload") {
        table->preload = std::stoll(value);
      } else {
        spec_error("unknown table key: " + key);
      }
    } else if (section == "template") {
      if (key == "stmt") {
        raw_stmts.push_back(RawStmt{tmpl->name, value, ""});
      } else if (key == "bind") {
        if (raw_stmts.empty() || raw_stmts.back().tmpl != tmpl->name ||
            !raw_stmts.back().bind.empty())
          spec_error("bind must directly follow its stmt");
        raw_stmts.back().bind = value;
      } else {
        spec_error("unknown template key: " + key);
      }
    } else if (section == "mix") {
      spec.mix.emplace_back(key, std::stoi(value));
    } else if (section == "run") {
      if (key == "clients") spec.clients = std::stoi(value);
      else if (key == "txns") spec.total_txns = std::stoull(value);
      else if (key == "seed") spec.seed = std::stoull(value);
      else spec_error("unknown run key: " + key);
    } else {
      spec_error("key outside any section: " + line);
    }
  }

  if (spec.tables.empty()) spec_error("workload declares no tables");
  SchemaCatalog cat;
  try {
    cat = spec.catalog();
  } catch (const ParseError& e) {
    spec_error(e.what());
  }

  for (const auto& rs : raw_stmts) {
    TxnTemplate* owner = nullptr;
    for (auto& t : spec.templates) {
      if (t.name == rs.tmpl) owner = &t;
    }
    TemplateStmt ts;
    try {
      ts.stmt = parse(rs.stmt, cat);
    } catch (const ParseError& e) {
      spec_error("template " + rs.tmpl + ": " + e.what());
    }
    if (!rs.bind.empty()) {
      for (const auto& b : split(rs.bind, ';')) ts.binds.push_back(parse_bind(b));
    }
    if (ts.binds.size() != ts.stmt.placeholder_count())
      spec_error("template " + rs.tmpl + ": statement has " +
                 std::to_string(ts.stmt.placeholder_count()) + " placeholders but " +
                 std::to_string(ts.binds.size()) + " binds");
    owner->stmts.push_back(std::move(ts));
  }

  for (auto& t : spec.templates) {
    if (t.stmts.empty()) spec_error("template " + t.name + " has no statements");
    t.read_only = true;
    for (const auto& s : t.stmts) t.read_only &= s.stmt.is_read();
  }

  if (spec.mix.empty()) spec_error("workload declares no [mix]");
  int total = 0;
  for (const auto& [name, pct] : spec.mix) {
    spec.find_template(name);
    if (pct < 0) spec_error("negative mix percentage for " + name);
    total += pct;
  }
  if (total != 100) spec_error("mix percentages sum to " + std::to_string(total) + ", not 100");
  return spec;
}

void preload_engine(Engine& engine, const WorkloadSpec& spec) {
  for (const auto& t : spec.tables) {
    if (t.preload <= 0) continue;
    Engine::Txn txn = engine.begin();
    const TableSchema& s = t.schema;
    for (int64_t pk = 1; pk <= t.preload; ++pk) {
      Statement ins;
      ins.kind = StmtKind::Insert;
      ins.target_tables.push_back(s.name);
      for (size_t ci = 0; ci < s.columns.size(); ++ci) {
        if (ci == s.pk_index) {
          ins.values.push_back(Scalar::literal(Value{pk}));
        } else {
          switch (s.types[ci]) {
            case ColType::Int:
              ins.values.push_back(Scalar::literal(Value{pk * 10 + static_cast<int64_t>(ci)}));
              break;
            case ColType::Float:
              ins.values.push_back(
                  Scalar::literal(Value{static_cast<double>(pk) + 0.5 * static_cast<double>(ci)}));
              break;
            case ColType::Text:
              ins.values.push_back(Scalar::literal(
                  Value{"v" + std::to_string(pk) + "_" + std::to_string(ci)}));
              break;
          }
        }
      }
      engine.execute(txn, ins);
    }
    engine.commit(txn);
  }
}

ZipfDist::ZipfDist(int64_t n, double theta) {
  cumulative_.reserve(static_cast<size_t>(n));
  double acc = 0;
  for (int64_t k = 1; k <= n; ++k) {
    acc += 1.0 / std::pow(static_cast<double>(k), theta);
    cumulative_.push_back(acc);
  }
}

int64_t ZipfDist::draw(std::mt19937_64& rng) const {
  double u = rand_macro_draw(rng) * cumulative_.back();
  auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), u);
  return static_cast<int64_t>(it - cumulative_.begin()) + 1;
}

double ZipfDist::mass(int64_t k) const {
  double prev = k > 1 ? cumulative_[static_cast<size_t>(k - 2)] : 0.0;
  return (cumulative_[static_cast<size_t>(k - 1)] - prev) / cumulative_.back();
}

WorkloadGenerator::WorkloadGenerator(const WorkloadSpec& spec, uint64_t seed)
    : spec_(spec), rng_(seed) {
  for (size_t i = 0; i < spec.mix.size(); ++i) {
    for (int p = 0; p < spec.mix[i].second; ++p) {
      size_t ti = 0;
      for (size_t j = 0; j < spec.templates.size(); ++j) {
        if (spec.templates[j].name == spec.mix[i].first) ti = j;
      }
      mix_templates_.push_back(ti);
    }
  }
}

namespace {
// zipf tables are deterministic per (n, theta); cache across draws
const ZipfDist& zipf_for(int64_t n, double theta) {
  static std::map<std::pair<int64_t, int64_t>, ZipfDist> cache;
  auto key = std::make_pair(n, static_cast<int64_t>(theta * 1e6));
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, ZipfDist(n, theta)).first;
  return it->second;
}
}  // namespace

int64_t WorkloadGenerator::draw(const BindSpec& b, std::vector<int64_t>& prior) {
  switch (b.kind) {
    case BindSpec::Kind::UniformInt: {
      uint64_t span = static_cast<uint64_t>(b.b - b.a) + 1;
      return b.a + static_cast<int64_t>(rng_() % span);
    }
    case BindSpec::Kind::Zipf:
      return zipf_for(b.a, b.theta).draw(rng_);
    case BindSpec::Kind::Const:
      return b.a;
    case BindSpec::Kind::Seq: {
      auto [it, fresh] = seq_counters_.try_emplace(b.a, b.a);
      (void)fresh;
      return it->second++;
    }
    case BindSpec::Kind::SameAs: {
      if (b.a < 0 || static_cast<size_t>(b.a) >= prior.size())
        spec_error("same(" + std::to_string(b.a) + ") references a missing draw");
      return prior[static_cast<size_t>(b.a)];
    }
  }
  return 0;
}

GeneratedTxn WorkloadGenerator::next() {
  GeneratedTxn out;
  size_t pick = static_cast<size_t>(rng_() % mix_templates_.size());
  out.template_idx = mix_templates_[pick];
  const TxnTemplate& tmpl = spec_.templates[out.template_idx];
  out.read_only = tmpl.read_only;
  std::vector<int64_t> draws;
  for (const auto& ts : tmpl.stmts) {
    std::vector<Value> vals;
    for (const auto& b : ts.binds) {
      int64_t v = draw(b, draws);
      draws.push_back(v);
      vals.emplace_back(v);
    }
    out.stmts.push_back(ts.stmt.bind(vals));
  }
  return out;
}

namespace {

const char* kKvTables = R"(
[table KV]
columns = K:int, F1:int, F2:int, F3:int, F4:int
pk = K
preload = 1000
)";

const char* kKvReadTemplates = R"(
[template read_f1]
stmt = SELECT F1 FROM KV WHERE K = ?
bind = zipf(1000, 1.0)

[template read_f2]
stmt = SELECT F2 FROM KV WHERE K = ?
bind = zipf(1000, 1.0)

[template read_f3]
stmt = SELECT F3 FROM KV WHERE K = ?
bind = zipf(1000, 1.0)

[template read_f4]
stmt = SELECT F4 FROM KV WHERE K = ?
bind = zipf(1000, 1.0)
)";

const char* kKvWriteTemplates = R"(
[template upd_f1]
stmt = UPDATE KV SET F1 = ? WHERE K = ?
bind = uniform(0, 1000000); zipf(1000, 1.0)

[template upd_f2]
stmt = UPDATE KV SET F2 = ? WHERE K = ?
bind = uniform(0, 1000000); zipf(1000, 1.0)

[template upd_f3]
stmt = UPDATE KV SET F3 = ? WHERE K = ?
bind = uniform(0, 1000000); zipf(1000, 1.0)

[template upd_f4]
stmt = UPDATE KV SET F4 = ? WHERE K = ?
bind = uniform(0, 1000000); zipf(1000, 1.0)

[template insert_kv]
stmt = INSERT INTO KV VALUES (?, ?, ?, ?, ?)
bind = seq(1001); uniform(0, 1000000); uniform(0, 1000000); uniform(0, 1000000); uniform(0, 1000000)

[template scan_kv]
stmt = SELECT F1, F2 FROM KV WHERE K < ?
bind = uniform(5, 60)
)";

const char* kOrderTables = R"(
[table ORDERS]
columns = O_ID:int, O_C_ID:int, O_STATUS:int, O_TOTAL:int
pk = O_ID
preload = 1000

[table STOCK]
columns = S_ID:int, S_QTY:int, S_PRICE:int
pk = S_ID
preload = 500
)";

const char* kOrderTemplates = R"(
[template new_order]
stmt = SELECT S_QTY FROM STOCK WHERE S_ID = ?
bind = zipf(500, 1.0)
stmt = UPDATE STOCK SET S_QTY = ? WHERE S_ID = ?
bind = uniform(1, 100); same(0)
stmt = INSERT INTO ORDERS VALUES (?, ?, ?, ?)
bind = seq(1001); uniform(1, 3000); constant(0); uniform(1, 5000)
stmt = SELECT O_TOTAL FROM ORDERS WHERE O_ID = ?
bind = zipf(1000, 1.0)

[template order_status]
stmt = SELECT O_STATUS, O_TOTAL FROM ORDERS WHERE O_ID = ?
bind = zipf(1000, 1.0)
stmt = SELECT S_QTY FROM STOCK WHERE S_ID = ?
bind = zipf(500, 1.0)

[template stock_level]
stmt = SELECT COUNT(*) FROM STOCK WHERE S_QTY < ?
bind = uniform(10, 40)
)";

std::string builtin_text(const std::string& name) {
  std::string kv = std::string(kKvTables) + kKvReadTemplates + kKvWriteTemplates;
  std::string order = std::string(kOrderTables) + kOrderTemplates;
  if (name == "kv-readonly")
    return kv + "[mix]\nread_f1 = 25\nread_f2 = 25\nread_f3 = 25\nread_f4 = 25\n";
  if (name == "kv-readheavy")
    return kv + "[mix]\nscan_kv = 95\ninsert_kv = 5\n";
  if (name == "kv-balanced")
    return kv +
           "[mix]\nread_f1 = 21\nread_f2 = 21\nread_f3 = 21\nread_f4 = 22\ninsert_kv = 15\n";
  if (name == "kv-writeheavy")
    return kv +
           "[mix]\nread_f1 = 12\nread_f2 = 12\nread_f3 = 13\nread_f4 = 13\n"
           "upd_f1 = 12\nupd_f2 = 12\nupd_f3 = 13\nupd_f4 = 13\n";
  if (name == "order-balanced")
    return order + "[mix]\nnew_order = 15\norder_status = 70\nstock_level = 15\n";
  if (name == "order-writeheavy")
    return order + "[mix]\nnew_order = 50\norder_status = 40\nstock_level = 10\n";
  if (name == "adversarial")
    return std::string(kKvTables) +
           "[template upd_hot]\nstmt = UPDATE KV SET F1 = ? WHERE K = 1\nbind = uniform(0, "
           "1000000)\n"
           "[template read_hot]\nstmt = SELECT F1 FROM KV WHERE K = 1\n"
           "[mix]\nupd_hot = 50\nread_hot = 50\n";
  return "";
}

}  // namespace

std::vector<std::string> builtin_workload_names() {
  return {"kv-readonly",    "kv-readheavy",    "kv-balanced", "kv-writeheavy",
          "order-balanced", "order-writeheavy", "adversarial"};
}

bool is_builtin_workload(const std::string& name) {
  return !builtin_text(name).empty();
}

WorkloadSpec load_workload(const std::string& path_or_name) {
  std::string text = builtin_text(path_or_name);
  if (text.empty()) {
    std::ifstream in(path_or_name);
    if (!in) spec_error("no builtin workload or readable file named " + path_or_name);
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }
  return parse_workload(text);
}

}  // namespace hihooi
