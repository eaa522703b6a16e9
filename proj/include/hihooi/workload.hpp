#pragma once

#include <random>
#include <string>
#include <vector>

#include "hihooi/engine.hpp"
#include "hihooi/statement.hpp"

namespace hihooi {

// Value-distribution binding for one '?' placeholder.
struct BindSpec {
  enum class Kind { UniformInt, Zipf, Const, Seq, SameAs };
  Kind kind = Kind::Const;
  int64_t a = 0;       // uniform lo / zipf N / const v / seq start / same index
  int64_t b = 0;       // uniform hi
  double theta = 1.0;  // zipf skew
};

struct TemplateStmt {
  Statement stmt;               // parsed, placeholders unbound
  std::vector<BindSpec> binds;  // one per placeholder
};

struct TxnTemplate {
  std::string name;
  std::vector<TemplateStmt> stmts;
  bool read_only = false;
};

struct TableSpec {
  TableSchema schema;
  int64_t preload = 0;  // rows with PK 1..preload
};

struct WorkloadSpec {
  std::vector<TableSpec> tables;
  std::vector<TxnTemplate> templates;
  std::vector<std::pair<std::string, int>> mix;  // template name -> percent
  int clients = 8;
  uint64_t total_txns = 1000;
  uint64_t seed = 42;

  SchemaCatalog catalog() const;
  const TxnTemplate& find_template(const std::string& name) const;
};

// Line-oriented spec format (docs/workload-format.md); throws SpecValidation.
WorkloadSpec parse_workload(const std::string& text);
WorkloadSpec load_workload(const std::string& path_or_name);  // builtin name or file path

std::vector<std::string> builtin_workload_names();
bool is_builtin_workload(const std::string& name);

// Deterministic preload: PK 1..preload with derived column values.
void preload_engine(Engine& engine, const WorkloadSpec& spec);

struct GeneratedTxn {
  size_t template_idx = 0;
  bool read_only = false;
  std::vector<Statement> stmts;  // bound
};

// Deterministic request stream: one seeded generator shared by all clients.
class WorkloadGenerator {
 public:
  WorkloadGenerator(const WorkloadSpec& spec, uint64_t seed);
  GeneratedTxn next();

 private:
  int64_t draw(const BindSpec& b, std::vector<int64_t>& prior);

  const WorkloadSpec& spec_;
  std::mt19937_64 rng_;
  std::vector<size_t> mix_templates_;  // cumulative selection table (per percent point)
  std::map<int64_t, int64_t> seq_counters_;  // seq start -> next value
};

// Zipf(N, theta) sampler with exact inverse-CDF draws plus the analytic
// probability mass, used as the oracle in distribution tests.
class ZipfDist {
 public:
  ZipfDist(int64_t n, double theta);
  int64_t draw(std::mt19937_64& rng) const;  // 1..n
  double mass(int64_t k) const;

 private:
  std::vector<double> cumulative_;
};

}  // namespace hihooi
