#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "hihooi/rwset.hpp"

namespace hihooi {

using Tsid = uint64_t;

enum class Completion { Commit, Rollback };

// Replicable record of one completed write transaction: its rendered write
// statements in execution order, merged read/write sets, execution cost, and
// how it completed. Rollback records replicate as ordering no-ops.
struct TState {
  Tsid tsid = 0;  // 0 = unassigned
  Completion completion = Completion::Commit;
  std::vector<std::string> write_statements;  // canonical render() output
  RWSet rwset;
  std::vector<uint64_t> stmt_exec_units;
  uint64_t total_exec_units = 0;
  uint64_t primary_commit_seq = 0;  // engine commit seq; 0 for rollbacks

  bool is_noop() const { return completion == Completion::Rollback; }
};

using TStatePtr = std::shared_ptr<const TState>;

}  // namespace hihooi
