#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "hihooi/catalog.hpp"
#include "hihooi/rwset.hpp"
#include "hihooi/tstate.hpp"

namespace hihooi {

// Ordered in-process propagation store between the Transaction Manager and
// the extractors, with an injectable outage flag. While failed, publish
// throws BufferUnavailable (the TM retains the TState) and fetch stalls.
class TransactionsBuffer {
 public:
  void publish(TStatePtr ts);  // TSID order enforced

  struct FetchResult {
    enum class Status { Ok, Empty, Behind, Unavailable };
    Status status = Status::Empty;
    TStatePtr ts;
  };
  FetchResult fetch(Tsid tsid) const;  // Behind = trimmed away, go to the archiver

  void fail() { failed_ = true; }
  void recover() { failed_ = false; }
  bool failed() const { return failed_; }

  // Removes TStates with TSID <= upto and returns them in order.
  std::vector<TStatePtr> trim_upto(Tsid upto);

  // Fault injection for recovery drills: silently lose one TState.
  void drop(Tsid tsid) { store_.erase(tsid); }

  Tsid low() const { return low_; }    // smallest TSID still fetchable
  Tsid high() const { return high_; }  // largest TSID ever published
  size_t size() const { return store_.size(); }
  std::vector<TStatePtr> contents() const;

 private:
  std::map<Tsid, TStatePtr> store_;
  Tsid low_ = 1;
  Tsid high_ = 0;
  bool failed_ = false;
};

// Append-only persistent log of TStates already applied on every replica,
// trimmed once a Seed image covers them. One record per line:
//   TSID|C|exec_units|stmt_count|stmt1<US>stmt2...
// Read/write sets are re-extracted from the statement text on load.
class ArchiverBuffer {
 public:
  ArchiverBuffer() = default;  // in-memory only
  explicit ArchiverBuffer(std::filesystem::path file);

  void append(std::span<const TStatePtr> tstates);
  void delete_upto(Tsid seed_tsid);

  std::vector<TStatePtr> range(Tsid from_exclusive, Tsid to_inclusive) const;
  const std::vector<TStatePtr>& records() const { return records_; }
  Tsid low() const { return records_.empty() ? 0 : records_.front()->tsid; }
  Tsid high() const { return records_.empty() ? 0 : records_.back()->tsid; }
  uint64_t total_exec_units() const;

  static std::string serialize_record(const TState& ts);
  static TState parse_record(const std::string& line, const SchemaCatalog& catalog,
                             Granularity g = Granularity::All);
  static std::vector<TStatePtr> load(const std::filesystem::path& file,
                                     const SchemaCatalog& catalog,
                                     Granularity g = Granularity::All);

 private:
  void persist() const;

  std::vector<TStatePtr> records_;  // ascending TSID
  std::filesystem::path file_;      // empty = in-memory
};

}  // namespace hihooi
