#include "hihooi/buffers.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "hihooi/errors.hpp"
#include "hihooi/parser.hpp"

namespace hihooi {

namespace {
constexpr char kUnitSep = '\x1f';
}

void TransactionsBuffer::publish(TStatePtr ts) {
  if (failed_)
    throw ClusterError(ClusterError::Kind::BufferUnavailable, "transactions buffer is down");
  if (ts->tsid != high_ + 1 && high_ != 0)
    throw ClusterError(ClusterError::Kind::InvariantViolation,
                       "publish out of order: " + std::to_string(ts->tsid) + " after " +
                           std::to_string(high_));
  if (high_ == 0) low_ = ts->tsid;
  high_ = ts->tsid;
  store_.emplace(ts->tsid, std::move(ts));
}

TransactionsBuffer::FetchResult TransactionsBuffer::fetch(Tsid tsid) const {
  if (failed_) return {FetchResult::Status::Unavailable, nullptr};
  if (tsid < low_ && !store_.empty() && tsid < store_.begin()->first)
    return {FetchResult::Status::Behind, nullptr};
  auto it = store_.find(tsid);
  if (it == store_.end()) {
    if (tsid < low_) return {FetchResult::Status::Behind, nullptr};
    return {FetchResult::Status::Empty, nullptr};
  }
  return {FetchResult::Status::Ok, it->second};
}

std::vector<TStatePtr> TransactionsBuffer::trim_upto(Tsid upto) {
  std::vector<TStatePtr> out;
  for (auto it = store_.begin(); it != store_.end() && it->first <= upto;) {
    out.push_back(it->second);
    it = store_.erase(it);
  }
  if (upto >= low_) low_ = upto + 1;
  return out;
}

std::vector<TStatePtr> TransactionsBuffer::contents() const {
  std::vector<TStatePtr> out;
  for (const auto& [tsid, ts] : store_) {
    (void)tsid;
    out.push_back(ts);
  }
  return out;
}

ArchiverBuffer::ArchiverBuffer(std::filesystem::path file) : file_(std::move(file)) {}

std::string ArchiverBuffer::serialize_record(const TState& ts) {
  std::ostringstream out;
  out << ts.tsid << "|" << (ts.completion == Completion::Commit ? "C" : "R") << "|"
      << ts.total_exec_units << "|" << ts.write_statements.size() << "|";
  for (size_t i = 0; i < ts.write_statements.size(); ++i) {
    if (i) out << kUnitSep;
    out << ts.write_statements[i];
  }
  return out.str();
}

TState ArchiverBuffer::parse_record(const std::string& line, const SchemaCatalog& catalog,
                                    Granularity g) {
  std::vector<std::string> head;
  size_t start = 0;
  for (int field = 0; field < 4; ++field) {
    size_t bar = line.find('|', start);
    if (bar == std::string::npos)
      throw ClusterError(ClusterError::Kind::InvariantViolation, "bad archive record: " + line);
    head.push_back(line.substr(start, bar - start));
    start = bar + 1;
  }
  TState ts;
  ts.tsid = std::stoull(head[0]);
  if (head[1] == "C") ts.completion = Completion::Commit;
  else if (head[1] == "R") ts.completion = Completion::Rollback;
  else throw ClusterError(ClusterError::Kind::InvariantViolation, "bad completion: " + line);
  ts.total_exec_units = std::stoull(head[2]);
  size_t stmt_count = std::stoull(head[3]);

  std::string rest = line.substr(start);
  if (!rest.empty()) {
    size_t pos = 0;
    while (true) {
      size_t sep = rest.find(kUnitSep, pos);
      ts.write_statements.push_back(rest.substr(pos, sep == std::string::npos ? sep : sep - pos));
      if (sep == std::string::npos) break;
      pos = sep + 1;
    }
  }
  if (ts.write_statements.size() != stmt_count)
    throw ClusterError(ClusterError::Kind::InvariantViolation,
                       "statement count mismatch in archive record: " + line);
  // extraction is deterministic, so sets are rebuilt rather than stored
  for (const auto& text : ts.write_statements) {
    Statement stmt = parse(text, catalog);
    ts.rwset.merge(RWSet::extract(stmt, catalog, g));
  }
  return ts;
}

void ArchiverBuffer::append(std::span<const TStatePtr> tstates) {
  if (tstates.empty()) return;
  if (!file_.empty()) {
    std::ofstream out(file_, std::ios::app);
    if (!out)
      throw ClusterError(ClusterError::Kind::InvariantViolation,
                         "cannot open archiver file " + file_.string());
    for (const auto& ts : tstates) out << serialize_record(*ts) << "\n";
    out.flush();
    if (!out)
      throw ClusterError(ClusterError::Kind::InvariantViolation,
                         "archiver write failed; step aborted");
  }
  for (const auto& ts : tstates) records_.push_back(ts);
}

void ArchiverBuffer::delete_upto(Tsid seed_tsid) {
  size_t keep = 0;
  while (keep < records_.size() && records_[keep]->tsid <= seed_tsid) ++keep;
  if (keep == 0) return;
  records_.erase(records_.begin(), records_.begin() + static_cast<long>(keep));
  persist();
}

void ArchiverBuffer::persist() const {
  if (file_.empty()) return;
  std::ofstream out(file_, std::ios::trunc);
  for (const auto& ts : records_) out << serialize_record(*ts) << "\n";
}

std::vector<TStatePtr> ArchiverBuffer::range(Tsid from_exclusive, Tsid to_inclusive) const {
  std::vector<TStatePtr> out;
  for (const auto& ts : records_) {
    if (ts->tsid > from_exclusive && ts->tsid <= to_inclusive) out.push_back(ts);
  }
  return out;
}

uint64_t ArchiverBuffer::total_exec_units() const {
  uint64_t sum = 0;
  for (const auto& ts : records_) sum += ts->total_exec_units;
  return sum;
}

std::vector<TStatePtr> ArchiverBuffer::load(const std::filesystem::path& file,
                                            const SchemaCatalog& catalog, Granularity g) {
  std::ifstream in(file);
  if (!in)
    throw ClusterError(ClusterError::Kind::InvariantViolation,
                       "cannot open archiver file " + file.string());
  std::vector<TStatePtr> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(std::make_shared<TState>(parse_record(line, catalog, g)));
  }
  return out;
}

}  // namespace hihooi
