#include "hihooi/indexes.hpp"

#include <sstream>

namespace hihooi {

namespace {

std::string qualify(const std::string& table, const std::string& col) {
  return table + "." + col;
}

}  // namespace

void ConsistencyIndexes::update(const TState& ts, const SchemaCatalog& catalog) {
  if (ts.is_noop()) return;  // rollbacks have no effective write set
  for (const auto& [tname, e] : ts.rwset.tables()) {
    if (!e.in_write()) continue;
    t_index_[tname] = ts.tsid;
    AffectingClass cls = e.cls();
    if (cls == AffectingClass::TAS || cls == AffectingClass::CAS) {
      if (e.col_write.star > 0) {
        const TableSchema* schema = catalog.find_table(tname);
        if (schema) {
          for (const auto& c : schema->columns) c_index_[qualify(tname, c)] = ts.tsid;
        }
      }
      for (const auto& [c, n] : e.col_write.cols) {
        (void)n;
        c_index_[qualify(tname, c)] = ts.tsid;
      }
    } else {
      RowIdx& ri = r_index_[tname];
      for (const auto& [pk, n] : e.row_write.rows) {
        (void)n;
        ri.rows[pk] = ts.tsid;
      }
      if (ri.hwm < ts.tsid) ri.hwm = ts.tsid;
    }
  }
}

Tsid ConsistencyIndexes::find_latest_consistent(const RWSet& read_set,
                                                const SchemaCatalog& catalog) const {
  Tsid tsid = 0;
  auto bump = [&tsid](Tsid v) {
    if (v > tsid) tsid = v;
  };

  auto col_lookup = [&](const std::string& tname, const ColSet& cols) {
    if (cols.star > 0) {
      const TableSchema* schema = catalog.find_table(tname);
      if (schema) {
        for (const auto& c : schema->columns) {
          auto it = c_index_.find(qualify(tname, c));
          if (it != c_index_.end()) bump(it->second);
        }
      }
    }
    for (const auto& [c, n] : cols.cols) {
      (void)n;
      auto it = c_index_.find(qualify(tname, c));
      if (it != c_index_.end()) bump(it->second);
    }
  };

  for (const auto& [tname, e] : read_set.tables()) {
    if (!e.in_read()) continue;
    auto ti = t_index_.find(tname);
    if (ti == t_index_.end()) continue;  // never written: skip
    switch (e.cls()) {
      case AffectingClass::TAS:
        bump(ti->second);
        break;
      case AffectingClass::CAS: {
        col_lookup(tname, e.col_read);
        auto ri = r_index_.find(tname);
        if (ri != r_index_.end()) bump(ri->second.hwm);
        break;
      }
      case AffectingClass::RAS: {
        auto ri = r_index_.find(tname);
        if (ri != r_index_.end()) {
          for (const auto& [pk, n] : e.row_read.rows) {
            (void)n;
            auto it = ri->second.rows.find(pk);
            if (it != ri->second.rows.end()) bump(it->second);
          }
        }
        col_lookup(tname, e.col_read);
        break;
      }
    }
  }
  return tsid;
}

void ConsistencyIndexes::prune_rows(Tsid floor) {
  for (auto& [tname, ri] : r_index_) {
    (void)tname;
    for (auto it = ri.rows.begin(); it != ri.rows.end();) {
      if (it->second <= floor) it = ri.rows.erase(it);
      else ++it;
    }
  }
}

Tsid ConsistencyIndexes::table_entry(const std::string& t) const {
  auto it = t_index_.find(t);
  return it == t_index_.end() ? 0 : it->second;
}

std::string ConsistencyIndexes::dump() const {
  std::ostringstream out;
  for (const auto& [t, tsid] : t_index_) out << "T|" << t << "|" << tsid << "\n";
  for (const auto& [c, tsid] : c_index_) out << "C|" << c << "|" << tsid << "\n";
  for (const auto& [t, ri] : r_index_) {
    for (const auto& [pk, tsid] : ri.rows)
      out << "R|" << t << "|" << render_value(pk) << "|" << tsid << "\n";
    out << "HWM|" << t << "|" << ri.hwm << "\n";
  }
  return out.str();
}

bool ConsistencyIndexes::operator==(const ConsistencyIndexes& o) const {
  return dump() == o.dump();
}

}  // namespace hihooi
