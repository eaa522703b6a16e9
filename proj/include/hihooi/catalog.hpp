#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hihooi/errors.hpp"

namespace hihooi {

enum class ColType { Int, Float, Text };

std::string col_type_name(ColType t);
std::optional<ColType> col_type_from(const std::string& name);

struct TableSchema {
  std::string name;                  // canonical spelling (first declaration wins)
  std::vector<std::string> columns;  // declared order
  std::vector<ColType> types;
  std::string pk;                    // single primary-key column
  size_t pk_index = 0;

  int column_index(const std::string& col) const;  // -1 when absent (case-insensitive)
};

// Table/column dictionary for parse-time resolution. Names are
// case-insensitively unique; lookups return the canonical spelling.
class SchemaCatalog {
 public:
  void add_table(TableSchema schema);

  bool has_table(const std::string& name) const;
  const TableSchema& table(const std::string& name) const;  // throws UnknownTable
  const TableSchema* find_table(const std::string& name) const;

  std::vector<const TableSchema*> tables() const;  // sorted by canonical name
  bool empty() const { return tables_.empty(); }

 private:
  static std::string fold(const std::string& s);
  std::map<std::string, TableSchema> tables_;  // key = casefolded name
};

}  // namespace hihooi
