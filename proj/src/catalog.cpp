#include "hihooi/catalog.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace hihooi {

std::string col_type_name(ColType t) {
  switch (t) {
    case ColType::Int: return "int";
    case ColType::Float: return "float";
    case ColType::Text: return "text";
  }
  return "int";
}

std::optional<ColType> col_type_from(const std::string& name) {
  std::string low;
  for (char c : name) low += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (low == "int" || low == "integer") return ColType::Int;
  if (low == "float" || low == "double" || low == "real") return ColType::Float;
  if (low == "text" || low == "varchar" || low == "string") return ColType::Text;
  return std::nullopt;
}

int TableSchema::column_index(const std::string& col) const {
  for (size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].size() != col.size()) continue;
    bool eq = true;
    for (size_t j = 0; j < col.size(); ++j) {
      if (std::tolower(static_cast<unsigned char>(columns[i][j])) !=
          std::tolower(static_cast<unsigned char>(col[j]))) {
        eq = false;
        break;
      }
    }
    if (eq) return static_cast<int>(i);
  }
  return -1;
}

std::string SchemaCatalog::fold(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

void SchemaCatalog::add_table(TableSchema schema) {
  if (schema.columns.empty() || schema.columns.size() != schema.types.size())
    throw ParseError(ParseError::Kind::SyntaxError, "table " + schema.name + " has no usable columns");
  std::set<std::string> seen;
  for (const auto& c : schema.columns) {
    if (!seen.insert(fold(c)).second)
      throw ParseError(ParseError::Kind::SyntaxError,
                       "duplicate column " + c + " in table " + schema.name);
  }
  int pk = schema.column_index(schema.pk);
  if (pk < 0)
    throw ParseError(ParseError::Kind::UnknownColumn,
                     "primary key " + schema.pk + " is not a column of " + schema.name);
  schema.pk_index = static_cast<size_t>(pk);
  schema.pk = schema.columns[schema.pk_index];
  std::string key = fold(schema.name);
  if (tables_.count(key))
    throw ParseError(ParseError::Kind::SyntaxError, "table " + schema.name + " already declared");
  tables_.emplace(std::move(key), std::move(schema));
}

bool SchemaCatalog::has_table(const std::string& name) const {
  return tables_.count(fold(name)) > 0;
}

const TableSchema& SchemaCatalog::table(const std::string& name) const {
  auto it = tables_.find(fold(name));
  if (it == tables_.end())
    throw ParseError(ParseError::Kind::UnknownTable, "unknown table " + name);
  return it->second;
}

const TableSchema* SchemaCatalog::find_table(const std::string& name) const {
  auto it = tables_.find(fold(name));
  return it == tables_.end() ? nullptr : &it->second;
}

std::vector<const TableSchema*> SchemaCatalog::tables() const {
  std::vector<const TableSchema*> out;
  for (const auto& [k, v] : tables_) out.push_back(&v);
  std::sort(out.begin(), out.end(),
            [](const TableSchema* a, const TableSchema* b) { return a->name < b->name; });
  return out;
}

}  // namespace hihooi
