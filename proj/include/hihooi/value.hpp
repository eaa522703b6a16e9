#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include "hihooi/errors.hpp"

namespace hihooi {

// SQL value: NULL, 64-bit int, double, or text. Comparators are numeric for
// int/float (mixed allowed), lexicographic for text; comparing text against a
// number is a TypeError. NULL never matches any comparison.
using Value = std::variant<std::monostate, int64_t, double, std::string>;

enum class ValueType { Null, Int, Float, Text };

inline ValueType value_type(const Value& v) {
  return static_cast<ValueType>(v.index());
}

inline bool is_null(const Value& v) { return v.index() == 0; }

// Renders a value the way literals appear in canonical statement text:
// ints as digits, floats via shortest round-trip form, text single-quoted
// with '' escaping, NULL as the keyword.
std::string render_value(const Value& v);

// Three-way comparison used by predicate evaluation. nullopt when either
// side is NULL (no match). Throws EngineError{TypeError} on text-vs-number.
std::optional<int> compare_values(const Value& a, const Value& b);

// Total order for container keys (type rank, then value). Unlike
// compare_values this never throws and orders NULL first.
bool value_less(const Value& a, const Value& b);

struct ValueLess {
  bool operator()(const Value& a, const Value& b) const { return value_less(a, b); }
};

}  // namespace hihooi
