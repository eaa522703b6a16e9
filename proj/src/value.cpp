#include "hihooi/value.hpp"

#include <charconv>
#include <cmath>

namespace hihooi {

std::string render_value(const Value& v) {
  switch (value_type(v)) {
    case ValueType::Null:
      return "NULL";
    case ValueType::Int:
      return std::to_string(std::get<int64_t>(v));
    case ValueType::Float: {
      char buf[64];
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), std::get<double>(v));
      (void)ec;
      std::string s(buf, ptr);
      // keep float literals distinguishable from ints
      if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
          s.find("inf") == std::string::npos && s.find("nan") == std::string::npos) {
        s += ".0";
      }
      return s;
    }
    case ValueType::Text: {
      const auto& t = std::get<std::string>(v);
      std::string out = "'";
      for (char c : t) {
        if (c == '\'') out += "''";
        else out += c;
      }
      out += "'";
      return out;
    }
  }
  return "NULL";
}

std::optional<int> compare_values(const Value& a, const Value& b) {
  if (is_null(a) || is_null(b)) return std::nullopt;
  ValueType ta = value_type(a), tb = value_type(b);
  bool a_num = ta == ValueType::Int || ta == ValueType::Float;
  bool b_num = tb == ValueType::Int || tb == ValueType::Float;
  if (a_num != b_num) {
    throw EngineError(EngineError::Kind::TypeError,
                      "cannot compare " + render_value(a) + " with " + render_value(b));
  }
  if (a_num) {
    if (ta == ValueType::Int && tb == ValueType::Int) {
      int64_t x = std::get<int64_t>(a), y = std::get<int64_t>(b);
      return x < y ? -1 : (x > y ? 1 : 0);
    }
    double x = ta == ValueType::Int ? static_cast<double>(std::get<int64_t>(a)) : std::get<double>(a);
    double y = tb == ValueType::Int ? static_cast<double>(std::get<int64_t>(b)) : std::get<double>(b);
    return x < y ? -1 : (x > y ? 1 : 0);
  }
  const auto& x = std::get<std::string>(a);
  const auto& y = std::get<std::string>(b);
  int c = x.compare(y);
  return c < 0 ? -1 : (c > 0 ? 1 : 0);
}

bool value_less(const Value& a, const Value& b) {
  ValueType ta = value_type(a), tb = value_type(b);
  bool a_num = ta == ValueType::Int || ta == ValueType::Float;
  bool b_num = tb == ValueType::Int || tb == ValueType::Float;
  int ra = ta == ValueType::Null ? 0 : (a_num ? 1 : 2);
  int rb = tb == ValueType::Null ? 0 : (b_num ? 1 : 2);
  if (ra != rb) return ra < rb;
  if (ra == 0) return false;
  if (ra == 1) {
    // mixed int/float keys compare numerically; exact for the workloads we run
    if (ta == ValueType::Int && tb == ValueType::Int)
      return std::get<int64_t>(a) < std::get<int64_t>(b);
    double x = ta == ValueType::Int ? static_cast<double>(std::get<int64_t>(a)) : std::get<double>(a);
    double y = tb == ValueType::Int ? static_cast<double>(std::get<int64_t>(b)) : std::get<double>(b);
    return x < y;
  }
  return std::get<std::string>(a) < std::get<std::string>(b);
}

}  // namespace hihooi
