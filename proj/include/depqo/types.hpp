#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

namespace depqo {

using ChunkID = uint32_t;
using ChunkOffset = uint32_t;
using ColumnID = uint16_t;

enum class DataType : uint8_t { Int, String, Date };

std::string_view data_type_name(DataType type);
DataType parse_data_type(std::string_view name);

// Days since 1970-01-01. Integer-backed so continuity checks apply to date keys.
struct Date {
  int64_t days{0};
  auto operator<=>(const Date&) const = default;
};

Date parse_date(std::string_view text);
std::string format_date(Date date);

struct Null {
  auto operator<=>(const Null&) const = default;
};

// Null sorts before every other alternative; comparisons across non-null types are rejected by callers.
using Value = std::variant<Null, int64_t, std::string, Date>;

inline bool is_null(const Value& value) { return std::holds_alternative<Null>(value); }

std::optional<DataType> value_type(const Value& value);

// Integer view of Int and Date values, used by continuity and range arithmetic.
std::optional<int64_t> integral_value(const Value& value);

// Parses text according to `type`; throws TypeError on malformed input. Empty text yields Null.
Value parse_value(std::string_view text, DataType type);

// Textual form used by the plan printer and CSV writer: strings are emitted raw, dates as YYYY-MM-DD.
std::string value_to_string(const Value& value);

// Three-way compare of two non-null values of the same type. Throws TypeError otherwise.
std::strong_ordering compare_values(const Value& lhs, const Value& rhs);

bool comparable(const Value& lhs, const Value& rhs);

std::ostream& operator<<(std::ostream& stream, const Value& value);

struct ValueHash {
  size_t operator()(const Value& value) const noexcept;
};

inline void hash_combine(size_t& seed, size_t value) {
  seed ^= value + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
}

class TypeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LookupError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace depqo

template <>
struct std::hash<depqo::Date> {
  size_t operator()(const depqo::Date& date) const noexcept { return std::hash<int64_t>{}(date.days); }
};

template <>
struct std::hash<depqo::Null> {
  size_t operator()(const depqo::Null&) const noexcept { return 0x5bd1e995; }
};
