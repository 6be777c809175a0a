#include "depqo/types.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

namespace depqo {

std::string_view data_type_name(DataType type) {
  switch (type) {
    case DataType::Int:
      return "int";
    case DataType::String:
      return "string";
    case DataType::Date:
      return "date";
  }
  return "?";
}

DataType parse_data_type(std::string_view name) {
  if (name == "int") return DataType::Int;
  if (name == "string") return DataType::String;
  if (name == "date") return DataType::Date;
  throw TypeError("unknown data type '" + std::string{name} + "'");
}

namespace {

template <typename T>
bool parse_integer(std::string_view text, T& out) {
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

}  // namespace

Date parse_date(std::string_view text) {
  int year = 0;
  unsigned month = 0;
  unsigned day = 0;
  if (text.size() != 10 || text[4] != '-' || text[7] != '-' || !parse_integer(text.substr(0, 4), year) ||
      !parse_integer(text.substr(5, 2), month) || !parse_integer(text.substr(8, 2), day)) {
    throw TypeError("malformed date '" + std::string{text} + "', expected YYYY-MM-DD");
  }
  const auto ymd = std::chrono::year{year} / std::chrono::month{month} / std::chrono::day{day};
  if (!ymd.ok()) throw TypeError("invalid date '" + std::string{text} + "'");
  return Date{std::chrono::sys_days{ymd}.time_since_epoch().count()};
}

std::string format_date(Date date) {
  const auto ymd = std::chrono::year_month_day{std::chrono::sys_days{std::chrono::days{date.days}}};
  char buffer[16];
  std::snprintf(buffer, sizeof(buffer), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buffer;
}

std::optional<DataType> value_type(const Value& value) {
  switch (value.index()) {
    case 1:
      return DataType::Int;
    case 2:
      return DataType::String;
    case 3:
      return DataType::Date;
    default:
      return std::nullopt;
  }
}

std::optional<int64_t> integral_value(const Value& value) {
  if (const auto* integer = std::get_if<int64_t>(&value)) return *integer;
  if (const auto* date = std::get_if<Date>(&value)) return date->days;
  return std::nullopt;
}

Value parse_value(std::string_view text, DataType type) {
  if (text.empty()) return Null{};
  switch (type) {
    case DataType::Int: {
      int64_t result = 0;
      if (!parse_integer(text, result)) throw TypeError("malformed integer '" + std::string{text} + "'");
      return result;
    }
    case DataType::String:
      return std::string{text};
    case DataType::Date:
      return parse_date(text);
  }
  return Null{};
}

std::string value_to_string(const Value& value) {
  return std::visit(
      [](const auto& alternative) -> std::string {
        using T = std::decay_t<decltype(alternative)>;
        if constexpr (std::is_same_v<T, Null>) {
          return "";
        } else if constexpr (std::is_same_v<T, int64_t>) {
          return std::to_string(alternative);
        } else if constexpr (std::is_same_v<T, std::string>) {
          return alternative;
        } else {
          return format_date(alternative);
        }
      },
      value);
}

bool comparable(const Value& lhs, const Value& rhs) {
  return !is_null(lhs) && lhs.index() == rhs.index();
}

std::strong_ordering compare_values(const Value& lhs, const Value& rhs) {
  if (!comparable(lhs, rhs)) {
    throw TypeError("cannot compare '" + value_to_string(lhs) + "' with '" + value_to_string(rhs) + "'");
  }
  return lhs <=> rhs;
}

std::ostream& operator<<(std::ostream& stream, const Value& value) {
  if (is_null(value)) return stream << "NULL";
  return stream << value_to_string(value);
}

size_t ValueHash::operator()(const Value& value) const noexcept {
  // Int and Date share a representation; keeping the index in the hash keeps them apart in mixed sets.
  size_t seed = value.index();
  hash_combine(seed, std::visit([](const auto& alternative) { return std::hash<std::decay_t<decltype(alternative)>>{}(alternative); }, value));
  return seed;
}

}  // namespace depqo
