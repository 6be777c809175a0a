#include "depqo/dependency.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace depqo {

namespace {

std::vector<std::string> sorted_unique(std::vector<std::string> columns) {
  std::sort(columns.begin(), columns.end());
  columns.erase(std::unique(columns.begin(), columns.end()), columns.end());
  return columns;
}

void require_columns(const std::vector<std::string>& columns, std::string_view what) {
  if (columns.empty()) throw std::invalid_argument(std::string{what} + " needs at least one column");
  for (const auto& column : columns) {
    if (column.empty()) throw std::invalid_argument(std::string{what} + " has an empty column name");
  }
}

std::string format_side(const std::string& table, const std::vector<std::string>& columns) {
  auto text = table + "(";
  for (size_t index = 0; index < columns.size(); ++index) {
    if (index) text += ", ";
    text += columns[index];
  }
  return text + ")";
}

std::string_view trim(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  return text;
}

std::pair<std::string, std::vector<std::string>> parse_side(std::string_view text) {
  text = trim(text);
  const auto open = text.find('(');
  if (open == std::string_view::npos || text.back() != ')') {
    throw std::invalid_argument("malformed dependency side '" + std::string{text} + "'");
  }
  auto table = std::string{trim(text.substr(0, open))};
  auto columns = std::vector<std::string>{};
  auto inner = text.substr(open + 1, text.size() - open - 2);
  while (!inner.empty()) {
    const auto comma = inner.find(',');
    columns.emplace_back(trim(inner.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    inner.remove_prefix(comma + 1);
  }
  return {std::move(table), std::move(columns)};
}

}  // namespace

std::string_view dependency_kind_name(DependencyKind kind) {
  switch (kind) {
    case DependencyKind::UCC:
      return "UCC";
    case DependencyKind::FD:
      return "FD";
    case DependencyKind::OD:
      return "OD";
    case DependencyKind::IND:
      return "IND";
  }
  return "?";
}

Dependency Dependency::ucc(std::string table, std::vector<std::string> columns) {
  require_columns(columns, "UCC");
  return Dependency{DependencyKind::UCC, std::move(table), sorted_unique(std::move(columns)), {}, {}};
}

Dependency Dependency::fd(std::string table, std::vector<std::string> determinant,
                          std::vector<std::string> dependents) {
  require_columns(determinant, "FD determinant");
  require_columns(dependents, "FD dependents");
  determinant = sorted_unique(std::move(determinant));
  dependents = sorted_unique(std::move(dependents));
  for (const auto& column : dependents) {
    if (std::binary_search(determinant.begin(), determinant.end(), column)) {
      throw std::invalid_argument("FD determinant and dependents overlap in '" + column + "'");
    }
  }
  auto referenced = table;
  return Dependency{DependencyKind::FD, std::move(table), std::move(determinant), std::move(referenced),
                    std::move(dependents)};
}

Dependency Dependency::od(std::string table, std::vector<std::string> ordering, std::vector<std::string> ordered) {
  require_columns(ordering, "OD ordering");
  require_columns(ordered, "OD ordered");
  auto referenced = table;
  return Dependency{DependencyKind::OD, std::move(table), std::move(ordering), std::move(referenced),
                    std::move(ordered)};
}

Dependency Dependency::ind(std::string table, std::vector<std::string> columns, std::string referenced_table,
                           std::vector<std::string> referenced_columns) {
  require_columns(columns, "IND");
  require_columns(referenced_columns, "IND");
  if (columns.size() != referenced_columns.size()) throw std::invalid_argument("IND sides differ in arity");
  return Dependency{DependencyKind::IND, std::move(table), std::move(columns), std::move(referenced_table),
                    std::move(referenced_columns)};
}

std::string Dependency::to_string() const {
  auto text = std::string{dependency_kind_name(kind)} + " " + format_side(table, columns);
  if (kind != DependencyKind::UCC) text += " -> " + format_side(referenced_table, dependents);
  return text;
}

Dependency Dependency::parse(std::string_view text) {
  text = trim(text);
  const auto space = text.find(' ');
  if (space == std::string_view::npos) throw std::invalid_argument("malformed dependency '" + std::string{text} + "'");
  const auto kind = text.substr(0, space);
  const auto rest = text.substr(space + 1);
  const auto arrow = rest.find("->");
  if (kind == "UCC") {
    if (arrow != std::string_view::npos) throw std::invalid_argument("UCC takes no arrow: '" + std::string{text} + "'");
    auto [table, columns] = parse_side(rest);
    return ucc(std::move(table), std::move(columns));
  }
  if (arrow == std::string_view::npos) throw std::invalid_argument("missing '->' in '" + std::string{text} + "'");
  auto [table, columns] = parse_side(rest.substr(0, arrow));
  auto [referenced_table, referenced_columns] = parse_side(rest.substr(arrow + 2));
  if (kind == "IND") {
    return ind(std::move(table), std::move(columns), std::move(referenced_table), std::move(referenced_columns));
  }
  if (referenced_table != table) {
    throw std::invalid_argument("both sides of '" + std::string{text} + "' must name the same table");
  }
  if (kind == "FD") return fd(std::move(table), std::move(columns), std::move(referenced_columns));
  if (kind == "OD") return od(std::move(table), std::move(columns), std::move(referenced_columns));
  throw std::invalid_argument("unknown dependency kind '" + std::string{kind} + "'");
}

std::set<std::string> Dependency::tables() const {
  auto result = std::set<std::string>{table};
  if (!referenced_table.empty()) result.insert(referenced_table);
  return result;
}

}  // namespace depqo
