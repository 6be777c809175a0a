#pragma once

#include <compare>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace depqo {

enum class DependencyKind : uint8_t { UCC, FD, OD, IND };

std::string_view dependency_kind_name(DependencyKind kind);

// A data dependency over base-table columns.
//  UCC: `table(columns)` is unique; columns kept sorted.
//  FD:  `table(columns) -> table(dependents)`; both sides sorted and disjoint.
//  OD:  ordering list `columns` orders list `dependents`; attribute order is significant.
//  IND: `table(columns)` values are contained in `referenced_table(dependents)`; equal arity.
struct Dependency {
  DependencyKind kind{DependencyKind::UCC};
  std::string table;
  std::vector<std::string> columns;
  std::string referenced_table;
  std::vector<std::string> dependents;

  static Dependency ucc(std::string table, std::vector<std::string> columns);
  static Dependency fd(std::string table, std::vector<std::string> determinant, std::vector<std::string> dependents);
  static Dependency od(std::string table, std::vector<std::string> ordering, std::vector<std::string> ordered);
  static Dependency ind(std::string table, std::vector<std::string> columns, std::string referenced_table,
                        std::vector<std::string> referenced_columns);

  // Canonical single-line form, e.g. `UCC date_dim(d_sk)` or `IND sales(s_sold_date) -> date_dim(d_sk)`.
  std::string to_string() const;
  static Dependency parse(std::string_view text);

  // Tables whose data the dependency describes.
  std::set<std::string> tables() const;

  auto operator<=>(const Dependency&) const = default;
};

}  // namespace depqo
