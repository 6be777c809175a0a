#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <shared_mutex>
#include <vector>

#include "depqo/dependency.hpp"

namespace depqo {

class ConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Valid, rejected, and schema-declared dependencies. Schema constraints are always part of the valid set.
// Writers take an exclusive lock; lookups share it.
class MetadataStore {
 public:
  MetadataStore() = default;
  MetadataStore(const MetadataStore& other);
  MetadataStore& operator=(const MetadataStore& other);

  // Declares a PK (as UCC) or FK (as IND) constraint.
  void add_schema_constraint(const Dependency& dependency);

  // Idempotent; recording the opposite verdict of an earlier record throws ConsistencyError.
  void record(const Dependency& dependency, bool valid);

  // Explicit verdict, or a verdict implied by stored dependencies: a UCC is valid if a valid UCC is a subset of it,
  // and an FD is valid if its determinant contains a valid UCC or a valid FD covers it.
  std::optional<bool> lookup(const Dependency& dependency) const;
  bool is_valid(const Dependency& dependency) const { return lookup(dependency).value_or(false); }

  std::vector<Dependency> valid() const;
  std::vector<Dependency> rejected() const;
  std::vector<Dependency> schema_constraints() const;

  // Valid dependencies describing `table`: UCC/FD/OD on it and INDs referencing it.
  std::vector<Dependency> valid_for_table(const std::string& table) const;

  bool empty() const;

  // One dependency per line in canonical form; rejected entries carry a ` [rejected]` suffix, schema constraints a
  // ` [schema]` suffix. Lines starting with '#' are comments.
  std::string to_text() const;
  static MetadataStore from_text(std::string_view text);
  void save(const std::filesystem::path& path) const;
  static MetadataStore load(const std::filesystem::path& path);

 private:
  std::optional<bool> lookup_unlocked(const Dependency& dependency) const;

  mutable std::shared_mutex mutex_;
  std::set<Dependency> valid_;
  std::set<Dependency> rejected_;
  std::set<Dependency> schema_;
};

}  // namespace depqo
