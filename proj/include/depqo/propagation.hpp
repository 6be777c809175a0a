#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "depqo/metadata_store.hpp"
#include "depqo/plan.hpp"

namespace depqo {

// Dependencies of one operator's output relation, stated over its output column names.
//
// Semantics (nulls compare equal, as in grouping):
//  UCC U:     no two output rows agree on all columns of U.
//  FD X->Y:   rows agreeing on X agree on Y.
//  OD X|->Y:  sorting rows by (X, Y) leaves Y non-decreasing; nulls sort first.
//  IND:       every value combination of the base table's `referencing_columns` without nulls occurs in `columns`.
using ColumnSet = std::set<std::string>;

struct NodeFd {
  ColumnSet determinant;
  ColumnSet dependents;

  auto operator<=>(const NodeFd&) const = default;
};

struct NodeOd {
  std::vector<std::string> ordering;
  std::vector<std::string> ordered;

  auto operator<=>(const NodeOd&) const = default;
};

struct NodeInd {
  std::string referencing_table;
  std::vector<std::string> referencing_columns;
  std::vector<std::string> columns;

  auto operator<=>(const NodeInd&) const = default;
};

struct NodeDependencies {
  std::set<ColumnSet> uccs;
  std::set<NodeFd> fds;
  std::set<NodeOd> ods;
  std::set<NodeInd> inds;

  bool has_ucc_within(const ColumnSet& columns) const;
  // True iff an FD with a determinant inside `determinant` covers every column of `dependents`.
  bool implies_fd(const ColumnSet& determinant, const ColumnSet& dependents) const;
  bool has_od(const std::vector<std::string>& ordering, const std::vector<std::string>& ordered) const;
  bool has_ind(const std::string& referencing_table, const std::vector<std::string>& referencing_columns,
               const std::vector<std::string>& columns) const;

  std::vector<std::string> describe() const;
  bool operator==(const NodeDependencies&) const = default;
};

// Computes dependencies recursively per operator. Results are memoized per instance keyed by node identity; use one
// instance per optimization pass, since rewrites produce new nodes.
class DependencyPropagator {
 public:
  explicit DependencyPropagator(const MetadataStore& store) : store_(store) {}

  const NodeDependencies& dependencies_of(const PlanNodePtr& node);

 private:
  NodeDependencies compute(const PlanNodePtr& node);

  const MetadataStore& store_;
  // Holding the node pointer keeps the key address from being reused while cached.
  std::map<const PlanNode*, std::pair<PlanNodePtr, NodeDependencies>> memo_;
};

NodeDependencies dependencies_of(const PlanNodePtr& node, const MetadataStore& store);

// Plan text with each operator followed by its propagated dependencies.
std::string annotate_plan(const PlanNodePtr& plan, const MetadataStore& store);

}  // namespace depqo
