#pragma once

#include <optional>
#include <vector>

#include "depqo/plan.hpp"
#include "depqo/propagation.hpp"

namespace depqo {

// Columns each child must supply so that `node` can produce `required` of its outputs.
std::vector<ColumnSet> child_requirements(const PlanNode& node, const ColumnSet& required);

ColumnSet all_output_names(const PlanNode& node);

// A run of selections directly above `input`. `predicates` lists them top-down.
struct FilterChain {
  PlanNodePtr input;
  std::vector<Predicate> predicates;
};

FilterChain split_filters(const PlanNodePtr& node);

bool has_constant_operands(const Predicate& predicate);

}  // namespace depqo
