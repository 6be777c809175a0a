#include "depqo/plan_analysis.hpp"

namespace depqo {

ColumnSet all_output_names(const PlanNode& node) {
  auto names = ColumnSet{};
  for (const auto& column : node.output_columns()) names.insert(column.name);
  return names;
}

std::vector<ColumnSet> child_requirements(const PlanNode& node, const ColumnSet& required) {
  const auto split = [&](ColumnSet needed) {
    auto sides = std::vector<ColumnSet>(node.children().size());
    for (size_t index = 0; index < sides.size(); ++index) {
      for (const auto& column : node.children()[index]->output_columns()) {
        if (needed.contains(column.name)) sides[index].insert(column.name);
      }
    }
    return sides;
  };

  switch (node.type()) {
    case PlanNodeType::Get:
      return {};
    case PlanNodeType::Select: {
      auto needed = required;
      needed.insert(node.as<SelectNode>().predicate.column);
      return split(needed);
    }
    case PlanNodeType::Join: {
      const auto& join = node.as<JoinNode>();
      auto needed = required;
      for (const auto& key : join.keys) {
        needed.insert(key.left);
        needed.insert(key.right);
      }
      if (join.theta) {
        needed.insert(join.theta->left);
        needed.insert(join.theta->right);
      }
      return split(needed);
    }
    case PlanNodeType::Aggregate: {
      const auto& aggregate = node.as<AggregateNode>();
      auto needed = ColumnSet(aggregate.group_by.begin(), aggregate.group_by.end());
      for (const auto& expression : aggregate.aggregates) needed.insert(expression.input);
      return split(needed);
    }
    case PlanNodeType::Project: {
      auto needed = ColumnSet{};
      for (const auto& expression : node.as<ProjectNode>().expressions) {
        if (!required.contains(expression.name)) continue;
        needed.insert(expression.input);
        if (const auto* column = std::get_if<std::string>(&expression.right_operand)) {
          if (expression.arithmetic) needed.insert(*column);
        }
      }
      return split(needed);
    }
    case PlanNodeType::Union:
      return {all_output_names(*node.left()), all_output_names(*node.right())};
    case PlanNodeType::Sort: {
      auto needed = required;
      for (const auto& key : node.as<SortNode>().keys) needed.insert(key);
      return split(needed);
    }
  }
  return {};
}

FilterChain split_filters(const PlanNodePtr& node) {
  auto chain = FilterChain{node, {}};
  while (chain.input->type() == PlanNodeType::Select) {
    chain.predicates.push_back(chain.input->as<SelectNode>().predicate);
    chain.input = chain.input->left();
  }
  return chain;
}

bool has_constant_operands(const Predicate& predicate) { return !predicate.has_subquery(); }

}  // namespace depqo
