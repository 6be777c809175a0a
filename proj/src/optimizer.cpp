#include "depqo/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <sstream>

#include "depqo/plan_analysis.hpp"
#include "depqo/propagation.hpp"

namespace depqo {

namespace {

constexpr auto DEFAULT_EQUALITY_SELECTIVITY = 0.1;
constexpr auto DEFAULT_RANGE_SELECTIVITY = 1.0 / 3.0;

bool same_children(const PlanNode& node, const std::vector<PlanNodePtr>& children) {
  return std::equal(children.begin(), children.end(), node.children().begin(), node.children().end());
}

PlanNodePtr rebuild(const PlanNodePtr& node, std::vector<PlanNodePtr> children) {
  if (same_children(*node, children)) return node;
  return with_children(*node, std::move(children));
}

// Places `predicate` as deep below `node` as its column allows.
PlanNodePtr sink(const PlanNodePtr& node, const Predicate& predicate) {
  const auto& column = predicate.column;
  switch (node->type()) {
    case PlanNodeType::Join: {
      const auto& join = node->as<JoinNode>();
      if (node->left()->has_column(column)) return rebuild(node, {sink(node->left(), predicate), node->right()});
      // Filtering the null-extended side of an outer join is not equivalent below the join.
      if ((join.mode == JoinMode::Inner || join.mode == JoinMode::Theta) && node->right()->has_column(column)) {
        return rebuild(node, {node->left(), sink(node->right(), predicate)});
      }
      break;
    }
    case PlanNodeType::Sort:
    case PlanNodeType::Select:
      return rebuild(node, {sink(node->left(), predicate)});
    case PlanNodeType::Project: {
      const auto& expressions = node->as<ProjectNode>().expressions;
      const auto pass_through = std::any_of(expressions.begin(), expressions.end(), [&](const auto& expression) {
        return expression.is_pass_through() && expression.name == column;
      });
      if (pass_through) return rebuild(node, {sink(node->left(), predicate)});
      break;
    }
    case PlanNodeType::Aggregate: {
      const auto& group_by = node->as<AggregateNode>().group_by;
      if (std::find(group_by.begin(), group_by.end(), column) != group_by.end()) {
        return rebuild(node, {sink(node->left(), predicate)});
      }
      break;
    }
    default:
      break;
  }
  return make_select(node, predicate);
}

// Applies `rule` top-down. The rule sees the columns ancestors need from a node and returns a replacement or null.
using Rule = std::function<PlanNodePtr(const PlanNodePtr&, const ColumnSet&)>;

PlanNodePtr apply_top_down(const PlanNodePtr& node, const ColumnSet& required, const Rule& rule) {
  auto current = node;
  while (const auto replaced = rule(current, required)) current = replaced;
  const auto requirements = child_requirements(*current, required);
  auto children = std::vector<PlanNodePtr>{};
  for (size_t index = 0; index < current->children().size(); ++index) {
    children.push_back(apply_top_down(current->children()[index], requirements[index], rule));
  }
  return rebuild(current, std::move(children));
}

bool side_unused(const PlanNode& side, const ColumnSet& required) {
  return std::none_of(side.output_columns().begin(), side.output_columns().end(),
                      [&](const auto& column) { return required.contains(column.name); });
}

std::string one_line(const PlanNode& node) { return node.description(); }

std::shared_ptr<const Table> find_table(const PlanNode& node, const std::string& name) {
  if (node.type() == PlanNodeType::Get) {
    const auto& table = node.as<GetNode>().table;
    if (table->name() == name) return table;
  }
  for (const auto& child : node.children()) {
    if (auto table = find_table(*child, name)) return table;
  }
  return nullptr;
}

const ColumnStatistics* base_statistics(const PlanNode& node, const std::string& column) {
  const auto& source = node.column(column).source;
  if (!source) return nullptr;
  const auto table = find_table(node, source->table);
  if (!table) return nullptr;
  return &table->column_statistics(table->column_id(source->column));
}

double distinct_estimate(const PlanNodePtr& node, const std::string& column) {
  const auto rows = estimate_cardinality(node);
  const auto* statistics = base_statistics(*node, column);
  const auto distinct = statistics ? static_cast<double>(statistics->distinct_count) : rows;
  return std::max(1.0, std::min(distinct, rows));
}

double range_fraction(const ColumnStatistics& statistics, const Predicate& predicate) {
  const auto low = integral_value(statistics.min);
  const auto high = integral_value(statistics.max);
  if (!low || !high) return DEFAULT_RANGE_SELECTIVITY;
  const auto operand = [&](size_t index) { return integral_value(std::get<Value>(predicate.operands.at(index))); };
  const auto first = operand(0);
  if (!first) return 0.0;
  if (*low == *high) {
    const auto second = predicate.operands.size() > 1 ? std::get<Value>(predicate.operands[1]) : Value{Null{}};
    return evaluate_condition(predicate.condition, statistics.min, std::get<Value>(predicate.operands[0]), second)
               ? 1.0
               : 0.0;
  }
  const auto width = static_cast<double>(*high - *low);
  auto fraction = 0.0;
  switch (predicate.condition) {
    case PredicateCondition::LessThan:
    case PredicateCondition::LessThanEquals:
      fraction = static_cast<double>(*first - *low) / width;
      break;
    case PredicateCondition::GreaterThan:
    case PredicateCondition::GreaterThanEquals:
      fraction = static_cast<double>(*high - *first) / width;
      break;
    case PredicateCondition::Between: {
      const auto second = operand(1);
      if (!second) return 0.0;
      fraction = static_cast<double>(std::min(*second, *high) - std::max(*first, *low)) / width;
      break;
    }
    default:
      return DEFAULT_RANGE_SELECTIVITY;
  }
  return std::clamp(fraction, 0.0, 1.0);
}

double selectivity(const PlanNode& input, const Predicate& predicate) {
  const auto* statistics = base_statistics(input, predicate.column);
  if (predicate.condition == PredicateCondition::IsNotNull) {
    if (!statistics || statistics->row_count == 0) return 1.0;
    return 1.0 - static_cast<double>(statistics->null_count) / static_cast<double>(statistics->row_count);
  }
  if (predicate.has_subquery()) {
    return predicate.condition == PredicateCondition::Equals ? DEFAULT_EQUALITY_SELECTIVITY
                                                             : DEFAULT_RANGE_SELECTIVITY;
  }
  if (predicate.condition == PredicateCondition::Equals) {
    if (is_null(std::get<Value>(predicate.operands.front()))) return 0.0;
    if (!statistics) return DEFAULT_EQUALITY_SELECTIVITY;
    return 1.0 / static_cast<double>(std::max<size_t>(1, statistics->distinct_count));
  }
  if (!statistics) return DEFAULT_RANGE_SELECTIVITY;
  return range_fraction(*statistics, predicate);
}

// Subquery plan shared by all operands of a predicate created by the join-to-predicate rewrite.
std::optional<std::pair<PlanNodePtr, std::string>> rewritten_side_of(const Predicate& predicate) {
  if (!predicate.has_subquery()) return std::nullopt;
  auto side = std::optional<std::pair<PlanNodePtr, std::string>>{};
  for (const auto& operand : predicate.operands) {
    const auto* subquery = std::get_if<ScalarSubquery>(&operand);
    if (!subquery) return std::nullopt;
    auto found = rewritten_join_side(*subquery->plan);
    if (!found.first) return std::nullopt;
    if (side && !plan_equal(*side->first, *found.first)) return std::nullopt;
    side = std::move(found);
  }
  return side;
}

double estimate_join(const PlanNodePtr& node) {
  const auto& join = node->as<JoinNode>();
  const auto left = estimate_cardinality(node->left());
  const auto right = estimate_cardinality(node->right());
  if (join.mode == JoinMode::Theta) return left * right * DEFAULT_RANGE_SELECTIVITY;
  const auto& key = join.keys.front();
  if (join.mode == JoinMode::Semi) return estimate_semi_join(node->left(), key.left, node->right(), key.right);
  const auto inner = left * right /
                     std::max(distinct_estimate(node->left(), key.left), distinct_estimate(node->right(), key.right));
  return join.mode == JoinMode::Left ? std::max(left, inner) : inner;
}

class GroupByReduction {
 public:
  GroupByReduction(const MetadataStore& store, std::vector<std::string>* fired) : propagator_(store), fired_(fired) {}

  PlanNodePtr operator()(const PlanNodePtr& node, const ColumnSet&) {
    if (node->type() != PlanNodeType::Aggregate) return nullptr;
    const auto& aggregate = node->as<AggregateNode>();
    if (aggregate.group_by.size() < 2) return nullptr;
    const auto& deps = propagator_.dependencies_of(node->left());

    // Later columns are removed first so that leading columns survive as determinants.
    auto kept = aggregate.group_by;
    auto removed = std::vector<std::string>{};
    for (auto index = kept.size(); index-- > 0;) {
      auto others = ColumnSet(kept.begin(), kept.end());
      others.erase(kept[index]);
      if (others.empty() || !deps.implies_fd(others, {kept[index]})) continue;
      removed.insert(removed.begin(), kept[index]);
      kept.erase(kept.begin() + static_cast<std::ptrdiff_t>(index));
    }
    if (removed.empty()) return nullptr;

    auto aggregates = std::vector<AggregateExpression>{};
    for (const auto& column : removed) aggregates.push_back(AggregateExpression{AggregateFunction::Any, column});
    aggregates.insert(aggregates.end(), aggregate.aggregates.begin(), aggregate.aggregates.end());
    auto reduced = make_aggregate(node->left(), kept, std::move(aggregates));
    auto restored = make_project(reduced, output_column_names(*node));
    if (fired_) fired_->push_back("O-1 " + one_line(*node) + " => " + one_line(*reduced));
    return restored;
  }

 private:
  DependencyPropagator propagator_;
  std::vector<std::string>* fired_;
};

class JoinToPredicate {
 public:
  JoinToPredicate(const MetadataStore& store, std::vector<std::string>* fired) : propagator_(store), fired_(fired) {}

  PlanNodePtr operator()(const PlanNodePtr& node, const ColumnSet& required) {
    if (node->type() != PlanNodeType::Join) return nullptr;
    const auto& join = node->as<JoinNode>();
    if ((join.mode != JoinMode::Inner && join.mode != JoinMode::Semi) || join.keys.size() != 1) return nullptr;
    for (size_t side = 0; side < 2; ++side) {
      if (join.mode == JoinMode::Semi && side == 0) continue;
      const auto& filtered = node->children()[side];
      if (join.mode == JoinMode::Inner && !side_unused(*filtered, required)) continue;
      const auto& key = side == 0 ? join.keys[0].left : join.keys[0].right;
      const auto& fact_key = side == 0 ? join.keys[0].right : join.keys[0].left;
      if (auto rewritten = try_side(*node, filtered, key, node->children()[1 - side], fact_key)) return rewritten;
    }
    return nullptr;
  }

 private:
  PlanNodePtr try_side(const PlanNode& join, const PlanNodePtr& filtered, const std::string& key,
                       const PlanNodePtr& fact, const std::string& fact_key) {
    const auto chain = split_filters(filtered);
    if (chain.predicates.empty()) return nullptr;
    if (!std::all_of(chain.predicates.begin(), chain.predicates.end(), has_constant_operands)) return nullptr;
    const auto& deps = propagator_.dependencies_of(chain.input);
    if (!deps.has_ucc_within({key})) return nullptr;

    auto subquery = make_project(filtered, std::vector<std::string>{key});
    const auto unique_match = std::any_of(chain.predicates.begin(), chain.predicates.end(), [&](const auto& p) {
      return p.condition == PredicateCondition::Equals && p.column != key && deps.has_ucc_within({p.column});
    });
    if (unique_match) {
      auto predicate = make_predicate(fact_key, PredicateCondition::Equals,
                                      {ScalarSubquery{subquery, SubqueryReduction::Value}});
      auto result = make_select(fact, std::move(predicate));
      if (fired_) fired_->push_back("O-3 equality " + one_line(join) + " => " + one_line(*result));
      return result;
    }

    // Every filter must select a contiguous key range: a range (or an equality) on a column the key orders.
    const auto ordered = std::all_of(chain.predicates.begin(), chain.predicates.end(), [&](const auto& p) {
      if (p.condition != PredicateCondition::Equals && !p.is_range()) return false;
      return p.column == key || deps.has_od({key}, {p.column});
    });
    if (!ordered) return nullptr;
    const auto& source = fact->column(fact_key).source;
    if (!source || !deps.has_ind(source->table, {source->column}, {key})) return nullptr;

    auto predicate =
        make_predicate(fact_key, PredicateCondition::Between,
                       {ScalarSubquery{subquery, SubqueryReduction::Min}, ScalarSubquery{subquery, SubqueryReduction::Max}});
    auto result = make_select(fact, std::move(predicate));
    if (fired_) fired_->push_back("O-3 range " + one_line(join) + " => " + one_line(*result));
    return result;
  }

  DependencyPropagator propagator_;
  std::vector<std::string>* fired_;
};

class JoinToSemiJoin {
 public:
  JoinToSemiJoin(const MetadataStore& store, std::vector<std::string>* fired) : propagator_(store), fired_(fired) {}

  PlanNodePtr operator()(const PlanNodePtr& node, const ColumnSet& required) {
    if (node->type() != PlanNodeType::Join) return nullptr;
    const auto& join = node->as<JoinNode>();
    if (join.mode != JoinMode::Inner) return nullptr;
    for (size_t side = 0; side < 2; ++side) {
      const auto& filtering = node->children()[side];
      if (!side_unused(*filtering, required)) continue;
      auto keys = ColumnSet{};
      auto oriented = std::vector<JoinKey>{};
      for (const auto& key : join.keys) {
        keys.insert(side == 0 ? key.left : key.right);
        oriented.push_back(side == 0 ? JoinKey{key.right, key.left} : key);
      }
      if (!propagator_.dependencies_of(filtering).has_ucc_within(keys)) continue;
      auto result = make_join(JoinMode::Semi, node->children()[1 - side], filtering, std::move(oriented));
      if (fired_) fired_->push_back("O-2 " + one_line(*node) + " => " + one_line(*result));
      return result;
    }
    return nullptr;
  }

 private:
  DependencyPropagator propagator_;
  std::vector<std::string>* fired_;
};

PlanNodePtr order_chain(const PlanNodePtr& node) {
  if (node->type() != PlanNodeType::Select) {
    auto children = std::vector<PlanNodePtr>{};
    for (const auto& child : node->children()) children.push_back(order_chain(child));
    return rebuild(node, std::move(children));
  }
  const auto chain = split_filters(node);
  const auto input = order_chain(chain.input);
  // Bottom-up order, then stable sort by selectivity so ties keep their original placement.
  auto predicates = std::vector<std::pair<double, Predicate>>{};
  const auto input_rows = std::max(estimate_cardinality(input), 1.0);
  for (auto it = chain.predicates.rbegin(); it != chain.predicates.rend(); ++it) {
    predicates.emplace_back(estimate_cardinality(make_select(input, *it)) / input_rows, *it);
  }
  std::stable_sort(predicates.begin(), predicates.end(),
                   [](const auto& lhs, const auto& rhs) { return lhs.first < rhs.first; });
  auto current = input;
  for (const auto& [fraction, predicate] : predicates) current = make_select(current, predicate);
  if (plan_equal(*current, *node)) return node;
  return current;
}

}  // namespace

PlanNodePtr push_down_predicates(const PlanNodePtr& plan) {
  auto children = std::vector<PlanNodePtr>{};
  for (const auto& child : plan->children()) children.push_back(push_down_predicates(child));
  auto node = rebuild(plan, std::move(children));
  if (node->type() != PlanNodeType::Select) return node;
  const auto pushed = sink(node->left(), node->as<SelectNode>().predicate);
  return plan_equal(*pushed, *node) ? node : pushed;
}

PlanNodePtr rewrite_groupby_reduction(const PlanNodePtr& plan, const MetadataStore& store,
                                      std::vector<std::string>* fired) {
  auto rule = GroupByReduction{store, fired};
  return apply_top_down(plan, all_output_names(*plan), std::ref(rule));
}

PlanNodePtr rewrite_join_to_predicate(const PlanNodePtr& plan, const MetadataStore& store,
                                      std::vector<std::string>* fired) {
  auto rule = JoinToPredicate{store, fired};
  return apply_top_down(plan, all_output_names(*plan), std::ref(rule));
}

PlanNodePtr rewrite_join_to_semijoin(const PlanNodePtr& plan, const MetadataStore& store,
                                     std::vector<std::string>* fired) {
  auto rule = JoinToSemiJoin{store, fired};
  return apply_top_down(plan, all_output_names(*plan), std::ref(rule));
}

PlanNodePtr order_selections(const PlanNodePtr& plan) { return order_chain(plan); }

std::pair<PlanNodePtr, std::string> rewritten_join_side(const PlanNode& subquery) {
  if (subquery.type() != PlanNodeType::Project) return {};
  const auto& expressions = subquery.as<ProjectNode>().expressions;
  if (expressions.size() != 1 || !expressions.front().is_pass_through()) return {};
  return {subquery.left(), expressions.front().name};
}

double estimate_semi_join(const PlanNodePtr& left, const std::string& left_key, const PlanNodePtr& right,
                          const std::string& right_key) {
  const auto rows = estimate_cardinality(left);
  const auto left_distinct = distinct_estimate(left, left_key);
  const auto right_distinct = distinct_estimate(right, right_key);
  return rows * std::min(1.0, right_distinct / left_distinct);
}

double estimate_cardinality(const PlanNodePtr& node) {
  switch (node->type()) {
    case PlanNodeType::Get:
      return static_cast<double>(node->as<GetNode>().table->row_count());
    case PlanNodeType::Select: {
      const auto& predicate = node->as<SelectNode>().predicate;
      // A predicate produced by the join-to-predicate rewrite is estimated as the semi-join it stands for.
      if (const auto side = rewritten_side_of(predicate)) {
        return estimate_semi_join(node->left(), predicate.column, side->first, side->second);
      }
      return estimate_cardinality(node->left()) * selectivity(*node->left(), predicate);
    }
    case PlanNodeType::Join:
      return estimate_join(node);
    case PlanNodeType::Aggregate: {
      const auto& group_by = node->as<AggregateNode>().group_by;
      if (group_by.empty()) return 1.0;
      const auto input = estimate_cardinality(node->left());
      auto groups = 1.0;
      for (const auto& column : group_by) groups *= distinct_estimate(node->left(), column);
      return std::min(input, groups);
    }
    case PlanNodeType::Union:
      return estimate_cardinality(node->left()) + estimate_cardinality(node->right());
    case PlanNodeType::Project:
    case PlanNodeType::Sort:
      return estimate_cardinality(node->left());
  }
  return 0.0;
}

OptimizationResult optimize(const PlanNodePtr& plan, const MetadataStore& store, const OptimizerOptions& options) {
  auto result = OptimizationResult{plan, {}};
  auto& current = result.plan;
  if (options.pushdown) current = push_down_predicates(current);
  if (options.group_by_reduction) current = rewrite_groupby_reduction(current, store, &result.fired_rules);
  if (options.join_to_predicate) current = rewrite_join_to_predicate(current, store, &result.fired_rules);
  if (options.join_to_semijoin) current = rewrite_join_to_semijoin(current, store, &result.fired_rules);
  if (options.pushdown) current = push_down_predicates(current);
  if (options.order_selections) current = order_selections(current);
  return result;
}

namespace {

std::string annotate_estimate(const PlanNode& node) {
  // Estimation needs shared ownership; every printed node is owned by the plan, so alias it.
  auto alias = PlanNodePtr{PlanNodePtr{}, &node};
  auto stream = std::ostringstream{};
  stream << "  (est " << std::fixed << std::setprecision(1) << estimate_cardinality(alias) << ")";
  return stream.str();
}

}  // namespace

std::vector<ExplainStage> optimization_stages(const PlanNodePtr& plan, const MetadataStore& store,
                                              const OptimizerOptions& options) {
  auto stages = std::vector<ExplainStage>{};
  auto staged = options;
  staged.group_by_reduction = false;
  staged.join_to_semijoin = false;
  staged.join_to_predicate = false;
  stages.push_back({"original", optimize(plan, store, staged)});
  staged.group_by_reduction = options.group_by_reduction;
  stages.push_back({"O-1", optimize(plan, store, staged)});
  staged.join_to_semijoin = options.join_to_semijoin;
  stages.push_back({"O-1 O-2", optimize(plan, store, staged)});
  staged.join_to_predicate = options.join_to_predicate;
  stages.push_back({"O-1 O-2 O-3", optimize(plan, store, staged)});
  return stages;
}

std::string explain_stages(const PlanNodePtr& plan, const MetadataStore& store, const OptimizerOptions& options) {
  auto out = std::string{};
  for (const auto& stage : optimization_stages(plan, store, options)) {
    out += "stage [" + stage.label + "]:\n";
    for (const auto& rule : stage.result.fired_rules) out += "  fired " + rule + "\n";
    out += print_plan(*stage.result.plan, annotate_estimate);
  }
  return out;
}

std::string explain(const PlanNodePtr& plan, const MetadataStore& store, const OptimizerOptions& options) {
  const auto annotate = annotate_estimate;
  const auto optimized = optimize(plan, store, options);
  auto out = std::string{"original:\n"} + print_plan(*plan, annotate);
  out += "rules fired:\n";
  if (optimized.fired_rules.empty()) out += "  (none)\n";
  for (const auto& rule : optimized.fired_rules) out += "  " + rule + "\n";
  out += "optimized:\n" + print_plan(*optimized.plan, annotate);
  return out;
}

PlanNodePtr QueryOptimizer::get_plan(const PlanNodePtr& original) {
  if (auto cached = cache_.lookup(*original)) return cached->optimized;
  ++optimizer_calls_;
  auto optimized = optimize(original, store_, options_).plan;
  cache_.insert(original, optimized);
  return optimized;
}

}  // namespace depqo
