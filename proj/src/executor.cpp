#include "depqo/executor.hpp"

#include <algorithm>
#include <condition_variable>
#include <map>
#include <mutex>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "depqo/plan_analysis.hpp"
#include "depqo/thread_pool.hpp"

namespace depqo {

size_t Relation::column_index(std::string_view name) const {
  const auto found = std::find(names.begin(), names.end(), name);
  if (found == names.end()) throw ExecutionError("intermediate result lacks column '" + std::string{name} + "'");
  return static_cast<size_t>(found - names.begin());
}

std::vector<Value> Relation::row(size_t index) const {
  auto values = std::vector<Value>{};
  for (const auto& column : columns) values.push_back(column[index]);
  return values;
}

std::string PhysicalOperator::description() const {
  switch (kind) {
    case OperatorKind::Scan: {
      auto text = "scan " + get->as<GetNode>().table->name();
      for (const auto& predicate : scan_predicates) {
        text += " [" + make_select(get, predicate)->description().substr(7) + "]";
      }
      return text;
    }
    default:
      return node->description();
  }
}

std::vector<size_t> OperatorGraph::predecessors(size_t id) const {
  const auto& op = operators_.at(id);
  auto result = op.inputs;
  result.insert(result.end(), op.subquery_inputs.begin(), op.subquery_inputs.end());
  std::sort(result.begin(), result.end());
  result.erase(std::unique(result.begin(), result.end()), result.end());
  return result;
}

std::vector<size_t> OperatorGraph::topological_order() const {
  auto pending = std::vector<size_t>(operators_.size());
  auto successors = std::vector<std::vector<size_t>>(operators_.size());
  for (size_t id = 0; id < operators_.size(); ++id) {
    const auto predecessors_of = predecessors(id);
    pending[id] = predecessors_of.size();
    for (const auto predecessor : predecessors_of) successors[predecessor].push_back(id);
  }
  auto ready = std::vector<size_t>{};
  for (size_t id = 0; id < operators_.size(); ++id) {
    if (pending[id] == 0) ready.push_back(id);
  }
  auto order = std::vector<size_t>{};
  while (!ready.empty()) {
    const auto id = *std::min_element(ready.begin(), ready.end());
    std::erase(ready, id);
    order.push_back(id);
    for (const auto successor : successors[id]) {
      if (--pending[successor] == 0) ready.push_back(successor);
    }
  }
  if (order.size() != operators_.size()) throw SchedulingError("operator graph contains a cycle");
  return order;
}

class Scheduler {
 public:
  OperatorGraph run(const PlanNodePtr& plan) {
    graph_.root_ = build(plan, all_output_names(*plan));
    graph_.topological_order();
    return std::move(graph_);
  }

 private:
  size_t build(const PlanNodePtr& node, const ColumnSet& required) {
    auto key = print_plan(*node) + "#";
    for (const auto& column : required) key += column + ",";
    if (const auto found = memo_.find(key); found != memo_.end()) return found->second;

    auto op = PhysicalOperator{};
    op.node = node;
    for (const auto& column : node->output_columns()) {
      if (required.contains(column.name)) op.output_columns.push_back(column.name);
    }

    const auto chain = split_filters(node);
    if (chain.input->type() == PlanNodeType::Get) {
      op.kind = OperatorKind::Scan;
      op.get = chain.input;
      op.scan_predicates.assign(chain.predicates.rbegin(), chain.predicates.rend());
      for (const auto& predicate : op.scan_predicates) add_subqueries(op, predicate);
    } else {
      switch (node->type()) {
        case PlanNodeType::Select:
          op.kind = OperatorKind::Select;
          add_subqueries(op, node->as<SelectNode>().predicate);
          break;
        case PlanNodeType::Join:
          op.kind = OperatorKind::Join;
          break;
        case PlanNodeType::Aggregate:
          op.kind = OperatorKind::Aggregate;
          break;
        case PlanNodeType::Project:
          op.kind = OperatorKind::Project;
          break;
        case PlanNodeType::Union:
          op.kind = OperatorKind::Union;
          break;
        case PlanNodeType::Sort:
          op.kind = OperatorKind::Sort;
          break;
        case PlanNodeType::Get:
          break;
      }
      const auto requirements = child_requirements(*node, required);
      for (size_t index = 0; index < node->children().size(); ++index) {
        op.inputs.push_back(build(node->children()[index], requirements[index]));
      }
    }

    op.id = graph_.operators_.size();
    graph_.operators_.push_back(std::move(op));
    memo_.emplace(std::move(key), graph_.operators_.back().id);
    return graph_.operators_.back().id;
  }

  void add_subqueries(PhysicalOperator& op, const Predicate& predicate) {
    for (const auto& operand : predicate.operands) {
      const auto* subquery = std::get_if<ScalarSubquery>(&operand);
      if (!subquery) continue;
      const auto known = std::any_of(op.subquery_plans.begin(), op.subquery_plans.end(),
                                     [&](const auto& plan) { return plan_equal(*plan, *subquery->plan); });
      if (known) continue;
      op.subquery_plans.push_back(subquery->plan);
      op.subquery_inputs.push_back(build(subquery->plan, all_output_names(*subquery->plan)));
    }
  }

  OperatorGraph graph_;
  std::map<std::string, size_t> memo_;
};

OperatorGraph schedule(const PlanNodePtr& plan) { return Scheduler{}.run(plan); }

size_t ExecutionMetrics::total_operator_rows() const {
  auto total = size_t{0};
  for (const auto& entry : rows_per_operator) total += entry.rows;
  return total;
}

namespace {

struct TupleHash {
  size_t operator()(const std::vector<Value>& tuple) const {
    auto seed = tuple.size();
    for (const auto& value : tuple) hash_combine(seed, ValueHash{}(value));
    return seed;
  }
};

struct OperatorMetrics {
  size_t chunks_scanned{0};
  size_t chunks_pruned_static{0};
  size_t chunks_pruned_dynamic{0};
  size_t join_input_rows{0};
};

using Results = std::vector<std::shared_ptr<const Relation>>;

Relation empty_relation(const std::vector<std::string>& names) {
  auto relation = Relation{names, std::vector<std::vector<Value>>(names.size()), 0};
  return relation;
}

Value reduce_subquery(const Relation& result, SubqueryReduction reduction) {
  if (result.columns.size() != 1) throw ExecutionError("scalar subquery must produce exactly one column");
  const auto& values = result.columns.front();
  if (reduction == SubqueryReduction::Value) {
    if (values.size() > 1) throw ExecutionError("scalar subquery returned multiple rows");
    return values.empty() ? Value{Null{}} : values.front();
  }
  auto best = Value{Null{}};
  for (const auto& value : values) {
    if (is_null(value)) continue;
    if (is_null(best)) {
      best = value;
      continue;
    }
    const auto order = compare_values(value, best);
    if ((reduction == SubqueryReduction::Min && order < 0) || (reduction == SubqueryReduction::Max && order > 0)) {
      best = value;
    }
  }
  return best;
}

Value resolve_operand(const Operand& operand, const PhysicalOperator& op, const Results& results) {
  if (const auto* value = std::get_if<Value>(&operand)) return *value;
  const auto& subquery = std::get<ScalarSubquery>(operand);
  for (size_t index = 0; index < op.subquery_plans.size(); ++index) {
    if (op.subquery_plans[index] == subquery.plan || plan_equal(*op.subquery_plans[index], *subquery.plan)) {
      return reduce_subquery(*results.at(op.subquery_inputs[index]), subquery.reduction);
    }
  }
  throw SchedulingError("subquery result not wired to its consumer");
}

std::pair<Value, Value> resolve_operands(const Predicate& predicate, const PhysicalOperator& op,
                                         const Results& results) {
  auto first = Value{Null{}};
  auto second = Value{Null{}};
  if (!predicate.operands.empty()) first = resolve_operand(predicate.operands[0], op, results);
  if (predicate.operands.size() > 1) second = resolve_operand(predicate.operands[1], op, results);
  return {first, second};
}

Relation run_scan(const PhysicalOperator& op, const Results& results, const ExecutionOptions& options,
                  OperatorMetrics& metrics) {
  const auto& table = *op.get->as<GetNode>().table;
  auto static_predicates = std::vector<ScanPredicate>{};
  auto dynamic_predicates = std::vector<ScanPredicate>{};
  auto all_predicates = std::vector<ScanPredicate>{};
  for (const auto& predicate : op.scan_predicates) {
    const auto [first, second] = resolve_operands(predicate, op, results);
    const auto scan_predicate = ScanPredicate{table.column_id(predicate.column), predicate.condition, first, second};
    (predicate.has_subquery() ? dynamic_predicates : static_predicates).push_back(scan_predicate);
    all_predicates.push_back(scan_predicate);
  }

  auto relation = empty_relation(op.output_columns);
  auto column_ids = std::vector<ColumnID>{};
  for (const auto& name : op.output_columns) column_ids.push_back(table.column_id(name));

  for (ChunkID chunk_id = 0; chunk_id < table.chunk_count(); ++chunk_id) {
    auto pruned = false;
    if (!chunk_may_match(table, chunk_id, static_predicates)) {
      ++metrics.chunks_pruned_static;
      pruned = true;
    } else if (options.dynamic_pruning && !chunk_may_match(table, chunk_id, dynamic_predicates)) {
      ++metrics.chunks_pruned_dynamic;
      pruned = true;
    }
    if (pruned) {
      if (options.verify_pruning && !scan_chunk(table, chunk_id, all_predicates).empty()) {
        throw std::logic_error("chunk " + std::to_string(chunk_id) + " of '" + table.name() +
                               "' was pruned but holds matching rows");
      }
      continue;
    }
    ++metrics.chunks_scanned;
    const auto positions = scan_chunk(table, chunk_id, all_predicates);
    for (size_t index = 0; index < column_ids.size(); ++index) {
      const auto& segment = table.segment(chunk_id, column_ids[index]);
      auto& column = relation.columns[index];
      column.reserve(column.size() + positions.size());
      for (const auto position : positions) column.push_back(segment.value_at(position));
    }
    relation.row_count += positions.size();
  }
  return relation;
}

// Copies the listed rows of `input` into the columns named by `names`.
void append_rows(Relation& output, const Relation& input, const std::vector<size_t>& rows) {
  for (size_t index = 0; index < output.names.size(); ++index) {
    const auto& source = input.columns[input.column_index(output.names[index])];
    auto& target = output.columns[index];
    target.reserve(target.size() + rows.size());
    for (const auto row : rows) target.push_back(source[row]);
  }
  output.row_count += rows.size();
}

Relation run_select(const PhysicalOperator& op, const Results& results) {
  const auto& input = *results.at(op.inputs.at(0));
  const auto& predicate = op.node->as<SelectNode>().predicate;
  const auto [first, second] = resolve_operands(predicate, op, results);
  const auto& values = input.columns[input.column_index(predicate.column)];
  auto rows = std::vector<size_t>{};
  for (size_t row = 0; row < input.row_count; ++row) {
    if (evaluate_condition(predicate.condition, values[row], first, second)) rows.push_back(row);
  }
  auto output = empty_relation(op.output_columns);
  append_rows(output, input, rows);
  return output;
}

std::vector<Value> key_of(const std::vector<const std::vector<Value>*>& columns, size_t row) {
  auto key = std::vector<Value>{};
  key.reserve(columns.size());
  for (const auto* column : columns) key.push_back((*column)[row]);
  return key;
}

bool has_null(const std::vector<Value>& key) { return std::any_of(key.begin(), key.end(), is_null); }

// Builds a chained hash table over `build_rows` keyed by `key(row)`; rows with a null key are left out.
// Single-column keys avoid a tuple allocation per row.
template <typename Body>
void with_keys(const std::vector<const std::vector<Value>*>& build, const std::vector<const std::vector<Value>*>& probe,
               Body&& body) {
  if (build.size() == 1) {
    const auto& build_column = *build.front();
    const auto& probe_column = *probe.front();
    body([&](size_t row) -> const Value& { return build_column[row]; },
         [&](size_t row) -> const Value& { return probe_column[row]; }, [](const Value& key) { return is_null(key); },
         ValueHash{});
  } else {
    body([&](size_t row) { return key_of(build, row); }, [&](size_t row) { return key_of(probe, row); },
         [](const std::vector<Value>& key) { return has_null(key); }, TupleHash{});
  }
}

constexpr auto NO_ROW = std::numeric_limits<size_t>::max();

// Emits matching (left row, right row) pairs, building the hash table on the smaller input.
std::vector<std::pair<size_t, size_t>> hash_match(const Relation& left, const std::vector<std::string>& left_keys,
                                                  const Relation& right, const std::vector<std::string>& right_keys,
                                                  bool build_right) {
  const auto columns_of = [](const Relation& relation, const std::vector<std::string>& keys) {
    auto columns = std::vector<const std::vector<Value>*>{};
    for (const auto& key : keys) columns.push_back(&relation.columns[relation.column_index(key)]);
    return columns;
  };
  const auto left_columns = columns_of(left, left_keys);
  const auto right_columns = columns_of(right, right_keys);
  const auto& build = build_right ? right : left;
  const auto& build_columns = build_right ? right_columns : left_columns;
  const auto& probe = build_right ? left : right;
  const auto& probe_columns = build_right ? left_columns : right_columns;

  auto pairs = std::vector<std::pair<size_t, size_t>>{};
  with_keys(build_columns, probe_columns, [&](auto build_key, auto probe_key, auto null_key, auto hash) {
    using Key = std::decay_t<decltype(build_key(0))>;
    auto heads = std::unordered_map<Key, size_t, decltype(hash)>{};
    auto next = std::vector<size_t>(build.row_count, NO_ROW);
    heads.reserve(build.row_count);
    // Inserting in reverse keeps each chain in ascending row order.
    for (size_t row = build.row_count; row-- > 0;) {
      const auto& key = build_key(row);
      if (null_key(key)) continue;
      const auto [found, inserted] = heads.try_emplace(key, row);
      if (!inserted) {
        next[row] = found->second;
        found->second = row;
      }
    }
    for (size_t row = 0; row < probe.row_count; ++row) {
      const auto& key = probe_key(row);
      if (null_key(key)) continue;
      const auto found = heads.find(key);
      if (found == heads.end()) continue;
      for (auto match = found->second; match != NO_ROW; match = next[match]) {
        pairs.push_back(build_right ? std::pair{row, match} : std::pair{match, row});
      }
    }
  });
  return pairs;
}

Relation combine(const PhysicalOperator& op, const Relation& left, const Relation& right,
                 const std::vector<std::pair<size_t, size_t>>& pairs, const std::vector<size_t>& unmatched_left) {
  auto output = empty_relation(op.output_columns);
  for (size_t index = 0; index < output.names.size(); ++index) {
    const auto& name = output.names[index];
    auto& target = output.columns[index];
    target.reserve(pairs.size() + unmatched_left.size());
    if (const auto found = std::find(left.names.begin(), left.names.end(), name); found != left.names.end()) {
      const auto& source = left.columns[static_cast<size_t>(found - left.names.begin())];
      for (const auto& [row, unused] : pairs) target.push_back(source[row]);
      for (const auto row : unmatched_left) target.push_back(source[row]);
    } else {
      const auto& source = right.columns[right.column_index(name)];
      for (const auto& [unused, row] : pairs) target.push_back(source[row]);
      target.resize(target.size() + unmatched_left.size(), Null{});
    }
  }
  output.row_count = pairs.size() + unmatched_left.size();
  return output;
}

Relation run_join(const PhysicalOperator& op, const Results& results, OperatorMetrics& metrics) {
  const auto& left = *results.at(op.inputs.at(0));
  const auto& right = *results.at(op.inputs.at(1));
  metrics.join_input_rows += left.row_count + right.row_count;
  const auto& join = op.node->as<JoinNode>();

  if (join.mode == JoinMode::Theta) {
    const auto& condition = *join.theta;
    const auto& left_values = left.columns[left.column_index(condition.left)];
    const auto& right_values = right.columns[right.column_index(condition.right)];
    auto pairs = std::vector<std::pair<size_t, size_t>>{};
    for (size_t row = 0; row < left.row_count; ++row) {
      for (size_t other = 0; other < right.row_count; ++other) {
        if (is_null(right_values[other])) continue;
        if (evaluate_condition(condition.condition, left_values[row], right_values[other])) {
          pairs.emplace_back(row, other);
        }
      }
    }
    return combine(op, left, right, pairs, {});
  }

  auto left_keys = std::vector<std::string>{};
  auto right_keys = std::vector<std::string>{};
  for (const auto& key : join.keys) {
    left_keys.push_back(key.left);
    right_keys.push_back(key.right);
  }

  if (join.mode == JoinMode::Semi) {
    auto right_columns = std::vector<const std::vector<Value>*>{};
    for (const auto& key : right_keys) right_columns.push_back(&right.columns[right.column_index(key)]);
    auto left_columns = std::vector<const std::vector<Value>*>{};
    for (const auto& key : left_keys) left_columns.push_back(&left.columns[left.column_index(key)]);
    auto rows = std::vector<size_t>{};
    with_keys(right_columns, left_columns, [&](auto build_key, auto probe_key, auto null_key, auto hash) {
      using Key = std::decay_t<decltype(build_key(0))>;
      auto seen = std::unordered_set<Key, decltype(hash)>{};
      seen.reserve(right.row_count);
      for (size_t row = 0; row < right.row_count; ++row) {
        const auto& key = build_key(row);
        if (!null_key(key)) seen.insert(key);
      }
      for (size_t row = 0; row < left.row_count; ++row) {
        const auto& key = probe_key(row);
        if (!null_key(key) && seen.contains(key)) rows.push_back(row);
      }
    });
    auto output = empty_relation(op.output_columns);
    append_rows(output, left, rows);
    return output;
  }

  const auto build_right = join.mode == JoinMode::Left || right.row_count <= left.row_count;
  const auto pairs = hash_match(left, left_keys, right, right_keys, build_right);
  auto unmatched = std::vector<size_t>{};
  if (join.mode == JoinMode::Left) {
    auto matched = std::vector<bool>(left.row_count, false);
    for (const auto& [row, unused] : pairs) matched[row] = true;
    for (size_t row = 0; row < left.row_count; ++row) {
      if (!matched[row]) unmatched.push_back(row);
    }
  }
  return combine(op, left, right, pairs, unmatched);
}

struct Accumulator {
  Value value{Null{}};
  int64_t count{0};
  bool seen_first{false};
};

void accumulate(Accumulator& accumulator, AggregateFunction function, const Value& input) {
  switch (function) {
    case AggregateFunction::Any:
      if (!accumulator.seen_first) accumulator.value = input;
      accumulator.seen_first = true;
      return;
    case AggregateFunction::Count:
      if (!is_null(input)) ++accumulator.count;
      return;
    default:
      break;
  }
  if (is_null(input)) return;
  if (is_null(accumulator.value)) {
    accumulator.value = input;
    return;
  }
  switch (function) {
    case AggregateFunction::Sum:
      accumulator.value = std::get<int64_t>(accumulator.value) + std::get<int64_t>(input);
      break;
    case AggregateFunction::Min:
      if (compare_values(input, accumulator.value) < 0) accumulator.value = input;
      break;
    case AggregateFunction::Max:
      if (compare_values(input, accumulator.value) > 0) accumulator.value = input;
      break;
    default:
      break;
  }
}

Relation run_aggregate(const PhysicalOperator& op, const Results& results) {
  const auto& input = *results.at(op.inputs.at(0));
  const auto& aggregate = op.node->as<AggregateNode>();
  auto group_columns = std::vector<const std::vector<Value>*>{};
  for (const auto& column : aggregate.group_by) group_columns.push_back(&input.columns[input.column_index(column)]);
  auto input_columns = std::vector<const std::vector<Value>*>{};
  for (const auto& expression : aggregate.aggregates) {
    input_columns.push_back(&input.columns[input.column_index(expression.input)]);
  }

  auto groups = std::unordered_map<std::vector<Value>, size_t, TupleHash>{};
  auto single_groups = std::unordered_map<Value, size_t, ValueHash>{};
  auto keys = std::vector<std::vector<Value>>{};
  auto accumulators = std::vector<std::vector<Accumulator>>{};
  if (aggregate.group_by.empty()) {
    keys.emplace_back();
    accumulators.emplace_back(aggregate.aggregates.size());
  }
  for (size_t row = 0; row < input.row_count; ++row) {
    auto group = size_t{0};
    if (group_columns.size() == 1) {
      const auto& value = (*group_columns.front())[row];
      const auto [found, inserted] = single_groups.try_emplace(value, keys.size());
      if (inserted) {
        keys.push_back({value});
        accumulators.emplace_back(aggregate.aggregates.size());
      }
      group = found->second;
    } else if (!group_columns.empty()) {
      auto key = key_of(group_columns, row);
      const auto [found, inserted] = groups.try_emplace(key, keys.size());
      if (inserted) {
        keys.push_back(std::move(key));
        accumulators.emplace_back(aggregate.aggregates.size());
      }
      group = found->second;
    }
    for (size_t index = 0; index < aggregate.aggregates.size(); ++index) {
      accumulate(accumulators[group][index], aggregate.aggregates[index].function, (*input_columns[index])[row]);
    }
  }

  auto output = empty_relation(op.output_columns);
  for (size_t index = 0; index < output.names.size(); ++index) {
    const auto& name = output.names[index];
    auto& target = output.columns[index];
    const auto group_position = std::find(aggregate.group_by.begin(), aggregate.group_by.end(), name);
    if (group_position != aggregate.group_by.end()) {
      const auto position = static_cast<size_t>(group_position - aggregate.group_by.begin());
      for (const auto& key : keys) target.push_back(key[position]);
      continue;
    }
    auto expression_index = size_t{0};
    while (aggregate.aggregates[expression_index].output_name() != name) ++expression_index;
    const auto function = aggregate.aggregates[expression_index].function;
    for (const auto& group : accumulators) {
      const auto& accumulator = group[expression_index];
      target.push_back(function == AggregateFunction::Count ? Value{accumulator.count} : accumulator.value);
    }
  }
  output.row_count = keys.size();
  return output;
}

Relation run_project(const PhysicalOperator& op, const Results& results) {
  const auto& input = *results.at(op.inputs.at(0));
  auto output = empty_relation(op.output_columns);
  output.row_count = input.row_count;
  for (size_t index = 0; index < output.names.size(); ++index) {
    const auto& expressions = op.node->as<ProjectNode>().expressions;
    const auto& expression = *std::find_if(expressions.begin(), expressions.end(),
                                           [&](const auto& candidate) { return candidate.name == output.names[index]; });
    const auto& source = input.columns[input.column_index(expression.input)];
    if (expression.is_pass_through()) {
      output.columns[index] = source;
      continue;
    }
    const std::vector<Value>* right_column = nullptr;
    if (const auto* name = std::get_if<std::string>(&expression.right_operand)) {
      right_column = &input.columns[input.column_index(*name)];
    }
    auto& target = output.columns[index];
    target.reserve(input.row_count);
    for (size_t row = 0; row < input.row_count; ++row) {
      const auto right = right_column ? (*right_column)[row] : Value{std::get<int64_t>(expression.right_operand)};
      if (is_null(source[row]) || is_null(right)) {
        target.emplace_back(Null{});
        continue;
      }
      const auto lhs = std::get<int64_t>(source[row]);
      const auto rhs = std::get<int64_t>(right);
      switch (*expression.arithmetic) {
        case ArithmeticOperator::Add:
          target.emplace_back(lhs + rhs);
          break;
        case ArithmeticOperator::Subtract:
          target.emplace_back(lhs - rhs);
          break;
        case ArithmeticOperator::Multiply:
          target.emplace_back(lhs * rhs);
          break;
      }
    }
  }
  return output;
}

Relation run_union(const PhysicalOperator& op, const Results& results) {
  const auto& left = *results.at(op.inputs.at(0));
  const auto& right = *results.at(op.inputs.at(1));
  auto output = empty_relation(op.output_columns);
  const auto& names = output_column_names(*op.node);
  for (size_t index = 0; index < output.names.size(); ++index) {
    const auto position = static_cast<size_t>(std::find(names.begin(), names.end(), output.names[index]) - names.begin());
    auto& target = output.columns[index];
    target = left.columns[left.column_index(names[position])];
    const auto& right_source = right.columns[right.column_index(output_column_names(*op.node->right())[position])];
    target.insert(target.end(), right_source.begin(), right_source.end());
  }
  output.row_count = left.row_count + right.row_count;
  return output;
}

Relation run_sort(const PhysicalOperator& op, const Results& results) {
  const auto& input = *results.at(op.inputs.at(0));
  auto key_columns = std::vector<const std::vector<Value>*>{};
  for (const auto& key : op.node->as<SortNode>().keys) key_columns.push_back(&input.columns[input.column_index(key)]);
  auto rows = std::vector<size_t>(input.row_count);
  for (size_t row = 0; row < rows.size(); ++row) rows[row] = row;
  // Variant ordering puts nulls first and compares equal types by value.
  std::stable_sort(rows.begin(), rows.end(), [&](size_t lhs, size_t rhs) {
    for (const auto* column : key_columns) {
      if ((*column)[lhs] < (*column)[rhs]) return true;
      if ((*column)[rhs] < (*column)[lhs]) return false;
    }
    return false;
  });
  auto output = empty_relation(op.output_columns);
  append_rows(output, input, rows);
  return output;
}

Relation run_operator(const PhysicalOperator& op, const Results& results, const ExecutionOptions& options,
                      OperatorMetrics& metrics) {
  switch (op.kind) {
    case OperatorKind::Scan:
      return run_scan(op, results, options, metrics);
    case OperatorKind::Select:
      return run_select(op, results);
    case OperatorKind::Join:
      return run_join(op, results, metrics);
    case OperatorKind::Aggregate:
      return run_aggregate(op, results);
    case OperatorKind::Project:
      return run_project(op, results);
    case OperatorKind::Union:
      return run_union(op, results);
    case OperatorKind::Sort:
      return run_sort(op, results);
  }
  throw ExecutionError("unknown operator");
}

}  // namespace

ExecutionResult execute(const OperatorGraph& graph, const ExecutionOptions& options) {
  const auto& operators = graph.operators();
  auto results = Results(operators.size());
  auto metrics = std::vector<OperatorMetrics>(operators.size());
  auto execution = ExecutionResult{};

  if (options.threads == 0) {
    for (const auto id : graph.topological_order()) {
      results[id] = std::make_shared<const Relation>(run_operator(operators[id], results, options, metrics[id]));
      execution.completion_order.push_back(id);
    }
  } else {
    auto pending = std::vector<size_t>(operators.size());
    auto successors = std::vector<std::vector<size_t>>(operators.size());
    for (size_t id = 0; id < operators.size(); ++id) {
      const auto predecessors = graph.predecessors(id);
      pending[id] = predecessors.size();
      for (const auto predecessor : predecessors) successors[predecessor].push_back(id);
    }
    graph.topological_order();

    auto mutex = std::mutex{};
    auto done = std::condition_variable{};
    auto finished = size_t{0};
    auto failure = std::exception_ptr{};
    auto launched = size_t{0};
    auto launch = std::function<void(size_t)>{};
    // Declared last so its workers are joined before anything they reference goes away.
    auto pool = ThreadPool{options.threads};
    launch = [&](size_t id) {
      {
        auto lock = std::lock_guard{mutex};
        ++launched;
      }
      pool.submit([&, id] {
        auto relation = std::shared_ptr<const Relation>{};
        try {
          relation = std::make_shared<const Relation>(run_operator(operators[id], results, options, metrics[id]));
        } catch (...) {
          auto lock = std::lock_guard{mutex};
          if (!failure) failure = std::current_exception();
          ++finished;
          done.notify_all();
          return;
        }
        auto ready = std::vector<size_t>{};
        {
          auto lock = std::lock_guard{mutex};
          results[id] = std::move(relation);
          execution.completion_order.push_back(id);
          ++finished;
          if (!failure) {
            for (const auto successor : successors[id]) {
              if (--pending[successor] == 0) ready.push_back(successor);
            }
          }
        }
        for (const auto successor : ready) launch(successor);
        done.notify_all();
      });
    };
    auto initial = std::vector<size_t>{};
    for (size_t id = 0; id < operators.size(); ++id) {
      if (pending[id] == 0) initial.push_back(id);
    }
    for (const auto id : initial) launch(id);
    {
      auto lock = std::unique_lock{mutex};
      done.wait(lock, [&] { return finished == operators.size() || (failure && finished == launched); });
    }
    if (failure) std::rethrow_exception(failure);
  }

  for (size_t id = 0; id < operators.size(); ++id) {
    execution.metrics.chunks_scanned += metrics[id].chunks_scanned;
    execution.metrics.chunks_pruned_static += metrics[id].chunks_pruned_static;
    execution.metrics.chunks_pruned_dynamic += metrics[id].chunks_pruned_dynamic;
    execution.metrics.join_input_rows += metrics[id].join_input_rows;
    execution.metrics.rows_per_operator.push_back(OperatorRows{operators[id].description(), results[id]->row_count});
  }
  execution.relation = *results[graph.root()];
  return execution;
}

ExecutionResult execute_plan(const PlanNodePtr& plan, const ExecutionOptions& options) {
  return execute(schedule(plan), options);
}

std::vector<std::vector<std::string>> sorted_rows(const Relation& relation) {
  auto rows = std::vector<std::vector<std::string>>{};
  rows.reserve(relation.row_count);
  for (size_t row = 0; row < relation.row_count; ++row) {
    auto values = std::vector<std::string>{};
    for (const auto& column : relation.columns) {
      values.push_back(is_null(column[row]) ? std::string{"\\N"} : value_to_string(column[row]));
    }
    rows.push_back(std::move(values));
  }
  std::sort(rows.begin(), rows.end());
  return rows;
}

std::string format_relation(const Relation& relation, size_t max_rows) {
  auto out = std::ostringstream{};
  for (size_t index = 0; index < relation.names.size(); ++index) out << (index ? "," : "") << relation.names[index];
  out << '\n';
  for (size_t row = 0; row < std::min(max_rows, relation.row_count); ++row) {
    for (size_t index = 0; index < relation.columns.size(); ++index) {
      const auto& value = relation.columns[index][row];
      out << (index ? "," : "") << (is_null(value) ? std::string{"NULL"} : value_to_string(value));
    }
    out << '\n';
  }
  if (relation.row_count > max_rows) out << "... (" << relation.row_count << " rows)\n";
  return out.str();
}

}  // namespace depqo
