#include "depqo/plan.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace depqo {

std::string_view join_mode_name(JoinMode mode) {
  switch (mode) {
    case JoinMode::Inner:
      return "inner";
    case JoinMode::Semi:
      return "semi";
    case JoinMode::Left:
      return "left";
    case JoinMode::Theta:
      return "theta";
  }
  return "?";
}

std::string_view aggregate_function_name(AggregateFunction function) {
  switch (function) {
    case AggregateFunction::Sum:
      return "sum";
    case AggregateFunction::Min:
      return "min";
    case AggregateFunction::Max:
      return "max";
    case AggregateFunction::Count:
      return "count";
    case AggregateFunction::Any:
      return "any";
  }
  return "?";
}

std::string_view subquery_reduction_name(SubqueryReduction reduction) {
  switch (reduction) {
    case SubqueryReduction::Value:
      return "value";
    case SubqueryReduction::Min:
      return "min";
    case SubqueryReduction::Max:
      return "max";
  }
  return "?";
}

bool Predicate::has_subquery() const {
  return std::any_of(operands.begin(), operands.end(),
                     [](const Operand& operand) { return std::holds_alternative<ScalarSubquery>(operand); });
}

bool Predicate::is_range() const {
  return condition == PredicateCondition::LessThan || condition == PredicateCondition::LessThanEquals ||
         condition == PredicateCondition::GreaterThan || condition == PredicateCondition::GreaterThanEquals ||
         condition == PredicateCondition::Between;
}

std::string AggregateExpression::output_name() const {
  if (function == AggregateFunction::Any) return input;
  return std::string{aggregate_function_name(function)} + "(" + input + ")";
}

PlanNode::PlanNode(PlanNodePayload payload, std::vector<PlanNodePtr> children, std::vector<ColumnInfo> output_columns)
    : payload_(std::move(payload)), children_(std::move(children)), output_columns_(std::move(output_columns)) {}

const ColumnInfo* PlanNode::find_column(std::string_view name) const {
  for (const auto& column : output_columns_) {
    if (column.name == name) return &column;
  }
  return nullptr;
}

const ColumnInfo& PlanNode::column(std::string_view name) const {
  if (const auto* column = find_column(name)) return *column;
  throw BindError("unknown column '" + std::string{name} + "'");
}

std::vector<std::string> output_column_names(const PlanNode& plan) {
  auto names = std::vector<std::string>{};
  for (const auto& column : plan.output_columns()) names.push_back(column.name);
  return names;
}

namespace {

void require_unique_names(const std::vector<ColumnInfo>& columns) {
  for (size_t index = 0; index < columns.size(); ++index) {
    for (size_t other = index + 1; other < columns.size(); ++other) {
      if (columns[index].name == columns[other].name) {
        throw BindError("ambiguous column '" + columns[index].name + "' in operator output");
      }
    }
  }
}

const ColumnInfo& bind_column(const PlanNode& input, std::string_view name) {
  if (const auto* column = input.find_column(name)) return *column;
  throw BindError("unknown column '" + std::string{name} + "'");
}

std::string quote_string(const std::string& text) {
  auto quoted = std::string{"'"};
  for (const auto character : text) {
    if (character == '\'') quoted.push_back('\'');
    quoted.push_back(character);
  }
  return quoted + "'";
}

std::string format_constant(const Value& value) {
  if (is_null(value)) return "null";
  if (std::holds_alternative<std::string>(value)) return quote_string(std::get<std::string>(value));
  return value_to_string(value);
}

std::string join_list(const std::vector<std::string>& items) {
  auto text = std::string{};
  for (size_t index = 0; index < items.size(); ++index) {
    if (index) text += ",";
    text += items[index];
  }
  return text;
}

std::string_view arithmetic_symbol(ArithmeticOperator op) {
  switch (op) {
    case ArithmeticOperator::Add:
      return "+";
    case ArithmeticOperator::Subtract:
      return "-";
    case ArithmeticOperator::Multiply:
      return "*";
  }
  return "?";
}

// Distinct subquery plans of a predicate in order of first appearance; ids in the text form are 1-based positions.
std::vector<PlanNodePtr> distinct_subqueries(const Predicate& predicate) {
  auto plans = std::vector<PlanNodePtr>{};
  for (const auto& operand : predicate.operands) {
    const auto* subquery = std::get_if<ScalarSubquery>(&operand);
    if (!subquery) continue;
    const auto known = std::any_of(plans.begin(), plans.end(),
                                   [&](const PlanNodePtr& plan) { return plan_equal(*plan, *subquery->plan); });
    if (!known) plans.push_back(subquery->plan);
  }
  return plans;
}

std::string format_operand(const Operand& operand, const std::vector<PlanNodePtr>& subqueries) {
  if (const auto* value = std::get_if<Value>(&operand)) return format_constant(*value);
  const auto& subquery = std::get<ScalarSubquery>(operand);
  auto id = size_t{0};
  for (; id < subqueries.size(); ++id) {
    if (plan_equal(*subqueries[id], *subquery.plan)) break;
  }
  return std::string{subquery_reduction_name(subquery.reduction)} + "(@" + std::to_string(id + 1) + ")";
}

std::string format_predicate(const Predicate& predicate, const std::vector<PlanNodePtr>& subqueries) {
  auto text = predicate.column + " ";
  switch (predicate.condition) {
    case PredicateCondition::IsNotNull:
      return text + "is not null";
    case PredicateCondition::Between:
      return text + "between " + format_operand(predicate.operands.at(0), subqueries) + " and " +
             format_operand(predicate.operands.at(1), subqueries);
    default:
      return text + std::string{condition_symbol(predicate.condition)} + " " +
             format_operand(predicate.operands.at(0), subqueries);
  }
}

}  // namespace

std::string PlanNode::description() const {
  return std::visit(
      [&](const auto& node) -> std::string {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, GetNode>) {
          return "get " + node.table->name();
        } else if constexpr (std::is_same_v<T, SelectNode>) {
          return "select " + format_predicate(node.predicate, distinct_subqueries(node.predicate));
        } else if constexpr (std::is_same_v<T, JoinNode>) {
          auto conditions = std::vector<std::string>{};
          if (node.theta) {
            conditions.push_back(node.theta->left + std::string{condition_symbol(node.theta->condition)} +
                                 node.theta->right);
          }
          for (const auto& key : node.keys) conditions.push_back(key.left + "=" + key.right);
          return "join " + std::string{join_mode_name(node.mode)} + " on=[" + join_list(conditions) + "]";
        } else if constexpr (std::is_same_v<T, AggregateNode>) {
          auto aggregates = std::vector<std::string>{};
          for (const auto& aggregate : node.aggregates) {
            aggregates.push_back(std::string{aggregate_function_name(aggregate.function)} + "(" + aggregate.input + ")");
          }
          return "aggregate group=[" + join_list(node.group_by) + "] aggs=[" + join_list(aggregates) + "]";
        } else if constexpr (std::is_same_v<T, ProjectNode>) {
          auto expressions = std::vector<std::string>{};
          for (const auto& expression : node.expressions) {
            if (expression.is_pass_through()) {
              expressions.push_back(expression.input);
              continue;
            }
            const auto right = std::holds_alternative<std::string>(expression.right_operand)
                                   ? std::get<std::string>(expression.right_operand)
                                   : std::to_string(std::get<int64_t>(expression.right_operand));
            expressions.push_back(expression.name + "=" + expression.input +
                                  std::string{arithmetic_symbol(*expression.arithmetic)} + right);
          }
          return "project [" + join_list(expressions) + "]";
        } else if constexpr (std::is_same_v<T, UnionNode>) {
          return "union";
        } else {
          return "sort [" + join_list(node.keys) + "]";
        }
      },
      payload_);
}

PlanNodePtr make_get(const Database& database, std::string_view table_name) {
  if (!database.has_table(table_name)) throw BindError("unknown table '" + std::string{table_name} + "'");
  return make_get(database.get_table(table_name));
}

PlanNodePtr make_get(std::shared_ptr<const Table> table) {
  auto columns = std::vector<ColumnInfo>{};
  for (const auto& definition : table->columns()) {
    columns.push_back(ColumnInfo{definition.name, definition.type, BaseColumn{table->name(), definition.name}});
  }
  require_unique_names(columns);
  return std::make_shared<const PlanNode>(GetNode{std::move(table)}, std::vector<PlanNodePtr>{}, std::move(columns));
}

Predicate make_predicate(std::string column, PredicateCondition condition, std::vector<Operand> operands) {
  return Predicate{std::move(column), condition, std::move(operands)};
}

PlanNodePtr make_select(PlanNodePtr child, Predicate predicate) {
  const auto& column = bind_column(*child, predicate.column);
  const auto expected_operands = predicate.condition == PredicateCondition::IsNotNull ? 0u
                                 : predicate.condition == PredicateCondition::Between ? 2u
                                                                                      : 1u;
  if (predicate.operands.size() != expected_operands) {
    throw BindError("predicate on '" + predicate.column + "' expects " + std::to_string(expected_operands) +
                    " operands, got " + std::to_string(predicate.operands.size()));
  }
  for (const auto& operand : predicate.operands) {
    if (const auto* value = std::get_if<Value>(&operand)) {
      const auto type = value_type(*value);
      if (type && *type != column.type) {
        throw BindError("constant '" + value_to_string(*value) + "' does not match type " +
                        std::string{data_type_name(column.type)} + " of column '" + column.name + "'");
      }
      continue;
    }
    const auto& subquery = std::get<ScalarSubquery>(operand);
    if (!subquery.plan || subquery.plan->output_columns().size() != 1) {
      throw BindError("scalar subquery for '" + column.name + "' must produce exactly one column");
    }
    if (subquery.plan->output_columns().front().type != column.type) {
      throw BindError("scalar subquery type does not match column '" + column.name + "'");
    }
  }
  auto columns = child->output_columns();
  return std::make_shared<const PlanNode>(SelectNode{std::move(predicate)}, std::vector<PlanNodePtr>{std::move(child)},
                                          std::move(columns));
}

PlanNodePtr make_join(JoinMode mode, PlanNodePtr left, PlanNodePtr right, std::vector<JoinKey> keys) {
  if (mode == JoinMode::Theta) throw BindError("theta joins take a comparison, not equi-join keys");
  if (keys.empty()) throw BindError("equi-join needs at least one key pair");
  for (auto& key : keys) {
    if (!left->has_column(key.left) && left->has_column(key.right) && right->has_column(key.left)) {
      std::swap(key.left, key.right);
    }
    const auto& left_column = bind_column(*left, key.left);
    const auto& right_column = bind_column(*right, key.right);
    if (left_column.type != right_column.type) {
      throw BindError("join key types differ: '" + key.left + "' vs '" + key.right + "'");
    }
  }
  auto columns = left->output_columns();
  if (mode != JoinMode::Semi) {
    for (auto column : right->output_columns()) {
      // Null-extended rows break the subset relation to the base column.
      if (mode == JoinMode::Left) column.source.reset();
      columns.push_back(std::move(column));
    }
    require_unique_names(columns);
  }
  return std::make_shared<const PlanNode>(JoinNode{mode, std::move(keys), std::nullopt},
                                          std::vector<PlanNodePtr>{std::move(left), std::move(right)},
                                          std::move(columns));
}

PlanNodePtr make_theta_join(PlanNodePtr left, PlanNodePtr right, ThetaCondition condition) {
  if (condition.condition == PredicateCondition::Between || condition.condition == PredicateCondition::IsNotNull) {
    throw BindError("theta join supports =, <, <=, >, >= only");
  }
  if (!left->has_column(condition.left) && left->has_column(condition.right) && right->has_column(condition.left)) {
    std::swap(condition.left, condition.right);
    switch (condition.condition) {
      case PredicateCondition::LessThan:
        condition.condition = PredicateCondition::GreaterThan;
        break;
      case PredicateCondition::LessThanEquals:
        condition.condition = PredicateCondition::GreaterThanEquals;
        break;
      case PredicateCondition::GreaterThan:
        condition.condition = PredicateCondition::LessThan;
        break;
      case PredicateCondition::GreaterThanEquals:
        condition.condition = PredicateCondition::LessThanEquals;
        break;
      default:
        break;
    }
  }
  const auto& left_column = bind_column(*left, condition.left);
  const auto& right_column = bind_column(*right, condition.right);
  if (left_column.type != right_column.type) {
    throw BindError("theta join operand types differ: '" + condition.left + "' vs '" + condition.right + "'");
  }
  auto columns = left->output_columns();
  columns.insert(columns.end(), right->output_columns().begin(), right->output_columns().end());
  require_unique_names(columns);
  return std::make_shared<const PlanNode>(JoinNode{JoinMode::Theta, {}, std::move(condition)},
                                          std::vector<PlanNodePtr>{std::move(left), std::move(right)},
                                          std::move(columns));
}

PlanNodePtr make_aggregate(PlanNodePtr child, std::vector<std::string> group_by,
                           std::vector<AggregateExpression> aggregates) {
  auto columns = std::vector<ColumnInfo>{};
  for (const auto& name : group_by) {
    const auto& column = bind_column(*child, name);
    columns.push_back(ColumnInfo{column.name, column.type, std::nullopt});
  }
  for (const auto& aggregate : aggregates) {
    const auto& input = bind_column(*child, aggregate.input);
    auto type = input.type;
    if (aggregate.function == AggregateFunction::Count) type = DataType::Int;
    if (aggregate.function == AggregateFunction::Sum && input.type != DataType::Int) {
      throw BindError("sum requires an int column, '" + input.name + "' is " +
                      std::string{data_type_name(input.type)});
    }
    columns.push_back(ColumnInfo{aggregate.output_name(), type, std::nullopt});
  }
  if (columns.empty()) throw BindError("aggregate needs group-by columns or aggregates");
  require_unique_names(columns);
  return std::make_shared<const PlanNode>(AggregateNode{std::move(group_by), std::move(aggregates)},
                                          std::vector<PlanNodePtr>{std::move(child)}, std::move(columns));
}

PlanNodePtr make_project(PlanNodePtr child, std::vector<ProjectionExpression> expressions) {
  if (expressions.empty()) throw BindError("projection needs at least one expression");
  auto columns = std::vector<ColumnInfo>{};
  for (auto& expression : expressions) {
    const auto& input = bind_column(*child, expression.input);
    if (expression.is_pass_through()) {
      if (expression.name.empty()) expression.name = expression.input;
      if (expression.name != expression.input) throw BindError("pass-through columns cannot be renamed");
      columns.push_back(input);
      continue;
    }
    if (input.type != DataType::Int) throw BindError("arithmetic requires int column, '" + input.name + "' is not");
    if (const auto* right = std::get_if<std::string>(&expression.right_operand)) {
      if (bind_column(*child, *right).type != DataType::Int) {
        throw BindError("arithmetic requires int column, '" + *right + "' is not");
      }
    }
    if (expression.name.empty()) throw BindError("computed projection needs a name");
    columns.push_back(ColumnInfo{expression.name, DataType::Int, std::nullopt});
  }
  require_unique_names(columns);
  return std::make_shared<const PlanNode>(ProjectNode{std::move(expressions)},
                                          std::vector<PlanNodePtr>{std::move(child)}, std::move(columns));
}

PlanNodePtr make_project(PlanNodePtr child, const std::vector<std::string>& columns) {
  auto expressions = std::vector<ProjectionExpression>{};
  for (const auto& column : columns) expressions.push_back(ProjectionExpression{column, column, std::nullopt, {}});
  return make_project(std::move(child), std::move(expressions));
}

PlanNodePtr make_union(PlanNodePtr left, PlanNodePtr right) {
  const auto& left_columns = left->output_columns();
  const auto& right_columns = right->output_columns();
  if (left_columns.size() != right_columns.size()) {
    throw BindError("union inputs differ in arity: " + std::to_string(left_columns.size()) + " vs " +
                    std::to_string(right_columns.size()));
  }
  auto columns = std::vector<ColumnInfo>{};
  for (size_t index = 0; index < left_columns.size(); ++index) {
    if (left_columns[index].type != right_columns[index].type) {
      throw BindError("union column " + std::to_string(index) + " types differ");
    }
    columns.push_back(ColumnInfo{left_columns[index].name, left_columns[index].type, std::nullopt});
  }
  return std::make_shared<const PlanNode>(UnionNode{}, std::vector<PlanNodePtr>{std::move(left), std::move(right)},
                                          std::move(columns));
}

PlanNodePtr make_sort(PlanNodePtr child, std::vector<std::string> keys) {
  if (keys.empty()) throw BindError("sort needs at least one key");
  for (const auto& key : keys) bind_column(*child, key);
  auto columns = child->output_columns();
  return std::make_shared<const PlanNode>(SortNode{std::move(keys)}, std::vector<PlanNodePtr>{std::move(child)},
                                          std::move(columns));
}

PlanNodePtr with_children(const PlanNode& node, std::vector<PlanNodePtr> children) {
  return std::visit(
      [&](const auto& payload) -> PlanNodePtr {
        using T = std::decay_t<decltype(payload)>;
        if constexpr (std::is_same_v<T, GetNode>) {
          return make_get(payload.table);
        } else if constexpr (std::is_same_v<T, SelectNode>) {
          return make_select(children.at(0), payload.predicate);
        } else if constexpr (std::is_same_v<T, JoinNode>) {
          if (payload.mode == JoinMode::Theta) return make_theta_join(children.at(0), children.at(1), *payload.theta);
          return make_join(payload.mode, children.at(0), children.at(1), payload.keys);
        } else if constexpr (std::is_same_v<T, AggregateNode>) {
          return make_aggregate(children.at(0), payload.group_by, payload.aggregates);
        } else if constexpr (std::is_same_v<T, ProjectNode>) {
          return make_project(children.at(0), payload.expressions);
        } else if constexpr (std::is_same_v<T, UnionNode>) {
          return make_union(children.at(0), children.at(1));
        } else {
          return make_sort(children.at(0), payload.keys);
        }
      },
      node.payload());
}

namespace {

void print_node(const PlanNode& node, size_t depth, std::string& out, const PlanAnnotator& annotate) {
  const auto indent = std::string(depth * 2, ' ');
  out += indent + node.description();
  if (annotate) out += annotate(node);
  out += "\n";
  for (const auto& child : node.children()) print_node(*child, depth + 1, out, annotate);
  if (node.type() == PlanNodeType::Select) {
    const auto subqueries = distinct_subqueries(node.as<SelectNode>().predicate);
    for (size_t id = 0; id < subqueries.size(); ++id) {
      out += indent + "  subquery @" + std::to_string(id + 1) + "\n";
      print_node(*subqueries[id], depth + 2, out, annotate);
    }
  }
}

void collect_tables(const PlanNode& node, std::set<std::string>& tables) {
  if (node.type() == PlanNodeType::Get) tables.insert(node.as<GetNode>().table->name());
  if (node.type() == PlanNodeType::Select) {
    for (const auto& operand : node.as<SelectNode>().predicate.operands) {
      if (const auto* subquery = std::get_if<ScalarSubquery>(&operand)) collect_tables(*subquery->plan, tables);
    }
  }
  for (const auto& child : node.children()) collect_tables(*child, tables);
}

}  // namespace

std::string print_plan(const PlanNode& plan, const PlanAnnotator& annotate) {
  auto out = std::string{};
  print_node(plan, 0, out, annotate);
  return out;
}

bool plan_equal(const PlanNode& lhs, const PlanNode& rhs) {
  if (&lhs == &rhs) return true;
  return print_plan(lhs) == print_plan(rhs);
}

size_t plan_hash(const PlanNode& plan) { return std::hash<std::string>{}(print_plan(plan)); }

std::set<std::string> referenced_tables(const PlanNode& plan) {
  auto tables = std::set<std::string>{};
  collect_tables(plan, tables);
  return tables;
}

namespace {

struct RawNode {
  std::string text;
  size_t line{0};
  std::vector<RawNode> children;
};

[[noreturn]] void parse_error(size_t line, const std::string& message) {
  throw BindError("plan line " + std::to_string(line) + ": " + message);
}

std::string_view trim(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  return text;
}

// Splits on `separator` outside of parentheses, brackets, and single quotes.
std::vector<std::string> split_top_level(std::string_view text, char separator) {
  auto parts = std::vector<std::string>{};
  auto depth = 0;
  auto in_quotes = false;
  auto current = std::string{};
  for (const auto character : text) {
    if (character == '\'') in_quotes = !in_quotes;
    if (!in_quotes) {
      if (character == '(' || character == '[') ++depth;
      if (character == ')' || character == ']') --depth;
      if (character == separator && depth == 0) {
        parts.emplace_back(trim(current));
        current.clear();
        continue;
      }
    }
    current.push_back(character);
  }
  if (!trim(current).empty() || !parts.empty()) parts.emplace_back(trim(current));
  return parts;
}

std::vector<std::string> tokenize(std::string_view text) {
  auto tokens = split_top_level(text, ' ');
  std::erase_if(tokens, [](const std::string& token) { return token.empty(); });
  return tokens;
}

std::vector<std::string> parse_bracket_list(std::string_view text, size_t line) {
  text = trim(text);
  if (text.size() < 2 || text.front() != '[' || text.back() != ']') parse_error(line, "expected [..] list");
  auto items = split_top_level(text.substr(1, text.size() - 2), ',');
  std::erase_if(items, [](const std::string& item) { return item.empty(); });
  return items;
}

// Returns the value of `key=[...]` within `text`.
std::vector<std::string> keyed_list(std::string_view text, std::string_view key, size_t line) {
  const auto needle = std::string{key} + "=[";
  const auto start = text.find(needle);
  if (start == std::string_view::npos) parse_error(line, "missing '" + std::string{key} + "=[...]'");
  auto depth = 0;
  for (auto index = start + needle.size() - 1; index < text.size(); ++index) {
    if (text[index] == '[') ++depth;
    if (text[index] == ']' && --depth == 0) {
      return parse_bracket_list(text.substr(start + key.size() + 1, index - start - key.size()), line);
    }
  }
  parse_error(line, "unterminated list for '" + std::string{key} + "'");
}

Value parse_constant(std::string_view token, DataType type, size_t line) {
  if (token == "null") return Null{};
  if (token.size() >= 2 && token.front() == '\'' && token.back() == '\'') {
    if (type != DataType::String) parse_error(line, "string constant for non-string column");
    auto text = std::string{};
    for (size_t index = 1; index + 1 < token.size(); ++index) {
      text.push_back(token[index]);
      if (token[index] == '\'') ++index;
    }
    return text;
  }
  try {
    return parse_value(token, type);
  } catch (const TypeError& error) {
    parse_error(line, error.what());
  }
}

Operand parse_operand(std::string_view token, DataType type, const std::map<size_t, PlanNodePtr>& subqueries,
                      size_t line) {
  for (const auto reduction : {SubqueryReduction::Value, SubqueryReduction::Min, SubqueryReduction::Max}) {
    const auto prefix = std::string{subquery_reduction_name(reduction)} + "(@";
    if (token.starts_with(prefix) && token.ends_with(")")) {
      const auto id_text = token.substr(prefix.size(), token.size() - prefix.size() - 1);
      auto id = size_t{0};
      try {
        id = std::stoul(std::string{id_text});
      } catch (const std::exception&) {
        parse_error(line, "malformed subquery reference '" + std::string{token} + "'");
      }
      const auto it = subqueries.find(id);
      if (it == subqueries.end()) parse_error(line, "undefined subquery @" + std::to_string(id));
      return ScalarSubquery{it->second, reduction};
    }
  }
  return parse_constant(token, type, line);
}

PredicateCondition parse_comparison(std::string_view symbol, size_t line) {
  if (symbol == "=") return PredicateCondition::Equals;
  if (symbol == "<") return PredicateCondition::LessThan;
  if (symbol == "<=") return PredicateCondition::LessThanEquals;
  if (symbol == ">") return PredicateCondition::GreaterThan;
  if (symbol == ">=") return PredicateCondition::GreaterThanEquals;
  parse_error(line, "unknown comparison '" + std::string{symbol} + "'");
}

PlanNodePtr bind_raw(const RawNode& raw, const Database& database);

PlanNodePtr bind_select(const RawNode& raw, const std::vector<std::string>& tokens, const Database& database) {
  if (raw.children.empty()) parse_error(raw.line, "select needs an input");
  auto subqueries = std::map<size_t, PlanNodePtr>{};
  for (size_t index = 1; index < raw.children.size(); ++index) {
    const auto& child = raw.children[index];
    const auto child_tokens = tokenize(child.text);
    if (child_tokens.size() != 2 || child_tokens[0] != "subquery" || !child_tokens[1].starts_with("@")) {
      parse_error(child.line, "expected 'subquery @<id>'");
    }
    if (child.children.size() != 1) parse_error(child.line, "subquery needs exactly one plan");
    auto id = size_t{0};
    try {
      id = std::stoul(child_tokens[1].substr(1));
    } catch (const std::exception&) {
      parse_error(child.line, "malformed subquery id '" + child_tokens[1] + "'");
    }
    if (!subqueries.emplace(id, bind_raw(child.children.front(), database)).second) {
      parse_error(child.line, "duplicate subquery @" + std::to_string(id));
    }
  }
  auto input = bind_raw(raw.children.front(), database);
  if (tokens.size() < 3) parse_error(raw.line, "malformed select");
  const auto& column_name = tokens[1];
  const auto* column = input->find_column(column_name);
  if (!column) parse_error(raw.line, "unknown column '" + column_name + "'");

  auto predicate = Predicate{column_name, PredicateCondition::Equals, {}};
  if (tokens.size() == 5 && tokens[2] == "is" && tokens[3] == "not" && tokens[4] == "null") {
    predicate.condition = PredicateCondition::IsNotNull;
  } else if (tokens.size() == 6 && tokens[2] == "between" && tokens[4] == "and") {
    predicate.condition = PredicateCondition::Between;
    predicate.operands.push_back(parse_operand(tokens[3], column->type, subqueries, raw.line));
    predicate.operands.push_back(parse_operand(tokens[5], column->type, subqueries, raw.line));
  } else if (tokens.size() == 4) {
    predicate.condition = parse_comparison(tokens[2], raw.line);
    predicate.operands.push_back(parse_operand(tokens[3], column->type, subqueries, raw.line));
  } else {
    parse_error(raw.line, "malformed select predicate");
  }
  return make_select(std::move(input), std::move(predicate));
}

PlanNodePtr bind_join(const RawNode& raw, const std::vector<std::string>& tokens, const Database& database) {
  if (raw.children.size() != 2) parse_error(raw.line, "join needs exactly two inputs");
  if (tokens.size() < 3) parse_error(raw.line, "malformed join");
  auto left = bind_raw(raw.children[0], database);
  auto right = bind_raw(raw.children[1], database);
  const auto conditions = keyed_list(raw.text, "on", raw.line);
  if (tokens[1] == "theta") {
    if (conditions.size() != 1) parse_error(raw.line, "theta join takes exactly one comparison");
    const auto& condition = conditions.front();
    for (const auto* symbol : {"<=", ">=", "<", ">", "="}) {
      const auto position = condition.find(symbol);
      if (position == std::string::npos) continue;
      const auto length = std::char_traits<char>::length(symbol);
      return make_theta_join(std::move(left), std::move(right),
                             ThetaCondition{std::string{trim(condition.substr(0, position))},
                                            parse_comparison(symbol, raw.line),
                                            std::string{trim(condition.substr(position + length))}});
    }
    parse_error(raw.line, "malformed theta condition '" + condition + "'");
  }
  auto mode = JoinMode::Inner;
  if (tokens[1] == "semi") {
    mode = JoinMode::Semi;
  } else if (tokens[1] == "left") {
    mode = JoinMode::Left;
  } else if (tokens[1] != "inner") {
    parse_error(raw.line, "unknown join mode '" + tokens[1] + "'");
  }
  auto keys = std::vector<JoinKey>{};
  for (const auto& condition : conditions) {
    const auto position = condition.find('=');
    if (position == std::string::npos) parse_error(raw.line, "equi-join key needs '='");
    keys.push_back(JoinKey{std::string{trim(condition.substr(0, position))},
                           std::string{trim(condition.substr(position + 1))}});
  }
  return make_join(mode, std::move(left), std::move(right), std::move(keys));
}

AggregateExpression parse_aggregate(std::string_view text, size_t line) {
  const auto open = text.find('(');
  if (open == std::string_view::npos || text.back() != ')') parse_error(line, "malformed aggregate '" + std::string{text} + "'");
  const auto name = text.substr(0, open);
  auto expression = AggregateExpression{AggregateFunction::Sum, std::string{trim(text.substr(open + 1, text.size() - open - 2))}};
  for (const auto function : {AggregateFunction::Sum, AggregateFunction::Min, AggregateFunction::Max,
                              AggregateFunction::Count, AggregateFunction::Any}) {
    if (name == aggregate_function_name(function)) {
      expression.function = function;
      return expression;
    }
  }
  parse_error(line, "unknown aggregate function '" + std::string{name} + "'");
}

ProjectionExpression parse_projection(std::string_view text, size_t line) {
  const auto equals = text.find('=');
  if (equals == std::string_view::npos) {
    return ProjectionExpression{std::string{text}, std::string{text}, std::nullopt, {}};
  }
  auto expression = ProjectionExpression{std::string{trim(text.substr(0, equals))}, {}, std::nullopt, {}};
  const auto body = trim(text.substr(equals + 1));
  for (const auto op : {ArithmeticOperator::Add, ArithmeticOperator::Subtract, ArithmeticOperator::Multiply}) {
    const auto position = body.find(arithmetic_symbol(op), 1);
    if (position == std::string_view::npos) continue;
    expression.input = std::string{trim(body.substr(0, position))};
    expression.arithmetic = op;
    const auto right = trim(body.substr(position + 1));
    auto constant = int64_t{0};
    const auto* end = right.data() + right.size();
    const auto [ptr, ec] = std::from_chars(right.data(), end, constant);
    if (ec == std::errc{} && ptr == end) {
      expression.right_operand = constant;
    } else {
      expression.right_operand = std::string{right};
    }
    return expression;
  }
  parse_error(line, "malformed projection '" + std::string{text} + "'");
}

PlanNodePtr bind_raw(const RawNode& raw, const Database& database) {
  const auto tokens = tokenize(raw.text);
  if (tokens.empty()) parse_error(raw.line, "empty node");
  const auto& keyword = tokens.front();
  const auto expect_children = [&](size_t count) {
    if (raw.children.size() != count) {
      parse_error(raw.line, "'" + keyword + "' expects " + std::to_string(count) + " inputs, found " +
                                std::to_string(raw.children.size()));
    }
  };
  try {
    if (keyword == "get") {
      expect_children(0);
      if (tokens.size() != 2) parse_error(raw.line, "get expects a table name");
      return make_get(database, tokens[1]);
    }
    if (keyword == "select") return bind_select(raw, tokens, database);
    if (keyword == "join") return bind_join(raw, tokens, database);
    if (keyword == "aggregate") {
      expect_children(1);
      auto child = bind_raw(raw.children.front(), database);
      auto aggregates = std::vector<AggregateExpression>{};
      if (raw.text.find("aggs=[") != std::string::npos) {
        for (const auto& item : keyed_list(raw.text, "aggs", raw.line)) {
          aggregates.push_back(parse_aggregate(item, raw.line));
        }
      }
      auto group_by = std::vector<std::string>{};
      if (raw.text.find("group=[") != std::string::npos) group_by = keyed_list(raw.text, "group", raw.line);
      return make_aggregate(std::move(child), std::move(group_by), std::move(aggregates));
    }
    if (keyword == "project") {
      expect_children(1);
      auto expressions = std::vector<ProjectionExpression>{};
      for (const auto& item : parse_bracket_list(trim(std::string_view{raw.text}.substr(7)), raw.line)) {
        expressions.push_back(parse_projection(item, raw.line));
      }
      return make_project(bind_raw(raw.children.front(), database), std::move(expressions));
    }
    if (keyword == "union") {
      expect_children(2);
      return make_union(bind_raw(raw.children[0], database), bind_raw(raw.children[1], database));
    }
    if (keyword == "sort") {
      expect_children(1);
      return make_sort(bind_raw(raw.children.front(), database),
                       parse_bracket_list(trim(std::string_view{raw.text}.substr(4)), raw.line));
    }
  } catch (const BindError& error) {
    const auto message = std::string{error.what()};
    if (message.starts_with("plan line")) throw;
    parse_error(raw.line, message);
  }
  parse_error(raw.line, "unknown operator '" + keyword + "'");
}

}  // namespace

PlanNodePtr parse_plan(std::string_view text, const Database& database) {
  struct Line {
    size_t indent;
    std::string text;
    size_t number;
  };
  auto lines = std::vector<Line>{};
  auto stream = std::istringstream{std::string{text}};
  auto line = std::string{};
  auto number = size_t{0};
  while (std::getline(stream, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(' ');
    if (first == std::string::npos || line[first] == '#') continue;
    if (line.find('\t') != std::string::npos) parse_error(number, "tabs are not allowed for indentation");
    lines.push_back(Line{first, std::string{trim(line)}, number});
  }
  if (lines.empty()) throw BindError("empty plan");

  auto root = RawNode{lines.front().text, lines.front().number, {}};
  // Stack of (indent, node) for the current path from the root.
  auto path = std::vector<std::pair<size_t, RawNode*>>{{lines.front().indent, &root}};
  for (size_t index = 1; index < lines.size(); ++index) {
    const auto& current = lines[index];
    while (!path.empty() && path.back().first >= current.indent) path.pop_back();
    if (path.empty()) parse_error(current.number, "a plan has exactly one root");
    auto& parent = *path.back().second;
    parent.children.push_back(RawNode{current.text, current.number, {}});
    path.emplace_back(current.indent, &parent.children.back());
  }
  return bind_raw(root, database);
}

std::vector<WorkloadQuery> parse_workload(std::string_view text, const Database& database) {
  auto queries = std::vector<WorkloadQuery>{};
  auto stream = std::istringstream{std::string{text}};
  auto line = std::string{};
  auto name = std::string{};
  auto body = std::string{};
  auto offset = size_t{0};
  auto number = size_t{0};
  const auto flush = [&] {
    if (name.empty()) return;
    try {
      queries.push_back(WorkloadQuery{name, parse_plan(body, database)});
    } catch (const BindError& error) {
      throw BindError("query '" + name + "' (starting line " + std::to_string(offset) + "): " + error.what());
    }
  };
  while (std::getline(stream, line)) {
    ++number;
    if (line.starts_with("query ")) {
      flush();
      name = std::string{trim(std::string_view{line}.substr(6))};
      body.clear();
      offset = number;
      continue;
    }
    if (name.empty()) {
      const auto first = line.find_first_not_of(" \r");
      if (first != std::string::npos && line[first] != '#') throw BindError("workload line " + std::to_string(number) + ": expected 'query <name>'");
      continue;
    }
    body += line + "\n";
  }
  flush();
  return queries;
}

std::vector<WorkloadQuery> load_workload(const std::filesystem::path& path, const Database& database) {
  auto stream = std::ifstream{path};
  if (!stream) throw std::runtime_error("cannot open workload '" + path.string() + "'");
  auto buffer = std::stringstream{};
  buffer << stream.rdbuf();
  return parse_workload(buffer.str(), database);
}

}  // namespace depqo
