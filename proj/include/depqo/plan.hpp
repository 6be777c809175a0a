#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "depqo/storage.hpp"

namespace depqo {

class BindError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class PlanNodeType : uint8_t { Get, Select, Join, Aggregate, Project, Union, Sort };

// Inner, Semi, and Left joins are equi-joins on `keys`; Theta is an inner join on one comparison.
enum class JoinMode : uint8_t { Inner, Semi, Left, Theta };

enum class AggregateFunction : uint8_t { Sum, Min, Max, Count, Any };

enum class SubqueryReduction : uint8_t { Value, Min, Max };

enum class ArithmeticOperator : uint8_t { Add, Subtract, Multiply };

std::string_view join_mode_name(JoinMode mode);
std::string_view aggregate_function_name(AggregateFunction function);
std::string_view subquery_reduction_name(SubqueryReduction reduction);

struct BaseColumn {
  std::string table;
  std::string column;

  auto operator<=>(const BaseColumn&) const = default;
};

struct ColumnInfo {
  std::string name;
  DataType type;
  // Set when the column carries a base-table column's values unmodified (possibly filtered or duplicated).
  std::optional<BaseColumn> source;
};

class PlanNode;
using PlanNodePtr = std::shared_ptr<const PlanNode>;

// Uncorrelated subquery producing one column, reduced to a single value: exactly one row (Value), or min/max.
struct ScalarSubquery {
  PlanNodePtr plan;
  SubqueryReduction reduction{SubqueryReduction::Value};
};

using Operand = std::variant<Value, ScalarSubquery>;

struct Predicate {
  std::string column;
  PredicateCondition condition{PredicateCondition::Equals};
  // None for IsNotNull, two for Between, one otherwise.
  std::vector<Operand> operands;

  bool has_subquery() const;
  bool is_range() const;
};

struct JoinKey {
  std::string left;
  std::string right;

  bool operator==(const JoinKey&) const = default;
};

struct ThetaCondition {
  std::string left;
  PredicateCondition condition{PredicateCondition::LessThan};
  std::string right;

  bool operator==(const ThetaCondition&) const = default;
};

struct AggregateExpression {
  AggregateFunction function{AggregateFunction::Sum};
  std::string input;

  // `any(x)` keeps the name `x` so that group-by reduction preserves the output schema.
  std::string output_name() const;
  bool operator==(const AggregateExpression&) const = default;
};

struct ProjectionExpression {
  std::string name;
  std::string input;
  std::optional<ArithmeticOperator> arithmetic;
  std::variant<std::string, int64_t> right_operand;

  bool is_pass_through() const { return !arithmetic.has_value(); }
  bool operator==(const ProjectionExpression&) const = default;
};

struct GetNode {
  std::shared_ptr<const Table> table;
};

struct SelectNode {
  Predicate predicate;
};

struct JoinNode {
  JoinMode mode{JoinMode::Inner};
  std::vector<JoinKey> keys;
  std::optional<ThetaCondition> theta;
};

struct AggregateNode {
  std::vector<std::string> group_by;
  std::vector<AggregateExpression> aggregates;
};

struct ProjectNode {
  std::vector<ProjectionExpression> expressions;
};

struct UnionNode {};

struct SortNode {
  std::vector<std::string> keys;
};

using PlanNodePayload = std::variant<GetNode, SelectNode, JoinNode, AggregateNode, ProjectNode, UnionNode, SortNode>;

// Immutable, bound logical plan node. Construct through the make_* factories, which validate column references.
class PlanNode {
 public:
  PlanNode(PlanNodePayload payload, std::vector<PlanNodePtr> children, std::vector<ColumnInfo> output_columns);

  PlanNodeType type() const { return static_cast<PlanNodeType>(payload_.index()); }
  const PlanNodePayload& payload() const { return payload_; }
  const std::vector<PlanNodePtr>& children() const { return children_; }
  const PlanNodePtr& left() const { return children_.at(0); }
  const PlanNodePtr& right() const { return children_.at(1); }

  const std::vector<ColumnInfo>& output_columns() const { return output_columns_; }
  const ColumnInfo* find_column(std::string_view name) const;
  const ColumnInfo& column(std::string_view name) const;
  bool has_column(std::string_view name) const { return find_column(name) != nullptr; }

  template <typename T>
  const T& as() const {
    return std::get<T>(payload_);
  }

  // One-line description used by the printer, e.g. `join inner on=[s_customer=c_sk]`.
  std::string description() const;

 private:
  PlanNodePayload payload_;
  std::vector<PlanNodePtr> children_;
  std::vector<ColumnInfo> output_columns_;
};

std::vector<std::string> output_column_names(const PlanNode& plan);

PlanNodePtr make_get(const Database& database, std::string_view table_name);
PlanNodePtr make_get(std::shared_ptr<const Table> table);
PlanNodePtr make_select(PlanNodePtr child, Predicate predicate);
PlanNodePtr make_join(JoinMode mode, PlanNodePtr left, PlanNodePtr right, std::vector<JoinKey> keys);
PlanNodePtr make_theta_join(PlanNodePtr left, PlanNodePtr right, ThetaCondition condition);
PlanNodePtr make_aggregate(PlanNodePtr child, std::vector<std::string> group_by,
                           std::vector<AggregateExpression> aggregates);
PlanNodePtr make_project(PlanNodePtr child, std::vector<ProjectionExpression> expressions);
PlanNodePtr make_project(PlanNodePtr child, const std::vector<std::string>& columns);
PlanNodePtr make_union(PlanNodePtr left, PlanNodePtr right);
PlanNodePtr make_sort(PlanNodePtr child, std::vector<std::string> keys);

// Rebuilds `node` over new children, re-binding it.
PlanNodePtr with_children(const PlanNode& node, std::vector<PlanNodePtr> children);

Predicate make_predicate(std::string column, PredicateCondition condition, std::vector<Operand> operands = {});

bool plan_equal(const PlanNode& lhs, const PlanNode& rhs);
size_t plan_hash(const PlanNode& plan);

// Base tables read anywhere in the plan, including inside scalar subqueries.
std::set<std::string> referenced_tables(const PlanNode& plan);

// Suffix appended to a node's line when printing.
using PlanAnnotator = std::function<std::string(const PlanNode&)>;

// Indentation-based text form; see docs/plan_format.md.
std::string print_plan(const PlanNode& plan, const PlanAnnotator& annotate = {});
PlanNodePtr parse_plan(std::string_view text, const Database& database);

struct WorkloadQuery {
  std::string name;
  PlanNodePtr plan;
};

// A workload file holds several plans, each introduced by a `query <name>` line at column zero.
std::vector<WorkloadQuery> parse_workload(std::string_view text, const Database& database);
std::vector<WorkloadQuery> load_workload(const std::filesystem::path& path, const Database& database);

}  // namespace depqo
