#pragma once

#include <string>
#include <vector>

#include "depqo/plan.hpp"

namespace depqo {

class ExecutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SchedulingError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Column-major materialized intermediate result.
struct Relation {
  std::vector<std::string> names;
  std::vector<std::vector<Value>> columns;
  size_t row_count{0};

  size_t column_index(std::string_view name) const;
  std::vector<Value> row(size_t index) const;
};

enum class OperatorKind : uint8_t { Scan, Select, Join, Aggregate, Project, Union, Sort };

struct PhysicalOperator {
  size_t id{0};
  OperatorKind kind{OperatorKind::Scan};
  // For scans, the topmost fused selection (or the Get itself).
  PlanNodePtr node;
  // Data inputs in child order.
  std::vector<size_t> inputs;
  // Subquery roots whose values this operator's predicates consume, keyed by position in `subquery_plans`.
  std::vector<PlanNodePtr> subquery_plans;
  std::vector<size_t> subquery_inputs;
  // Scans: the Get node and the fused predicates, bottom-up.
  PlanNodePtr get;
  std::vector<Predicate> scan_predicates;
  // Output columns this operator must produce, in the node's output order.
  std::vector<std::string> output_columns;

  std::string description() const;
};

// Acyclic operator graph. Each operator lists its data inputs and the subquery operators it waits for.
class OperatorGraph {
 public:
  const std::vector<PhysicalOperator>& operators() const { return operators_; }
  size_t root() const { return root_; }

  // All predecessors: data inputs and subquery roots.
  std::vector<size_t> predecessors(size_t id) const;

  // Throws SchedulingError on a cycle.
  std::vector<size_t> topological_order() const;

 private:
  friend class Scheduler;
  std::vector<PhysicalOperator> operators_;
  size_t root_{0};
};

// Selections directly above a scan are fused into it; structurally equal subplans become one operator.
OperatorGraph schedule(const PlanNodePtr& plan);

struct OperatorRows {
  std::string description;
  size_t rows{0};
};

struct ExecutionMetrics {
  size_t chunks_scanned{0};
  size_t chunks_pruned_static{0};
  size_t chunks_pruned_dynamic{0};
  // Rows read by join operators from their inputs.
  size_t join_input_rows{0};
  std::vector<OperatorRows> rows_per_operator;

  size_t total_operator_rows() const;
};

struct ExecutionOptions {
  // 0 runs every operator on the calling thread.
  size_t threads{0};
  bool dynamic_pruning{true};
  // Re-scans every pruned chunk and fails if it would have produced rows.
  bool verify_pruning{false};
};

struct ExecutionResult {
  Relation relation;
  ExecutionMetrics metrics;
  // Operator ids in the order they finished.
  std::vector<size_t> completion_order;
};

ExecutionResult execute(const OperatorGraph& graph, const ExecutionOptions& options = {});
ExecutionResult execute_plan(const PlanNodePtr& plan, const ExecutionOptions& options = {});

// Rows as printable tuples, sorted; two results are equal multisets iff these are equal.
std::vector<std::vector<std::string>> sorted_rows(const Relation& relation);

std::string format_relation(const Relation& relation, size_t max_rows = 20);

}  // namespace depqo
