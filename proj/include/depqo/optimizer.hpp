#pragma once

#include <atomic>
#include <string>
#include <vector>

#include "depqo/metadata_store.hpp"
#include "depqo/plan.hpp"
#include "depqo/plan_cache.hpp"

namespace depqo {

struct OptimizerOptions {
  bool pushdown{true};
  bool group_by_reduction{true};
  bool join_to_predicate{true};
  bool join_to_semijoin{true};
  bool order_selections{true};
};

struct OptimizationResult {
  PlanNodePtr plan;
  // Rule applications in firing order, e.g. "O-1 aggregate group=[c_sk,c_name] ...".
  std::vector<std::string> fired_rules;
};

// Moves selections toward the scans, below joins, sorts, pass-through projections, and group-by columns.
PlanNodePtr push_down_predicates(const PlanNodePtr& plan);

// Each rewrite walks the whole plan once; `fired` collects a line per application.
PlanNodePtr rewrite_groupby_reduction(const PlanNodePtr& plan, const MetadataStore& store,
                                      std::vector<std::string>* fired = nullptr);
PlanNodePtr rewrite_join_to_predicate(const PlanNodePtr& plan, const MetadataStore& store,
                                      std::vector<std::string>* fired = nullptr);
PlanNodePtr rewrite_join_to_semijoin(const PlanNodePtr& plan, const MetadataStore& store,
                                     std::vector<std::string>* fired = nullptr);

// Reorders each chain of selections so the most selective one runs first.
PlanNodePtr order_selections(const PlanNodePtr& plan);

// Uniform-distribution estimates from base-table statistics reached through column lineage.
double estimate_cardinality(const PlanNodePtr& node);

// Estimate of `left` semi-joined with `right` on left_key = right_key.
double estimate_semi_join(const PlanNodePtr& left, const std::string& left_key, const PlanNodePtr& right,
                          const std::string& right_key);

// Input plan of a subquery created by the join-to-predicate rewrite together with its key column, or null if the
// subquery has a different shape.
std::pair<PlanNodePtr, std::string> rewritten_join_side(const PlanNode& subquery);

OptimizationResult optimize(const PlanNodePtr& plan, const MetadataStore& store, const OptimizerOptions& options = {});

// Pre- and post-optimization plans with per-node estimates and the rules that fired.
std::string explain(const PlanNodePtr& plan, const MetadataStore& store, const OptimizerOptions& options = {});

// Rules enabled cumulatively: none, O-1, O-1 and O-2, then all three. O-3 takes precedence over O-2 once enabled.
struct ExplainStage {
  std::string label;
  OptimizationResult result;
};
std::vector<ExplainStage> optimization_stages(const PlanNodePtr& plan, const MetadataStore& store,
                                              const OptimizerOptions& options = {});
std::string explain_stages(const PlanNodePtr& plan, const MetadataStore& store, const OptimizerOptions& options = {});

// Optimizes through a plan cache: a hit returns the cached plan without invoking the optimizer.
class QueryOptimizer {
 public:
  QueryOptimizer(const MetadataStore& store, PlanCache& cache, OptimizerOptions options = {})
      : store_(store), cache_(cache), options_(options) {}

  PlanNodePtr get_plan(const PlanNodePtr& original);

  size_t optimizer_calls() const { return optimizer_calls_; }

 private:
  const MetadataStore& store_;
  PlanCache& cache_;
  OptimizerOptions options_;
  std::atomic<size_t> optimizer_calls_{0};
};

}  // namespace depqo
