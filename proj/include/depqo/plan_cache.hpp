#pragma once

#include <optional>
#include <set>
#include <shared_mutex>
#include <vector>

#include "depqo/dependency.hpp"
#include "depqo/plan.hpp"

namespace depqo {

using PlanFingerprint = size_t;

// Structural hash over operator kinds, column references, and predicate constants.
PlanFingerprint plan_fingerprint(const PlanNode& plan);

struct PlanCacheEntry {
  PlanNodePtr original;
  PlanNodePtr optimized;
  std::set<std::string> tables;
};

// Optimized plans keyed by the fingerprint of the unoptimized plan. The original plan is kept so that workload-driven
// discovery can inspect the queries that were issued.
class PlanCache {
 public:
  std::optional<PlanCacheEntry> lookup(const PlanNode& original) const;
  void insert(PlanNodePtr original, PlanNodePtr optimized);

  // Evicts every entry that reads a table named by one of the dependencies. Returns the number of evicted entries.
  size_t invalidate_affected(const std::vector<Dependency>& newly_valid);

  std::vector<PlanCacheEntry> entries() const;
  size_t size() const;
  void clear();

 private:
  mutable std::shared_mutex mutex_;
  // Insertion order is kept so that discovery sees queries in the order they were issued.
  std::vector<std::pair<PlanFingerprint, PlanCacheEntry>> entries_;
};

}  // namespace depqo
