#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "depqo/dependency.hpp"
#include "depqo/metadata_store.hpp"
#include "depqo/plan.hpp"
#include "depqo/storage.hpp"

namespace depqo::testing {

// One table `t` with columns k, v, name, low, r and the dependencies to check on it.
struct ValidationCase {
  Database database;
  std::vector<Dependency> dependencies;
  std::string description;
};

// Deterministic in `seed`. Up to `max_rows` rows over 1 to 50 chunks; keys sorted or shuffled, dense or sparse, with
// occasional nulls and duplicates.
ValidationCase random_validation_case(uint64_t seed, size_t max_rows = 100'000);

// Small star schema (fact, dim, cust) with randomized keys, orderings, and violations.
Database random_star_database(uint64_t seed);

// Random plans over `random_star_database` tables, covering every operator kind and the rewrite patterns.
std::vector<PlanNodePtr> random_plans(const Database& database, uint64_t seed, size_t count);

struct WorkloadCase {
  Database database;
  MetadataStore store;
  std::vector<PlanNodePtr> plans;
};

// `plans_per_database` plans over each of `databases` random databases. Each store holds only verified
// dependencies: those discovered from the plans plus the key constraints that hold.
std::vector<WorkloadCase> random_workload(uint64_t seed, size_t databases, size_t plans_per_database);

// Every node of a plan, including the nodes of subquery plans, parents before children.
std::vector<PlanNodePtr> all_nodes(const PlanNodePtr& plan);

}  // namespace depqo::testing
