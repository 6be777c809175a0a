#include <gtest/gtest.h>

#include "depqo/propagation.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "support/random_data.hpp"

using namespace depqo;
using namespace depqo::testing;

TEST(Propagation, GroupByColumnsFormUcc) {
  const auto database = mini_star();
  const auto plan = parse_plan("aggregate group=[c_sk,c_name] aggs=[]\n  get customer\n", database);
  const auto found = dependencies_of(plan, MetadataStore{});
  EXPECT_TRUE(found.uccs.contains(ColumnSet{"c_sk", "c_name"}));
}

TEST(Propagation, UngroupedAggregateIsUniqueRow) {
  const auto database = mini_star();
  const auto plan = parse_plan("aggregate group=[] aggs=[sum(s_quantity)]\n  get sales\n", database);
  EXPECT_TRUE(dependencies_of(plan, MetadataStore{}).has_ucc_within(ColumnSet{"sum(s_quantity)"}));
}

TEST(Propagation, SelectionDropsInd) {
  const auto database = mini_star();
  const auto store = mini_star_store();
  const auto scan = parse_plan("get date_dim\n", database);
  EXPECT_TRUE(dependencies_of(scan, store).has_ind("sales", {"s_sold_date"}, {"d_sk"}));
  const auto filtered = parse_plan("select d_year = 2000\n  get date_dim\n", database);
  const auto found = dependencies_of(filtered, store);
  EXPECT_TRUE(found.inds.empty());
  // Other dependencies survive the filter.
  EXPECT_TRUE(found.uccs.contains(ColumnSet{"d_sk"}));
}

TEST(Propagation, JoinOnUniqueKeyForwardsAndDegrades) {
  const auto database = mini_star();
  auto store = mini_star_store();
  store.record(Dependency::ucc("sales", {"s_customer", "s_sold_date", "s_quantity"}), true);
  const auto plan = parse_plan("join inner on=[s_sold_date=d_sk]\n  get sales\n  get date_dim\n", database);
  const auto found = dependencies_of(plan, store);
  EXPECT_TRUE(found.uccs.contains(ColumnSet{"s_customer", "s_sold_date", "s_quantity"}));
  EXPECT_FALSE(found.has_ucc_within(ColumnSet{"d_sk"}));
  EXPECT_TRUE(found.implies_fd(ColumnSet{"d_sk"}, ColumnSet{"d_date", "d_year", "d_moy"}));
  EXPECT_TRUE(found.has_od({"s_sold_date"}, {"d_sk"}));
  EXPECT_TRUE(found.has_od({"d_sk"}, {"s_sold_date"}));
}

TEST(Propagation, ThetaJoinKeepsOnlyFds) {
  const auto database = mini_star();
  const auto store = mini_star_store();
  const auto plan = parse_plan("join theta on=[s_sold_date<d_sk]\n  get sales\n  get date_dim\n", database);
  const auto found = dependencies_of(plan, store);
  EXPECT_TRUE(found.uccs.empty());
  EXPECT_TRUE(found.ods.empty());
  EXPECT_TRUE(found.inds.empty());
  EXPECT_TRUE(found.implies_fd(ColumnSet{"d_sk"}, ColumnSet{"d_date"}));
}

TEST(Propagation, ComputedProjectionDropsItsColumn) {
  const auto database = mini_star();
  const auto store = mini_star_store();
  const auto plan = parse_plan("project [d_sk,next=d_sk+1]\n  get date_dim\n", database);
  const auto found = dependencies_of(plan, store);
  EXPECT_TRUE(found.uccs.contains(ColumnSet{"d_sk"}));
  for (const auto& ucc : found.uccs) EXPECT_FALSE(ucc.contains("next"));
  for (const auto& fd : found.fds) EXPECT_FALSE(fd.determinant.contains("next"));
  EXPECT_TRUE(found.ods.empty());
  // The key still determines the computed column.
  EXPECT_TRUE(found.implies_fd(ColumnSet{"d_sk"}, ColumnSet{"next"}));
}

TEST(Propagation, RepeatedCallsAreIdentical) {
  const auto database = mini_star();
  const auto store = mini_star_store();
  const auto plan = parse_plan(EXAMPLE_QUERY, database);
  auto propagator = DependencyPropagator{store};
  const auto first = propagator.dependencies_of(plan);
  EXPECT_EQ(propagator.dependencies_of(plan), first);
  EXPECT_EQ(dependencies_of(plan, store), first);
}

// Smaller version of the randomized soundness property: every reported dependency holds on the node's output.
TEST(Propagation, SoundOnRandomPlans) {
  for (const auto& workload : random_workload(99, 4, 8)) {
    auto propagator = DependencyPropagator{workload.store};
    for (const auto& plan : workload.plans) {
      for (const auto& node : all_nodes(plan)) {
        const auto relation = execute_plan(node).relation;
        const auto violations = node_violations(relation, workload.database, propagator.dependencies_of(node));
        EXPECT_TRUE(violations.empty()) << violations.front() << "\n" << print_plan(*node);
      }
    }
  }
}
