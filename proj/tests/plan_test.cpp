#include <gtest/gtest.h>

#include "depqo/plan.hpp"
#include "support/fixtures.hpp"
#include "support/random_data.hpp"

using namespace depqo;
using namespace depqo::testing;

namespace {

std::string bind_error(const std::string& text, const Database& database) {
  try {
    parse_plan(text, database);
  } catch (const BindError& error) {
    return error.what();
  }
  return "";
}

}  // namespace

TEST(ParsePlan, SingleGet) {
  const auto database = mini_star();
  const auto plan = parse_plan("get sales\n", database);
  EXPECT_EQ(plan->type(), PlanNodeType::Get);
  EXPECT_TRUE(plan->children().empty());
  EXPECT_EQ(output_column_names(*plan),
            (std::vector<std::string>{"s_sold_date", "s_customer", "s_quantity", "s_sales_price"}));
}

TEST(ParsePlan, ExampleQueryShape) {
  const auto database = mini_star();
  const auto plan = parse_plan(EXAMPLE_QUERY, database);
  ASSERT_EQ(plan->type(), PlanNodeType::Aggregate);
  EXPECT_EQ(plan->as<AggregateNode>().group_by, (std::vector<std::string>{"c_sk", "c_name"}));
  const auto& outer = plan->left();
  ASSERT_EQ(outer->type(), PlanNodeType::Join);
  EXPECT_EQ(outer->as<JoinNode>().keys, (std::vector<JoinKey>{{"s_customer", "c_sk"}}));
  EXPECT_EQ(outer->right()->type(), PlanNodeType::Get);
  const auto& inner = outer->left();
  ASSERT_EQ(inner->type(), PlanNodeType::Join);
  EXPECT_EQ(inner->left()->type(), PlanNodeType::Select);
  EXPECT_EQ(inner->left()->left()->as<GetNode>().table->name(), "date_dim");
  EXPECT_EQ(inner->right()->as<GetNode>().table->name(), "sales");
  EXPECT_EQ(print_plan(*plan), EXAMPLE_QUERY);
}

TEST(ParsePlan, MissingColumnIsNamed) {
  const auto database = mini_star();
  const auto message = bind_error("select d_nope = 1\n  get date_dim\n", database);
  EXPECT_NE(message.find("d_nope"), std::string::npos) << message;
  const auto grouped = bind_error("aggregate group=[c_missing] aggs=[]\n  get customer\n", database);
  EXPECT_NE(grouped.find("c_missing"), std::string::npos) << grouped;
}

TEST(ParsePlan, OtherBindErrors) {
  const auto database = mini_star();
  EXPECT_FALSE(bind_error("get nowhere\n", database).empty());
  // Arity mismatches.
  EXPECT_FALSE(bind_error("union\n  get sales\n  get customer\n", database).empty());
  EXPECT_FALSE(bind_error("join inner on=[s_customer=c_sk]\n  get sales\n", database).empty());
  EXPECT_FALSE(bind_error("select d_year between 1\n  get date_dim\n", database).empty());
  // Type mismatch of a constant, and of join keys.
  EXPECT_FALSE(bind_error("select d_year = 'x'\n  get date_dim\n", database).empty());
  EXPECT_FALSE(bind_error("join inner on=[s_customer=c_name]\n  get sales\n  get customer\n", database).empty());
  EXPECT_FALSE(bind_error("select s_sold_date = value(@2)\n  get sales\n  subquery @1\n    project [d_sk]\n      get date_dim\n",
                          database)
                   .empty());
  EXPECT_FALSE(bind_error("select s_sold_date = value(@1)\n  get sales\n  subquery @1\n    get date_dim\n", database)
                   .empty());
}

TEST(OutputColumns, SemiJoinKeepsLeft) {
  const auto database = mini_star();
  const auto sales = make_get(database, "sales");
  const auto semi = make_join(JoinMode::Semi, sales, make_get(database, "date_dim"), {{"s_sold_date", "d_sk"}});
  EXPECT_EQ(output_column_names(*semi), output_column_names(*sales));
}

TEST(OutputColumns, ProjectRestricts) {
  const auto database = mini_star();
  const auto project = make_project(make_get(database, "customer"), std::vector<std::string>{"c_sk"});
  EXPECT_EQ(output_column_names(*project), (std::vector<std::string>{"c_sk"}));
}

TEST(OutputColumns, InnerJoinConcatenates) {
  const auto database = mini_star();
  const auto sales = make_get(database, "sales");
  const auto customer = make_get(database, "customer");
  const auto join = make_join(JoinMode::Inner, sales, customer, {{"s_customer", "c_sk"}});
  auto expected = output_column_names(*sales);
  for (const auto& name : output_column_names(*customer)) expected.push_back(name);
  EXPECT_EQ(output_column_names(*join), expected);
}

TEST(OutputColumns, LineageSurvivesFiltersButNotArithmetic) {
  const auto database = mini_star();
  const auto plan = parse_plan("project [s_customer,twice=s_quantity*2]\n  select s_quantity > 1\n    get sales\n", database);
  EXPECT_EQ(plan->column("s_customer").source, (BaseColumn{"sales", "s_customer"}));
  EXPECT_FALSE(plan->column("twice").source.has_value());
}

TEST(PlanText, RoundTripOnGeneratedPlans) {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const auto database = random_star_database(seed);
    for (const auto& plan : random_plans(database, seed, 30)) {
      const auto text = print_plan(*plan);
      const auto reparsed = parse_plan(text, database);
      EXPECT_TRUE(plan_equal(*reparsed, *plan)) << text;
      EXPECT_EQ(print_plan(*reparsed), text);
      for (const auto& node : all_nodes(plan)) {
        if (node->type() == PlanNodeType::Join && node->as<JoinNode>().mode == JoinMode::Semi) {
          EXPECT_EQ(output_column_names(*node), output_column_names(*node->left()));
        }
      }
    }
  }
}

TEST(PlanText, WorkloadFiles) {
  const auto database = mini_star();
  const auto workload = parse_workload("# comment\nquery a\nget sales\n\nquery b\nget customer\n", database);
  ASSERT_EQ(workload.size(), 2u);
  EXPECT_EQ(workload[0].name, "a");
  EXPECT_EQ(workload[1].plan->as<GetNode>().table->name(), "customer");
  EXPECT_THROW(parse_workload("get sales\n", database), BindError);
}

TEST(PlanText, ReferencedTablesIncludeSubqueries) {
  const auto database = mini_star();
  const auto plan = parse_plan(
      "select s_sold_date between min(@1) and max(@1)\n  get sales\n  subquery @1\n    project [d_sk]\n      select d_year = 2001\n"
      "        get date_dim\n",
      database);
  EXPECT_EQ(referenced_tables(*plan), (std::set<std::string>{"date_dim", "sales"}));
}
