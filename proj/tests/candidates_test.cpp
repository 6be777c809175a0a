#include <gtest/gtest.h>

#include <algorithm>

#include "depqo/candidates.hpp"
#include "support/fixtures.hpp"
#include "support/random_data.hpp"

using namespace depqo;
using namespace depqo::testing;

namespace {

const Candidate* find(const std::vector<Candidate>& candidates, const Dependency& dependency) {
  const auto it = std::find_if(candidates.begin(), candidates.end(),
                               [&](const Candidate& candidate) { return candidate.dependency == dependency; });
  return it == candidates.end() ? nullptr : &*it;
}

std::vector<Dependency> dependencies(const std::vector<Candidate>& candidates) {
  auto result = std::vector<Dependency>{};
  for (const auto& candidate : candidates) result.push_back(candidate.dependency);
  return result;
}

Candidate candidate(Dependency dependency) {
  auto result = Candidate{};
  result.dependency = std::move(dependency);
  return result;
}

}  // namespace

TEST(GenerateCandidates, ExampleQuery) {
  const auto database = mini_star();
  const auto candidates = generate_candidates({parse_plan(EXAMPLE_QUERY, database)});
  EXPECT_TRUE(find(candidates, Dependency::ucc("date_dim", {"d_date"})));
  EXPECT_TRUE(find(candidates, Dependency::ucc("date_dim", {"d_sk"})));
  EXPECT_TRUE(find(candidates, Dependency::ucc("customer", {"c_sk"})));
  EXPECT_TRUE(find(candidates, Dependency::fd("customer", {"c_sk"}, {"c_name"})));
  // The equality rewrite itself needs no IND; one only appears for the range variant.
  const auto* ind = find(candidates, Dependency::ind("sales", {"s_sold_date"}, "date_dim", {"d_sk"}));
  if (ind) EXPECT_EQ(ind->origins, (std::set<CandidateOrigin>{CandidateOrigin::O3range}));
  EXPECT_TRUE(find(candidates, Dependency::ucc("date_dim", {"d_date"}))->origins.contains(CandidateOrigin::O3eq));
}

TEST(GenerateCandidates, YearVariantLinksIndToOd) {
  const auto database = mini_star();
  const auto candidates = generate_candidates({parse_plan(EXAMPLE_YEAR_QUERY, database)});
  const auto* od = find(candidates, Dependency::od("date_dim", {"d_sk"}, {"d_year"}));
  const auto* ind = find(candidates, Dependency::ind("sales", {"s_sold_date"}, "date_dim", {"d_sk"}));
  ASSERT_TRUE(od);
  ASSERT_TRUE(ind);
  EXPECT_TRUE(find(candidates, Dependency::ucc("date_dim", {"d_sk"})));
  EXPECT_EQ(ind->depends_on, (std::set<size_t>{od->id}));
  EXPECT_TRUE(ind->origins.contains(CandidateOrigin::O3range));
}

TEST(GenerateCandidates, SingleTableSingleColumnGroupByHasNone) {
  const auto database = mini_star();
  const auto plan = parse_plan("aggregate group=[s_customer] aggs=[sum(s_quantity)]\n  get sales\n", database);
  EXPECT_TRUE(generate_candidates({plan}).empty());
}

TEST(GenerateCandidates, RepeatedPlansAreDeduplicated) {
  const auto database = mini_star();
  const auto plan = parse_plan(EXAMPLE_YEAR_QUERY, database);
  const auto once = generate_candidates({plan});
  const auto thrice = generate_candidates({plan, parse_plan(EXAMPLE_YEAR_QUERY, database), plan});
  EXPECT_EQ(dependencies(once), dependencies(thrice));
  for (size_t index = 0; index < once.size(); ++index) EXPECT_EQ(once[index].id, index);
}

TEST(GenerateCandidates, KnownDependenciesAreLeftOut) {
  const auto database = mini_star();
  auto store = MetadataStore{};
  store.record(Dependency::ucc("date_dim", {"d_sk"}), true);
  store.record(Dependency::od("date_dim", {"d_sk"}, {"d_year"}), false);
  const auto candidates = generate_candidates({parse_plan(EXAMPLE_YEAR_QUERY, database)}, &store);
  EXPECT_FALSE(find(candidates, Dependency::ucc("date_dim", {"d_sk"})));
  EXPECT_FALSE(find(candidates, Dependency::od("date_dim", {"d_sk"}, {"d_year"})));
  for (const auto& candidate : candidates) {
    for (const auto dependency : candidate.depends_on) EXPECT_LT(dependency, candidates.size());
  }
}

TEST(GenerateCandidates, CompositeKeysOnlyFeedSemiJoin) {
  auto database = Database{};
  database.add_table(make_table("f", {{"a", DataType::Int}, {"b", DataType::Int}, {"v", DataType::Int}},
                                {{int64_t{1}}, {int64_t{1}}, {int64_t{5}}}));
  database.add_table(make_table("d", {{"x", DataType::Int}, {"y", DataType::Int}, {"z", DataType::Int}},
                                {{int64_t{1}}, {int64_t{1}}, {int64_t{3}}}));
  const auto plan = parse_plan("project [v]\n  join inner on=[a=x,b=y]\n    get f\n    select z = 3\n      get d\n", database);
  const auto candidates = generate_candidates({plan});
  const auto* ucc = find(candidates, Dependency::ucc("d", {"x", "y"}));
  ASSERT_TRUE(ucc);
  EXPECT_EQ(ucc->origins, (std::set<CandidateOrigin>{CandidateOrigin::O2}));
  for (const auto& entry : candidates) {
    EXPECT_FALSE(entry.origins.contains(CandidateOrigin::O3eq));
    EXPECT_FALSE(entry.origins.contains(CandidateOrigin::O3range));
  }
}

TEST(OrderCandidates, KindRanking) {
  const auto ordered = order_candidates({candidate(Dependency::ucc("t", {"a"})), candidate(Dependency::od("t", {"b"}, {"c"})),
                                         candidate(Dependency::ind("t", {"c"}, "s", {"x"})),
                                         candidate(Dependency::fd("t", {"d"}, {"e"}))});
  EXPECT_EQ(dependencies(ordered),
            (std::vector<Dependency>{Dependency::od("t", {"b"}, {"c"}), Dependency::ind("t", {"c"}, "s", {"x"}),
                                     Dependency::ucc("t", {"a"}), Dependency::fd("t", {"d"}, {"e"})}));
}

TEST(OrderCandidates, Empty) { EXPECT_TRUE(order_candidates({}).empty()); }

TEST(OrderCandidates, TableNameBreaksTies) {
  const auto ordered =
      order_candidates({candidate(Dependency::ucc("zeta", {"a"})), candidate(Dependency::ucc("alpha", {"a"}))});
  EXPECT_EQ(ordered[0].dependency.table, "alpha");
  EXPECT_EQ(ordered[1].dependency.table, "zeta");
}

TEST(OrderCandidates, PermutationRespectingRanking) {
  for (uint64_t seed = 0; seed < 5; ++seed) {
    const auto database = random_star_database(seed);
    const auto candidates = generate_candidates(random_plans(database, seed, 25));
    const auto ordered = order_candidates(candidates);
    auto before = dependencies(candidates);
    auto after = dependencies(ordered);
    std::sort(before.begin(), before.end());
    std::sort(after.begin(), after.end());
    EXPECT_EQ(before, after);
    const auto rank = [](DependencyKind kind) {
      switch (kind) {
        case DependencyKind::OD: return 0;
        case DependencyKind::IND: return 1;
        case DependencyKind::UCC: return 2;
        case DependencyKind::FD: return 3;
      }
      return 4;
    };
    for (size_t index = 1; index < ordered.size(); ++index) {
      EXPECT_LE(rank(ordered[index - 1].dependency.kind), rank(ordered[index].dependency.kind));
    }
    // Ids survive reordering, so range INDs still point at their OD.
    for (const auto& entry : ordered) {
      if (!entry.origins.contains(CandidateOrigin::O3range) || entry.dependency.kind != DependencyKind::IND) continue;
      ASSERT_EQ(entry.depends_on.size(), 1u);
      for (const auto id : entry.depends_on) {
        const auto target =
            std::find_if(ordered.begin(), ordered.end(), [&](const auto& other) { return other.id == id; });
        ASSERT_NE(target, ordered.end());
        EXPECT_EQ(target->dependency.kind, DependencyKind::OD);
        EXPECT_EQ(target->dependency.table, entry.dependency.referenced_table);
        EXPECT_EQ(target->dependency.columns, entry.dependency.dependents);
      }
    }
  }
}

TEST(GenerateCandidates, SingleRangeFilterGivesOneEdge) {
  const auto database = mini_star();
  const auto candidates = generate_candidates({parse_plan(EXAMPLE_YEAR_QUERY, database)});
  for (const auto& entry : candidates) {
    if (entry.dependency.kind == DependencyKind::IND) EXPECT_EQ(entry.depends_on.size(), 1u);
  }
}
