#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "depqo/storage.hpp"

using namespace depqo;

namespace {

std::filesystem::path temp_file(const std::string& name, const std::string& contents) {
  const auto path = std::filesystem::temp_directory_path() / ("depqo_storage_" + std::to_string(::getpid()) + name);
  auto stream = std::ofstream{path};
  stream << contents;
  return path;
}

const auto XY_SCHEMA = std::vector<ColumnDefinition>{{"x", DataType::Int}, {"y", DataType::String}};

std::vector<size_t> chunk_sizes(const Table& table) {
  auto sizes = std::vector<size_t>{};
  for (ChunkID id = 0; id < table.chunk_count(); ++id) sizes.push_back(table.chunk(id).size());
  return sizes;
}

std::shared_ptr<const Table> int_table(const std::vector<int64_t>& values, ChunkOffset capacity) {
  auto column = std::vector<Value>{values.begin(), values.end()};
  return make_table("t", {{"x", DataType::Int}}, {column}, capacity);
}

}  // namespace

TEST(LoadCsv, ThreeRowsCapacityTwo) {
  const auto path = temp_file("three.csv", "x,y\n1,a\n2,b\n3,c\n");
  const auto table = load_csv(path, "t", XY_SCHEMA, 2);
  EXPECT_EQ(chunk_sizes(*table), (std::vector<size_t>{2, 1}));
  EXPECT_EQ(table->row_count(), 3u);
}

TEST(LoadCsv, HeaderOnlyGivesNoChunks) {
  const auto path = temp_file("empty.csv", "x,y\n");
  const auto table = load_csv(path, "t", XY_SCHEMA, 2);
  EXPECT_EQ(table->chunk_count(), 0u);
  EXPECT_EQ(table->row_count(), 0u);
}

TEST(LoadCsv, DefaultCapacitySplitsSeventyThousandRows) {
  auto text = std::string{"x,y\n"};
  for (int row = 0; row < 70'000; ++row) text += std::to_string(row) + ",v\n";
  const auto table = load_csv(temp_file("big.csv", text), "t", XY_SCHEMA);
  EXPECT_EQ(chunk_sizes(*table), (std::vector<size_t>{65'535, 4'465}));
}

TEST(LoadCsv, QuotingAndHeaderOrder) {
  const auto path = temp_file("quoted.csv", "y,x\n\"a,b\",1\n\"say \"\"hi\"\"\",2\n,3\n");
  const auto table = load_csv(path, "t", XY_SCHEMA);
  const auto y = table->column_values(table->column_id("y"));
  EXPECT_EQ(y[0], Value{std::string{"a,b"}});
  EXPECT_EQ(y[1], Value{std::string{"say \"hi\""}});
  EXPECT_TRUE(is_null(y[2]));
  EXPECT_EQ(table->column_values(table->column_id("x"))[2], Value{int64_t{3}});
}

TEST(LoadCsv, MalformedRowNamesLine) {
  const auto path = temp_file("malformed.csv", "x,y\n1,a\n2\n");
  try {
    load_csv(path, "t", XY_SCHEMA);
    FAIL() << "expected LoadError";
  } catch (const LoadError& error) {
    EXPECT_NE(std::string{error.what()}.find("line 3"), std::string::npos) << error.what();
  }
}

TEST(LoadCsv, TypeMismatchNamesColumn) {
  const auto path = temp_file("mismatch.csv", "x,y\n1,a\nzwei,b\n");
  try {
    load_csv(path, "t", XY_SCHEMA);
    FAIL() << "expected LoadError";
  } catch (const LoadError& error) {
    EXPECT_NE(std::string{error.what()}.find("'x'"), std::string::npos) << error.what();
  }
}

TEST(LoadCsv, WriteThenLoadRoundTrips) {
  const auto schema = std::vector<ColumnDefinition>{{"k", DataType::Int}, {"s", DataType::String}, {"d", DataType::Date}};
  const auto original =
      make_table("t", schema,
                 {{int64_t{1}, int64_t{2}, Null{}},
                  {std::string{"plain"}, std::string{"with,comma"}, std::string{"q\"uote"}},
                  {parse_date("2000-01-01"), Null{}, parse_date("1999-12-31")}},
                 2);
  const auto path = std::filesystem::temp_directory_path() / ("depqo_storage_rt_" + std::to_string(::getpid()) + ".csv");
  write_csv(*original, path);
  const auto loaded = load_csv(path, "t", schema, 2);
  for (ColumnID column = 0; column < 3; ++column) {
    EXPECT_EQ(loaded->column_values(column), original->column_values(column));
  }
}

TEST(SegmentStats, EnumeratedValues) {
  const auto values = std::vector<Value>{int64_t{4}, int64_t{1}, int64_t{4}, int64_t{9}};
  const auto stats = Segment::encode(values).stats();
  EXPECT_EQ(stats.min, Value{int64_t{1}});
  EXPECT_EQ(stats.max, Value{int64_t{9}});
  EXPECT_EQ(stats.distinct_count, 3u);
  EXPECT_EQ(stats.size, 4u);
}

TEST(SegmentStats, ConstantSegment) {
  const auto stats = Segment::encode(std::vector<Value>(3, int64_t{7})).stats();
  EXPECT_EQ(stats.min, Value{int64_t{7}});
  EXPECT_EQ(stats.max, Value{int64_t{7}});
  EXPECT_EQ(stats.distinct_count, 1u);
  EXPECT_EQ(stats.size, 3u);
}

TEST(SegmentStats, SevenRowsSixDistinct) {
  const auto table = int_table({3, 8, 1, 5, 8, 2, 9}, 7);
  const auto stats = segment_stats(*table, "x", 0);
  EXPECT_EQ(stats.distinct_count, 6u);
  EXPECT_EQ(stats.size, 7u);
}

TEST(SegmentStats, NullsAreCountedButNotDistinct) {
  const auto stats = Segment::encode(std::vector<Value>{Null{}, int64_t{2}, Null{}}).stats();
  EXPECT_EQ(stats.null_count, 2u);
  EXPECT_EQ(stats.distinct_count, 1u);
  EXPECT_EQ(stats.size, 3u);
}

TEST(SegmentStats, UnknownColumnOrChunk) {
  const auto table = int_table({1, 2}, 2);
  EXPECT_THROW(segment_stats(*table, "nope", 0), LookupError);
  EXPECT_THROW(segment_stats(*table, "x", 5), LookupError);
}

TEST(ScanChunk, ZoneMapExcludesChunk) {
  const auto table = int_table({10, 11, 12}, 3);
  const auto predicate = ScanPredicate{0, PredicateCondition::Equals, int64_t{5}, Null{}};
  EXPECT_FALSE(chunk_may_match(*table, 0, std::span{&predicate, 1}));
  EXPECT_TRUE(scan_chunk(*table, 0, std::span{&predicate, 1}).empty());
}

TEST(ScanChunk, BetweenReturnsPositions) {
  const auto table = int_table({1, 2, 3, 4, 5, 6, 7, 8}, 8);
  const auto predicate = ScanPredicate{0, PredicateCondition::Between, int64_t{3}, int64_t{4}};
  EXPECT_EQ(scan_chunk(*table, 0, std::span{&predicate, 1}), (std::vector<ChunkOffset>{2, 3}));
}

TEST(ScanChunk, StatsExcludeOuterChunks) {
  const auto table = int_table({1, 2, 3, 4, 5, 6, 7, 8, 9}, 3);
  const auto predicate = ScanPredicate{0, PredicateCondition::Equals, int64_t{5}, Null{}};
  auto scanned = std::vector<ChunkID>{};
  auto matches = std::vector<Value>{};
  for (ChunkID id = 0; id < table->chunk_count(); ++id) {
    if (!chunk_may_match(*table, id, std::span{&predicate, 1})) continue;
    scanned.push_back(id);
    for (const auto offset : scan_chunk(*table, id, std::span{&predicate, 1})) {
      matches.push_back(table->segment(id, 0).value_at(offset));
    }
  }
  EXPECT_EQ(scanned, (std::vector<ChunkID>{1}));
  // Full-scan oracle.
  auto expected = std::vector<Value>{};
  for (const auto& value : table->column_values(0)) {
    if (evaluate_condition(PredicateCondition::Equals, value, int64_t{5})) expected.push_back(value);
  }
  EXPECT_EQ(matches, expected);
}

TEST(ScanChunk, PrunedChunksYieldNothing) {
  const auto table = int_table({5, 5, 5}, 3);
  const auto predicate = ScanPredicate{0, PredicateCondition::Equals, int64_t{5}, Null{}};
  EXPECT_TRUE(scan_chunk(*table, 0, std::span{&predicate, 1}, {0}).empty());
}

TEST(ScanChunk, IncomparableConstantIsTypeError) {
  const auto table = int_table({5, 6}, 3);
  const auto predicate = ScanPredicate{0, PredicateCondition::Equals, std::string{"five"}, Null{}};
  EXPECT_THROW(scan_chunk(*table, 0, std::span{&predicate, 1}), TypeError);
}

// Randomized: decoding, stats, and pruning agree with brute force.
TEST(StorageProperties, RandomizedRoundTripStatsAndPruning) {
  for (uint64_t seed = 0; seed < 60; ++seed) {
    auto rng = std::mt19937_64{seed};
    const auto rows = std::uniform_int_distribution<size_t>{0, 400}(rng);
    const auto capacity = static_cast<ChunkOffset>(std::uniform_int_distribution<int>{1, 64}(rng));
    const auto domain = std::uniform_int_distribution<int64_t>{1, 200}(rng);
    auto values = std::vector<Value>{};
    for (size_t row = 0; row < rows; ++row) {
      if (rng() % 17 == 0) {
        values.emplace_back(Null{});
      } else {
        values.emplace_back(std::uniform_int_distribution<int64_t>{0, domain}(rng));
      }
    }
    if (seed % 2 == 0) std::sort(values.begin(), values.end());
    const auto table = make_table("t", {{"x", DataType::Int}}, {values}, capacity);
    ASSERT_EQ(table->column_values(0), values) << "seed " << seed;

    auto offset = size_t{0};
    for (ChunkID id = 0; id < table->chunk_count(); ++id) {
      const auto& segment = table->segment(id, 0);
      const auto stats = segment.stats();
      auto distinct = std::set<int64_t>{};
      auto nulls = size_t{0};
      for (size_t row = 0; row < segment.size(); ++row) {
        const auto& value = values[offset + row];
        if (is_null(value)) {
          ++nulls;
        } else {
          distinct.insert(std::get<int64_t>(value));
        }
      }
      EXPECT_EQ(stats.distinct_count, distinct.size());
      EXPECT_EQ(stats.null_count, nulls);
      if (!distinct.empty()) {
        EXPECT_EQ(stats.min, Value{*distinct.begin()});
        EXPECT_EQ(stats.max, Value{*distinct.rbegin()});
      }
      offset += segment.size();
    }

    for (const auto condition : {PredicateCondition::Equals, PredicateCondition::LessThan,
                                 PredicateCondition::GreaterThanEquals, PredicateCondition::Between}) {
      const auto low = std::uniform_int_distribution<int64_t>{0, domain}(rng);
      const auto predicate = ScanPredicate{0, condition, low, low + 10};
      auto scanned = std::vector<Value>{};
      for (ChunkID id = 0; id < table->chunk_count(); ++id) {
        if (!chunk_may_match(*table, id, std::span{&predicate, 1})) continue;
        for (const auto position : scan_chunk(*table, id, std::span{&predicate, 1})) {
          scanned.push_back(table->segment(id, 0).value_at(position));
        }
      }
      auto expected = std::vector<Value>{};
      for (const auto& value : values) {
        if (evaluate_condition(condition, value, low, low + 10)) expected.push_back(value);
      }
      EXPECT_EQ(scanned, expected) << "seed " << seed;
    }
  }
}

TEST(Database, LookupAndNames) {
  auto database = Database{};
  database.add_table(int_table({1}, 1));
  EXPECT_TRUE(database.has_table("t"));
  EXPECT_EQ(database.table_names(), (std::vector<std::string>{"t"}));
  EXPECT_THROW(database.get_table("missing"), LookupError);
}
