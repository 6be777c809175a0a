#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "depqo/types.hpp"

namespace depqo {

constexpr ChunkOffset DEFAULT_CHUNK_CAPACITY = 65'535;

using ValueID = uint32_t;
constexpr ValueID NULL_VALUE_ID = std::numeric_limits<ValueID>::max();

struct ColumnDefinition {
  std::string name;
  DataType type;

  bool operator==(const ColumnDefinition&) const = default;
};

// Statistics derivable from a segment's dictionary and attribute vector without touching rows.
struct SegmentStats {
  Value min;
  Value max;
  size_t distinct_count{0};
  size_t size{0};
  size_t null_count{0};
};

// Dictionary-encoded column slice of one chunk. The dictionary is sorted and holds every distinct non-null value;
// the attribute vector stores one dictionary offset per row, NULL_VALUE_ID for nulls.
class Segment {
 public:
  Segment(std::vector<Value> dictionary, std::vector<ValueID> attribute_vector);

  static Segment encode(std::span<const Value> values);

  const std::vector<Value>& dictionary() const { return dictionary_; }
  const std::vector<ValueID>& attribute_vector() const { return attribute_vector_; }

  size_t size() const { return attribute_vector_.size(); }
  size_t null_count() const { return null_count_; }

  // Reads the first and last dictionary entries; constant time.
  SegmentStats stats() const;

  const Value& value_at(ChunkOffset offset) const;
  std::vector<Value> decode() const;

 private:
  std::vector<Value> dictionary_;
  std::vector<ValueID> attribute_vector_;
  size_t null_count_{0};
};

class Chunk {
 public:
  explicit Chunk(std::vector<Segment> segments);

  const Segment& segment(ColumnID column_id) const { return segments_.at(column_id); }
  size_t column_count() const { return segments_.size(); }
  size_t size() const { return segments_.empty() ? 0 : segments_.front().size(); }

 private:
  std::vector<Segment> segments_;
};

// Whole-column aggregate used by cardinality estimation. Computed once on first request.
struct ColumnStatistics {
  Value min;
  Value max;
  size_t distinct_count{0};
  size_t null_count{0};
  size_t row_count{0};
};

class Table {
 public:
  Table(std::string name, std::vector<ColumnDefinition> columns, std::vector<Chunk> chunks, ChunkOffset chunk_capacity);

  const std::string& name() const { return name_; }
  const std::vector<ColumnDefinition>& columns() const { return columns_; }
  size_t column_count() const { return columns_.size(); }
  ChunkOffset chunk_capacity() const { return chunk_capacity_; }

  ColumnID column_id(std::string_view column_name) const;
  std::optional<ColumnID> find_column(std::string_view column_name) const;
  DataType column_type(ColumnID column_id) const { return columns_.at(column_id).type; }

  size_t chunk_count() const { return chunks_.size(); }
  const Chunk& chunk(ChunkID chunk_id) const;
  const Segment& segment(ChunkID chunk_id, ColumnID column_id) const;
  size_t row_count() const { return row_count_; }

  const ColumnStatistics& column_statistics(ColumnID column_id) const;

  // Decodes one full column in chunk order.
  std::vector<Value> column_values(ColumnID column_id) const;

 private:
  std::string name_;
  std::vector<ColumnDefinition> columns_;
  std::vector<Chunk> chunks_;
  ChunkOffset chunk_capacity_;
  size_t row_count_{0};

  mutable std::vector<std::once_flag> statistics_once_;
  mutable std::vector<ColumnStatistics> statistics_;
};

// Row-wise table construction. Values are type-checked against the column definitions.
class TableBuilder {
 public:
  TableBuilder(std::string name, std::vector<ColumnDefinition> columns,
               ChunkOffset chunk_capacity = DEFAULT_CHUNK_CAPACITY);

  void append_row(std::vector<Value> row);
  std::shared_ptr<const Table> build();

 private:
  void flush_chunk();

  std::string name_;
  std::vector<ColumnDefinition> columns_;
  ChunkOffset chunk_capacity_;
  std::vector<std::vector<Value>> pending_;
  std::vector<Chunk> chunks_;
};

std::shared_ptr<const Table> make_table(std::string name, std::vector<ColumnDefinition> columns,
                                        const std::vector<std::vector<Value>>& column_values,
                                        ChunkOffset chunk_capacity = DEFAULT_CHUNK_CAPACITY);

SegmentStats segment_stats(const Table& table, std::string_view column_name, ChunkID chunk_id);

class LoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Reads an RFC-4180 CSV file with a header row. Header names must match the schema (any order).
std::shared_ptr<const Table> load_csv(const std::filesystem::path& path, std::string table_name,
                                      const std::vector<ColumnDefinition>& schema,
                                      ChunkOffset chunk_capacity = DEFAULT_CHUNK_CAPACITY);

void write_csv(const Table& table, const std::filesystem::path& path);

enum class PredicateCondition : uint8_t {
  Equals,
  LessThan,
  LessThanEquals,
  GreaterThan,
  GreaterThanEquals,
  Between,
  IsNotNull
};

std::string_view condition_symbol(PredicateCondition condition);

// Row-level evaluation. A null input never matches; a null operand matches nothing.
bool evaluate_condition(PredicateCondition condition, const Value& value, const Value& operand,
                        const Value& second_operand = Null{});

struct ScanPredicate {
  ColumnID column_id{0};
  PredicateCondition condition{PredicateCondition::Equals};
  Value value;
  Value second_value;
};

// Zone-map check: false iff the segment's min/max rule out every row for this predicate.
bool segment_may_match(const SegmentStats& stats, const ScanPredicate& predicate);
bool chunk_may_match(const Table& table, ChunkID chunk_id, std::span<const ScanPredicate> predicates);

// Returns matching positions of one chunk. Chunks listed in `pruned` are not touched and yield nothing.
std::vector<ChunkOffset> scan_chunk(const Table& table, ChunkID chunk_id, std::span<const ScanPredicate> predicates,
                                    const std::set<ChunkID>& pruned = {});

class Database {
 public:
  void add_table(std::shared_ptr<const Table> table);
  std::shared_ptr<const Table> get_table(std::string_view name) const;
  bool has_table(std::string_view name) const;
  std::vector<std::string> table_names() const;

 private:
  std::map<std::string, std::shared_ptr<const Table>, std::less<>> tables_;
};

}  // namespace depqo
