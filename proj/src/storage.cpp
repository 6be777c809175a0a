#include "depqo/storage.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace depqo {

Segment::Segment(std::vector<Value> dictionary, std::vector<ValueID> attribute_vector)
    : dictionary_(std::move(dictionary)), attribute_vector_(std::move(attribute_vector)) {
  for (size_t index = 1; index < dictionary_.size(); ++index) {
    if (!(dictionary_[index - 1] < dictionary_[index])) throw std::logic_error("segment dictionary must be ascending");
  }
  for (const auto value_id : attribute_vector_) {
    if (value_id == NULL_VALUE_ID) {
      ++null_count_;
    } else if (value_id >= dictionary_.size()) {
      throw std::logic_error("attribute vector offset out of dictionary range");
    }
  }
}

Segment Segment::encode(std::span<const Value> values) {
  auto dictionary = std::vector<Value>{};
  dictionary.reserve(values.size());
  for (const auto& value : values) {
    if (!is_null(value)) dictionary.push_back(value);
  }
  std::sort(dictionary.begin(), dictionary.end());
  dictionary.erase(std::unique(dictionary.begin(), dictionary.end()), dictionary.end());
  dictionary.shrink_to_fit();

  auto attribute_vector = std::vector<ValueID>{};
  attribute_vector.reserve(values.size());
  for (const auto& value : values) {
    if (is_null(value)) {
      attribute_vector.push_back(NULL_VALUE_ID);
    } else {
      const auto it = std::lower_bound(dictionary.begin(), dictionary.end(), value);
      attribute_vector.push_back(static_cast<ValueID>(it - dictionary.begin()));
    }
  }
  return Segment{std::move(dictionary), std::move(attribute_vector)};
}

SegmentStats Segment::stats() const {
  auto stats = SegmentStats{};
  stats.size = size();
  stats.null_count = null_count_;
  stats.distinct_count = dictionary_.size();
  if (!dictionary_.empty()) {
    stats.min = dictionary_.front();
    stats.max = dictionary_.back();
  }
  return stats;
}

const Value& Segment::value_at(ChunkOffset offset) const {
  static const auto null_value = Value{Null{}};
  const auto value_id = attribute_vector_.at(offset);
  return value_id == NULL_VALUE_ID ? null_value : dictionary_[value_id];
}

std::vector<Value> Segment::decode() const {
  auto values = std::vector<Value>{};
  values.reserve(size());
  for (ChunkOffset offset = 0; offset < size(); ++offset) values.push_back(value_at(offset));
  return values;
}

Chunk::Chunk(std::vector<Segment> segments) : segments_(std::move(segments)) {
  for (const auto& segment : segments_) {
    if (segment.size() != size()) throw std::logic_error("segments of a chunk must share their row count");
  }
}

Table::Table(std::string name, std::vector<ColumnDefinition> columns, std::vector<Chunk> chunks,
             ChunkOffset chunk_capacity)
    : name_(std::move(name)),
      columns_(std::move(columns)),
      chunks_(std::move(chunks)),
      chunk_capacity_(chunk_capacity),
      statistics_once_(columns_.size()),
      statistics_(columns_.size()) {
  if (chunk_capacity_ == 0) throw std::invalid_argument("chunk capacity must be positive");
  for (ChunkID chunk_id = 0; chunk_id < chunks_.size(); ++chunk_id) {
    const auto& chunk = chunks_[chunk_id];
    if (chunk.column_count() != columns_.size()) throw std::logic_error("chunk lacks a segment per column");
    if (chunk.size() > chunk_capacity_ || (chunk_id + 1 < chunks_.size() && chunk.size() != chunk_capacity_)) {
      throw std::logic_error("only the last chunk may hold fewer rows than the chunk capacity");
    }
    row_count_ += chunk.size();
  }
}

std::optional<ColumnID> Table::find_column(std::string_view column_name) const {
  for (ColumnID column_id = 0; column_id < columns_.size(); ++column_id) {
    if (columns_[column_id].name == column_name) return column_id;
  }
  return std::nullopt;
}

ColumnID Table::column_id(std::string_view column_name) const {
  if (const auto column_id = find_column(column_name)) return *column_id;
  throw LookupError("table '" + name_ + "' has no column '" + std::string{column_name} + "'");
}

const Chunk& Table::chunk(ChunkID chunk_id) const {
  if (chunk_id >= chunks_.size()) {
    throw LookupError("table '" + name_ + "' has no chunk " + std::to_string(chunk_id));
  }
  return chunks_[chunk_id];
}

const Segment& Table::segment(ChunkID chunk_id, ColumnID column_id) const {
  if (column_id >= columns_.size()) {
    throw LookupError("table '" + name_ + "' has no column " + std::to_string(column_id));
  }
  return chunk(chunk_id).segment(column_id);
}

const ColumnStatistics& Table::column_statistics(ColumnID column_id) const {
  if (column_id >= columns_.size()) {
    throw LookupError("table '" + name_ + "' has no column " + std::to_string(column_id));
  }
  std::call_once(statistics_once_[column_id], [&] {
    auto& statistics = statistics_[column_id];
    statistics.row_count = row_count_;
    auto distinct = std::unordered_set<Value, ValueHash>{};
    for (const auto& chunk : chunks_) {
      const auto& segment = chunk.segment(column_id);
      statistics.null_count += segment.null_count();
      if (segment.dictionary().empty()) continue;
      const auto& dictionary = segment.dictionary();
      if (is_null(statistics.min) || dictionary.front() < statistics.min) statistics.min = dictionary.front();
      if (is_null(statistics.max) || statistics.max < dictionary.back()) statistics.max = dictionary.back();
      distinct.insert(dictionary.begin(), dictionary.end());
    }
    statistics.distinct_count = distinct.size();
  });
  return statistics_[column_id];
}

std::vector<Value> Table::column_values(ColumnID column_id) const {
  auto values = std::vector<Value>{};
  values.reserve(row_count_);
  for (const auto& chunk : chunks_) {
    const auto& segment = chunk.segment(column_id);
    for (ChunkOffset offset = 0; offset < segment.size(); ++offset) values.push_back(segment.value_at(offset));
  }
  return values;
}

TableBuilder::TableBuilder(std::string name, std::vector<ColumnDefinition> columns, ChunkOffset chunk_capacity)
    : name_(std::move(name)), columns_(std::move(columns)), chunk_capacity_(chunk_capacity), pending_(columns_.size()) {
  if (chunk_capacity_ == 0) throw std::invalid_argument("chunk capacity must be positive");
}

void TableBuilder::append_row(std::vector<Value> row) {
  if (row.size() != columns_.size()) {
    throw TypeError("row has " + std::to_string(row.size()) + " values, table '" + name_ + "' has " +
                    std::to_string(columns_.size()) + " columns");
  }
  for (size_t column_id = 0; column_id < row.size(); ++column_id) {
    const auto type = value_type(row[column_id]);
    if (type && *type != columns_[column_id].type) {
      throw TypeError("value '" + value_to_string(row[column_id]) + "' does not match type " +
                      std::string{data_type_name(columns_[column_id].type)} + " of column '" +
                      columns_[column_id].name + "'");
    }
    pending_[column_id].push_back(std::move(row[column_id]));
  }
  if (pending_.front().size() == chunk_capacity_) flush_chunk();
}

void TableBuilder::flush_chunk() {
  if (pending_.empty() || pending_.front().empty()) return;
  auto segments = std::vector<Segment>{};
  segments.reserve(columns_.size());
  for (auto& values : pending_) {
    segments.push_back(Segment::encode(values));
    values.clear();
  }
  chunks_.emplace_back(std::move(segments));
}

std::shared_ptr<const Table> TableBuilder::build() {
  if (columns_.empty()) throw std::invalid_argument("table '" + name_ + "' needs at least one column");
  flush_chunk();
  return std::make_shared<const Table>(name_, columns_, std::move(chunks_), chunk_capacity_);
}

std::shared_ptr<const Table> make_table(std::string name, std::vector<ColumnDefinition> columns,
                                        const std::vector<std::vector<Value>>& column_values,
                                        ChunkOffset chunk_capacity) {
  if (column_values.size() != columns.size()) throw std::invalid_argument("one value list per column required");
  const auto row_count = column_values.empty() ? size_t{0} : column_values.front().size();
  auto builder = TableBuilder{std::move(name), std::move(columns), chunk_capacity};
  for (size_t row = 0; row < row_count; ++row) {
    auto values = std::vector<Value>{};
    values.reserve(column_values.size());
    for (const auto& column : column_values) values.push_back(column.at(row));
    builder.append_row(std::move(values));
  }
  return builder.build();
}

SegmentStats segment_stats(const Table& table, std::string_view column_name, ChunkID chunk_id) {
  return table.segment(chunk_id, table.column_id(column_name)).stats();
}

namespace {

struct CsvField {
  std::string text;
  bool quoted{false};
};

// Splits CSV content into records. Quoted fields may span lines; `line_numbers` receives each record's first line.
std::vector<std::vector<CsvField>> parse_csv(std::string_view content, std::vector<size_t>& line_numbers) {
  auto records = std::vector<std::vector<CsvField>>{};
  auto record = std::vector<CsvField>{};
  auto field = CsvField{};
  auto line = size_t{1};
  auto record_line = size_t{1};
  auto in_quotes = false;
  auto field_started = false;

  const auto end_record = [&] {
    record.push_back(std::move(field));
    field = CsvField{};
    field_started = false;
    const auto blank = record.size() == 1 && record.front().text.empty() && !record.front().quoted;
    if (!blank) {
      records.push_back(std::move(record));
      line_numbers.push_back(record_line);
    }
    record.clear();
  };

  for (size_t index = 0; index < content.size(); ++index) {
    const auto character = content[index];
    if (in_quotes) {
      if (character == '"') {
        if (index + 1 < content.size() && content[index + 1] == '"') {
          field.text.push_back('"');
          ++index;
        } else {
          in_quotes = false;
        }
      } else {
        if (character == '\n') ++line;
        field.text.push_back(character);
      }
      continue;
    }
    switch (character) {
      case '"':
        if (field_started) throw LoadError("line " + std::to_string(line) + ": unexpected quote inside field");
        in_quotes = true;
        field.quoted = true;
        field_started = true;
        break;
      case ',':
        record.push_back(std::move(field));
        field = CsvField{};
        field_started = false;
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        ++line;
        record_line = line;
        break;
      default:
        if (field.quoted) {
          throw LoadError("line " + std::to_string(line) + ": characters after closing quote");
        }
        field.text.push_back(character);
        field_started = true;
    }
  }
  if (in_quotes) throw LoadError("line " + std::to_string(record_line) + ": unterminated quoted field");
  if (field_started || !record.empty()) end_record();
  return records;
}

bool needs_quoting(const std::string& text) {
  return text.empty() || text.find_first_of(",\"\n\r") != std::string::npos;
}

}  // namespace

std::shared_ptr<const Table> load_csv(const std::filesystem::path& path, std::string table_name,
                                      const std::vector<ColumnDefinition>& schema, ChunkOffset chunk_capacity) {
  auto stream = std::ifstream{path, std::ios::binary};
  if (!stream) throw LoadError("cannot open '" + path.string() + "'");
  auto buffer = std::stringstream{};
  buffer << stream.rdbuf();
  const auto content = buffer.str();

  auto line_numbers = std::vector<size_t>{};
  const auto records = parse_csv(content, line_numbers);
  if (records.empty()) throw LoadError("'" + path.string() + "' lacks a header row");

  const auto& header = records.front();
  if (header.size() != schema.size()) {
    throw LoadError("line 1: header has " + std::to_string(header.size()) + " columns, schema has " +
                    std::to_string(schema.size()));
  }
  // Maps schema position to CSV field position.
  auto field_of_column = std::vector<size_t>(schema.size());
  for (size_t column_id = 0; column_id < schema.size(); ++column_id) {
    const auto it = std::find_if(header.begin(), header.end(),
                                 [&](const CsvField& field) { return field.text == schema[column_id].name; });
    if (it == header.end()) throw LoadError("line 1: header lacks column '" + schema[column_id].name + "'");
    field_of_column[column_id] = static_cast<size_t>(it - header.begin());
  }

  auto builder = TableBuilder{std::move(table_name), schema, chunk_capacity};
  for (size_t record_index = 1; record_index < records.size(); ++record_index) {
    const auto& record = records[record_index];
    const auto line = line_numbers[record_index];
    if (record.size() != schema.size()) {
      throw LoadError("line " + std::to_string(line) + ": expected " + std::to_string(schema.size()) +
                      " fields, found " + std::to_string(record.size()));
    }
    auto row = std::vector<Value>{};
    row.reserve(schema.size());
    for (size_t column_id = 0; column_id < schema.size(); ++column_id) {
      const auto& field = record[field_of_column[column_id]];
      const auto& column = schema[column_id];
      if (field.quoted && column.type == DataType::String) {
        row.emplace_back(field.text);
        continue;
      }
      try {
        row.push_back(parse_value(field.text, column.type));
      } catch (const TypeError& error) {
        throw LoadError("line " + std::to_string(line) + ", column '" + column.name + "': " + error.what());
      }
    }
    builder.append_row(std::move(row));
  }
  return builder.build();
}

void write_csv(const Table& table, const std::filesystem::path& path) {
  auto stream = std::ofstream{path, std::ios::binary};
  if (!stream) throw LoadError("cannot write '" + path.string() + "'");
  const auto& columns = table.columns();
  for (size_t column_id = 0; column_id < columns.size(); ++column_id) {
    stream << (column_id ? "," : "") << columns[column_id].name;
  }
  stream << '\n';
  for (ChunkID chunk_id = 0; chunk_id < table.chunk_count(); ++chunk_id) {
    const auto& chunk = table.chunk(chunk_id);
    for (ChunkOffset offset = 0; offset < chunk.size(); ++offset) {
      for (ColumnID column_id = 0; column_id < columns.size(); ++column_id) {
        if (column_id) stream << ',';
        const auto& value = chunk.segment(column_id).value_at(offset);
        if (is_null(value)) continue;
        auto text = value_to_string(value);
        if (columns[column_id].type == DataType::String && needs_quoting(text)) {
          auto quoted = std::string{"\""};
          for (const auto character : text) {
            if (character == '"') quoted.push_back('"');
            quoted.push_back(character);
          }
          quoted.push_back('"');
          text = std::move(quoted);
        }
        stream << text;
      }
      stream << '\n';
    }
  }
}

std::string_view condition_symbol(PredicateCondition condition) {
  switch (condition) {
    case PredicateCondition::Equals:
      return "=";
    case PredicateCondition::LessThan:
      return "<";
    case PredicateCondition::LessThanEquals:
      return "<=";
    case PredicateCondition::GreaterThan:
      return ">";
    case PredicateCondition::GreaterThanEquals:
      return ">=";
    case PredicateCondition::Between:
      return "between";
    case PredicateCondition::IsNotNull:
      return "is not null";
  }
  return "?";
}

bool evaluate_condition(PredicateCondition condition, const Value& value, const Value& operand,
                        const Value& second_operand) {
  if (is_null(value)) return false;
  if (condition == PredicateCondition::IsNotNull) return true;
  if (is_null(operand)) return false;
  const auto order = compare_values(value, operand);
  switch (condition) {
    case PredicateCondition::Equals:
      return order == 0;
    case PredicateCondition::LessThan:
      return order < 0;
    case PredicateCondition::LessThanEquals:
      return order <= 0;
    case PredicateCondition::GreaterThan:
      return order > 0;
    case PredicateCondition::GreaterThanEquals:
      return order >= 0;
    case PredicateCondition::Between:
      return !is_null(second_operand) && order >= 0 && compare_values(value, second_operand) <= 0;
    case PredicateCondition::IsNotNull:
      return true;
  }
  return false;
}

bool segment_may_match(const SegmentStats& stats, const ScanPredicate& predicate) {
  if (stats.null_count == stats.size) return false;
  if (predicate.condition == PredicateCondition::IsNotNull) return true;
  if (is_null(predicate.value)) return false;
  const auto& value = predicate.value;
  switch (predicate.condition) {
    case PredicateCondition::Equals:
      return compare_values(stats.min, value) <= 0 && compare_values(stats.max, value) >= 0;
    case PredicateCondition::LessThan:
      return compare_values(stats.min, value) < 0;
    case PredicateCondition::LessThanEquals:
      return compare_values(stats.min, value) <= 0;
    case PredicateCondition::GreaterThan:
      return compare_values(stats.max, value) > 0;
    case PredicateCondition::GreaterThanEquals:
      return compare_values(stats.max, value) >= 0;
    case PredicateCondition::Between:
      if (is_null(predicate.second_value)) return false;
      return compare_values(stats.max, value) >= 0 && compare_values(stats.min, predicate.second_value) <= 0;
    case PredicateCondition::IsNotNull:
      return true;
  }
  return true;
}

namespace {

void check_predicate_types(const Table& table, const ScanPredicate& predicate) {
  const auto type = table.column_type(predicate.column_id);
  for (const auto* operand : {&predicate.value, &predicate.second_value}) {
    const auto operand_type = value_type(*operand);
    if (operand_type && *operand_type != type) {
      throw TypeError("predicate on column '" + table.columns()[predicate.column_id].name + "' of type " +
                      std::string{data_type_name(type)} + " compares against " +
                      std::string{data_type_name(*operand_type)} + " value '" + value_to_string(*operand) + "'");
    }
  }
}

// Matching dictionary positions form a contiguous range [first, last) because the dictionary is sorted.
std::pair<ValueID, ValueID> matching_value_ids(const std::vector<Value>& dictionary, const ScanPredicate& predicate) {
  const auto size = static_cast<ValueID>(dictionary.size());
  const auto lower = [&](const Value& value) {
    return static_cast<ValueID>(std::lower_bound(dictionary.begin(), dictionary.end(), value) - dictionary.begin());
  };
  const auto upper = [&](const Value& value) {
    return static_cast<ValueID>(std::upper_bound(dictionary.begin(), dictionary.end(), value) - dictionary.begin());
  };
  if (predicate.condition == PredicateCondition::IsNotNull) return {0, size};
  if (is_null(predicate.value)) return {0, 0};
  switch (predicate.condition) {
    case PredicateCondition::Equals:
      return {lower(predicate.value), upper(predicate.value)};
    case PredicateCondition::LessThan:
      return {0, lower(predicate.value)};
    case PredicateCondition::LessThanEquals:
      return {0, upper(predicate.value)};
    case PredicateCondition::GreaterThan:
      return {upper(predicate.value), size};
    case PredicateCondition::GreaterThanEquals:
      return {lower(predicate.value), size};
    case PredicateCondition::Between: {
      if (is_null(predicate.second_value)) return {0, 0};
      const auto first = lower(predicate.value);
      return {first, std::max(first, upper(predicate.second_value))};
    }
    case PredicateCondition::IsNotNull:
      break;
  }
  return {0, size};
}

}  // namespace

bool chunk_may_match(const Table& table, ChunkID chunk_id, std::span<const ScanPredicate> predicates) {
  for (const auto& predicate : predicates) {
    check_predicate_types(table, predicate);
    if (!segment_may_match(table.segment(chunk_id, predicate.column_id).stats(), predicate)) return false;
  }
  return true;
}

std::vector<ChunkOffset> scan_chunk(const Table& table, ChunkID chunk_id, std::span<const ScanPredicate> predicates,
                                    const std::set<ChunkID>& pruned) {
  for (const auto& predicate : predicates) check_predicate_types(table, predicate);
  const auto& chunk = table.chunk(chunk_id);
  if (pruned.contains(chunk_id)) return {};

  auto ranges = std::vector<std::pair<ValueID, ValueID>>{};
  ranges.reserve(predicates.size());
  for (const auto& predicate : predicates) {
    const auto range = matching_value_ids(chunk.segment(predicate.column_id).dictionary(), predicate);
    if (range.first >= range.second) return {};
    ranges.push_back(range);
  }

  auto positions = std::vector<ChunkOffset>{};
  const auto size = static_cast<ChunkOffset>(chunk.size());
  if (predicates.empty()) {
    positions.resize(size);
    for (ChunkOffset offset = 0; offset < size; ++offset) positions[offset] = offset;
    return positions;
  }
  for (ChunkOffset offset = 0; offset < size; ++offset) {
    auto matches = true;
    for (size_t index = 0; index < predicates.size() && matches; ++index) {
      const auto value_id = chunk.segment(predicates[index].column_id).attribute_vector()[offset];
      matches = value_id != NULL_VALUE_ID && value_id >= ranges[index].first && value_id < ranges[index].second;
    }
    if (matches) positions.push_back(offset);
  }
  return positions;
}

void Database::add_table(std::shared_ptr<const Table> table) {
  const auto name = table->name();
  tables_[name] = std::move(table);
}

std::shared_ptr<const Table> Database::get_table(std::string_view name) const {
  const auto it = tables_.find(name);
  if (it == tables_.end()) throw LookupError("unknown table '" + std::string{name} + "'");
  return it->second;
}

bool Database::has_table(std::string_view name) const { return tables_.find(name) != tables_.end(); }

std::vector<std::string> Database::table_names() const {
  auto names = std::vector<std::string>{};
  for (const auto& [name, table] : tables_) names.push_back(name);
  return names;
}

}  // namespace depqo
