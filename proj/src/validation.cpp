#include "depqo/validation.hpp"

#include <algorithm>
#include <random>
#include <unordered_set>

namespace depqo {

namespace {

struct TupleHash {
  size_t operator()(const std::vector<Value>& tuple) const {
    auto seed = tuple.size();
    for (const auto& value : tuple) hash_combine(seed, ValueHash{}(value));
    return seed;
  }
};

using ValueSet = std::unordered_set<Value, ValueHash>;
using TupleSet = std::unordered_set<std::vector<Value>, TupleHash>;

std::vector<ColumnID> column_ids(const Table& table, const std::vector<std::string>& columns) {
  auto ids = std::vector<ColumnID>{};
  for (const auto& column : columns) ids.push_back(table.column_id(column));
  return ids;
}

std::strong_ordering compare_tuples(const std::vector<Value>& lhs, const std::vector<Value>& rhs) {
  for (size_t index = 0; index < lhs.size(); ++index) {
    if (const auto order = compare_values(lhs[index], rhs[index]); order != 0) return order;
  }
  return std::strong_ordering::equal;
}

bool has_nulls(const Table& table, ColumnID column_id) {
  for (ChunkID chunk_id = 0; chunk_id < table.chunk_count(); ++chunk_id) {
    if (table.segment(chunk_id, column_id).null_count() > 0) return true;
  }
  return false;
}

// Min and max over all segments, read from dictionaries only. Nullopt if the column holds no values.
std::optional<std::pair<Value, Value>> column_bounds(const Table& table, ColumnID column_id) {
  auto bounds = std::optional<std::pair<Value, Value>>{};
  for (ChunkID chunk_id = 0; chunk_id < table.chunk_count(); ++chunk_id) {
    const auto& dictionary = table.segment(chunk_id, column_id).dictionary();
    if (dictionary.empty()) continue;
    if (!bounds) {
      bounds.emplace(dictionary.front(), dictionary.back());
      continue;
    }
    if (compare_values(dictionary.front(), bounds->first) < 0) bounds->first = dictionary.front();
    if (compare_values(dictionary.back(), bounds->second) > 0) bounds->second = dictionary.back();
  }
  return bounds;
}

std::vector<Value> row_tuple(const Table& table, const std::vector<ColumnID>& ids, ChunkID chunk_id,
                             ChunkOffset offset) {
  auto tuple = std::vector<Value>{};
  tuple.reserve(ids.size());
  for (const auto id : ids) tuple.push_back(table.segment(chunk_id, id).value_at(offset));
  return tuple;
}

bool any_null(const std::vector<Value>& tuple) { return std::any_of(tuple.begin(), tuple.end(), is_null); }

// Sorts (ordering, ordered) pairs unless they already are, then checks that `ordered` never decreases.
bool pairs_ordered(std::vector<std::pair<std::vector<Value>, std::vector<Value>>>& rows) {
  const auto less = [](const auto& lhs, const auto& rhs) {
    const auto order = compare_tuples(lhs.first, rhs.first);
    if (order != 0) return order < 0;
    return compare_tuples(lhs.second, rhs.second) < 0;
  };
  if (!std::is_sorted(rows.begin(), rows.end(), less)) std::sort(rows.begin(), rows.end(), less);
  for (size_t index = 1; index < rows.size(); ++index) {
    if (compare_tuples(rows[index - 1].second, rows[index].second) > 0) return false;
  }
  return true;
}

// Floyd's algorithm: `count` distinct positions from [0, population).
std::vector<size_t> sample_positions(size_t population, size_t count, uint64_t seed) {
  auto engine = std::mt19937_64{seed};
  auto chosen = std::unordered_set<size_t>{};
  for (auto upper = population - count; upper < population; ++upper) {
    const auto candidate = std::uniform_int_distribution<size_t>{0, upper}(engine);
    if (!chosen.insert(candidate).second) chosen.insert(upper);
  }
  auto positions = std::vector<size_t>(chosen.begin(), chosen.end());
  std::sort(positions.begin(), positions.end());
  return positions;
}

}  // namespace

std::string_view validation_path_name(ValidationPath path) {
  switch (path) {
    case ValidationPath::StatsReject:
      return "stats_reject";
    case ValidationPath::IndexConfirm:
      return "index_confirm";
    case ValidationPath::HashSet:
      return "hashset";
    case ValidationPath::NaryReject:
      return "nary_reject";
    case ValidationPath::StoreLookup:
      return "store_lookup";
    case ValidationPath::SampleReject:
      return "sample_reject";
    case ValidationPath::Chunkwise:
      return "chunkwise";
    case ValidationPath::FullSort:
      return "full_sort";
    case ValidationPath::MinMaxReject:
      return "minmax_reject";
    case ValidationPath::ContinuityConfirm:
      return "continuity_confirm";
    case ValidationPath::DictProbe:
      return "dict_probe";
    case ValidationPath::FullProbe:
      return "full_probe";
  }
  return "?";
}

SegmentIndex::SegmentIndex(const Table& table, ColumnID column_id) {
  for (ChunkID chunk_id = 0; chunk_id < table.chunk_count(); ++chunk_id) {
    const auto& dictionary = table.segment(chunk_id, column_id).dictionary();
    if (dictionary.empty()) continue;
    entries_.push_back(Entry{dictionary.front(), false, chunk_id});
    entries_.push_back(Entry{dictionary.back(), true, chunk_id});
  }
  std::sort(entries_.begin(), entries_.end(), [](const Entry& lhs, const Entry& rhs) {
    const auto order = compare_values(lhs.key, rhs.key);
    if (order != 0) return order < 0;
    if (lhs.is_max != rhs.is_max) return !lhs.is_max;
    return lhs.chunk_id < rhs.chunk_id;
  });
}

bool SegmentIndex::domains_disjoint() const {
  for (size_t index = 0; index < entries_.size(); index += 2) {
    const auto& min = entries_[index];
    const auto& max = entries_[index + 1];
    if (min.is_max || !max.is_max || min.chunk_id != max.chunk_id) return false;
  }
  return true;
}

std::vector<ChunkID> SegmentIndex::chunk_order() const {
  auto order = std::vector<ChunkID>{};
  for (const auto& entry : entries_) {
    if (!entry.is_max) order.push_back(entry.chunk_id);
  }
  return order;
}

ValidationResult Validator::validate(const Dependency& dependency, const MetadataStore* store) {
  const auto& table = *database_.get_table(dependency.table);
  switch (dependency.kind) {
    case DependencyKind::UCC:
      return validate_ucc(table, dependency.columns);
    case DependencyKind::FD:
      return validate_fd(table, dependency.columns, dependency.dependents, store);
    case DependencyKind::OD:
      return validate_od(table, dependency.columns, dependency.dependents);
    case DependencyKind::IND:
      return validate_ind(table, dependency.columns, *database_.get_table(dependency.referenced_table),
                          dependency.dependents, store);
  }
  return {};
}

ValidationResult Validator::validate_ucc(const Table& table, const std::vector<std::string>& columns) {
  ++counters_.ucc;
  return check_ucc(table, columns);
}

ValidationResult Validator::check_ucc(const Table& table, const std::vector<std::string>& columns) {
  const auto ids = column_ids(table, columns);
  auto result = ValidationResult{};

  if (ids.size() > 1) {
    result.path = ValidationPath::HashSet;
    auto seen = TupleSet{};
    seen.reserve(table.row_count());
    for (ChunkID chunk_id = 0; chunk_id < table.chunk_count(); ++chunk_id) {
      const auto size = table.chunk(chunk_id).size();
      for (ChunkOffset offset = 0; offset < size; ++offset) {
        auto tuple = row_tuple(table, ids, chunk_id, offset);
        result.rows_touched += ids.size();
        if (any_null(tuple) || !seen.insert(std::move(tuple)).second) return result;
      }
    }
    result.valid = true;
    return result;
  }

  const auto column_id = ids.front();
  if (config_.use_metadata) {
    for (ChunkID chunk_id = 0; chunk_id < table.chunk_count(); ++chunk_id) {
      const auto stats = table.segment(chunk_id, column_id).stats();
      if (stats.null_count > 0 || stats.distinct_count != stats.size) {
        result.path = ValidationPath::StatsReject;
        return result;
      }
    }
    if (SegmentIndex{table, column_id}.domains_disjoint()) {
      result.path = ValidationPath::IndexConfirm;
      result.valid = true;
      return result;
    }
  }

  result.path = ValidationPath::HashSet;
  auto seen = ValueSet{};
  seen.reserve(table.row_count());
  for (ChunkID chunk_id = 0; chunk_id < table.chunk_count(); ++chunk_id) {
    const auto& segment = table.segment(chunk_id, column_id);
    if (config_.use_metadata && config_.use_dictionaries) {
      // Each segment is duplicate-free after the statistics check, so its dictionary stands in for its rows.
      for (const auto& value : segment.dictionary()) {
        ++result.rows_touched;
        if (!seen.insert(value).second) return result;
      }
      continue;
    }
    for (ChunkOffset offset = 0; offset < segment.size(); ++offset) {
      ++result.rows_touched;
      const auto& value = segment.value_at(offset);
      if (is_null(value) || !seen.insert(value).second) return result;
    }
  }
  result.valid = true;
  return result;
}

ValidationResult Validator::validate_fd(const Table& table, const std::vector<std::string>& determinant,
                                        const std::vector<std::string>& dependents, const MetadataStore* store) {
  ++counters_.fd;
  column_ids(table, dependents);
  auto result = ValidationResult{};
  if (determinant.size() != 1) {
    column_ids(table, determinant);
    result.path = ValidationPath::NaryReject;
    return result;
  }
  const auto ucc = Dependency::ucc(table.name(), determinant);
  if (store) {
    if (const auto known = store->lookup(ucc)) {
      result.valid = *known;
      result.path = ValidationPath::StoreLookup;
      return result;
    }
  }
  result = check_ucc(table, determinant);
  result.byproduct.emplace(ucc, result.valid);
  return result;
}

ValidationResult Validator::validate_od(const Table& table, const std::vector<std::string>& ordering,
                                        const std::vector<std::string>& ordered) {
  ++counters_.od;
  const auto ordering_ids = column_ids(table, ordering);
  const auto ordered_ids = column_ids(table, ordered);
  auto result = ValidationResult{};
  const auto unary = ordering_ids.size() == 1 && ordered_ids.size() == 1;

  if (config_.use_metadata && unary) {
    const auto a = ordering_ids.front();
    const auto b = ordered_ids.front();
    if (has_nulls(table, a) || has_nulls(table, b)) {
      result.path = ValidationPath::StatsReject;
      return result;
    }

    const auto rows = table.row_count();
    const auto sample_size = std::min(config_.od_sample_size, rows);
    if (sample_size > 0) {
      auto sample = std::vector<std::pair<std::vector<Value>, std::vector<Value>>>{};
      const auto capacity = table.chunk_capacity();
      for (const auto position : sample_positions(rows, sample_size, config_.seed)) {
        const auto chunk_id = static_cast<ChunkID>(position / capacity);
        const auto offset = static_cast<ChunkOffset>(position % capacity);
        sample.emplace_back(std::vector<Value>{table.segment(chunk_id, a).value_at(offset)},
                            std::vector<Value>{table.segment(chunk_id, b).value_at(offset)});
      }
      result.rows_touched += 2 * sample.size();
      if (!pairs_ordered(sample)) {
        result.path = ValidationPath::SampleReject;
        return result;
      }
    }

    const auto a_index = SegmentIndex{table, a};
    if (a_index.domains_disjoint()) {
      const auto order = a_index.chunk_order();
      auto b_follows = true;
      for (size_t index = 1; index < order.size() && b_follows; ++index) {
        const auto& previous = table.segment(order[index - 1], b).dictionary();
        const auto& next = table.segment(order[index], b).dictionary();
        // Neighbouring b-domains may share one boundary value.
        b_follows = compare_values(previous.back(), next.front()) <= 0;
      }
      if (b_follows) {
        result.path = ValidationPath::Chunkwise;
        for (const auto chunk_id : order) {
          const auto& a_segment = table.segment(chunk_id, a);
          const auto& b_segment = table.segment(chunk_id, b);
          auto pairs = std::vector<std::pair<std::vector<Value>, std::vector<Value>>>{};
          pairs.reserve(a_segment.size());
          for (ChunkOffset offset = 0; offset < a_segment.size(); ++offset) {
            pairs.emplace_back(std::vector<Value>{a_segment.value_at(offset)},
                               std::vector<Value>{b_segment.value_at(offset)});
          }
          result.rows_touched += 2 * pairs.size();
          if (!pairs_ordered(pairs)) return result;
        }
        result.valid = true;
        return result;
      }
    }
  }

  result.path = ValidationPath::FullSort;
  auto pairs = std::vector<std::pair<std::vector<Value>, std::vector<Value>>>{};
  pairs.reserve(table.row_count());
  for (ChunkID chunk_id = 0; chunk_id < table.chunk_count(); ++chunk_id) {
    const auto size = table.chunk(chunk_id).size();
    for (ChunkOffset offset = 0; offset < size; ++offset) {
      auto lhs = row_tuple(table, ordering_ids, chunk_id, offset);
      auto rhs = row_tuple(table, ordered_ids, chunk_id, offset);
      result.rows_touched += lhs.size() + rhs.size();
      if (any_null(lhs) || any_null(rhs)) return result;
      pairs.emplace_back(std::move(lhs), std::move(rhs));
    }
  }
  result.valid = pairs_ordered(pairs);
  return result;
}

ValidationResult Validator::validate_ind(const Table& from, const std::vector<std::string>& from_columns,
                                         const Table& to, const std::vector<std::string>& to_columns,
                                         const MetadataStore* store) {
  ++counters_.ind;
  const auto from_ids = column_ids(from, from_columns);
  const auto to_ids = column_ids(to, to_columns);
  if (from_ids.size() != to_ids.size()) throw std::invalid_argument("IND sides differ in arity");
  for (size_t index = 0; index < from_ids.size(); ++index) {
    if (from.column_type(from_ids[index]) != to.column_type(to_ids[index])) {
      throw TypeError("IND columns '" + from_columns[index] + "' and '" + to_columns[index] + "' differ in type");
    }
  }
  auto result = ValidationResult{};

  if (config_.use_metadata && from_ids.size() == 1) {
    const auto a = from_ids.front();
    const auto x = to_ids.front();
    if (has_nulls(from, a)) {
      result.path = ValidationPath::StatsReject;
      return result;
    }
    const auto a_bounds = column_bounds(from, a);
    if (!a_bounds) {
      result.valid = true;
      result.path = ValidationPath::DictProbe;
      return result;
    }
    const auto x_bounds = column_bounds(to, x);
    if (!x_bounds || compare_values(a_bounds->first, x_bounds->first) < 0 ||
        compare_values(a_bounds->second, x_bounds->second) > 0) {
      result.path = ValidationPath::MinMaxReject;
      return result;
    }

    const auto type = to.column_type(x);
    if (type == DataType::Int || type == DataType::Date) {
      const auto ucc = Dependency::ucc(to.name(), to_columns);
      auto unique = store ? store->lookup(ucc) : std::nullopt;
      if (!unique) {
        const auto check = check_ucc(to, to_columns);
        result.rows_touched += check.rows_touched;
        result.byproduct.emplace(ucc, check.valid);
        unique = check.valid;
      }
      if (*unique) {
        // Unique without nulls, so the value count equals the row count.
        const auto span = *integral_value(x_bounds->second) - *integral_value(x_bounds->first) + 1;
        if (span == static_cast<int64_t>(to.row_count())) {
          result.valid = true;
          result.path = ValidationPath::ContinuityConfirm;
          return result;
        }
      }
    }

    auto values = ValueSet{};
    values.reserve(to.row_count());
    for (ChunkID chunk_id = 0; chunk_id < to.chunk_count(); ++chunk_id) {
      const auto& segment = to.segment(chunk_id, x);
      if (config_.use_dictionaries) {
        values.insert(segment.dictionary().begin(), segment.dictionary().end());
        result.rows_touched += segment.dictionary().size();
        continue;
      }
      for (ChunkOffset offset = 0; offset < segment.size(); ++offset) {
        const auto& value = segment.value_at(offset);
        if (!is_null(value)) values.insert(value);
      }
      result.rows_touched += segment.size();
    }
    result.path = config_.use_dictionaries ? ValidationPath::DictProbe : ValidationPath::FullProbe;
    for (ChunkID chunk_id = 0; chunk_id < from.chunk_count(); ++chunk_id) {
      const auto& segment = from.segment(chunk_id, a);
      if (config_.use_dictionaries) {
        for (const auto& value : segment.dictionary()) {
          ++result.rows_touched;
          ++result.referencing_rows_touched;
          if (!values.contains(value)) return result;
        }
        continue;
      }
      for (ChunkOffset offset = 0; offset < segment.size(); ++offset) {
        ++result.rows_touched;
        ++result.referencing_rows_touched;
        if (!values.contains(segment.value_at(offset))) return result;
      }
    }
    result.valid = true;
    return result;
  }

  result.path = ValidationPath::FullProbe;
  auto tuples = TupleSet{};
  tuples.reserve(to.row_count());
  for (ChunkID chunk_id = 0; chunk_id < to.chunk_count(); ++chunk_id) {
    const auto size = to.chunk(chunk_id).size();
    for (ChunkOffset offset = 0; offset < size; ++offset) {
      auto tuple = row_tuple(to, to_ids, chunk_id, offset);
      result.rows_touched += tuple.size();
      if (!any_null(tuple)) tuples.insert(std::move(tuple));
    }
  }
  for (ChunkID chunk_id = 0; chunk_id < from.chunk_count(); ++chunk_id) {
    const auto size = from.chunk(chunk_id).size();
    for (ChunkOffset offset = 0; offset < size; ++offset) {
      const auto tuple = row_tuple(from, from_ids, chunk_id, offset);
      result.rows_touched += tuple.size();
      result.referencing_rows_touched += tuple.size();
      if (any_null(tuple) || !tuples.contains(tuple)) return result;
    }
  }
  result.valid = true;
  return result;
}

}  // namespace depqo
