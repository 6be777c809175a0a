#pragma once

#include <atomic>
#include <optional>
#include <string>
#include <vector>

#include "depqo/dependency.hpp"
#include "depqo/metadata_store.hpp"
#include "depqo/storage.hpp"

namespace depqo {

enum class ValidationPath : uint8_t {
  StatsReject,
  IndexConfirm,
  HashSet,
  NaryReject,
  StoreLookup,
  SampleReject,
  Chunkwise,
  FullSort,
  MinMaxReject,
  ContinuityConfirm,
  DictProbe,
  FullProbe
};

std::string_view validation_path_name(ValidationPath path);

// Fast paths can be switched off at runtime; with both flags off every validator takes its brute-force path.
struct ValidationConfig {
  bool use_metadata{true};
  bool use_dictionaries{true};
  size_t od_sample_size{100};
  uint64_t seed{0};

  static ValidationConfig fallback_only() { return ValidationConfig{false, false, 100, 0}; }
};

struct ValidationResult {
  bool valid{false};
  ValidationPath path{ValidationPath::HashSet};
  // Attribute-vector entries and dictionary entries read, over all columns involved.
  size_t rows_touched{0};
  // IND only: entries read from the referencing column, excluding per-segment statistics.
  size_t referencing_rows_touched{0};
  // UCC verdict obtained while validating an IND or FD.
  std::optional<std::pair<Dependency, bool>> byproduct;
};

// Ordered index over the min and max of every segment of one column. At equal keys a min entry sorts before a max
// entry, so segments sharing a boundary value count as overlapping.
class SegmentIndex {
 public:
  struct Entry {
    Value key;
    bool is_max;
    ChunkID chunk_id;
  };

  SegmentIndex(const Table& table, ColumnID column_id);

  const std::vector<Entry>& entries() const { return entries_; }

  // True iff every segment's min entry is directly followed by its own max entry.
  bool domains_disjoint() const;

  // Chunk ids ordered by segment min; empty segments are left out.
  std::vector<ChunkID> chunk_order() const;

 private:
  std::vector<Entry> entries_;
};

struct ValidationCounters {
  std::atomic<size_t> ucc{0};
  std::atomic<size_t> fd{0};
  std::atomic<size_t> od{0};
  std::atomic<size_t> ind{0};

  size_t total() const { return ucc + fd + od + ind; }
};

// Validators read immutable tables only; one instance may serve concurrent calls.
class Validator {
 public:
  explicit Validator(const Database& database, ValidationConfig config = {}) : database_(database), config_(config) {}

  // Dispatches on the dependency kind. `store` is consulted for known UCCs (FD and IND paths) and may be null.
  ValidationResult validate(const Dependency& dependency, const MetadataStore* store = nullptr);

  ValidationResult validate_ucc(const Table& table, const std::vector<std::string>& columns);
  ValidationResult validate_fd(const Table& table, const std::vector<std::string>& determinant,
                               const std::vector<std::string>& dependents, const MetadataStore* store = nullptr);
  ValidationResult validate_od(const Table& table, const std::vector<std::string>& ordering,
                               const std::vector<std::string>& ordered);
  ValidationResult validate_ind(const Table& from, const std::vector<std::string>& from_columns, const Table& to,
                                const std::vector<std::string>& to_columns, const MetadataStore* store = nullptr);

  const ValidationConfig& config() const { return config_; }
  const ValidationCounters& counters() const { return counters_; }

 private:
  ValidationResult check_ucc(const Table& table, const std::vector<std::string>& columns);

  const Database& database_;
  ValidationConfig config_;
  ValidationCounters counters_;
};

}  // namespace depqo
