#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "depqo/dependency.hpp"
#include "depqo/storage.hpp"

namespace depqo {

// A database plus the constraints its schema declares (primary keys as UCCs, foreign keys as INDs).
struct Dataset {
  Database database;
  std::vector<Dependency> constraints;
};

enum class Violation : uint8_t { None, Ind, Od, Ucc };

Violation parse_violation(std::string_view name);

struct StarSchemaOptions {
  size_t scale{1};
  uint64_t seed{7};
  Violation violate{Violation::None};
  ChunkOffset chunk_capacity{DEFAULT_CHUNK_CAPACITY};
};

// date_dim: scale*365 days with d_sk sequential from 1. customer: scale*1000 rows, c_sk unique in shuffled order.
// sales: scale*100000 rows sorted by s_sold_date.
//  Violation::Ind puts one s_sold_date outside d_sk's domain.
//  Violation::Od swaps d_date and d_year of the first and last day.
//  Violation::Ucc gives two customers the same c_sk.
// A constraint broken by the violation is not declared.
Dataset generate_star_schema(const StarSchemaOptions& options);

// Writes `<table>.csv` and `<table>.schema.json` per table.
void write_dataset(const Dataset& dataset, const std::filesystem::path& directory);

// Reads every `<table>.schema.json` in the directory together with its CSV file.
Dataset load_dataset(const std::filesystem::path& directory, ChunkOffset chunk_capacity = DEFAULT_CHUNK_CAPACITY);

}  // namespace depqo
