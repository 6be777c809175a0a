#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "depqo/dataset.hpp"
#include "depqo/discovery.hpp"
#include "depqo/executor.hpp"
#include "depqo/optimizer.hpp"
#include "depqo/plan.hpp"

namespace depqo {

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

//  baseline:   no dependencies known.
//  schema:     declared primary and foreign keys only.
//  discovered: declared keys plus workload-driven discovery.
enum class BenchMode : uint8_t { Baseline, Schema, Discovered };

std::string_view bench_mode_name(BenchMode mode);
// Throws UsageError for unknown names.
BenchMode parse_bench_mode(std::string_view name);

struct BenchOptions {
  std::vector<BenchMode> modes{BenchMode::Baseline, BenchMode::Schema, BenchMode::Discovered};
  size_t repetitions{3};
  ExecutionOptions execution{};
  DiscoveryOptions discovery{};
};

struct QueryMeasurement {
  std::string query;
  double mean_micros{0};
  size_t result_rows{0};
  size_t operator_rows{0};
  size_t join_input_rows{0};
  size_t chunks_scanned{0};
  size_t chunks_pruned_static{0};
  size_t chunks_pruned_dynamic{0};
  std::vector<std::string> fired_rules;
  std::vector<std::vector<std::string>> rows;
};

struct ModeReport {
  BenchMode mode{BenchMode::Baseline};
  std::vector<QueryMeasurement> queries;
  double total_micros{0};
  int64_t discovery_micros{0};
  size_t candidates{0};
  size_t valid_candidates{0};
};

struct BenchReport {
  std::vector<ModeReport> modes;
  // Every query returned the same row multiset in every mode.
  bool results_identical{true};
};

// The store a mode starts from: empty for baseline, the declared constraints otherwise.
MetadataStore initial_store(BenchMode mode, const Dataset& dataset);

// Latency is measured around execution only; plans are optimized (and, for discovered mode, dependencies discovered)
// before the first repetition.
BenchReport run_bench(const Dataset& dataset, const std::vector<WorkloadQuery>& workload, const BenchOptions& options);

std::string format_bench_table(const BenchReport& report);
std::string format_bench_json(const BenchReport& report);

}  // namespace depqo
