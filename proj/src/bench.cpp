#include "depqo/bench.hpp"

#include <chrono>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace depqo {

std::string_view bench_mode_name(BenchMode mode) {
  switch (mode) {
    case BenchMode::Baseline:
      return "baseline";
    case BenchMode::Schema:
      return "schema";
    case BenchMode::Discovered:
      return "discovered";
  }
  return "?";
}

BenchMode parse_bench_mode(std::string_view name) {
  for (const auto mode : {BenchMode::Baseline, BenchMode::Schema, BenchMode::Discovered}) {
    if (bench_mode_name(mode) == name) return mode;
  }
  throw UsageError("unknown bench mode '" + std::string{name} + "' (expected baseline, schema, or discovered)");
}

MetadataStore initial_store(BenchMode mode, const Dataset& dataset) {
  auto store = MetadataStore{};
  if (mode == BenchMode::Baseline) return store;
  for (const auto& constraint : dataset.constraints) store.add_schema_constraint(constraint);
  return store;
}

BenchReport run_bench(const Dataset& dataset, const std::vector<WorkloadQuery>& workload, const BenchOptions& options) {
  if (options.repetitions == 0) throw UsageError("repetitions must be at least 1");
  if (options.modes.empty()) throw UsageError("no bench mode selected");

  auto report = BenchReport{};
  for (const auto mode : options.modes) {
    auto store = initial_store(mode, dataset);
    auto cache = PlanCache{};
    auto optimizer = QueryOptimizer{store, cache};
    auto mode_report = ModeReport{};
    mode_report.mode = mode;

    for (const auto& query : workload) optimizer.get_plan(query.plan);
    if (mode == BenchMode::Discovered) {
      auto validator = Validator{dataset.database};
      const auto discovery = discover_from_cache(store, validator, cache, options.discovery);
      mode_report.discovery_micros = discovery.wall_micros;
      mode_report.candidates = discovery.entries.size();
      mode_report.valid_candidates = discovery.count(CandidateStatus::Valid);
    }

    for (const auto& query : workload) {
      const auto plan = optimizer.get_plan(query.plan);
      auto measurement = QueryMeasurement{};
      measurement.query = query.name;
      measurement.fired_rules = optimize(query.plan, store).fired_rules;
      const auto graph = schedule(plan);
      auto total = 0.0;
      for (size_t repetition = 0; repetition < options.repetitions; ++repetition) {
        const auto start = std::chrono::steady_clock::now();
        auto result = execute(graph, options.execution);
        total += std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - start).count();
        if (repetition > 0) continue;
        measurement.result_rows = result.relation.row_count;
        measurement.operator_rows = result.metrics.total_operator_rows();
        measurement.join_input_rows = result.metrics.join_input_rows;
        measurement.chunks_scanned = result.metrics.chunks_scanned;
        measurement.chunks_pruned_static = result.metrics.chunks_pruned_static;
        measurement.chunks_pruned_dynamic = result.metrics.chunks_pruned_dynamic;
        measurement.rows = sorted_rows(result.relation);
      }
      measurement.mean_micros = total / static_cast<double>(options.repetitions);
      mode_report.total_micros += measurement.mean_micros;
      mode_report.queries.push_back(std::move(measurement));
    }
    report.modes.push_back(std::move(mode_report));
  }

  for (const auto& mode_report : report.modes) {
    for (size_t index = 0; index < workload.size(); ++index) {
      if (mode_report.queries[index].rows != report.modes.front().queries[index].rows) report.results_identical = false;
    }
  }
  return report;
}

std::string format_bench_table(const BenchReport& report) {
  auto out = std::ostringstream{};
  out << std::left << std::setw(12) << "mode" << std::setw(20) << "query" << std::right << std::setw(12) << "mean_ms"
      << std::setw(10) << "rows" << std::setw(12) << "op_rows" << std::setw(10) << "scanned" << std::setw(10)
      << "pruned_st" << std::setw(10) << "pruned_dy" << "\n";
  out << std::fixed << std::setprecision(3);
  for (const auto& mode : report.modes) {
    for (const auto& query : mode.queries) {
      out << std::left << std::setw(12) << bench_mode_name(mode.mode) << std::setw(20) << query.query << std::right
          << std::setw(12) << query.mean_micros / 1000.0 << std::setw(10) << query.result_rows << std::setw(12)
          << query.operator_rows << std::setw(10) << query.chunks_scanned << std::setw(10)
          << query.chunks_pruned_static << std::setw(10) << query.chunks_pruned_dynamic << "\n";
    }
    out << std::left << std::setw(12) << bench_mode_name(mode.mode) << std::setw(20) << "TOTAL" << std::right
        << std::setw(12) << mode.total_micros / 1000.0;
    if (mode.mode == BenchMode::Discovered) {
      out << "   discovery_ms=" << static_cast<double>(mode.discovery_micros) / 1000.0
          << " candidates=" << mode.candidates << " valid=" << mode.valid_candidates;
    }
    out << "\n";
  }
  out << "results identical across modes: " << (report.results_identical ? "yes" : "NO") << "\n";
  return out.str();
}

std::string format_bench_json(const BenchReport& report) {
  auto document = nlohmann::json{{"results_identical", report.results_identical}, {"modes", nlohmann::json::array()}};
  for (const auto& mode : report.modes) {
    auto queries = nlohmann::json::array();
    for (const auto& query : mode.queries) {
      queries.push_back({{"query", query.query},
                         {"mean_micros", query.mean_micros},
                         {"result_rows", query.result_rows},
                         {"operator_rows", query.operator_rows},
                         {"join_input_rows", query.join_input_rows},
                         {"chunks_scanned", query.chunks_scanned},
                         {"chunks_pruned_static", query.chunks_pruned_static},
                         {"chunks_pruned_dynamic", query.chunks_pruned_dynamic},
                         {"fired_rules", query.fired_rules}});
    }
    document["modes"].push_back({{"mode", std::string{bench_mode_name(mode.mode)}},
                                 {"total_micros", mode.total_micros},
                                 {"discovery_micros", mode.discovery_micros},
                                 {"candidates", mode.candidates},
                                 {"valid_candidates", mode.valid_candidates},
                                 {"queries", queries}});
  }
  return document.dump(2) + "\n";
}

}  // namespace depqo
