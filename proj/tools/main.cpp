#include <chrono>
#include <filesystem>
#include <future>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "depqo/bench.hpp"
#include "depqo/dataset.hpp"
#include "depqo/discovery.hpp"
#include "depqo/executor.hpp"
#include "depqo/optimizer.hpp"
#include "depqo/propagation.hpp"

using namespace depqo;

namespace {

struct GlobalOptions {
  std::string data_dir{"data"};
  ChunkOffset chunk_capacity{DEFAULT_CHUNK_CAPACITY};
  uint64_t seed{7};
  size_t threads{0};
  std::string metrics{"table"};
};

struct WorkloadOptions {
  std::string workload;
  std::string mode{"discovered"};
  std::string store_file;
  std::string query;
};

Dataset load(const GlobalOptions& global) { return load_dataset(global.data_dir, global.chunk_capacity); }

std::vector<WorkloadQuery> select_queries(const WorkloadOptions& options, const Database& database) {
  auto workload = load_workload(options.workload, database);
  if (options.query.empty()) return workload;
  std::erase_if(workload, [&](const auto& query) { return query.name != options.query; });
  if (workload.empty()) throw UsageError("no query named '" + options.query + "' in " + options.workload);
  return workload;
}

// Dependencies available to the optimizer: a saved store if given, else the mode's starting store, plus discovery
// over the workload for discovered mode.
MetadataStore prepare_store(const WorkloadOptions& options, const Dataset& dataset,
                            const std::vector<WorkloadQuery>& workload) {
  if (!options.store_file.empty()) return MetadataStore::load(options.store_file);
  const auto mode = parse_bench_mode(options.mode);
  auto store = initial_store(mode, dataset);
  if (mode == BenchMode::Discovered) {
    auto plans = std::vector<PlanNodePtr>{};
    for (const auto& query : workload) plans.push_back(query.plan);
    auto validator = Validator{dataset.database};
    run_discovery(store, validator, order_candidates(generate_candidates(plans, &store)));
  }
  return store;
}

void add_workload_options(CLI::App& command, WorkloadOptions& options) {
  command.add_option("workload", options.workload, "Workload file")->required()->check(CLI::ExistingFile);
  command.add_option("--mode", options.mode, "Dependencies to use: baseline, schema, or discovered")
      ->check(CLI::IsMember({"baseline", "schema", "discovered"}));
  command.add_option("--store", options.store_file, "Dependency store file to use instead of --mode");
  command.add_option("--query", options.query, "Only the query with this name");
}

nlohmann::json metrics_json(const std::string& query, const ExecutionResult& result, double micros) {
  auto operators = nlohmann::json::array();
  for (const auto& entry : result.metrics.rows_per_operator) {
    operators.push_back({{"operator", entry.description}, {"rows", entry.rows}});
  }
  return {{"query", query},
          {"rows", result.relation.row_count},
          {"micros", micros},
          {"chunks_scanned", result.metrics.chunks_scanned},
          {"chunks_pruned_static", result.metrics.chunks_pruned_static},
          {"chunks_pruned_dynamic", result.metrics.chunks_pruned_dynamic},
          {"join_input_rows", result.metrics.join_input_rows},
          {"rows_per_operator", operators}};
}

int run_command(const GlobalOptions& global, const WorkloadOptions& options, size_t max_rows) {
  const auto dataset = load(global);
  const auto workload = select_queries(options, dataset.database);
  const auto store = prepare_store(options, dataset, workload);
  for (const auto& query : workload) {
    const auto plan = optimize(query.plan, store).plan;
    const auto start = std::chrono::steady_clock::now();
    const auto result = execute_plan(plan, ExecutionOptions{global.threads});
    const auto micros = std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - start).count();
    if (global.metrics == "json") {
      std::cout << metrics_json(query.name, result, micros).dump() << "\n";
      continue;
    }
    std::cout << "query " << query.name << " (" << result.relation.row_count << " rows, " << micros / 1000.0
              << " ms)\n"
              << format_relation(result.relation, max_rows) << "chunks scanned=" << result.metrics.chunks_scanned
              << " pruned_static=" << result.metrics.chunks_pruned_static
              << " pruned_dynamic=" << result.metrics.chunks_pruned_dynamic << "\n";
    for (const auto& entry : result.metrics.rows_per_operator) {
      std::cout << "  " << entry.rows << "\t" << entry.description << "\n";
    }
    std::cout << "\n";
  }
  return 0;
}

int explain_command(const GlobalOptions& global, const WorkloadOptions& options, bool deps, bool stages) {
  const auto dataset = load(global);
  const auto workload = select_queries(options, dataset.database);
  const auto store = prepare_store(options, dataset, workload);
  for (const auto& query : workload) {
    std::cout << "query " << query.name << "\n";
    std::cout << (stages ? explain_stages(query.plan, store) : explain(query.plan, store));
    if (deps) {
      std::cout << "dependencies (optimized plan):\n" << annotate_plan(optimize(query.plan, store).plan, store);
    }
    std::cout << "\n";
  }
  return 0;
}

struct DiscoverOptions {
  WorkloadOptions workload;
  bool dry_run{false};
  bool async{false};
  bool parallel{false};
  std::string format{"table"};
  std::string save;
};

int discover_command(const GlobalOptions& global, const DiscoverOptions& options) {
  const auto dataset = load(global);
  const auto workload = select_queries(options.workload, dataset.database);
  auto store = options.workload.store_file.empty() ? initial_store(BenchMode::Schema, dataset)
                                                   : MetadataStore::load(options.workload.store_file);
  auto cache = PlanCache{};
  auto optimizer = QueryOptimizer{store, cache};
  for (const auto& query : workload) optimizer.get_plan(query.plan);

  if (options.dry_run) {
    auto plans = std::vector<PlanNodePtr>{};
    for (const auto& query : workload) plans.push_back(query.plan);
    std::cout << format_candidates(order_candidates(generate_candidates(plans, &store)));
    return 0;
  }

  auto validator = Validator{dataset.database};
  const auto discovery_options = DiscoveryOptions{options.parallel, std::max<size_t>(global.threads, 1)};
  auto report = DiscoveryReport{};
  if (options.async) {
    // Discovery writes the store and cache while the foreground keeps planning and executing queries.
    auto background = std::async(std::launch::async,
                                 [&] { return discover_from_cache(store, validator, cache, discovery_options); });
    auto executed = size_t{0};
    while (background.wait_for(std::chrono::seconds{0}) != std::future_status::ready) {
      for (const auto& query : workload) {
        execute_plan(optimizer.get_plan(query.plan), ExecutionOptions{global.threads});
        ++executed;
      }
      if (workload.empty()) break;
    }
    report = background.get();
    std::cerr << "foreground executed " << executed << " queries during discovery\n";
  } else {
    report = discover_from_cache(store, validator, cache, discovery_options);
  }
  std::cout << (options.format == "jsonl" ? format_report_jsonl(report) : format_report_table(report));
  if (!options.save.empty()) store.save(options.save);
  return 0;
}

int generate_command(const GlobalOptions& global, size_t scale, const std::string& violate) {
  auto options = StarSchemaOptions{scale, global.seed, parse_violation(violate), global.chunk_capacity};
  const auto dataset = generate_star_schema(options);
  write_dataset(dataset, global.data_dir);
  for (const auto& name : dataset.database.table_names()) {
    std::cout << name << ": " << dataset.database.get_table(name)->row_count() << " rows\n";
  }
  std::cout << "written to " << global.data_dir << "\n";
  return 0;
}

int load_command(const GlobalOptions& global) {
  const auto dataset = load(global);
  for (const auto& name : dataset.database.table_names()) {
    const auto table = dataset.database.get_table(name);
    std::cout << name << ": " << table->row_count() << " rows, " << table->chunk_count() << " chunks\n";
    for (const auto& column : table->columns()) {
      std::cout << "  " << column.name << " " << data_type_name(column.type) << "\n";
    }
  }
  std::cout << "declared constraints:\n";
  for (const auto& constraint : dataset.constraints) std::cout << "  " << constraint.to_string() << "\n";
  return 0;
}

int bench_command(const GlobalOptions& global, const WorkloadOptions& workload_options,
                  const std::vector<std::string>& modes, size_t repetitions) {
  const auto dataset = load(global);
  const auto workload = select_queries(workload_options, dataset.database);
  auto options = BenchOptions{};
  options.modes.clear();
  for (const auto& mode : modes) options.modes.push_back(parse_bench_mode(mode));
  options.repetitions = repetitions;
  options.execution.threads = global.threads;
  const auto report = run_bench(dataset, workload, options);
  std::cout << (global.metrics == "json" ? format_bench_json(report) : format_bench_table(report));
  return report.results_identical ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  auto app = CLI::App{"Columnar query engine with workload-driven dependency discovery"};
  app.require_subcommand(1);
  auto global = GlobalOptions{};
  app.add_option("--data-dir", global.data_dir, "Directory holding <table>.csv and <table>.schema.json");
  app.add_option("--chunk-capacity", global.chunk_capacity, "Rows per chunk")->check(CLI::PositiveNumber);
  app.add_option("--seed", global.seed, "Random seed");
  app.add_option("--threads", global.threads, "Worker threads (0 = single-threaded)");
  app.add_option("--metrics", global.metrics, "Metrics output format")->check(CLI::IsMember({"json", "table"}));

  auto* generate = app.add_subcommand("generate", "Generate the synthetic star schema");
  auto scale = size_t{1};
  auto violate = std::string{"none"};
  generate->add_option("--scale", scale, "Scale factor")->check(CLI::PositiveNumber);
  generate->add_option("--violate", violate, "Inject a violation")->check(CLI::IsMember({"none", "ind", "od", "ucc"}));

  auto* load_cmd = app.add_subcommand("load", "Load the data directory and print a summary");

  auto* run = app.add_subcommand("run", "Optimize and execute a workload");
  auto run_options = WorkloadOptions{};
  auto max_rows = size_t{10};
  add_workload_options(*run, run_options);
  run->add_option("--max-rows", max_rows, "Result rows to print per query");

  auto* explain_cmd = app.add_subcommand("explain", "Print plans before and after optimization");
  auto explain_options = WorkloadOptions{};
  auto deps = false;
  auto stages = false;
  add_workload_options(*explain_cmd, explain_options);
  explain_cmd->add_flag("--deps", deps, "Also print propagated dependencies per node");
  explain_cmd->add_flag("--stages", stages, "Print the plan after each cumulative rule set");

  auto* discover = app.add_subcommand("discover", "Discover dependencies the workload could use");
  auto discover_options = DiscoverOptions{};
  discover->add_option("workload", discover_options.workload.workload, "Workload file")
      ->required()
      ->check(CLI::ExistingFile);
  discover->add_option("--store", discover_options.workload.store_file, "Start from this dependency store");
  discover->add_option("--query", discover_options.workload.query, "Only the query with this name");
  discover->add_flag("--dry-run", discover_options.dry_run, "Print candidates without validating");
  discover->add_flag("--async", discover_options.async, "Validate on a background thread while queries run");
  discover->add_flag("--parallel", discover_options.parallel, "Validate candidates of one kind concurrently");
  discover->add_option("--format", discover_options.format, "Report format")
      ->check(CLI::IsMember({"table", "jsonl"}));
  discover->add_option("--save", discover_options.save, "Write the resulting dependency store to this file");

  auto* bench = app.add_subcommand("bench", "Compare workload latency across dependency modes");
  auto bench_options = WorkloadOptions{};
  auto modes = std::vector<std::string>{"baseline", "schema", "discovered"};
  auto repetitions = size_t{3};
  bench->add_option("workload", bench_options.workload, "Workload file")->required()->check(CLI::ExistingFile);
  bench->add_option("--query", bench_options.query, "Only the query with this name");
  bench->add_option("--modes", modes, "Modes to compare")->delimiter(',');
  bench->add_option("--repetitions", repetitions, "Executions per query and mode");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*generate) return generate_command(global, scale, violate);
    if (*load_cmd) return load_command(global);
    if (*run) return run_command(global, run_options, max_rows);
    if (*explain_cmd) return explain_command(global, explain_options, deps, stages);
    if (*discover) return discover_command(global, discover_options);
    if (*bench) return bench_command(global, bench_options, modes, repetitions);
  } catch (const UsageError& error) {
    std::cerr << "usage error: " << error.what() << "\n";
    return 2;
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 1;
  }
  return 0;
}
