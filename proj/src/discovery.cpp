#include <algorithm>
#include "depqo/discovery.hpp"

#include <chrono>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>

#include <json.hpp>

#include "depqo/thread_pool.hpp"

namespace depqo {

namespace {

using Clock = std::chrono::steady_clock;

int64_t micros_since(Clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - start).count();
}

struct Outcome {
  CandidateStatus status;
  std::optional<bool> verdict;
};

std::string origins_text(const Candidate& candidate) {
  auto text = std::string{};
  for (const auto origin : candidate.origins) text += (text.empty() ? "" : ",") + std::string{candidate_origin_name(origin)};
  return text;
}

}  // namespace

size_t DiscoveryReport::count(CandidateStatus status) const {
  return std::count_if(entries.begin(), entries.end(),
                       [&](const auto& entry) { return entry.candidate.status == status; });
}

const DiscoveryEntry* DiscoveryReport::find(const Dependency& dependency) const {
  for (const auto& entry : entries) {
    if (entry.candidate.dependency == dependency) return &entry;
  }
  return nullptr;
}

DiscoveryReport run_discovery(MetadataStore& store, Validator& validator, const std::vector<Candidate>& candidates,
                              PlanCache* cache, DiscoveryOptions options) {
  const auto started = Clock::now();
  auto report = DiscoveryReport{};
  report.entries.resize(candidates.size());
  auto outcomes = std::map<size_t, Outcome>{};
  auto newly_valid = std::vector<Dependency>{};
  auto newly_valid_mutex = std::mutex{};

  const auto process = [&](size_t position) {
    const auto& candidate = candidates[position];
    auto& entry = report.entries[position];
    const auto start = Clock::now();
    entry.candidate = candidate;

    const auto prerequisite_failed = [&](size_t prerequisite) {
      const auto found = outcomes.find(prerequisite);
      return found != outcomes.end() && found->second.verdict == false;
    };
    if (std::any_of(candidate.depends_on.begin(), candidate.depends_on.end(), prerequisite_failed)) {
      entry.candidate.status = CandidateStatus::Skipped;
      entry.path = "prerequisite_rejected";
      entry.micros = micros_since(start);
      return;
    }

    if (const auto known = store.lookup(candidate.dependency)) {
      entry.candidate.status = CandidateStatus::Skipped;
      entry.verdict = known;
      entry.path = *known ? "known_valid" : "known_rejected";
      entry.micros = micros_since(start);
      return;
    }

    const auto result = validator.validate(candidate.dependency, &store);
    store.record(candidate.dependency, result.valid);
    auto lock = std::lock_guard{newly_valid_mutex};
    if (result.valid) newly_valid.push_back(candidate.dependency);
    if (result.byproduct && !store.lookup(result.byproduct->first)) {
      store.record(result.byproduct->first, result.byproduct->second);
      if (result.byproduct->second) newly_valid.push_back(result.byproduct->first);
    }
    entry.candidate.status = result.valid ? CandidateStatus::Valid : CandidateStatus::Rejected;
    entry.verdict = result.valid;
    entry.path = validation_path_name(result.path);
    entry.micros = micros_since(start);
  };

  const auto publish = [&](size_t begin, size_t end) {
    for (auto position = begin; position < end; ++position) {
      const auto& entry = report.entries[position];
      outcomes[entry.candidate.id] = Outcome{entry.candidate.status, entry.verdict};
    }
  };

  if (!options.parallel) {
    for (size_t position = 0; position < candidates.size(); ++position) {
      process(position);
      publish(position, position + 1);
    }
  } else {
    auto pool = ThreadPool{options.threads};
    size_t begin = 0;
    while (begin < candidates.size()) {
      auto end = begin;
      while (end < candidates.size() && candidates[end].dependency.kind == candidates[begin].dependency.kind) ++end;
      auto pending = std::vector<std::future<void>>{};
      for (auto position = begin; position < end; ++position) pending.push_back(pool.submit([&, position] {
        process(position);
      }));
      for (auto& future : pending) future.get();
      publish(begin, end);
      begin = end;
    }
  }

  if (cache) report.evicted_plans = cache->invalidate_affected(newly_valid);
  report.wall_micros = micros_since(started);
  return report;
}

DiscoveryReport discover_from_cache(MetadataStore& store, Validator& validator, PlanCache& cache,
                                    DiscoveryOptions options) {
  auto plans = std::vector<PlanNodePtr>{};
  for (const auto& entry : cache.entries()) plans.push_back(entry.original);
  const auto candidates = order_candidates(generate_candidates(plans, &store));
  return run_discovery(store, validator, candidates, &cache, options);
}

std::string format_report_table(const DiscoveryReport& report) {
  auto width = size_t{9};
  for (const auto& entry : report.entries) width = std::max(width, entry.candidate.dependency.to_string().size());
  auto out = std::ostringstream{};
  out << std::left << std::setw(static_cast<int>(width)) << "candidate" << "  " << std::setw(4) << "kind" << "  "
      << std::setw(8) << "status" << "  " << std::setw(8) << "verdict" << "  " << std::setw(21) << "path" << "  "
      << "us\n";
  for (const auto& entry : report.entries) {
    const auto verdict = entry.verdict ? (*entry.verdict ? "valid" : "rejected") : "-";
    out << std::setw(static_cast<int>(width)) << entry.candidate.dependency.to_string() << "  " << std::setw(4)
        << dependency_kind_name(entry.candidate.dependency.kind) << "  " << std::setw(8)
        << candidate_status_name(entry.candidate.status) << "  " << std::setw(8) << verdict << "  " << std::setw(21)
        << entry.path << "  " << entry.micros << '\n';
  }
  out << "total " << report.entries.size() << " candidates, " << report.count(CandidateStatus::Valid) << " valid, "
      << report.count(CandidateStatus::Rejected) << " rejected, " << report.count(CandidateStatus::Skipped)
      << " skipped; " << report.evicted_plans << " cached plans evicted; " << report.wall_micros << " us\n";
  return out.str();
}

std::string format_report_jsonl(const DiscoveryReport& report) {
  auto out = std::string{};
  for (const auto& entry : report.entries) {
    auto record = nlohmann::json{};
    record["candidate"] = entry.candidate.dependency.to_string();
    record["kind"] = dependency_kind_name(entry.candidate.dependency.kind);
    record["origins"] = nlohmann::json::array();
    for (const auto origin : entry.candidate.origins) record["origins"].push_back(candidate_origin_name(origin));
    record["status"] = candidate_status_name(entry.candidate.status);
    record["verdict"] = entry.verdict ? nlohmann::json(*entry.verdict) : nlohmann::json(nullptr);
    record["path"] = entry.path;
    record["micros"] = entry.micros;
    out += record.dump() + '\n';
  }
  return out;
}

std::string format_candidates(const std::vector<Candidate>& candidates) {
  auto out = std::ostringstream{};
  for (const auto& candidate : candidates) {
    out << '#' << candidate.id << ' ' << candidate.dependency.to_string() << "  origins=[" << origins_text(candidate)
        << ']';
    if (!candidate.depends_on.empty()) {
      out << " depends_on=[";
      auto first = true;
      for (const auto id : candidate.depends_on) {
        out << (first ? "" : ",") << '#' << id;
        first = false;
      }
      out << ']';
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace depqo
