#pragma once

#include <optional>
#include <string>
#include <vector>

#include "depqo/candidates.hpp"
#include "depqo/metadata_store.hpp"
#include "depqo/plan_cache.hpp"
#include "depqo/validation.hpp"

namespace depqo {

struct DiscoveryEntry {
  Candidate candidate;
  // Verdict for validated and for skipped-as-known candidates; empty when skipped because a prerequisite failed.
  std::optional<bool> verdict;
  // Validation path name, or the reason for skipping.
  std::string path;
  int64_t micros{0};
};

struct DiscoveryReport {
  std::vector<DiscoveryEntry> entries;
  size_t evicted_plans{0};
  int64_t wall_micros{0};

  size_t count(CandidateStatus status) const;
  const DiscoveryEntry* find(const Dependency& dependency) const;
};

struct DiscoveryOptions {
  // Validates the candidates of one dependency kind concurrently; kinds still run one after another.
  bool parallel{false};
  size_t threads{4};
};

// Validates ordered candidates, skipping those that cannot pay off, records every verdict (including UCC byproducts)
// in `store`, and evicts affected plans from `cache` if given.
DiscoveryReport run_discovery(MetadataStore& store, Validator& validator, const std::vector<Candidate>& candidates,
                              PlanCache* cache = nullptr, DiscoveryOptions options = {});

// Candidates from the original plans held in `cache`, ordered, then validated.
DiscoveryReport discover_from_cache(MetadataStore& store, Validator& validator, PlanCache& cache,
                                    DiscoveryOptions options = {});

std::string format_report_table(const DiscoveryReport& report);
// One JSON object per line and candidate.
std::string format_report_jsonl(const DiscoveryReport& report);

std::string format_candidates(const std::vector<Candidate>& candidates);

}  // namespace depqo
