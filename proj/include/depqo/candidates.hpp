#pragma once

#include <set>
#include <string>
#include <vector>

#include "depqo/dependency.hpp"
#include "depqo/metadata_store.hpp"
#include "depqo/plan.hpp"

namespace depqo {

enum class CandidateOrigin : uint8_t { O1, O2, O3eq, O3range };
enum class CandidateStatus : uint8_t { Pending, Valid, Rejected, Skipped };

std::string_view candidate_origin_name(CandidateOrigin origin);
std::string_view candidate_status_name(CandidateStatus status);

struct Candidate {
  size_t id{0};
  Dependency dependency;
  std::set<CandidateOrigin> origins;
  // Ids of candidates whose rejection makes this one pointless.
  std::set<size_t> depends_on;
  CandidateStatus status{CandidateStatus::Pending};
};

// Dependencies the rewrites could use in `plans`, deduplicated. Ids are positions in the returned list. Candidates
// with a verdict in `store` are left out.
std::vector<Candidate> generate_candidates(const std::vector<PlanNodePtr>& plans, const MetadataStore* store = nullptr);

// Stable order OD < IND < UCC < FD, then by table and columns.
std::vector<Candidate> order_candidates(std::vector<Candidate> candidates);

}  // namespace depqo
