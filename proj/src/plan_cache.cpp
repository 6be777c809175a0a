#include "depqo/plan_cache.hpp"

#include <algorithm>
#include <mutex>

namespace depqo {

PlanFingerprint plan_fingerprint(const PlanNode& plan) { return plan_hash(plan); }

std::optional<PlanCacheEntry> PlanCache::lookup(const PlanNode& original) const {
  const auto fingerprint = plan_fingerprint(original);
  auto lock = std::shared_lock{mutex_};
  for (const auto& [key, entry] : entries_) {
    if (key == fingerprint && plan_equal(*entry.original, original)) return entry;
  }
  return std::nullopt;
}

void PlanCache::insert(PlanNodePtr original, PlanNodePtr optimized) {
  const auto fingerprint = plan_fingerprint(*original);
  auto tables = referenced_tables(*original);
  auto lock = std::unique_lock{mutex_};
  for (auto& [key, entry] : entries_) {
    if (key == fingerprint && plan_equal(*entry.original, *original)) {
      entry.optimized = std::move(optimized);
      return;
    }
  }
  entries_.emplace_back(fingerprint, PlanCacheEntry{std::move(original), std::move(optimized), std::move(tables)});
}

size_t PlanCache::invalidate_affected(const std::vector<Dependency>& newly_valid) {
  auto affected = std::set<std::string>{};
  for (const auto& dependency : newly_valid) affected.merge(dependency.tables());
  if (affected.empty()) return 0;

  auto lock = std::unique_lock{mutex_};
  const auto before = entries_.size();
  std::erase_if(entries_, [&](const auto& item) {
    const auto& tables = item.second.tables;
    return std::any_of(tables.begin(), tables.end(), [&](const auto& table) { return affected.contains(table); });
  });
  return before - entries_.size();
}

std::vector<PlanCacheEntry> PlanCache::entries() const {
  auto lock = std::shared_lock{mutex_};
  auto result = std::vector<PlanCacheEntry>{};
  for (const auto& [fingerprint, entry] : entries_) result.push_back(entry);
  return result;
}

size_t PlanCache::size() const {
  auto lock = std::shared_lock{mutex_};
  return entries_.size();
}

void PlanCache::clear() {
  auto lock = std::unique_lock{mutex_};
  entries_.clear();
}

}  // namespace depqo
