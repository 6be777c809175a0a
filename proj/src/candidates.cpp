#include "depqo/candidates.hpp"

#include <algorithm>
#include <map>

#include "depqo/plan_analysis.hpp"

namespace depqo {

namespace {

class Generator {
 public:
  explicit Generator(const MetadataStore* store) : store_(store) {}

  void visit(const PlanNodePtr& node, const ColumnSet& required) {
    if (node->type() == PlanNodeType::Aggregate) group_by_candidates(*node);
    if (node->type() == PlanNodeType::Join) {
      const auto& join = node->as<JoinNode>();
      if (join.mode == JoinMode::Inner || join.mode == JoinMode::Semi) join_candidates(*node, join, required);
    }
    if (node->type() == PlanNodeType::Select) {
      for (const auto& operand : node->as<SelectNode>().predicate.operands) {
        if (const auto* subquery = std::get_if<ScalarSubquery>(&operand)) {
          visit(subquery->plan, all_output_names(*subquery->plan));
        }
      }
    }
    const auto requirements = child_requirements(*node, required);
    for (size_t index = 0; index < node->children().size(); ++index) {
      visit(node->children()[index], requirements[index]);
    }
  }

  std::vector<Candidate> take() { return std::move(candidates_); }

 private:
  std::optional<size_t> add(const Dependency& dependency, CandidateOrigin origin,
                            std::optional<size_t> depends_on = std::nullopt) {
    if (store_ && store_->lookup(dependency)) return std::nullopt;
    auto [position, inserted] = index_.emplace(dependency, candidates_.size());
    if (inserted) candidates_.push_back(Candidate{candidates_.size(), dependency, {}, {}, CandidateStatus::Pending});
    auto& candidate = candidates_[position->second];
    candidate.origins.insert(origin);
    // A range IND keeps the edge to the first OD that motivated it.
    if (depends_on && candidate.depends_on.empty()) candidate.depends_on.insert(*depends_on);
    return candidate.id;
  }

  void group_by_candidates(const PlanNode& node) {
    const auto& group_by = node.as<AggregateNode>().group_by;
    if (group_by.size() < 2) return;
    auto by_table = std::map<std::string, std::vector<std::string>>{};
    for (const auto& column : group_by) {
      const auto& source = node.left()->column(column).source;
      if (source) by_table[source->table].push_back(source->column);
    }
    for (const auto& [table, columns] : by_table) {
      if (columns.size() < 2) continue;
      for (const auto& determinant : columns) {
        auto rest = std::vector<std::string>{};
        for (const auto& column : columns) {
          if (column != determinant) rest.push_back(column);
        }
        add(Dependency::ucc(table, {determinant}), CandidateOrigin::O1);
        add(Dependency::fd(table, {determinant}, rest), CandidateOrigin::O1);
      }
    }
  }

  void join_candidates(const PlanNode& node, const JoinNode& join, const ColumnSet& required) {
    for (size_t side = 0; side < 2; ++side) {
      if (join.mode == JoinMode::Semi && side == 0) continue;
      const auto& child = node.children()[side];
      if (join.mode == JoinMode::Inner) {
        const auto used = std::any_of(child->output_columns().begin(), child->output_columns().end(),
                                      [&](const auto& column) { return required.contains(column.name); });
        if (used) continue;
      }
      auto keys = std::vector<std::string>{};
      auto other_keys = std::vector<std::string>{};
      for (const auto& key : join.keys) {
        keys.push_back(side == 0 ? key.left : key.right);
        other_keys.push_back(side == 0 ? key.right : key.left);
      }
      if (join.mode == JoinMode::Inner) unique_key_candidate(*child, keys);
      if (keys.size() == 1) predicate_candidates(child, keys.front(), *node.children()[1 - side], other_keys.front());
    }
  }

  void unique_key_candidate(const PlanNode& side, const std::vector<std::string>& keys) {
    auto table = std::optional<std::string>{};
    auto columns = std::vector<std::string>{};
    for (const auto& key : keys) {
      const auto& source = side.column(key).source;
      if (!source || (table && *table != source->table)) return;
      table = source->table;
      columns.push_back(source->column);
    }
    add(Dependency::ucc(*table, columns), CandidateOrigin::O2);
  }

  void predicate_candidates(const PlanNodePtr& side, const std::string& key, const PlanNode& other,
                            const std::string& other_key) {
    const auto chain = split_filters(side);
    const auto& key_source = chain.input->column(key).source;
    if (!key_source) return;
    const auto& table = key_source->table;
    for (const auto& predicate : chain.predicates) {
      if (!has_constant_operands(predicate) || predicate.column == key) continue;
      const auto equality = predicate.condition == PredicateCondition::Equals;
      if (!equality && !predicate.is_range()) continue;
      const auto& filter_source = chain.input->column(predicate.column).source;
      if (!filter_source || filter_source->table != table) continue;

      if (equality) {
        add(Dependency::ucc(table, {filter_source->column}), CandidateOrigin::O3eq);
        add(Dependency::ucc(table, {key_source->column}), CandidateOrigin::O3eq);
      }
      // An equality on a non-unique column selects a value range of the key just like a range predicate.
      const auto od = Dependency::od(table, {key_source->column}, {filter_source->column});
      const auto od_id = add(od, CandidateOrigin::O3range);
      add(Dependency::ucc(table, {key_source->column}), CandidateOrigin::O3range);
      const auto& other_source = other.column(other_key).source;
      if (!other_source) continue;
      if (!od_id && !store_->is_valid(od)) continue;
      add(Dependency::ind(other_source->table, {other_source->column}, table, {key_source->column}),
          CandidateOrigin::O3range, od_id);
    }
  }

  const MetadataStore* store_;
  std::vector<Candidate> candidates_;
  std::map<Dependency, size_t> index_;
};

int kind_rank(DependencyKind kind) {
  switch (kind) {
    case DependencyKind::OD:
      return 0;
    case DependencyKind::IND:
      return 1;
    case DependencyKind::UCC:
      return 2;
    case DependencyKind::FD:
      return 3;
  }
  return 4;
}

}  // namespace

std::string_view candidate_origin_name(CandidateOrigin origin) {
  switch (origin) {
    case CandidateOrigin::O1:
      return "O1";
    case CandidateOrigin::O2:
      return "O2";
    case CandidateOrigin::O3eq:
      return "O3eq";
    case CandidateOrigin::O3range:
      return "O3range";
  }
  return "?";
}

std::string_view candidate_status_name(CandidateStatus status) {
  switch (status) {
    case CandidateStatus::Pending:
      return "pending";
    case CandidateStatus::Valid:
      return "valid";
    case CandidateStatus::Rejected:
      return "rejected";
    case CandidateStatus::Skipped:
      return "skipped";
  }
  return "?";
}

std::vector<Candidate> generate_candidates(const std::vector<PlanNodePtr>& plans, const MetadataStore* store) {
  auto generator = Generator{store};
  for (const auto& plan : plans) generator.visit(plan, all_output_names(*plan));
  return generator.take();
}

std::vector<Candidate> order_candidates(std::vector<Candidate> candidates) {
  std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& lhs, const Candidate& rhs) {
    const auto& left = lhs.dependency;
    const auto& right = rhs.dependency;
    return std::tuple{kind_rank(left.kind), left.table, left.columns, left.referenced_table, left.dependents} <
           std::tuple{kind_rank(right.kind), right.table, right.columns, right.referenced_table, right.dependents};
  });
  return candidates;
}

}  // namespace depqo
