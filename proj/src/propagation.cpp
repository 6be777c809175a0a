#include "depqo/propagation.hpp"

#include <algorithm>
#include <sstream>

namespace depqo {

namespace {

bool is_subset(const ColumnSet& inner, const ColumnSet& outer) {
  return std::includes(outer.begin(), outer.end(), inner.begin(), inner.end());
}

bool all_in(const std::vector<std::string>& columns, const ColumnSet& available) {
  return std::all_of(columns.begin(), columns.end(), [&](const auto& column) { return available.contains(column); });
}

ColumnSet names_of(const PlanNode& node) {
  auto result = ColumnSet{};
  for (const auto& column : node.output_columns()) result.insert(column.name);
  return result;
}

void add_fd(NodeDependencies& deps, ColumnSet determinant, ColumnSet dependents) {
  for (const auto& column : determinant) dependents.erase(column);
  if (determinant.empty() || dependents.empty()) return;
  deps.fds.insert(NodeFd{std::move(determinant), std::move(dependents)});
}

// Drops everything that mentions a column outside `available`; FD dependents are trimmed instead.
NodeDependencies restrict_to(const NodeDependencies& input, const ColumnSet& available) {
  auto result = NodeDependencies{};
  for (const auto& ucc : input.uccs) {
    if (is_subset(ucc, available)) result.uccs.insert(ucc);
  }
  for (const auto& fd : input.fds) {
    if (!is_subset(fd.determinant, available)) continue;
    auto dependents = ColumnSet{};
    for (const auto& column : fd.dependents) {
      if (available.contains(column)) dependents.insert(column);
    }
    add_fd(result, fd.determinant, std::move(dependents));
  }
  for (const auto& od : input.ods) {
    if (all_in(od.ordering, available) && all_in(od.ordered, available)) result.ods.insert(od);
  }
  for (const auto& ind : input.inds) {
    if (all_in(ind.columns, available)) result.inds.insert(ind);
  }
  return result;
}

// A unique combination determines every other output column.
void add_ucc_fds(NodeDependencies& deps, const ColumnSet& all_columns) {
  for (const auto& ucc : deps.uccs) add_fd(deps, ucc, all_columns);
}

// Every row of the probe side finds exactly one partner: the probe key carries base values of T.c, T.c is included
// in the build key, and the build key is unique.
bool rows_preserved(const PlanNode& probe, const std::string& probe_key, const NodeDependencies& build_deps,
                    const std::string& build_key) {
  const auto& column = probe.column(probe_key);
  if (!column.source) return false;
  if (!build_deps.uccs.contains(ColumnSet{build_key})) return false;
  return build_deps.has_ind(column.source->table, {column.source->column}, {build_key});
}

NodeDependencies from_store(const Table& table, const MetadataStore& store) {
  auto deps = NodeDependencies{};
  for (const auto& dependency : store.valid_for_table(table.name())) {
    switch (dependency.kind) {
      case DependencyKind::UCC:
        if (dependency.table == table.name()) {
          deps.uccs.insert(ColumnSet(dependency.columns.begin(), dependency.columns.end()));
        }
        break;
      case DependencyKind::FD:
        if (dependency.table == table.name()) {
          add_fd(deps, ColumnSet(dependency.columns.begin(), dependency.columns.end()),
                 ColumnSet(dependency.dependents.begin(), dependency.dependents.end()));
        }
        break;
      case DependencyKind::OD:
        if (dependency.table == table.name()) deps.ods.insert(NodeOd{dependency.columns, dependency.dependents});
        break;
      case DependencyKind::IND:
        if (dependency.referenced_table == table.name()) {
          deps.inds.insert(NodeInd{dependency.table, dependency.columns, dependency.dependents});
        }
        break;
    }
  }
  return deps;
}

NodeDependencies equi_join(const PlanNode& node, const JoinNode& join, const NodeDependencies& left,
                           const NodeDependencies& right) {
  auto left_keys = ColumnSet{};
  auto right_keys = ColumnSet{};
  for (const auto& key : join.keys) {
    left_keys.insert(key.left);
    right_keys.insert(key.right);
  }
  const auto left_columns = names_of(*node.left());
  const auto right_columns = names_of(*node.right());
  const auto left_unique = left.has_ucc_within(left_keys);
  const auto right_unique = right.has_ucc_within(right_keys);
  const auto single_key = join.keys.size() == 1;

  auto result = NodeDependencies{};

  if (join.mode == JoinMode::Semi) {
    result = left;
    std::erase_if(result.inds, [&](const NodeInd&) {
      return !(single_key && rows_preserved(*node.left(), join.keys[0].left, right, join.keys[0].right));
    });
    return result;
  }

  if (join.mode == JoinMode::Left) {
    result.fds = left.fds;
    for (const auto& ucc : left.uccs) add_fd(result, ucc, left_columns);
    for (const auto& fd : right.fds) {
      if (std::any_of(fd.determinant.begin(), fd.determinant.end(),
                      [&](const auto& column) { return right_keys.contains(column); })) {
        result.fds.insert(fd);
      }
    }
    for (const auto& ucc : right.uccs) {
      if (std::any_of(ucc.begin(), ucc.end(), [&](const auto& column) { return right_keys.contains(column); })) {
        add_fd(result, ucc, right_columns);
      }
    }
    result.ods = left.ods;
    result.ods.insert(right.ods.begin(), right.ods.end());
    result.inds = left.inds;
    return result;
  }

  // Inner equi-join.
  if (right_unique) result.uccs.insert(left.uccs.begin(), left.uccs.end());
  if (left_unique) result.uccs.insert(right.uccs.begin(), right.uccs.end());
  result.fds = left.fds;
  result.fds.insert(right.fds.begin(), right.fds.end());
  for (const auto& ucc : left.uccs) add_fd(result, ucc, left_columns);
  for (const auto& ucc : right.uccs) add_fd(result, ucc, right_columns);
  result.ods = left.ods;
  result.ods.insert(right.ods.begin(), right.ods.end());
  for (const auto& key : join.keys) {
    add_fd(result, {key.left}, {key.right});
    add_fd(result, {key.right}, {key.left});
    result.ods.insert(NodeOd{{key.left}, {key.right}});
    result.ods.insert(NodeOd{{key.right}, {key.left}});
    for (const auto& od : right.ods) {
      if (od.ordering == std::vector<std::string>{key.right}) result.ods.insert(NodeOd{{key.left}, od.ordered});
    }
    for (const auto& od : left.ods) {
      if (od.ordering == std::vector<std::string>{key.left}) result.ods.insert(NodeOd{{key.right}, od.ordered});
    }
  }
  if (single_key) {
    const auto& key = join.keys[0];
    if (rows_preserved(*node.left(), key.left, right, key.right)) {
      result.inds.insert(left.inds.begin(), left.inds.end());
    }
    if (rows_preserved(*node.right(), key.right, left, key.left)) {
      result.inds.insert(right.inds.begin(), right.inds.end());
    }
  }
  return result;
}

}  // namespace

bool NodeDependencies::has_ucc_within(const ColumnSet& columns) const {
  return std::any_of(uccs.begin(), uccs.end(), [&](const auto& ucc) { return is_subset(ucc, columns); });
}

bool NodeDependencies::implies_fd(const ColumnSet& determinant, const ColumnSet& dependents) const {
  if (has_ucc_within(determinant)) return true;
  auto covered = ColumnSet{};
  for (const auto& column : dependents) {
    if (determinant.contains(column)) covered.insert(column);
  }
  for (const auto& fd : fds) {
    if (!is_subset(fd.determinant, determinant)) continue;
    covered.insert(fd.dependents.begin(), fd.dependents.end());
  }
  return is_subset(dependents, covered);
}

bool NodeDependencies::has_od(const std::vector<std::string>& ordering, const std::vector<std::string>& ordered) const {
  return ods.contains(NodeOd{ordering, ordered});
}

bool NodeDependencies::has_ind(const std::string& referencing_table,
                               const std::vector<std::string>& referencing_columns,
                               const std::vector<std::string>& columns) const {
  return inds.contains(NodeInd{referencing_table, referencing_columns, columns});
}

std::vector<std::string> NodeDependencies::describe() const {
  const auto list = [](const auto& columns) {
    auto text = std::string{};
    for (const auto& column : columns) text += (text.empty() ? "" : ", ") + column;
    return text;
  };
  auto lines = std::vector<std::string>{};
  for (const auto& ucc : uccs) lines.push_back("UCC (" + list(ucc) + ")");
  for (const auto& fd : fds) lines.push_back("FD (" + list(fd.determinant) + ") -> (" + list(fd.dependents) + ")");
  for (const auto& od : ods) lines.push_back("OD (" + list(od.ordering) + ") |-> (" + list(od.ordered) + ")");
  for (const auto& ind : inds) {
    lines.push_back("IND " + ind.referencing_table + "(" + list(ind.referencing_columns) + ") in (" +
                    list(ind.columns) + ")");
  }
  return lines;
}

const NodeDependencies& DependencyPropagator::dependencies_of(const PlanNodePtr& node) {
  if (const auto found = memo_.find(node.get()); found != memo_.end()) return found->second.second;
  auto deps = compute(node);
  return memo_.emplace(node.get(), std::make_pair(node, std::move(deps))).first->second.second;
}

NodeDependencies DependencyPropagator::compute(const PlanNodePtr& node) {
  const auto output = names_of(*node);
  auto result = NodeDependencies{};

  switch (node->type()) {
    case PlanNodeType::Get:
      result = from_store(*node->as<GetNode>().table, store_);
      break;

    case PlanNodeType::Select: {
      result = dependencies_of(node->left());
      const auto& predicate = node->as<SelectNode>().predicate;
      // Removing rows keeps UCCs, FDs, and ODs. An IND survives only if the removed rows had nulls in it.
      std::erase_if(result.inds, [&](const NodeInd& ind) {
        return predicate.condition != PredicateCondition::IsNotNull ||
               std::find(ind.columns.begin(), ind.columns.end(), predicate.column) == ind.columns.end();
      });
      break;
    }

    case PlanNodeType::Join: {
      const auto& join = node->as<JoinNode>();
      const auto& left = dependencies_of(node->left());
      const auto& right = dependencies_of(node->right());
      if (join.mode == JoinMode::Theta) {
        result.fds = left.fds;
        result.fds.insert(right.fds.begin(), right.fds.end());
        for (const auto& ucc : left.uccs) add_fd(result, ucc, names_of(*node->left()));
        for (const auto& ucc : right.uccs) add_fd(result, ucc, names_of(*node->right()));
      } else {
        result = equi_join(*node, join, left, right);
      }
      break;
    }

    case PlanNodeType::Aggregate: {
      const auto& aggregate = node->as<AggregateNode>();
      if (aggregate.group_by.empty()) {
        // A single output row.
        for (const auto& column : output) result.uccs.insert(ColumnSet{column});
        break;
      }
      const auto groups = ColumnSet(aggregate.group_by.begin(), aggregate.group_by.end());
      result = restrict_to(dependencies_of(node->left()), groups);
      result.uccs.insert(groups);
      break;
    }

    case PlanNodeType::Project: {
      auto pass_through = ColumnSet{};
      for (const auto& expression : node->as<ProjectNode>().expressions) {
        if (expression.is_pass_through()) pass_through.insert(expression.name);
      }
      result = restrict_to(dependencies_of(node->left()), pass_through);
      break;
    }

    case PlanNodeType::Union: {
      const auto& left_columns = node->left()->output_columns();
      const auto& right_columns = node->right()->output_columns();
      const auto rename = [&](const std::vector<std::string>& columns,
                              const std::vector<ColumnInfo>& from) -> std::vector<std::string> {
        auto renamed = std::vector<std::string>{};
        for (const auto& column : columns) {
          const auto position = std::find_if(from.begin(), from.end(),
                                             [&](const auto& info) { return info.name == column; }) -
                                from.begin();
          renamed.push_back(node->output_columns().at(position).name);
        }
        return renamed;
      };
      for (const auto& ind : dependencies_of(node->left()).inds) {
        result.inds.insert(NodeInd{ind.referencing_table, ind.referencing_columns, rename(ind.columns, left_columns)});
      }
      for (const auto& ind : dependencies_of(node->right()).inds) {
        result.inds.insert(
            NodeInd{ind.referencing_table, ind.referencing_columns, rename(ind.columns, right_columns)});
      }
      break;
    }

    case PlanNodeType::Sort:
      result = dependencies_of(node->left());
      break;
  }

  result = restrict_to(result, output);
  add_ucc_fds(result, output);
  return result;
}

NodeDependencies dependencies_of(const PlanNodePtr& node, const MetadataStore& store) {
  auto propagator = DependencyPropagator{store};
  return propagator.dependencies_of(node);
}

std::string annotate_plan(const PlanNodePtr& plan, const MetadataStore& store) {
  auto propagator = DependencyPropagator{store};
  auto out = std::ostringstream{};
  const auto visit = [&](const auto& self, const PlanNodePtr& node, size_t depth) -> void {
    const auto indent = std::string(depth * 2, ' ');
    out << indent << node->description() << '\n';
    for (const auto& line : propagator.dependencies_of(node).describe()) out << indent << "  : " << line << '\n';
    for (const auto& child : node->children()) self(self, child, depth + 1);
  };
  visit(visit, plan, 0);
  return out.str();
}

}  // namespace depqo
