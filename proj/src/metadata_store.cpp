#include "depqo/metadata_store.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>
#include <sstream>

namespace depqo {

namespace {

bool is_subset(const std::vector<std::string>& subset, const std::vector<std::string>& superset) {
  return std::includes(superset.begin(), superset.end(), subset.begin(), subset.end());
}

constexpr std::string_view REJECTED_SUFFIX = " [rejected]";
constexpr std::string_view SCHEMA_SUFFIX = " [schema]";

}  // namespace

MetadataStore::MetadataStore(const MetadataStore& other) {
  auto lock = std::shared_lock{other.mutex_};
  valid_ = other.valid_;
  rejected_ = other.rejected_;
  schema_ = other.schema_;
}

MetadataStore& MetadataStore::operator=(const MetadataStore& other) {
  if (this == &other) return *this;
  auto copy = MetadataStore{other};
  auto lock = std::unique_lock{mutex_};
  valid_ = std::move(copy.valid_);
  rejected_ = std::move(copy.rejected_);
  schema_ = std::move(copy.schema_);
  return *this;
}

void MetadataStore::add_schema_constraint(const Dependency& dependency) {
  auto lock = std::unique_lock{mutex_};
  if (rejected_.contains(dependency)) {
    throw ConsistencyError("schema constraint " + dependency.to_string() + " was recorded as rejected");
  }
  schema_.insert(dependency);
  valid_.insert(dependency);
}

void MetadataStore::record(const Dependency& dependency, bool valid) {
  auto lock = std::unique_lock{mutex_};
  auto& target = valid ? valid_ : rejected_;
  const auto& opposite = valid ? rejected_ : valid_;
  if (opposite.contains(dependency)) {
    throw ConsistencyError("conflicting verdict for " + dependency.to_string() + ": already recorded as " +
                           (valid ? "rejected" : "valid"));
  }
  target.insert(dependency);
}

std::optional<bool> MetadataStore::lookup(const Dependency& dependency) const {
  auto lock = std::shared_lock{mutex_};
  return lookup_unlocked(dependency);
}

std::optional<bool> MetadataStore::lookup_unlocked(const Dependency& dependency) const {
  if (valid_.contains(dependency)) return true;
  if (rejected_.contains(dependency)) return false;

  if (dependency.kind == DependencyKind::UCC || dependency.kind == DependencyKind::FD) {
    for (const auto& known : valid_) {
      if (known.table != dependency.table) continue;
      if (known.kind == DependencyKind::UCC && is_subset(known.columns, dependency.columns)) return true;
      if (dependency.kind == DependencyKind::FD && known.kind == DependencyKind::FD &&
          is_subset(known.columns, dependency.columns) && is_subset(dependency.dependents, known.dependents)) {
        return true;
      }
    }
  }
  if (dependency.kind == DependencyKind::UCC) {
    // A superset that is not unique rules out every subset.
    for (const auto& known : rejected_) {
      if (known.kind == DependencyKind::UCC && known.table == dependency.table &&
          is_subset(dependency.columns, known.columns)) {
        return false;
      }
    }
  }
  return std::nullopt;
}

std::vector<Dependency> MetadataStore::valid() const {
  auto lock = std::shared_lock{mutex_};
  return {valid_.begin(), valid_.end()};
}

std::vector<Dependency> MetadataStore::rejected() const {
  auto lock = std::shared_lock{mutex_};
  return {rejected_.begin(), rejected_.end()};
}

std::vector<Dependency> MetadataStore::schema_constraints() const {
  auto lock = std::shared_lock{mutex_};
  return {schema_.begin(), schema_.end()};
}

std::vector<Dependency> MetadataStore::valid_for_table(const std::string& table) const {
  auto lock = std::shared_lock{mutex_};
  auto result = std::vector<Dependency>{};
  for (const auto& dependency : valid_) {
    const auto describes = dependency.kind == DependencyKind::IND ? dependency.referenced_table == table
                                                                  : dependency.table == table;
    if (describes) result.push_back(dependency);
  }
  return result;
}

bool MetadataStore::empty() const {
  auto lock = std::shared_lock{mutex_};
  return valid_.empty() && rejected_.empty();
}

std::string MetadataStore::to_text() const {
  auto lock = std::shared_lock{mutex_};
  auto stream = std::ostringstream{};
  for (const auto& dependency : valid_) {
    stream << dependency.to_string() << (schema_.contains(dependency) ? SCHEMA_SUFFIX : "") << '\n';
  }
  for (const auto& dependency : rejected_) stream << dependency.to_string() << REJECTED_SUFFIX << '\n';
  return stream.str();
}

MetadataStore MetadataStore::from_text(std::string_view text) {
  auto store = MetadataStore{};
  auto stream = std::istringstream{std::string{text}};
  auto line = std::string{};
  auto line_number = size_t{0};
  while (std::getline(stream, line)) {
    ++line_number;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    const auto ends_with = [&](std::string_view suffix) {
      return line.size() >= suffix.size() && std::string_view{line}.substr(line.size() - suffix.size()) == suffix;
    };
    try {
      if (ends_with(REJECTED_SUFFIX)) {
        store.record(Dependency::parse(std::string_view{line}.substr(0, line.size() - REJECTED_SUFFIX.size())), false);
      } else if (ends_with(SCHEMA_SUFFIX)) {
        store.add_schema_constraint(
            Dependency::parse(std::string_view{line}.substr(0, line.size() - SCHEMA_SUFFIX.size())));
      } else {
        store.record(Dependency::parse(line), true);
      }
    } catch (const std::invalid_argument& error) {
      throw std::invalid_argument("dependency file line " + std::to_string(line_number) + ": " + error.what());
    }
  }
  return store;
}

void MetadataStore::save(const std::filesystem::path& path) const {
  auto stream = std::ofstream{path};
  if (!stream) throw std::runtime_error("cannot write '" + path.string() + "'");
  stream << to_text();
}

MetadataStore MetadataStore::load(const std::filesystem::path& path) {
  auto stream = std::ifstream{path};
  if (!stream) throw std::runtime_error("cannot open '" + path.string() + "'");
  auto buffer = std::stringstream{};
  buffer << stream.rdbuf();
  return from_text(buffer.str());
}

}  // namespace depqo
