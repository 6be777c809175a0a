#include "depqo/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

namespace depqo {

namespace {

using nlohmann::json;

constexpr auto SCHEMA_SUFFIX = std::string_view{".schema.json"};

std::string zero_padded(int64_t number, size_t width) {
  auto text = std::to_string(number);
  if (text.size() < width) text.insert(0, width - text.size(), '0');
  return text;
}

json table_schema(const Table& table, const std::vector<Dependency>& constraints) {
  auto document = json{{"table", table.name()}, {"columns", json::array()}, {"foreign_keys", json::array()}};
  for (const auto& column : table.columns()) {
    document["columns"].push_back({{"name", column.name}, {"type", std::string{data_type_name(column.type)}}});
  }
  for (const auto& constraint : constraints) {
    if (constraint.table != table.name()) continue;
    if (constraint.kind == DependencyKind::UCC) {
      document["primary_key"] = constraint.columns;
    } else if (constraint.kind == DependencyKind::IND) {
      document["foreign_keys"].push_back({{"columns", constraint.columns},
                                          {"references", constraint.referenced_table},
                                          {"referenced_columns", constraint.dependents}});
    }
  }
  return document;
}

}  // namespace

Violation parse_violation(std::string_view name) {
  if (name == "none" || name.empty()) return Violation::None;
  if (name == "ind") return Violation::Ind;
  if (name == "od") return Violation::Od;
  if (name == "ucc") return Violation::Ucc;
  throw std::invalid_argument("unknown violation '" + std::string{name} + "' (expected ind, od, or ucc)");
}

Dataset generate_star_schema(const StarSchemaOptions& options) {
  if (options.scale < 1) throw std::invalid_argument("scale must be at least 1");
  auto random = std::mt19937_64{options.seed};
  const auto day_count = static_cast<int64_t>(options.scale * 365);
  const auto customer_count = static_cast<int64_t>(options.scale * 1'000);
  const auto sales_count = static_cast<int64_t>(options.scale * 100'000);
  auto dataset = Dataset{};

  {
    const auto first_day = parse_date("2000-01-01").days;
    auto d_sk = std::vector<Value>{};
    auto d_date = std::vector<Value>{};
    auto d_year = std::vector<Value>{};
    auto d_moy = std::vector<Value>{};
    for (int64_t day = 0; day < day_count; ++day) {
      const auto date = Date{first_day + day};
      const auto text = format_date(date);
      d_sk.emplace_back(day + 1);
      d_date.emplace_back(date);
      d_year.emplace_back(int64_t{std::stoi(text.substr(0, 4))});
      d_moy.emplace_back(int64_t{std::stoi(text.substr(5, 2))});
    }
    if (options.violate == Violation::Od) {
      std::swap(d_date.front(), d_date.back());
      std::swap(d_year.front(), d_year.back());
    }
    dataset.database.add_table(make_table("date_dim",
                                          {{"d_sk", DataType::Int},
                                           {"d_date", DataType::Date},
                                           {"d_year", DataType::Int},
                                           {"d_moy", DataType::Int}},
                                          {d_sk, d_date, d_year, d_moy}, options.chunk_capacity));
  }

  {
    auto keys = std::vector<int64_t>(static_cast<size_t>(customer_count));
    std::iota(keys.begin(), keys.end(), int64_t{1});
    std::shuffle(keys.begin(), keys.end(), random);
    auto c_sk = std::vector<Value>{};
    auto c_name = std::vector<Value>{};
    auto c_state = std::vector<Value>{};
    for (const auto key : keys) {
      c_sk.emplace_back(key);
      c_name.emplace_back("customer_" + zero_padded(key, 7));
      c_state.emplace_back("S" + zero_padded(key % 50, 2));
    }
    if (options.violate == Violation::Ucc && c_sk.size() > 1) c_sk.back() = c_sk.front();
    dataset.database.add_table(make_table("customer",
                                          {{"c_sk", DataType::Int},
                                           {"c_name", DataType::String},
                                           {"c_state", DataType::String}},
                                          {c_sk, c_name, c_state}, options.chunk_capacity));
  }

  {
    auto day = std::uniform_int_distribution<int64_t>{1, day_count};
    auto customer = std::uniform_int_distribution<int64_t>{1, customer_count};
    auto quantity = std::uniform_int_distribution<int64_t>{1, 10};
    auto price = std::uniform_int_distribution<int64_t>{1, 500};
    auto dates = std::vector<int64_t>(static_cast<size_t>(sales_count));
    for (auto& date : dates) date = day(random);
    std::sort(dates.begin(), dates.end());
    if (options.violate == Violation::Ind) dates.back() = day_count + 1;
    auto s_sold_date = std::vector<Value>{};
    auto s_customer = std::vector<Value>{};
    auto s_quantity = std::vector<Value>{};
    auto s_sales_price = std::vector<Value>{};
    for (const auto date : dates) {
      s_sold_date.emplace_back(date);
      s_customer.emplace_back(customer(random));
      s_quantity.emplace_back(quantity(random));
      s_sales_price.emplace_back(price(random));
    }
    dataset.database.add_table(make_table("sales",
                                          {{"s_sold_date", DataType::Int},
                                           {"s_customer", DataType::Int},
                                           {"s_quantity", DataType::Int},
                                           {"s_sales_price", DataType::Int}},
                                          {s_sold_date, s_customer, s_quantity, s_sales_price},
                                          options.chunk_capacity));
  }

  dataset.constraints.push_back(Dependency::ucc("date_dim", {"d_sk"}));
  if (options.violate != Violation::Ucc) dataset.constraints.push_back(Dependency::ucc("customer", {"c_sk"}));
  if (options.violate != Violation::Ind) {
    dataset.constraints.push_back(Dependency::ind("sales", {"s_sold_date"}, "date_dim", {"d_sk"}));
  }
  if (options.violate != Violation::Ucc) {
    dataset.constraints.push_back(Dependency::ind("sales", {"s_customer"}, "customer", {"c_sk"}));
  }
  return dataset;
}

void write_dataset(const Dataset& dataset, const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  for (const auto& name : dataset.database.table_names()) {
    const auto table = dataset.database.get_table(name);
    write_csv(*table, directory / (name + ".csv"));
    auto stream = std::ofstream{directory / (name + std::string{SCHEMA_SUFFIX})};
    if (!stream) throw std::runtime_error("cannot write schema for '" + name + "'");
    stream << table_schema(*table, dataset.constraints).dump(2) << '\n';
  }
}

Dataset load_dataset(const std::filesystem::path& directory, ChunkOffset chunk_capacity) {
  if (!std::filesystem::is_directory(directory)) {
    throw LoadError("data directory '" + directory.string() + "' does not exist");
  }
  auto schema_files = std::vector<std::filesystem::path>{};
  for (const auto& entry : std::filesystem::directory_iterator{directory}) {
    if (entry.path().filename().string().ends_with(SCHEMA_SUFFIX)) schema_files.push_back(entry.path());
  }
  std::sort(schema_files.begin(), schema_files.end());
  if (schema_files.empty()) throw LoadError("no *.schema.json files in '" + directory.string() + "'");

  auto dataset = Dataset{};
  for (const auto& path : schema_files) {
    auto document = json{};
    try {
      auto stream = std::ifstream{path};
      document = json::parse(stream);
      const auto file_name = path.filename().string();
      const auto name = document.value("table", file_name.substr(0, file_name.size() - SCHEMA_SUFFIX.size()));
      auto columns = std::vector<ColumnDefinition>{};
      for (const auto& column : document.at("columns")) {
        columns.push_back({column.at("name").get<std::string>(), parse_data_type(column.at("type").get<std::string>())});
      }
      dataset.database.add_table(load_csv(directory / (name + ".csv"), name, columns, chunk_capacity));
      if (document.contains("primary_key")) {
        dataset.constraints.push_back(
            Dependency::ucc(name, document["primary_key"].get<std::vector<std::string>>()));
      }
      for (const auto& foreign_key : document.value("foreign_keys", json::array())) {
        dataset.constraints.push_back(Dependency::ind(name, foreign_key.at("columns").get<std::vector<std::string>>(),
                                                      foreign_key.at("references").get<std::string>(),
                                                      foreign_key.at("referenced_columns").get<std::vector<std::string>>()));
      }
    } catch (const json::exception& error) {
      throw LoadError("malformed schema file '" + path.string() + "': " + error.what());
    }
  }
  return dataset;
}

}  // namespace depqo
