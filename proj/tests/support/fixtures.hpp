#pragma once

#include <random>

#include "depqo/metadata_store.hpp"
#include "depqo/storage.hpp"

namespace depqo::testing {

// 40 days over 2000 and 2001, 10 customers, sales sorted by date. Small enough to check by hand.
inline Database mini_star(ChunkOffset sales_capacity = 50, size_t sales_rows = 200) {
  auto database = Database{};
  auto d_sk = std::vector<Value>{};
  auto d_date = std::vector<Value>{};
  auto d_year = std::vector<Value>{};
  auto d_moy = std::vector<Value>{};
  const auto first_day = parse_date("2000-12-12");
  for (int64_t day = 0; day < 40; ++day) {
    const auto date = Date{first_day.days + day};
    d_sk.emplace_back(day + 1);
    d_date.emplace_back(date);
    d_year.emplace_back(format_date(date) < "2001" ? int64_t{2000} : int64_t{2001});
    d_moy.emplace_back(static_cast<int64_t>(std::stoi(format_date(date).substr(5, 2))));
  }
  database.add_table(make_table("date_dim",
                                {{"d_sk", DataType::Int},
                                 {"d_date", DataType::Date},
                                 {"d_year", DataType::Int},
                                 {"d_moy", DataType::Int}},
                                {d_sk, d_date, d_year, d_moy}, 10));

  auto c_sk = std::vector<Value>{};
  auto c_name = std::vector<Value>{};
  auto c_city = std::vector<Value>{};
  for (int64_t key = 1; key <= 10; ++key) {
    c_sk.emplace_back(key);
    c_name.emplace_back("name" + std::to_string(key));
    c_city.emplace_back("city" + std::to_string(key % 3));
  }
  database.add_table(make_table(
      "customer", {{"c_sk", DataType::Int}, {"c_name", DataType::String}, {"c_city", DataType::String}},
      {c_sk, c_name, c_city}, 4));

  auto rng = std::mt19937_64{11};
  auto s_sold_date = std::vector<Value>{};
  auto s_customer = std::vector<Value>{};
  auto s_quantity = std::vector<Value>{};
  auto s_sales_price = std::vector<Value>{};
  for (size_t row = 0; row < sales_rows; ++row) {
    s_sold_date.emplace_back(static_cast<int64_t>(row * 40 / sales_rows + 1));
    s_customer.emplace_back(static_cast<int64_t>(rng() % 10 + 1));
    s_quantity.emplace_back(static_cast<int64_t>(rng() % 5 + 1));
    s_sales_price.emplace_back(static_cast<int64_t>(rng() % 100 + 1));
  }
  database.add_table(make_table("sales",
                                {{"s_sold_date", DataType::Int},
                                 {"s_customer", DataType::Int},
                                 {"s_quantity", DataType::Int},
                                 {"s_sales_price", DataType::Int}},
                                {s_sold_date, s_customer, s_quantity, s_sales_price}, sales_capacity));
  return database;
}

// Every dependency the rewrites need on `mini_star`; all of them hold.
inline MetadataStore mini_star_store() {
  auto store = MetadataStore{};
  store.add_schema_constraint(Dependency::ucc("date_dim", {"d_sk"}));
  store.add_schema_constraint(Dependency::ucc("customer", {"c_sk"}));
  store.add_schema_constraint(Dependency::ind("sales", {"s_sold_date"}, "date_dim", {"d_sk"}));
  store.add_schema_constraint(Dependency::ind("sales", {"s_customer"}, "customer", {"c_sk"}));
  store.record(Dependency::ucc("date_dim", {"d_date"}), true);
  store.record(Dependency::od("date_dim", {"d_sk"}, {"d_date"}), true);
  store.record(Dependency::od("date_dim", {"d_sk"}, {"d_year"}), true);
  return store;
}

// The two-join, filter, group-by example query.
inline constexpr const char* EXAMPLE_QUERY = R"(aggregate group=[c_sk,c_name] aggs=[sum(s_sales_price)]
  join inner on=[s_customer=c_sk]
    join inner on=[d_sk=s_sold_date]
      select d_date = 2000-12-20
        get date_dim
      get sales
    get customer
)";

inline constexpr const char* EXAMPLE_YEAR_QUERY = R"(aggregate group=[c_sk,c_name] aggs=[sum(s_sales_price)]
  join inner on=[s_customer=c_sk]
    join inner on=[d_sk=s_sold_date]
      select d_year = 2001
        get date_dim
      get sales
    get customer
)";

}  // namespace depqo::testing
