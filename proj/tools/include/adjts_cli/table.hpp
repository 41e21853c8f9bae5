#pragma once

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace adjts::cli
{

using Cell = std::variant<std::string, double, long long>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add(std::vector<Cell> row);
    void write_csv(std::ostream &os) const;
    // Aligned text; long tables and wide rows are elided.
    void print(std::ostream &os, std::size_t max_rows = 40, std::size_t max_cols = 10) const;
    [[nodiscard]] nlohmann::json to_json() const;
};

struct CommandResult {
    explicit CommandResult(std::string name) : command(std::move(name)) {}

    std::string command;
    Table table;
    nlohmann::json summary = nlohmann::json::object();
    std::vector<std::string> failures;

    [[nodiscard]] bool ok() const { return failures.empty(); }
    void fail(std::string why) { failures.push_back(std::move(why)); }
    void print(std::ostream &os) const;
    [[nodiscard]] nlohmann::json to_json() const;
};

} // namespace adjts::cli
