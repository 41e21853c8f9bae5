#include <adjts_cli/table.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace adjts::cli
{

namespace
{

std::string format_cell(const Cell &c, bool full_precision)
{
    if (const auto *s = std::get_if<std::string>(&c)) {
        return *s;
    }
    if (const auto *i = std::get_if<long long>(&c)) {
        return std::to_string(*i);
    }
    const double d = std::get<double>(c);
    if (std::isnan(d)) {
        return full_precision ? "" : "-";
    }
    return full_precision ? fmt::format("{:.17g}", d) : fmt::format("{:.6g}", d);
}

nlohmann::json cell_json(const Cell &c)
{
    if (const auto *s = std::get_if<std::string>(&c)) {
        return *s;
    }
    if (const auto *i = std::get_if<long long>(&c)) {
        return *i;
    }
    const double d = std::get<double>(c);
    return std::isfinite(d) ? nlohmann::json(d) : nlohmann::json(nullptr);
}

} // namespace

void Table::add(std::vector<Cell> row)
{
    rows.push_back(std::move(row));
}

void Table::write_csv(std::ostream &os) const
{
    for (std::size_t j = 0; j < columns.size(); ++j) {
        os << (j ? "," : "") << columns[j];
    }
    os << '\n';
    for (const auto &r : rows) {
        for (std::size_t j = 0; j < r.size(); ++j) {
            os << (j ? "," : "") << format_cell(r[j], true);
        }
        os << '\n';
    }
}

void Table::print(std::ostream &os, std::size_t max_rows, std::size_t max_cols) const
{
    const std::size_t ncols = std::min(columns.size(), max_cols);
    std::vector<std::size_t> width(ncols);
    const std::size_t nrows = std::min(rows.size(), max_rows);
    for (std::size_t j = 0; j < ncols; ++j) {
        width[j] = columns[j].size();
        for (std::size_t i = 0; i < nrows; ++i) {
            width[j] = std::max(width[j], format_cell(rows[i][j], false).size());
        }
    }
    for (std::size_t j = 0; j < ncols; ++j) {
        fmt::print(os, "{:>{}}  ", columns[j], width[j]);
    }
    if (ncols < columns.size()) {
        fmt::print(os, "... ({} more columns)", columns.size() - ncols);
    }
    os << '\n';
    for (std::size_t i = 0; i < nrows; ++i) {
        for (std::size_t j = 0; j < ncols; ++j) {
            fmt::print(os, "{:>{}}  ", format_cell(rows[i][j], false), width[j]);
        }
        os << '\n';
    }
    if (nrows < rows.size()) {
        fmt::print(os, "... ({} more rows)\n", rows.size() - nrows);
    }
}

nlohmann::json Table::to_json() const
{
    auto arr = nlohmann::json::array();
    for (const auto &r : rows) {
        nlohmann::json rec = nlohmann::json::object();
        for (std::size_t j = 0; j < r.size() && j < columns.size(); ++j) {
            rec[columns[j]] = cell_json(r[j]);
        }
        arr.push_back(std::move(rec));
    }
    return arr;
}

void CommandResult::print(std::ostream &os) const
{
    if (!table.rows.empty()) {
        table.print(os);
        os << '\n';
    }
    for (const auto &[key, value] : summary.items()) {
        fmt::print(os, "{}: {}\n", key, value.dump());
    }
    if (ok()) {
        os << "status: ok\n";
    } else {
        for (const auto &f : failures) {
            fmt::print(os, "FAILED: {}\n", f);
        }
    }
}

nlohmann::json CommandResult::to_json() const
{
    return {{"command", command}, {"rows", table.to_json()}, {"summary", summary}, {"failures", failures},
            {"ok", ok()}};
}

} // namespace adjts::cli
