#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace ehaloha::report {

inline constexpr int kSchemaVersion = 1;

using Cell = std::variant<std::int64_t, double, std::string, bool>;

//! Column-ordered table with a fixed header; rows must match the header width.
struct Table
{
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add_row(std::vector<Cell> row);
};

//! Shortest round-trip decimal form.
std::string format_double(double x);

std::string to_csv(Table const& table);
nlohmann::ordered_json to_json(Table const& table);

//! Write `contents` to a sibling temp file and rename it over `path`.
void write_atomic(std::filesystem::path const& path, std::string const& contents);

void write_csv(std::filesystem::path const& path, Table const& table);
void write_json(std::filesystem::path const& path, nlohmann::ordered_json const& doc);

}  // namespace ehaloha::report
