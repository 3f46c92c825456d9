#include "ehaloha/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <system_error>

namespace ehaloha::report {

void Table::add_row(std::vector<Cell> row)
{
    if (row.size() != columns.size())
    {
        throw std::invalid_argument("table row width does not match header");
    }
    rows.push_back(std::move(row));
}

std::string format_double(double x)
{
    if (std::isnan(x))
    {
        return "nan";
    }
    if (std::isinf(x))
    {
        return x > 0 ? "inf" : "-inf";
    }
    char buf[64];
    auto const res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

namespace {

std::string cell_text(Cell const& cell)
{
    return std::visit(
        [](auto const& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>)
            {
                return format_double(v);
            }
            else if constexpr (std::is_same_v<T, bool>)
            {
                return v ? "1" : "0";
            }
            else if constexpr (std::is_same_v<T, std::string>)
            {
                return v;
            }
            else
            {
                return std::to_string(v);
            }
        },
        cell);
}

}  // namespace

std::string to_csv(Table const& table)
{
    std::string out;
    for (std::size_t i = 0; i < table.columns.size(); ++i)
    {
        out += (i ? "," : "") + table.columns[i];
    }
    out += '\n';
    for (auto const& row : table.rows)
    {
        for (std::size_t i = 0; i < row.size(); ++i)
        {
            if (i)
            {
                out += ',';
            }
            out += cell_text(row[i]);
        }
        out += '\n';
    }
    return out;
}

nlohmann::ordered_json to_json(Table const& table)
{
    auto rows = nlohmann::ordered_json::array();
    for (auto const& row : table.rows)
    {
        nlohmann::ordered_json obj;
        for (std::size_t i = 0; i < row.size(); ++i)
        {
            std::visit([&](auto const& v) { obj[table.columns[i]] = v; }, row[i]);
        }
        rows.push_back(std::move(obj));
    }
    return rows;
}

void write_atomic(std::filesystem::path const& path, std::string const& contents)
{
    if (path.has_parent_path())
    {
        std::filesystem::create_directories(path.parent_path());
    }
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os)
        {
            throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        }
        os << contents;
        if (!os.flush())
        {
            throw std::runtime_error("write failed for " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

void write_csv(std::filesystem::path const& path, Table const& table)
{
    write_atomic(path, to_csv(table));
}

void write_json(std::filesystem::path const& path, nlohmann::ordered_json const& doc)
{
    write_atomic(path, doc.dump(2) + "\n");
}

}  // namespace ehaloha::report
