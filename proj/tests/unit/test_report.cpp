#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ehaloha/report.hpp"

using namespace ehaloha::report;
namespace fs = std::filesystem;

TEST_CASE("shortest round-trip doubles")
{
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(0.15) == "0.15");
    CHECK(format_double(1e-10) == "1e-10");
    CHECK(format_double(-2.5) == "-2.5");
    CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
    double const x = 0.36787944117144233;
    CHECK(std::stod(format_double(x)) == x);
}

TEST_CASE("csv layout")
{
    Table t{{"a", "b", "c", "d"}, {}};
    t.add_row({std::int64_t{3}, 0.5, std::string("stable"), true});
    t.add_row({std::int64_t{-1}, 2.0, std::string("x"), false});
    CHECK(to_csv(t) == "a,b,c,d\n3,0.5,stable,1\n-1,2,x,0\n");
    CHECK_THROWS(t.add_row({std::int64_t{1}}));
}

TEST_CASE("json rows keep column order and types")
{
    Table t{{"n", "name"}, {}};
    t.add_row({std::int64_t{2}, std::string("q")});
    auto const j = to_json(t);
    REQUIRE(j.size() == 1);
    CHECK(j[0].dump() == R"({"n":2,"name":"q"})");
}

TEST_CASE("atomic writes leave only the target")
{
    auto const dir = fs::temp_directory_path() / "ehaloha_report_test";
    fs::remove_all(dir);
    auto const path = dir / "sub" / "t.csv";
    Table t{{"x"}, {}};
    t.add_row({1.5});
    write_csv(path, t);
    write_csv(path, t);
    std::ifstream is(path);
    std::stringstream ss;
    ss << is.rdbuf();
    CHECK(ss.str() == "x\n1.5\n");
    std::size_t files = 0;
    for (auto const& e : fs::directory_iterator(dir / "sub"))
    {
        (void)e;
        ++files;
    }
    CHECK(files == 1);
    write_json(dir / "r.json", nlohmann::ordered_json{{"schema_version", kSchemaVersion}});
    CHECK(fs::exists(dir / "r.json"));
    fs::remove_all(dir);
}
