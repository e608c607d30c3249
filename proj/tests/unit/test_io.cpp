#include "helpers.hpp"

#include "frontier/io.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

using namespace frontier;

TEST_CASE("numbers round-trip through their text form") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> z(0.0, 1e3);
    for (int t = 0; t < 500; ++t) {
        const double v = z(rng) * std::pow(10.0, t % 13 - 6);
        CHECK(*io::parse_number(io::format_number(v)) == v);
    }
    CHECK(io::format_number(0.1) == "0.1");
    CHECK(io::format_number(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(io::format_number(-std::numeric_limits<double>::infinity()) == "-inf");
    CHECK(io::format_number(std::optional<double>{}).empty());
}

TEST_CASE("strict numeric parsing") {
    CHECK(*io::parse_number(" 2.5 ") == 2.5);
    CHECK(*io::parse_number("1e3") == 1000.0);
    CHECK_FALSE(io::parse_number("").has_value());
    CHECK_FALSE(io::parse_number("12abc").has_value());
    CHECK_FALSE(io::parse_number("abc").has_value());
}

TEST_CASE("CSV splitting handles quotes") {
    CHECK(io::split_csv_line("a,b,,c") == std::vector<std::string>{"a", "b", "", "c"});
    CHECK(io::split_csv_line("\"x,y\",\"say \"\"hi\"\"\"\r") == std::vector<std::string>{"x,y", "say \"hi\""});
    std::istringstream in(" a , b\n\n1,2\n3,4\n");
    const io::CsvTable t = io::read_csv(in);
    CHECK(t.column("a") == 0);
    CHECK(t.column("b") == 1);
    CHECK(t.column("c") == -1);
    CHECK(t.line_numbers == std::vector<int>{3, 4});
    std::istringstream empty("");
    CHECK_THROWS_AS(io::read_csv(empty), std::runtime_error);
}

TEST_CASE("dataset files round-trip") {
    const Dataset data = testing::cobb_douglas(12, 0.1, 3);
    const auto path = std::filesystem::temp_directory_path() / "frontier_io_roundtrip.csv";
    {
        std::ofstream out(path);
        io::write_dataset_csv(out, data);
    }
    const Dataset back = io::read_dataset_csv(path.string());
    CHECK(back.inputs() == data.inputs());
    CHECK(back.outputs() == data.outputs());
    REQUIRE(back.has_frontier());
    CHECK(*back.true_frontier() == *data.true_frontier());

    {
        std::ofstream out(path);
        out << "x1,y\n1,2\n3,oops\n";
    }
    CHECK_THROWS_WITH_AS(io::read_dataset_csv(path.string()), doctest::Contains("line 3"), std::runtime_error);
    {
        std::ofstream out(path);
        out << "a,b\n1,2\n";
    }
    CHECK_THROWS_AS(io::read_dataset_csv(path.string()), std::runtime_error);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(io::read_dataset_csv(path.string()), std::runtime_error);
}
