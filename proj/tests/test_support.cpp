#include "dyson/io.hpp"
#include "dyson/statistics.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

using namespace dyson;

TEST_CASE("summary moments") {
    const std::vector<double> xs{1, 2, 3, 4};
    const auto s = stats::summarize(xs);
    CHECK(s.count == 4);
    CHECK(s.mean == 2.5);
    CHECK(s.variance == doctest::Approx(5.0 / 3.0));
    CHECK(s.fourth_central == doctest::Approx((2 * 5.0625 + 2 * 0.0625) / 4));
    CHECK(s.standard_error() == doctest::Approx(std::sqrt(5.0 / 12.0)));
    CHECK_THROWS_AS(stats::summarize(std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("one-sample KS against a uniform cdf") {
    auto uniform = [](double x) { return std::clamp(x, 0.0, 1.0); };
    CHECK(stats::ks_one_sample({0.5}, uniform) == doctest::Approx(0.5));
    CHECK(stats::ks_one_sample({0.25, 0.75}, uniform) == doctest::Approx(0.25));
    CHECK(stats::ks_one_sample({0.1, 0.2, 0.3}, uniform) == doctest::Approx(0.7));
    CHECK_THROWS_AS(stats::ks_one_sample({}, uniform), std::invalid_argument);
}

TEST_CASE("two-sample KS, including ties") {
    CHECK(stats::ks_two_sample({1, 2, 3}, {1, 2, 3}) == 0.0);
    CHECK(stats::ks_two_sample({1, 2}, {3, 4}) == 1.0);
    CHECK(stats::ks_two_sample({1, 2, 3, 4}, {3, 4, 5, 6}) == doctest::Approx(0.5));
    CHECK(stats::ks_two_sample({1, 1, 2}, {1, 2, 2}) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("z-scores") {
    stats::Summary a{100, 1.0, 4.0, 48.0};
    stats::Summary b{100, 0.0, 4.0, 48.0};
    CHECK(stats::mean_z(a, b) == doctest::Approx(1.0 / std::sqrt(0.08)));
    CHECK(stats::variance_z(a, b) == 0.0);
    CHECK(stats::mean_z(a, a) == 0.0);
}

TEST_CASE("linear and log-log fits") {
    const std::vector<double> x{1, 2, 3, 4};
    const std::vector<double> y{3, 5, 7, 9};
    const auto f = stats::linear_fit(x, y);
    CHECK(f.slope == doctest::Approx(2.0));
    CHECK(f.intercept == doctest::Approx(1.0));
    CHECK(f.slope_standard_error == doctest::Approx(0.0));
    const std::vector<double> n{16, 32, 64, 128};
    std::vector<double> v;
    for (double k : n) v.push_back(7.0 / (k * k));
    CHECK(stats::log_log_fit(n, v).slope == doctest::Approx(-2.0));
    v[1] = 0.0;
    CHECK_THROWS_AS(stats::log_log_fit(n, v), std::domain_error);
    CHECK_THROWS_AS(stats::linear_fit(std::vector<double>{1, 1}, std::vector<double>{2, 3}), std::invalid_argument);
}

TEST_CASE("hashes") {
    CHECK(io::sha1_hex("abc") == "a9993e364706816aba3e25717850c26c9cd0d89d");
    CHECK(io::git_blob_sha1("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
    CHECK(io::git_blob_sha1("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST_CASE("number formatting round-trips") {
    for (double x : {0.1, -1e-300, 3.0, 1.0 / 3.0}) CHECK(std::stod(io::format_double(x)) == x);
    CHECK(io::format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(io::format_double(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("CSV quoting and layout") {
    CHECK(io::csv_field("plain") == "plain");
    CHECK(io::csv_field("a,b") == "\"a,b\"");
    CHECK(io::csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(io::csv_field("two\nlines") == "\"two\nlines\"");
    io::CsvTable t({"n", "value"});
    t.add_numeric_row({2, 0.5});
    t.add_row({"x,y", "1"});
    CHECK(t.rows() == 2);
    CHECK(t.str() == "n,value\r\n2,0.5\r\n\"x,y\",1\r\n");
    CHECK_THROWS_AS(t.add_row({"only one"}), std::invalid_argument);
}

TEST_CASE("files are written with their blob hash") {
    const auto dir = std::filesystem::temp_directory_path() / "dyson_io_test" / "nested";
    std::filesystem::remove_all(dir.parent_path());
    const auto hash = io::write_file(dir / "out.txt", "hello\n");
    CHECK(hash == "ce013625030ba8dba906f756967f9e9ca394464a");
    CHECK(io::read_file(dir / "out.txt") == "hello\n");
    CHECK_THROWS_AS(io::read_file(dir / "missing.txt"), std::runtime_error);
    std::filesystem::remove_all(dir.parent_path());
}
