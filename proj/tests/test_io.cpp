#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include "hetreg/io.hpp"

using namespace hetreg;
using Catch::Matchers::ContainsSubstring;

namespace {

std::string column(std::size_t n, bool with_x, std::size_t bad_row = 0) {
    std::ostringstream os;
    for (std::size_t j = 1; j <= n; ++j) {
        double x = static_cast<double>(j) / static_cast<double>(n);
        if (j == bad_row) x += 1e-6;
        if (with_x) os << format_exact(x) << ' ';
        os << 0.25 * j << '\n';
    }
    return os.str();
}

Observations parse(const std::string& text) {
    std::istringstream in(text);
    return parse_signal(in, "sample");
}

}  // namespace

TEST_CASE("signal files", "[io]") {
    const auto a = parse(column(101, false));
    CHECK(a.grid.size() == 101);
    CHECK(a.y[6] == 1.75);
    const auto b = parse("# comment\nx,y\n" + column(11, true));
    CHECK(b.grid.size() == 11);
    CHECK(b.y.back() == 2.75);
    CHECK_THROWS_WITH(parse(column(100, false)), ContainsSubstring("n must be odd"));
    CHECK_THROWS_WITH(parse(column(11, true, 7)), ContainsSubstring("row 7"));
    CHECK_THROWS_WITH(parse("1\n2\nfoo\n"), ContainsSubstring("sample:3"));
    CHECK_THROWS_WITH(parse("1 2\n3\n4 5\n"), ContainsSubstring("column count"));
    CHECK_THROWS_AS(parse(""), config_error);
    CHECK_THROWS_AS(load_signal("/nonexistent/file.txt"), config_error);
}

TEST_CASE("observations round-trip bit-exactly", "[io][property]") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0.0, 1.0);
    for (std::size_t n : {3u, 11u, 101u, 1001u}) {
        std::vector<double> y(n);
        for (auto& v : y) v = g(rng) * std::pow(10.0, std::uniform_int_distribution<int>(-30, 30)(rng));
        y[0] = -0.0;
        const Observations obs(DesignGrid(n), y);
        std::stringstream s;
        write_observations(s, obs);
        const auto back = parse_signal(s, "roundtrip");
        REQUIRE(back.grid.size() == n);
        for (std::size_t l = 0; l < n; ++l) CHECK(back.y[l] == y[l]);
        CHECK(std::signbit(back.y[0]));
    }
}

TEST_CASE("tables", "[io]") {
    Table t;
    t.note("seed", "7");
    t.columns = {"n", "R"};
    t.add_row({"101", format_number(0.125)});
    CHECK_THROWS_AS(t.add_row({"1"}), dimension_error);
    std::ostringstream os;
    write_table(os, t);
    CHECK(os.str() == "# seed = 7\nn\tR\n101\t0.125\n");
    std::ostringstream csv;
    write_table(csv, t, ',');
    CHECK(csv.str() == "# seed = 7\nn,R\n101,0.125\n");
    CHECK(format_number(std::nan("")) == "nan");
    CHECK(format_exact(0.1) == "0.1");
}

TEST_CASE("key-value config", "[io]") {
    std::istringstream in("# experiment\nn = 101, 301\n\nk = 2   # smoothness\nrho=0.2\nlaws = gaussian uniform\nbad = x1\nextra = 1\n");
    const auto c = KeyValueConfig::parse(in, "exp.cfg");
    CHECK(*c.integer("k") == 2);
    CHECK(*c.real("rho") == 0.2);
    CHECK(*c.reals("n") == std::vector<double>{101, 301});
    CHECK(c.words("laws")->size() == 2);
    CHECK_FALSE(c.real("missing").has_value());
    CHECK_THROWS_WITH(c.integer("bad"), ContainsSubstring("exp.cfg:7") && ContainsSubstring("'bad'"));
    CHECK_THROWS_WITH(c.integer("rho"), ContainsSubstring("exp.cfg:5"));
    CHECK(c.unused() == std::vector<std::string>{"extra"});

    std::istringstream broken("n = 3\nnonsense\n");
    CHECK_THROWS_WITH(KeyValueConfig::parse(broken, "b.cfg"), ContainsSubstring("b.cfg:2"));
    std::istringstream twice("n = 3\nn = 5\n");
    CHECK_THROWS_WITH(KeyValueConfig::parse(twice, "t.cfg"), ContainsSubstring("t.cfg:2") && ContainsSubstring("line 1"));
}
