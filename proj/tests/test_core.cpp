#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lmsim/config.hpp"
#include "lmsim/csv.hpp"
#include "lmsim/errors.hpp"
#include "lmsim/geo.hpp"
#include "lmsim/json_writer.hpp"
#include "lmsim/random.hpp"
#include "lmsim/util.hpp"

#include "support/oracles.hpp"

#include <cmath>

using namespace lmsim;

TEST_CASE("random streams are deterministic in (seed, label)") {
    RandomStream a(7, "demand");
    RandomStream b(7, "demand");
    for (int i = 0; i < 1000; ++i) {
        CHECK(a.next_u64() == b.next_u64());
    }
}

TEST_CASE("random streams separate by label and by seed") {
    RandomStream demand(7, "demand");
    RandomStream humat(7, "humat");
    RandomStream other_seed(8, "demand");
    int label_diff = 0;
    int seed_diff = 0;
    RandomStream demand2(7, "demand");
    for (int i = 0; i < 100; ++i) {
        std::uint64_t base = demand.next_u64();
        label_diff += base != humat.next_u64();
        seed_diff += demand2.next_u64() != other_seed.next_u64();
    }
    CHECK(label_diff > 90);
    CHECK(seed_diff > 90);
}

TEST_CASE("derived streams are independent of parent draw position") {
    RandomStream parent1(3, "root");
    RandomStream parent2(3, "root");
    (void)parent2.next_u64(); // advance one parent only
    RandomStream child1 = parent1.derive("x");
    RandomStream child2 = parent2.derive("x");
    for (int i = 0; i < 100; ++i) {
        CHECK(child1.next_u64() == child2.next_u64());
    }
}

TEST_CASE("uniform01 stays in [0, 1) and has a sane mean") {
    RandomStream rng(11, "u");
    double sum = 0.0;
    for (int i = 0; i < 20000; ++i) {
        double u = rng.uniform01();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    CHECK(sum / 20000 == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("poisson mean and variance track lambda") {
    RandomStream rng(5, "poisson");
    double lambda = 4.2;
    long long total = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        total += rng.poisson(lambda);
    }
    double mean = static_cast<double>(total) / n;
    CHECK(mean == doctest::Approx(lambda).epsilon(0.03));

    // large-rate path splits draws; the sum still behaves
    RandomStream rng2(5, "poisson2");
    total = 0;
    for (int i = 0; i < 2000; ++i) {
        total += rng2.poisson(75.0);
    }
    CHECK(static_cast<double>(total) / 2000 == doctest::Approx(75.0).epsilon(0.03));
}

TEST_CASE("categorical follows the weights") {
    RandomStream rng(9, "cat");
    std::vector<double> weights = {2.0, 1.0, 1.0};
    std::array<int, 3> counts{};
    for (int i = 0; i < 40000; ++i) {
        ++counts[rng.categorical(weights)];
    }
    CHECK(counts[0] / 40000.0 == doctest::Approx(0.5).epsilon(0.03));
    CHECK(counts[1] / 40000.0 == doctest::Approx(0.25).epsilon(0.05));
}

TEST_CASE("great_circle_km identity and antipodal cases") {
    CHECK(great_circle_km({52.08, 4.31}, {52.08, 4.31}) == 0.0);
    double half_circumference = great_circle_km({0.0, 0.0}, {0.0, 180.0});
    CHECK(half_circumference == doctest::Approx(20015.1).epsilon(0.5 / 20015.1));
}

TEST_CASE("great_circle_km matches an independent haversine oracle") {
    double lib = great_circle_km({52.0, 4.0}, {52.0, 5.0});
    double oracle = test::haversine_oracle_km(52.0, 4.0, 52.0, 5.0);
    CHECK(lib == doctest::Approx(oracle).epsilon(1e-9));

    RandomStream rng(21, "geo");
    for (int i = 0; i < 200; ++i) {
        double lat1 = rng.uniform(-89.0, 89.0);
        double lon1 = rng.uniform(-180.0, 180.0);
        double lat2 = rng.uniform(-89.0, 89.0);
        double lon2 = rng.uniform(-180.0, 180.0);
        double d1 = great_circle_km({lat1, lon1}, {lat2, lon2});
        double d2 = test::haversine_oracle_km(lat1, lon1, lat2, lon2);
        CHECK(d1 == doctest::Approx(d2).epsilon(1e-6));
        CHECK(d1 == great_circle_km({lat2, lon2}, {lat1, lon1})); // symmetry
    }
}

TEST_CASE("great_circle_km satisfies the triangle inequality") {
    RandomStream rng(22, "triangle");
    for (int i = 0; i < 1000; ++i) {
        LatLon a{rng.uniform(-90.0, 90.0), rng.uniform(-180.0, 180.0)};
        LatLon b{rng.uniform(-90.0, 90.0), rng.uniform(-180.0, 180.0)};
        LatLon c{rng.uniform(-90.0, 90.0), rng.uniform(-180.0, 180.0)};
        double ab = great_circle_km(a, b);
        double bc = great_circle_km(b, c);
        double ac = great_circle_km(a, c);
        CHECK(ac <= ab + bc + 1e-6);
    }
}

TEST_CASE("csv parses headers, quoting and reports ragged rows") {
    CsvTable t = parse_csv("a,b,c\n1,\"x,y\",3\n4,5,6\n", "test.csv");
    CHECK(t.header.size() == 3);
    CHECK(t.rows.size() == 2);
    CHECK(t.cell(0, 1) == "x,y");
    CHECK(t.column("c") == 2);
    CHECK_THROWS_AS(t.column("missing"), ParseError);
    CHECK_THROWS_AS(parse_csv("a,b\n1\n", "bad.csv"), ParseError);

    // csv_line round-trips quoting
    std::string line = csv_line({"plain", "with,comma", "with\"quote"});
    CsvTable back = parse_csv("x,y,z\n" + line, "round.csv");
    CHECK(back.cell(0, 1) == "with,comma");
    CHECK(back.cell(0, 2) == "with\"quote");
}

TEST_CASE("config parser handles sections, arrays and errors with line numbers") {
    ConfigTable cfg = parse_config_text("top = 1\n"
                                        "[a]\n"
                                        "s = \"hi\" # comment\n"
                                        "f = 2.5\n"
                                        "neg = -3\n"
                                        "flag = true\n"
                                        "arr = [1, 2, 3]\n"
                                        "names = [\"x\", \"y\"]\n"
                                        "[a.b]\n"
                                        "deep = 4\n",
                                        "test.toml");
    CHECK(cfg.get_int("top") == 1);
    CHECK(cfg.get_string("a.s") == "hi");
    CHECK(cfg.get_double("a.f") == 2.5);
    CHECK(cfg.get_int("a.neg") == -3);
    CHECK(cfg.get_bool("a.flag"));
    CHECK(cfg.get_double_array("a.arr") == std::vector<double>{1.0, 2.0, 3.0});
    CHECK(cfg.get_string_array("a.names") == std::vector<std::string>{"x", "y"});
    CHECK(cfg.get_int("a.b.deep") == 4);
    CHECK(cfg.unconsumed_keys().empty());

    try {
        parse_config_text("[a]\nbad = \n", "broken.toml");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(parse_config_text("x = 1\nx = 2\n", "dup.toml"), ParseError);
    CHECK_THROWS_AS(parse_config_text("k = \"unterminated\n", "s.toml"), ParseError);

    ConfigTable unread = parse_config_text("used = 1\nunused = 2\n", "u.toml");
    CHECK(unread.get_int("used") == 1);
    CHECK(unread.unconsumed_keys() == std::vector<std::string>{"unused"});
}

TEST_CASE("config parser accepts full 64-bit seeds") {
    ConfigTable cfg = parse_config_text("seed = 18446744073709551615\n", "seed.toml");
    CHECK(cfg.get_uint("seed") == 18446744073709551615ULL);
}

TEST_CASE("json writer emits deterministic values and raw tokens") {
    JsonWriter w;
    w.begin_object();
    w.key("name").value("x\"y");
    w.key("count").value(10);
    w.key("ratio").value(0.25);
    w.key("copied").raw_number("0.30000000000000004");
    w.key("list").begin_array().value(1).value(2).end_array();
    w.end_object();
    std::string s = w.str();
    CHECK(s.find("\"name\": \"x\\\"y\"") != std::string::npos);
    CHECK(s.find("\"ratio\": 0.25") != std::string::npos);
    CHECK(s.find("0.30000000000000004") != std::string::npos);
}

TEST_CASE("format_double survives parse round-trips") {
    RandomStream rng(31, "fmt");
    for (int i = 0; i < 1000; ++i) {
        double v = (rng.uniform01() - 0.5) * std::pow(10.0, rng.uniform(-6.0, 6.0));
        auto parsed = parse_double(format_double(v));
        REQUIRE(parsed.has_value());
        CHECK(*parsed == v);
        CHECK(format_double(*parsed) == format_double(v));
    }
}
