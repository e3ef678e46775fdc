#include <doctest.h>

#include <random>

#include "demandcast/ingest.hpp"

using namespace demandcast;

TEST_CASE("parse_sales reads rows and validates") {
    const auto rows = parse_sales("dt,sku,quantity\n2020-01-01,A,3\n");
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].date == DateStamp(2020, 1, 1));
    CHECK(rows[0].sku.str() == "A");
    CHECK(rows[0].quantity == 3.0);

    CHECK(parse_sales("dt,sku,quantity\n").empty());
    CHECK(parse_sales("dt,sku,quantity\r\n2020-01-01,A,1.5\r\n")[0].quantity == 1.5);

    try {
        parse_sales("dt,sku,quantity\n2020-01-01,A,-1\n");
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK(e.line() == 2);
    }
    try {
        parse_sales("dt,sku,quantity\n2020-01-01,A,1\n2020-13-01,A,1\n");
        FAIL("expected a format error");
    } catch (const FormatError& e) {
        CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(parse_sales("date,sku,qty\n"), FormatError);
    CHECK_THROWS_AS(parse_sales(""), FormatError);
    CHECK_THROWS_AS(parse_sales("dt,sku,quantity\n2020-01-01,A,abc\n"), FormatError);
}

TEST_CASE("extra columns are ignored with a warning") {
    Warnings w;
    const auto rows = parse_sales("dt,region,sku,quantity\n2020-01-01,west,A,2\n", &w);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].quantity == 2.0);
    REQUIRE(w.size() == 1);
    CHECK(w[0].find("region") != std::string::npos);
}

TEST_CASE("parse_covid sorts and rejects duplicates") {
    const auto one = parse_covid("dt,new_cases,new_deaths\n2020-01-21,1,0\n");
    REQUIRE(one.size() == 1);
    CHECK(one[0] == CovidDaily{DateStamp(2020, 1, 21), 1, 0});

    const auto sorted = parse_covid("dt,new_cases,new_deaths\n2020-03-02,5,1\n2020-03-01,4,0\n");
    CHECK(sorted[0].date == DateStamp(2020, 3, 1));
    CHECK(sorted[1].date == DateStamp(2020, 3, 2));

    CHECK_THROWS_AS(parse_covid("dt,new_cases,new_deaths\n2020-03-01,1,0\n2020-03-01,2,0\n"), ValidationError);
    CHECK_THROWS_AS(parse_covid("dt,new_cases,new_deaths\n2020-03-01,-1,0\n"), ValidationError);
}

TEST_CASE("parse_holidays validates window signs") {
    const auto h = parse_holidays("name,date,lower_window,upper_window\nblack_friday,2023-11-24,-1,3\n");
    REQUIRE(h.size() == 1);
    CHECK(h[0].first_day() == DateStamp(2023, 11, 23));
    CHECK(h[0].last_day() == DateStamp(2023, 11, 27));

    const auto single = parse_holidays("name,date,lower_window,upper_window\nx,2023-07-04,0,0\n");
    CHECK(single[0].first_day() == single[0].last_day());

    CHECK_THROWS_AS(parse_holidays("name,date,lower_window,upper_window\nx,2023-07-04,1,2\n"), ValidationError);
    CHECK_THROWS_AS(parse_holidays("name,date,lower_window,upper_window\nx,2023-07-04,0,-2\n"), ValidationError);

    const auto annual =
        parse_holidays("name,date,lower_window,upper_window\nxmas,2022-12-25,0,0\nxmas,2023-12-25,0,0\n");
    CHECK(annual.size() == 2);
}

TEST_CASE("merge_covid aligns to the series axis with zero fill") {
    const SkuSeries early(SkuId("A"), DateStamp(2019, 6, 1), std::vector<double>(10, 1.0));
    const std::vector<CovidDaily> covid{{DateStamp(2020, 1, 21), 10, 1}, {DateStamp(2020, 1, 22), 100, 2}};
    const auto pre = merge_covid(early, covid);
    CHECK(pre.size() == 10);
    for (std::size_t i = 0; i < pre.size(); ++i) {
        CHECK(pre.cases[i] == 0.0);
        CHECK(pre.deaths[i] == 0.0);
    }

    const SkuSeries span(SkuId("A"), DateStamp(2020, 1, 20), std::vector<double>(6, 1.0));
    const auto m = merge_covid(span, covid);
    CHECK(m.cases == std::vector<double>{0, 10, 100, 0, 0, 0});
    CHECK(m.deaths == std::vector<double>{0, 1, 2, 0, 0, 0});
}

TEST_CASE("merge_covid never invents values; length matches the series") {
    std::mt19937 rng(3);
    std::uniform_int_distribution<int> off(-30, 90);
    std::uniform_real_distribution<double> v(0, 50);
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<CovidDaily> covid;
        for (int d = off(rng), n = 0; n < 40; ++n, ++d) covid.push_back({DateStamp(2021, 1, 1) + d, v(rng), v(rng)});
        const SkuSeries s(SkuId("A"), DateStamp(2021, 1, 1), std::vector<double>(60, 0.0));
        const auto m = merge_covid(s, covid);
        REQUIRE(m.size() == s.size());
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (m.cases[i] == 0 && m.deaths[i] == 0) continue;
            const auto it = std::find_if(covid.begin(), covid.end(), [&](const auto& c) { return c.date == s.date(i); });
            REQUIRE(it != covid.end());
            CHECK(it->new_cases == m.cases[i]);
            CHECK(it->new_deaths == m.deaths[i]);
        }
    }
}

TEST_CASE("parse then write then parse is a fixed point") {
    const std::string sales = "dt,sku,quantity\n2020-01-01,A,3.25\n2020-01-02,B,0.1\n2020-01-02,A,7\n";
    const auto s1 = parse_sales(sales);
    const auto s2 = parse_sales(write_sales(s1));
    REQUIRE(s1.size() == s2.size());
    for (std::size_t i = 0; i < s1.size(); ++i) {
        CHECK(s1[i].date == s2[i].date);
        CHECK(s1[i].sku == s2[i].sku);
        CHECK(s1[i].quantity == s2[i].quantity);
    }
    CHECK(write_sales(s2) == write_sales(s1));

    const auto c1 = parse_covid("dt,new_cases,new_deaths\n2020-03-02,5.5,1\n2020-03-01,4,0\n");
    CHECK(parse_covid(write_covid(c1)) == c1);

    const auto h1 = parse_holidays("name,date,lower_window,upper_window\nbf,2023-11-24,-1,3\n");
    CHECK(parse_holidays(write_holidays(h1)) == h1);
}
