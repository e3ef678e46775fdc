#include <doctest.h>

#include <random>

#include "demandcast/aggregate.hpp"

using namespace demandcast;

namespace {

int months_between(DateStamp from, DateStamp to) {
    // Count month boundaries crossed one day at a time.
    int count = 0;
    const bool forward = from <= to;
    DateStamp d = forward ? from : to;
    const DateStamp end = forward ? to : from;
    while (d < end) {
        const DateStamp next = d + 1;
        if (next.month() != d.month()) ++count;
        d = next;
    }
    return forward ? count : -count;
}

}  // namespace

TEST_CASE("month_diff examples") {
    CHECK(month_diff(DateStamp(2024, 7, 31), DateStamp(2024, 7, 1)) == 0);
    CHECK(month_diff(DateStamp(2024, 9, 3), DateStamp(2024, 7, 15)) == 2);
    CHECK(month_diff(DateStamp(2024, 1, 1), DateStamp(2023, 12, 31)) == 1);
    CHECK(month_diff(DateStamp(2023, 11, 30), DateStamp(2024, 1, 1)) == -2);
}

TEST_CASE("month_diff agrees with day-walking oracle") {
    std::mt19937 rng(31);
    const DateStamp lo(2018, 1, 1);
    std::uniform_int_distribution<int> day(0, DateStamp(2026, 12, 31) - lo);
    for (int rep = 0; rep < 500; ++rep) {
        const DateStamp a = lo + day(rng), b = lo + day(rng);
        CHECK(month_diff(a, b) == months_between(b, a));
        CHECK(month_diff(a, a) == 0);
    }
}

TEST_CASE("monthly_totals calendar example") {
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(90);
    const auto rows = monthly_totals(DateStamp(2024, 8, 1), ones, SkuId("A"), DateStamp(2024, 7, 31));
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].month_diff == 1);
    CHECK(rows[0].sales == 31.0);
    CHECK(rows[0].days_covered == 31);
    CHECK(rows[1].month_diff == 2);
    CHECK(rows[1].sales == 30.0);
    CHECK(rows[2].month_diff == 3);
    CHECK(rows[2].sales == 29.0);
    CHECK(rows[2].days_covered == 29);
    CHECK(rows[2].year == 2024);
    CHECK(rows[2].month == 10);

    const Eigen::VectorXd one = Eigen::VectorXd::Constant(1, 4.5);
    const auto single = monthly_totals(DateStamp(2024, 8, 10), one, SkuId("A"), DateStamp(2024, 8, 9));
    REQUIRE(single.size() == 1);
    CHECK(single[0].sales == 4.5);
    CHECK(single[0].month_diff == 0);
}

TEST_CASE("monthly_totals conserves mass with consecutive month_diff") {
    std::mt19937 rng(37);
    std::uniform_real_distribution<double> u(-5.0, 50.0);
    std::uniform_int_distribution<int> len(1, 400), off(0, 3000);
    for (int rep = 0; rep < 100; ++rep) {
        const int n = len(rng);
        Eigen::VectorXd y(n);
        for (auto& x : y) x = u(rng);
        const Eigen::VectorXd lower = y.array() - 2.0;
        const Eigen::VectorXd upper = y.array() + 3.0;
        const DateStamp start = DateStamp(2018, 1, 1) + off(rng);
        const auto rows = monthly_totals(start, y, lower, upper, SkuId("A"), start - 1);
        double total = 0.0;
        int days = 0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            total += rows[i].sales;
            days += rows[i].days_covered;
            CHECK(rows[i].lower <= rows[i].sales);
            CHECK(rows[i].sales <= rows[i].upper);
            if (i > 0) CHECK(rows[i].month_diff == rows[i - 1].month_diff + 1);
        }
        CHECK(days == n);
        CHECK(std::abs(total - y.sum()) <= 1e-9 * std::max(1.0, y.cwiseAbs().sum()));
    }
}

TEST_CASE("monthly file round-trip and planning table") {
    const Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(45, 1.0, 45.0);
    const auto rows = monthly_totals(DateStamp(2024, 1, 20), y, y * 0.9, y * 1.1, SkuId("12-inch"),
                                     DateStamp(2024, 1, 19));
    const auto text = write_monthly(rows);
    CHECK(text.rfind("sku,year,month,month_diff,sales,lower,upper,days_covered\n", 0) == 0);
    CHECK(parse_monthly(text) == rows);
    const auto table = planning_table(rows);
    CHECK(table.find("12-inch") != std::string::npos);
    CHECK_THROWS_AS(parse_monthly("sku,year\n"), FormatError);
}
