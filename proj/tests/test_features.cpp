#include <doctest.h>

#include <random>

#include "demandcast/features.hpp"

using namespace demandcast;

namespace {

DateStamp thursday_oracle(int year) {
    int thursdays = 0;
    for (unsigned d = 1; d <= 30; ++d) {
        const DateStamp date(year, 11, d);
        if (date.weekday() == 4 && ++thursdays == 4) return date;
    }
    throw std::logic_error("unreachable");
}

double mean_of(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i <= hi; ++i) s += v[i];
    return s / static_cast<double>(hi - lo + 1);
}

SkuSeries random_series(std::mt19937& rng, std::size_t n) {
    std::uniform_real_distribution<double> q(0.0, 100.0);
    std::vector<double> v(n);
    for (auto& x : v) x = std::round(q(rng));
    return {SkuId("S"), DateStamp(2020, 1, 1), v};
}

}  // namespace

TEST_CASE("calendar flag examples") {
    const auto sun = calendar_flags(DateStamp(2023, 1, 1));
    CHECK(sun.is_weekend);
    CHECK_FALSE(sun.is_summer_peak);
    CHECK_FALSE(sun.is_black_friday);
    CHECK_FALSE(sun.is_back_to_school);
    CHECK_FALSE(sun.is_holiday_season);
    CHECK(sun.quarter == 1);

    CHECK(thanksgiving(2023) == DateStamp(2023, 11, 23));
    const auto bf = calendar_flags(DateStamp(2023, 11, 24));
    CHECK(bf.is_black_friday);
    CHECK(bf.is_holiday_season);
    CHECK(bf.quarter == 4);

    const auto bts = calendar_flags(DateStamp(2023, 8, 15));
    CHECK(bts.is_back_to_school);
    CHECK(bts.quarter == 3);
}

TEST_CASE("thanksgiving matches enumeration of November Thursdays") {
    for (int y = 1990; y <= 2060; ++y) CHECK(thanksgiving(y) == thursday_oracle(y));
}

TEST_CASE("flag counts over full years follow the windows") {
    for (int y = 2018; y <= 2028; ++y) {
        int weekend = 0, summer = 0, school = 0, season = 0, bf = 0;
        std::array<int, 5> quarters{};
        for (DateStamp d(y, 1, 1); d.year() == y; d = d + 1) {
            const auto f = calendar_flags(d);
            weekend += f.is_weekend;
            summer += f.is_summer_peak;
            school += f.is_back_to_school;
            season += f.is_holiday_season;
            bf += f.is_black_friday;
            quarters[static_cast<std::size_t>(f.quarter)]++;
        }
        CHECK(weekend >= 104);
        CHECK(weekend <= 106);
        CHECK(summer == 17 + 30 + 15);
        CHECK(school == 31 + 15);
        CHECK(season == 16 + 31);
        CHECK(bf == 4);
        CHECK(quarters[1] + quarters[2] + quarters[3] + quarters[4] == (DateStamp(y + 1, 1, 1) - DateStamp(y, 1, 1)));
    }
}

TEST_CASE("custom windows can wrap the year end") {
    SeasonWindows w;
    w.black_friday_last = 40;
    CHECK(calendar_flags(DateStamp(2024, 1, 2), w).is_black_friday);
    w.holiday_season_begin = {12, 20};
    w.holiday_season_end = {1, 5};
    CHECK(calendar_flags(DateStamp(2024, 1, 3), w).is_holiday_season);
    CHECK_FALSE(calendar_flags(DateStamp(2024, 1, 6), w).is_holiday_season);
}

TEST_CASE("rolling_mean examples and properties") {
    const Eigen::VectorXd v = (Eigen::VectorXd(5) << 1, 2, 3, 4, 5).finished();
    const Eigen::VectorXd r = rolling_mean(v, 3);
    CHECK(r[0] == 1.0);
    CHECK(r[1] == 1.5);
    CHECK(r[2] == 2.0);
    CHECK(r[3] == 3.0);
    CHECK(r[4] == 4.0);
    CHECK(rolling_mean(v, 1) == v);
    CHECK_THROWS_AS(rolling_mean(v, 0), ContractViolation);

    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-50, 50);
    std::uniform_int_distribution<int> wn(1, 40), len(1, 80);
    for (int rep = 0; rep < 200; ++rep) {
        const int n = len(rng), w = wn(rng);
        std::vector<double> raw(static_cast<std::size_t>(n));
        for (auto& x : raw) x = u(rng);
        const Eigen::Map<const Eigen::VectorXd> m(raw.data(), n);
        const Eigen::VectorXd out = rolling_mean(m, w);
        REQUIRE(out.size() == n);
        for (int t = 0; t < n; ++t) {
            CHECK(out[t] >= m.minCoeff() - 1e-12);
            CHECK(out[t] <= m.maxCoeff() + 1e-12);
            const auto lo = static_cast<std::size_t>(std::max(0, t - w + 1));
            CHECK(out[t] == doctest::Approx(mean_of(raw, lo, static_cast<std::size_t>(t))).epsilon(1e-12));
        }
    }
}

TEST_CASE("lag shifts and marks the leading positions undefined") {
    const Eigen::VectorXd v = (Eigen::VectorXd(4) << 5, 6, 7, 8).finished();
    const auto l = lag(v, 2);
    CHECK_FALSE(l[0].has_value());
    CHECK_FALSE(l[1].has_value());
    CHECK(*l[2] == 5.0);
    CHECK(*l[3] == 6.0);
    CHECK_THROWS_AS(lag(v, 0), ContractViolation);
}

TEST_CASE("covid_features smooths independently") {
    CovidAligned zero;
    zero.cases.assign(10, 0.0);
    zero.deaths.assign(10, 0.0);
    const auto z = covid_features(zero);
    CHECK(z.cases_7day_avg.isZero());
    CHECK(z.deaths_7day_avg.isZero());

    CovidAligned c;
    c.cases = {7, 0, 0, 0, 0, 0, 0, 0};
    c.deaths = {0, 0, 0, 0, 0, 0, 0, 14};
    const auto f = covid_features(c);
    CHECK(f.cases_7day_avg[0] == 7.0);
    CHECK(f.cases_7day_avg[6] == 1.0);
    CHECK(f.cases_7day_avg[7] == 0.0);
    CHECK(f.deaths_7day_avg[7] == 2.0);
}

TEST_CASE("assemble_design trims the warm-up and uses only prior sales") {
    std::mt19937 rng(5);
    const auto s = random_series(rng, 200);
    CovidAligned covid;
    covid.cases.assign(200, 1.0);
    covid.deaths.assign(200, 0.0);
    const auto d = assemble_design(s, covid);
    REQUIRE(d.rows() == 140);
    CHECK(d.start == s.date(60));
    CHECK(d.columns.allFinite());
    const auto& y = s.values();
    for (Eigen::Index i = 0; i < d.rows(); ++i) {
        const auto t = static_cast<std::size_t>(i + 60);
        CHECK((*d.target)[i] == y[t]);
        CHECK(d.column(RegressorName::lag_1)[i] == y[t - 1]);
        CHECK(d.column(RegressorName::lag_7)[i] == y[t - 7]);
        CHECK(d.column(RegressorName::lag_14)[i] == y[t - 14]);
        CHECK(d.column(RegressorName::lag_30)[i] == y[t - 30]);
        CHECK(d.column(RegressorName::lag_60)[i] == y[t - 60]);
        CHECK(d.column(RegressorName::rolling_mean_7)[i] == doctest::Approx(mean_of(y, t - 7, t - 1)).epsilon(1e-12));
        CHECK(d.column(RegressorName::rolling_mean_14)[i] == doctest::Approx(mean_of(y, t - 14, t - 1)).epsilon(1e-12));
        CHECK(d.column(RegressorName::rolling_mean_30)[i] == doctest::Approx(mean_of(y, t - 30, t - 1)).epsilon(1e-12));
        CHECK(d.column(RegressorName::cases_7day_avg)[i] == 1.0);
        CHECK(d.column(RegressorName::quarter)[i] == calendar_flags(s.date(t)).quarter);
    }

    const SkuSeries shortest(SkuId("S"), DateStamp(2020, 1, 1), std::vector<double>(61, 1.0));
    CovidAligned c61;
    c61.cases.assign(61, 0.0);
    c61.deaths.assign(61, 0.0);
    CHECK(assemble_design(shortest, c61).rows() == 1);

    const SkuSeries too_short(SkuId("S"), DateStamp(2020, 1, 1), std::vector<double>(60, 1.0));
    CovidAligned c60;
    c60.cases.assign(60, 0.0);
    c60.deaths.assign(60, 0.0);
    CHECK_THROWS_AS(assemble_design(too_short, c60), InsufficientHistory);
}

TEST_CASE("project_future applies the three-period mean") {
    std::mt19937 rng(9);
    const auto s = random_series(rng, 100);
    CovidAligned covid;
    covid.cases.assign(100, 0.0);
    covid.deaths.assign(100, 0.0);
    auto d = assemble_design(s, covid);
    const Eigen::Index n = d.rows();
    d.column(RegressorName::lag_1).tail(3) << 10, 20, 30;

    const auto f = project_future(d, 14);
    CHECK(f.rows() == 14);
    CHECK(f.start == d.last_date() + 1);
    for (Eigen::Index i = 0; i < 14; ++i) {
        CHECK(f.column(RegressorName::lag_1)[i] == 20.0);
        CHECK(f.column(RegressorName::cases_7day_avg)[i] == 0.0);
        CHECK(f.column(RegressorName::is_weekend)[i] == (f.date(i).weekday() % 6 == 0 ? 1.0 : 0.0));
    }
    const auto col = d.column(RegressorName::lag_7);
    CHECK(f.column(RegressorName::lag_7)[0] == (col[n - 1] + col[n - 2] + col[n - 3]) / 3.0);

    CovidScenario sc;
    sc.values[f.start + 2] = {50.0, 3.0};
    const auto g = project_future(d, 5, {}, &sc);
    CHECK(g.column(RegressorName::cases_7day_avg)[2] == 50.0);
    CHECK(g.column(RegressorName::deaths_7day_avg)[2] == 3.0);
    CHECK(g.column(RegressorName::cases_7day_avg)[1] == 0.0);

    DesignMatrix tiny;
    tiny.start = DateStamp(2020, 1, 1);
    tiny.columns = Eigen::MatrixXd::Zero(2, kRegressorCount);
    CHECK_THROWS_AS(project_future(tiny, 5), ContractViolation);
    CHECK_THROWS_AS(project_future(d, 0), ContractViolation);
}

TEST_CASE("covid scenario parsing") {
    const auto sc = parse_covid_scenario("dt,cases_7day_avg,deaths_7day_avg\n2021-01-01,5,1\n");
    CHECK(sc.values.at(DateStamp(2021, 1, 1)) == std::make_pair(5.0, 1.0));
    CHECK_THROWS_AS(parse_covid_scenario("dt,cases\n"), FormatError);
    CHECK_THROWS_AS(parse_covid_scenario("dt,cases_7day_avg,deaths_7day_avg\n2021-01-01,-5,1\n"), ValidationError);
}

TEST_CASE("regressor names round-trip") {
    CHECK(all_regressors().size() == 16);
    for (auto r : all_regressors()) CHECK(regressor_from_string(to_string(r)) == r);
    CHECK_FALSE(regressor_from_string("lag_2").has_value());
    CHECK(is_recursive(RegressorName::deaths_7day_avg));
    CHECK_FALSE(is_recursive(RegressorName::quarter));
}
