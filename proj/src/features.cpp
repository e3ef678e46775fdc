#include "demandcast/features.hpp"

#include <algorithm>
#include <cmath>

#include "demandcast/text.hpp"

namespace demandcast {

namespace {

constexpr std::array<std::string_view, kRegressorCount> kNames = {
    "lag_1",          "lag_7",           "lag_14",         "lag_30",          "lag_60",
    "rolling_mean_7", "rolling_mean_14", "rolling_mean_30", "is_weekend",     "is_summer_peak",
    "is_black_friday", "is_back_to_school", "is_holiday_season", "quarter",  "cases_7day_avg",
    "deaths_7day_avg"};

constexpr std::array<int, 5> kLags = {1, 7, 14, 30, 60};
constexpr std::array<int, 3> kRollingWindows = {7, 14, 30};

bool within(DateStamp d, MonthDay begin, MonthDay end) {
    const unsigned key = d.month() * 100 + d.day();
    const unsigned lo = begin.month * 100 + begin.day;
    const unsigned hi = end.month * 100 + end.day;
    return lo <= hi ? (key >= lo && key <= hi) : (key >= lo || key <= hi);
}

void fill_calendar_row(Eigen::MatrixXd& m, Eigen::Index row, DateStamp date, const SeasonWindows& windows) {
    const auto f = calendar_flags(date, windows);
    m(row, static_cast<int>(RegressorName::is_weekend)) = f.is_weekend;
    m(row, static_cast<int>(RegressorName::is_summer_peak)) = f.is_summer_peak;
    m(row, static_cast<int>(RegressorName::is_black_friday)) = f.is_black_friday;
    m(row, static_cast<int>(RegressorName::is_back_to_school)) = f.is_back_to_school;
    m(row, static_cast<int>(RegressorName::is_holiday_season)) = f.is_holiday_season;
    m(row, static_cast<int>(RegressorName::quarter)) = f.quarter;
}

}  // namespace

std::string_view to_string(RegressorName r) { return kNames[static_cast<std::size_t>(r)]; }

std::optional<RegressorName> regressor_from_string(std::string_view name) {
    for (std::size_t i = 0; i < kNames.size(); ++i)
        if (kNames[i] == name) return static_cast<RegressorName>(i);
    return std::nullopt;
}

const std::array<RegressorName, kRegressorCount>& all_regressors() {
    static const auto all = [] {
        std::array<RegressorName, kRegressorCount> a{};
        for (int i = 0; i < kRegressorCount; ++i) a[static_cast<std::size_t>(i)] = static_cast<RegressorName>(i);
        return a;
    }();
    return all;
}

bool is_recursive(RegressorName r) {
    switch (r) {
        case RegressorName::is_weekend:
        case RegressorName::is_summer_peak:
        case RegressorName::is_black_friday:
        case RegressorName::is_back_to_school:
        case RegressorName::is_holiday_season:
        case RegressorName::quarter:
            return false;
        default:
            return true;
    }
}

DateStamp thanksgiving(int year) {
    const DateStamp nov1(year, 11, 1);
    const unsigned to_thursday = (4 + 7 - nov1.weekday()) % 7;
    return nov1 + static_cast<std::int64_t>(to_thursday + 21);
}

CalendarFlags calendar_flags(DateStamp date, const SeasonWindows& windows) {
    CalendarFlags f;
    const unsigned wd = date.weekday();
    f.is_weekend = wd == 0 || wd == 6;
    f.is_summer_peak = within(date, windows.summer_peak_begin, windows.summer_peak_end);
    f.is_back_to_school = within(date, windows.back_to_school_begin, windows.back_to_school_end);
    f.is_holiday_season = within(date, windows.holiday_season_begin, windows.holiday_season_end);
    const auto offset = date - thanksgiving(date.year());
    f.is_black_friday = offset >= windows.black_friday_first && offset <= windows.black_friday_last;
    if (!f.is_black_friday && date.month() <= 1) {
        // Windows that run past New Year belong to the previous year's Thanksgiving.
        const auto prev = date - thanksgiving(date.year() - 1);
        f.is_black_friday = prev >= windows.black_friday_first && prev <= windows.black_friday_last;
    }
    f.quarter = static_cast<int>((date.month() + 2) / 3);
    return f;
}

Eigen::VectorXd rolling_mean(const Eigen::Ref<const Eigen::VectorXd>& values, int window) {
    if (window < 1) throw ContractViolation("rolling_mean window must be >= 1");
    const Eigen::Index n = values.size();
    Eigen::VectorXd out(n);
    // Windowed sums recomputed per point keep results free of running-sum drift.
    for (Eigen::Index t = 0; t < n; ++t) {
        const Eigen::Index lo = std::max<Eigen::Index>(0, t - window + 1);
        out[t] = values.segment(lo, t - lo + 1).mean();
    }
    return out;
}

std::vector<std::optional<double>> lag(const Eigen::Ref<const Eigen::VectorXd>& values, int offset) {
    if (offset < 1) throw ContractViolation("lag offset must be >= 1");
    std::vector<std::optional<double>> out(static_cast<std::size_t>(values.size()));
    for (Eigen::Index t = offset; t < values.size(); ++t) out[static_cast<std::size_t>(t)] = values[t - offset];
    return out;
}

CovidFeatures covid_features(const CovidAligned& merged) {
    const Eigen::Map<const Eigen::VectorXd> cases(merged.cases.data(), static_cast<Eigen::Index>(merged.cases.size()));
    const Eigen::Map<const Eigen::VectorXd> deaths(merged.deaths.data(),
                                                   static_cast<Eigen::Index>(merged.deaths.size()));
    return {rolling_mean(cases, 7), rolling_mean(deaths, 7)};
}

DesignMatrix assemble_design(const SkuSeries& series, const CovidAligned& covid, const SeasonWindows& windows) {
    if (covid.size() != series.size())
        throw ContractViolation("COVID signals are not aligned to the series axis");
    const auto n = static_cast<Eigen::Index>(series.size());
    if (n <= kWarmupDays)
        throw InsufficientHistory("series '" + series.sku().str() + "' has " + std::to_string(n) +
                                  " days; at least " + std::to_string(kWarmupDays + 1) + " are required");

    const Eigen::Map<const Eigen::VectorXd> y(series.values().data(), n);
    Eigen::MatrixXd full(n, kRegressorCount);
    full.setConstant(std::numeric_limits<double>::quiet_NaN());

    for (std::size_t i = 0; i < kLags.size(); ++i) {
        const auto lagged = lag(y, kLags[i]);
        for (Eigen::Index t = 0; t < n; ++t)
            if (lagged[static_cast<std::size_t>(t)]) full(t, static_cast<Eigen::Index>(i)) = *lagged[static_cast<std::size_t>(t)];
    }

    // Momentum features see sales up to the previous day only.
    if (n > 1) {
        const Eigen::VectorXd previous = y.head(n - 1);
        for (std::size_t i = 0; i < kRollingWindows.size(); ++i) {
            const Eigen::VectorXd rm = rolling_mean(previous, kRollingWindows[i]);
            full.col(static_cast<int>(RegressorName::rolling_mean_7) + static_cast<Eigen::Index>(i)).tail(n - 1) = rm;
        }
    }

    for (Eigen::Index t = 0; t < n; ++t) fill_calendar_row(full, t, series.date(static_cast<std::size_t>(t)), windows);

    const auto cf = covid_features(covid);
    full.col(static_cast<int>(RegressorName::cases_7day_avg)) = cf.cases_7day_avg;
    full.col(static_cast<int>(RegressorName::deaths_7day_avg)) = cf.deaths_7day_avg;

    DesignMatrix d;
    d.start = series.date(kWarmupDays);
    d.columns = full.bottomRows(n - kWarmupDays);
    d.target = y.tail(n - kWarmupDays);
    return d;
}

CovidScenario parse_covid_scenario(std::string_view bytes, Warnings* warnings) {
    const auto lines = text::lines(bytes);
    if (lines.empty()) throw FormatError("missing header 'dt,cases_7day_avg,deaths_7day_avg'", 1);
    const auto header = text::split(lines.front());
    std::array<std::size_t, 3> idx{};
    const std::array<std::string_view, 3> names = {"dt", "cases_7day_avg", "deaths_7day_avg"};
    for (std::size_t k = 0; k < 3; ++k) {
        auto it = std::find_if(header.begin(), header.end(), [&](auto f) { return text::trim(f) == names[k]; });
        if (it == header.end()) throw FormatError("missing header 'dt,cases_7day_avg,deaths_7day_avg'", 1);
        idx[k] = static_cast<std::size_t>(it - header.begin());
    }
    if (warnings && header.size() > 3) warnings->push_back("ignoring extra scenario columns");

    CovidScenario s;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (text::trim(lines[i]).empty()) continue;
        const auto f = text::split(lines[i]);
        if (f.size() != header.size()) throw FormatError("wrong field count", i + 1);
        DateStamp d;
        try {
            d = DateStamp::parse(text::trim(f[idx[0]]));
        } catch (const FormatError& e) {
            throw FormatError(e.what(), i + 1);
        }
        const double c = text::parse_double(f[idx[1]], i + 1, "cases_7day_avg");
        const double dd = text::parse_double(f[idx[2]], i + 1, "deaths_7day_avg");
        if (c < 0 || dd < 0) throw ValidationError("negative scenario value", i + 1);
        if (!s.values.emplace(d, std::make_pair(c, dd)).second)
            throw ValidationError("duplicate scenario date " + d.iso(), i + 1);
    }
    return s;
}

DesignMatrix project_future(const DesignMatrix& history, int horizon, const SeasonWindows& windows,
                            const CovidScenario* scenario) {
    if (history.rows() < 3) throw ContractViolation("projection needs at least three history rows");
    if (horizon < 1) throw ContractViolation("horizon must be >= 1");

    DesignMatrix f;
    f.start = history.last_date() + 1;
    f.columns.resize(horizon, kRegressorCount);
    for (auto r : all_regressors()) {
        if (!is_recursive(r)) continue;
        const auto col = history.column(r);
        const Eigen::Index n = col.size();
        const double projected = (col[n - 1] + col[n - 2] + col[n - 3]) / 3.0;
        f.column(r).setConstant(projected);
    }
    for (Eigen::Index i = 0; i < horizon; ++i) {
        const DateStamp d = f.date(i);
        fill_calendar_row(f.columns, i, d, windows);
        if (scenario) {
            if (auto it = scenario->values.find(d); it != scenario->values.end()) {
                f.column(RegressorName::cases_7day_avg)[i] = it->second.first;
                f.column(RegressorName::deaths_7day_avg)[i] = it->second.second;
            }
        }
    }
    return f;
}

}  // namespace demandcast
