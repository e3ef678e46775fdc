#pragma once

#include <Eigen/Dense>

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "demandcast/core.hpp"
#include "demandcast/ingest.hpp"

namespace demandcast {

/// The closed set of external regressors, in column order of DesignMatrix.
enum class RegressorName : int {
    lag_1,
    lag_7,
    lag_14,
    lag_30,
    lag_60,
    rolling_mean_7,
    rolling_mean_14,
    rolling_mean_30,
    is_weekend,
    is_summer_peak,
    is_black_friday,
    is_back_to_school,
    is_holiday_season,
    quarter,
    cases_7day_avg,
    deaths_7day_avg,
};

inline constexpr int kRegressorCount = 16;
inline constexpr int kWarmupDays = 60;

std::string_view to_string(RegressorName r);
std::optional<RegressorName> regressor_from_string(std::string_view name);
const std::array<RegressorName, kRegressorCount>& all_regressors();

/// Lags, rolling means and COVID averages: projected forward by the 3-period mean.
bool is_recursive(RegressorName r);

struct MonthDay {
    unsigned month;
    unsigned day;
    bool operator==(const MonthDay&) const = default;
};

/// Date windows behind the seasonal flags, inclusive on both ends.
struct SeasonWindows {
    MonthDay summer_peak_begin{5, 15};
    MonthDay summer_peak_end{7, 15};
    MonthDay back_to_school_begin{8, 1};
    MonthDay back_to_school_end{9, 15};
    MonthDay holiday_season_begin{11, 15};
    MonthDay holiday_season_end{12, 31};
    /// Black Friday window in days after US Thanksgiving (Friday = 1, Cyber Monday = 4).
    int black_friday_first = 1;
    int black_friday_last = 4;

    bool operator==(const SeasonWindows&) const = default;
};

struct CalendarFlags {
    bool is_weekend = false;
    bool is_summer_peak = false;
    bool is_black_friday = false;
    bool is_back_to_school = false;
    bool is_holiday_season = false;
    int quarter = 1;
};

/// Fourth Thursday of November.
DateStamp thanksgiving(int year);

CalendarFlags calendar_flags(DateStamp date, const SeasonWindows& windows = {});

/// Trailing mean over at most `window` points; the first window-1 outputs use the
/// partial window available so far.
Eigen::VectorXd rolling_mean(const Eigen::Ref<const Eigen::VectorXd>& values, int window);

/// values shifted right by `offset`; the leading `offset` positions are undefined.
std::vector<std::optional<double>> lag(const Eigen::Ref<const Eigen::VectorXd>& values, int offset);

struct CovidFeatures {
    Eigen::VectorXd cases_7day_avg;
    Eigen::VectorXd deaths_7day_avg;
};

CovidFeatures covid_features(const CovidAligned& merged);

/// Per-date regressor rows over a contiguous date axis. Columns follow RegressorName
/// order. A non-finite entry marks a value the caller did not supply.
struct DesignMatrix {
    DateStamp start;
    Eigen::MatrixXd columns;
    std::optional<Eigen::VectorXd> target;

    Eigen::Index rows() const { return columns.rows(); }
    DateStamp date(Eigen::Index i) const { return start + static_cast<std::int64_t>(i); }
    DateStamp last_date() const { return date(rows() - 1); }

    auto column(RegressorName r) { return columns.col(static_cast<Eigen::Index>(r)); }
    auto column(RegressorName r) const { return columns.col(static_cast<Eigen::Index>(r)); }
};

/// Builds all sixteen regressors over the series axis and returns the training view:
/// rows after the 60-day lag warm-up, with targets attached. Lag and rolling-mean
/// features at day t use sales strictly before t.
DesignMatrix assemble_design(const SkuSeries& series, const CovidAligned& covid, const SeasonWindows& windows = {});

/// Explicit future COVID path keyed by date, replacing the projection where present.
struct CovidScenario {
    std::map<DateStamp, std::pair<double, double>> values;
};

CovidScenario parse_covid_scenario(std::string_view bytes, Warnings* warnings = nullptr);

/// Future rows for `horizon` days after history's last date. Recursive columns take the
/// mean of their last three observed values; calendar columns are computed per date.
DesignMatrix project_future(const DesignMatrix& history, int horizon, const SeasonWindows& windows = {},
                            const CovidScenario* scenario = nullptr);

}  // namespace demandcast
