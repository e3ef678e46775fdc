#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "demandcast/core.hpp"

namespace demandcast {

/// Relative month index 12 (y_f - y_c) + (m_f - m_c); day of month is ignored.
int month_diff(DateStamp forecast_date, DateStamp cutoff_date);

struct MonthlyForecast {
    SkuId sku;
    int year = 0;
    unsigned month = 0;
    int month_diff = 0;
    double sales = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    /// Days of the calendar month present in the daily input; less than the month
    /// length for partial months at either edge.
    int days_covered = 0;

    bool operator==(const MonthlyForecast&) const = default;
};

/// Sums contiguous daily values (starting at `start`) into calendar months, sorted by month_diff.
std::vector<MonthlyForecast> monthly_totals(DateStamp start, const Eigen::Ref<const Eigen::VectorXd>& yhat,
                                            const Eigen::Ref<const Eigen::VectorXd>& lower,
                                            const Eigen::Ref<const Eigen::VectorXd>& upper, const SkuId& sku,
                                            DateStamp cutoff);

/// Convenience overload for point values only (bounds equal the sums).
std::vector<MonthlyForecast> monthly_totals(DateStamp start, const Eigen::Ref<const Eigen::VectorXd>& yhat,
                                            const SkuId& sku, DateStamp cutoff);

std::string write_monthly(const std::vector<MonthlyForecast>& rows);
std::vector<MonthlyForecast> parse_monthly(std::string_view bytes);

/// Plain-text planning table: one row per month with bounds, grouped by SKU.
std::string planning_table(const std::vector<MonthlyForecast>& rows);

}  // namespace demandcast
