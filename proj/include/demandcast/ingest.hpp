#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "demandcast/core.hpp"

namespace demandcast {

/// A named calendar event whose effect spans [date + lower_window, date + upper_window].
struct HolidaySpec {
    std::string name;
    DateStamp date;
    int lower_window = 0;
    int upper_window = 0;

    DateStamp first_day() const { return date + lower_window; }
    DateStamp last_day() const { return date + upper_window; }
    bool operator==(const HolidaySpec&) const = default;
};

/// COVID signals aligned to a series axis, one entry per series day.
struct CovidAligned {
    std::vector<double> cases;
    std::vector<double> deaths;

    std::size_t size() const noexcept { return cases.size(); }
};

/// Non-fatal parse findings (ignored extra columns and the like).
using Warnings = std::vector<std::string>;

// Parsers for the three input tables. Headers are matched by column name; extra
// columns are ignored and reported through `warnings`.
std::vector<Observation> parse_sales(std::string_view bytes, Warnings* warnings = nullptr);
std::vector<CovidDaily> parse_covid(std::string_view bytes, Warnings* warnings = nullptr);
std::vector<HolidaySpec> parse_holidays(std::string_view bytes, Warnings* warnings = nullptr);

std::string write_sales(const std::vector<Observation>& rows);
std::string write_sales(const SkuSeries& series);
std::string write_covid(const std::vector<CovidDaily>& rows);
std::string write_holidays(const std::vector<HolidaySpec>& rows);

/// Joins COVID records onto the series axis; uncovered dates get (0, 0).
CovidAligned merge_covid(const SkuSeries& series, const std::vector<CovidDaily>& covid);

/// Reads a whole file; throws ConfigError if it cannot be opened.
std::string read_file(const std::string& path);

}  // namespace demandcast
