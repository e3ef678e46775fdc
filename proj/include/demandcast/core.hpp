#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "demandcast/error.hpp"

namespace demandcast {

/// A Gregorian calendar date with no time-of-day.
class DateStamp {
public:
    DateStamp() = default;
    DateStamp(int year, unsigned month, unsigned day);
    explicit DateStamp(std::chrono::sys_days days) : days_(days) {}

    /// Parses strict ISO-8601 `YYYY-MM-DD`; throws FormatError otherwise.
    static DateStamp parse(std::string_view text);
    static DateStamp from_serial(std::int64_t days_since_epoch);

    int year() const;
    unsigned month() const;
    unsigned day() const;
    /// 0 = Sunday .. 6 = Saturday.
    unsigned weekday() const;
    std::int64_t serial() const { return days_.time_since_epoch().count(); }
    std::chrono::sys_days sys_days() const { return days_; }

    std::string iso() const;

    DateStamp operator+(std::int64_t n) const { return DateStamp(days_ + std::chrono::days{n}); }
    DateStamp operator-(std::int64_t n) const { return DateStamp(days_ - std::chrono::days{n}); }
    std::int64_t operator-(const DateStamp& other) const { return serial() - other.serial(); }

    auto operator<=>(const DateStamp&) const = default;

private:
    std::chrono::sys_days days_{};
};

/// Opaque product identifier, non-empty without surrounding whitespace.
class SkuId {
public:
    SkuId() = default;
    explicit SkuId(std::string value);

    const std::string& str() const noexcept { return value_; }
    auto operator<=>(const SkuId&) const = default;

private:
    std::string value_;
};

/// One SKU's daily demand on a contiguous date axis starting at `start()`.
class SkuSeries {
public:
    SkuSeries(SkuId sku, DateStamp start, std::vector<double> values);

    const SkuId& sku() const noexcept { return sku_; }
    DateStamp start() const noexcept { return start_; }
    DateStamp end() const noexcept { return start_ + static_cast<std::int64_t>(values_.size()) - 1; }
    DateStamp date(std::size_t i) const { return start_ + static_cast<std::int64_t>(i); }
    std::size_t size() const noexcept { return values_.size(); }
    const std::vector<double>& values() const noexcept { return values_; }

    /// Sub-series covering [start(), last] (inclusive). `last` must lie on the axis.
    SkuSeries truncated(DateStamp last) const;

    bool operator==(const SkuSeries&) const = default;

private:
    SkuId sku_;
    DateStamp start_;
    std::vector<double> values_;
};

struct CovidDaily {
    DateStamp date;
    double new_cases = 0.0;
    double new_deaths = 0.0;

    bool operator==(const CovidDaily&) const = default;
};

struct Observation {
    DateStamp date;
    SkuId sku;
    double quantity = 0.0;
    /// 1-based source line, 0 when not read from a file.
    std::size_t line = 0;
};

/// Builds one contiguous series per SKU. Missing days become zero-sales days and
/// duplicate (date, sku) rows are summed.
std::map<SkuId, SkuSeries> align_series(const std::vector<Observation>& observations);

}  // namespace demandcast
