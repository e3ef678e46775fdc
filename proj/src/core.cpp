#include "demandcast/core.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>

namespace demandcast {

namespace {

bool all_digits(std::string_view s) {
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return !s.empty();
}

int to_int(std::string_view s) {
    int v = 0;
    for (char c : s) v = v * 10 + (c - '0');
    return v;
}

}  // namespace

DateStamp::DateStamp(int year, unsigned month, unsigned day) {
    const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                          std::chrono::day{day}};
    if (!ymd.ok())
        throw ValidationError("invalid calendar date " + std::to_string(year) + "-" +
                              std::to_string(month) + "-" + std::to_string(day));
    days_ = std::chrono::sys_days{ymd};
}

DateStamp DateStamp::parse(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-' || !all_digits(text.substr(0, 4)) ||
        !all_digits(text.substr(5, 2)) || !all_digits(text.substr(8, 2)))
        throw FormatError("expected YYYY-MM-DD date, got '" + std::string(text) + "'");
    const int y = to_int(text.substr(0, 4));
    const int m = to_int(text.substr(5, 2));
    const int d = to_int(text.substr(8, 2));
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                          std::chrono::day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) throw FormatError("not a calendar date: '" + std::string(text) + "'");
    return DateStamp(std::chrono::sys_days{ymd});
}

DateStamp DateStamp::from_serial(std::int64_t days_since_epoch) {
    return DateStamp(std::chrono::sys_days{std::chrono::days{days_since_epoch}});
}

int DateStamp::year() const { return static_cast<int>(std::chrono::year_month_day{days_}.year()); }
unsigned DateStamp::month() const { return static_cast<unsigned>(std::chrono::year_month_day{days_}.month()); }
unsigned DateStamp::day() const { return static_cast<unsigned>(std::chrono::year_month_day{days_}.day()); }
unsigned DateStamp::weekday() const { return std::chrono::weekday{days_}.c_encoding(); }

std::string DateStamp::iso() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", year(), month(), day());
    return buf;
}

SkuId::SkuId(std::string value) : value_(std::move(value)) {
    if (value_.empty()) throw ValidationError("SKU identifier is empty");
    if (std::isspace(static_cast<unsigned char>(value_.front())) ||
        std::isspace(static_cast<unsigned char>(value_.back())))
        throw ValidationError("SKU identifier '" + value_ + "' has surrounding whitespace");
}

SkuSeries::SkuSeries(SkuId sku, DateStamp start, std::vector<double> values)
    : sku_(std::move(sku)), start_(start), values_(std::move(values)) {
    if (values_.empty()) throw ValidationError("series for '" + sku_.str() + "' is empty");
    for (std::size_t i = 0; i < values_.size(); ++i)
        if (!std::isfinite(values_[i]) || values_[i] < 0.0)
            throw ValidationError("series '" + sku_.str() + "' has invalid value on " + date(i).iso());
}

SkuSeries SkuSeries::truncated(DateStamp last) const {
    if (last < start_ || last > end())
        throw ContractViolation("truncation date " + last.iso() + " outside series axis");
    const auto n = static_cast<std::size_t>(last - start_) + 1;
    return SkuSeries(sku_, start_, std::vector<double>(values_.begin(), values_.begin() + n));
}

std::map<SkuId, SkuSeries> align_series(const std::vector<Observation>& observations) {
    struct Bounds {
        DateStamp first, last;
    };
    std::map<SkuId, Bounds> bounds;
    for (const auto& obs : observations) {
        if (!std::isfinite(obs.quantity) || obs.quantity < 0.0)
            throw ValidationError("negative or non-finite quantity for '" + obs.sku.str() + "' on " +
                                      obs.date.iso(),
                                  obs.line);
        auto [it, inserted] = bounds.try_emplace(obs.sku, Bounds{obs.date, obs.date});
        if (!inserted) {
            it->second.first = std::min(it->second.first, obs.date);
            it->second.last = std::max(it->second.last, obs.date);
        }
    }

    std::map<SkuId, std::vector<double>> values;
    for (const auto& [sku, b] : bounds)
        values[sku].assign(static_cast<std::size_t>(b.last - b.first) + 1, 0.0);
    for (const auto& obs : observations)
        values[obs.sku][static_cast<std::size_t>(obs.date - bounds[obs.sku].first)] += obs.quantity;

    std::map<SkuId, SkuSeries> out;
    for (auto& [sku, v] : values) out.emplace(sku, SkuSeries(sku, bounds[sku].first, std::move(v)));
    return out;
}

}  // namespace demandcast
