#include "demandcast/aggregate.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

#include "demandcast/text.hpp"

namespace demandcast {

int month_diff(DateStamp forecast_date, DateStamp cutoff_date) {
    return 12 * (forecast_date.year() - cutoff_date.year()) +
           (static_cast<int>(forecast_date.month()) - static_cast<int>(cutoff_date.month()));
}

std::vector<MonthlyForecast> monthly_totals(DateStamp start, const Eigen::Ref<const Eigen::VectorXd>& yhat,
                                            const Eigen::Ref<const Eigen::VectorXd>& lower,
                                            const Eigen::Ref<const Eigen::VectorXd>& upper, const SkuId& sku,
                                            DateStamp cutoff) {
    if (lower.size() != yhat.size() || upper.size() != yhat.size())
        throw ContractViolation("daily bounds must match the forecast length");
    std::vector<MonthlyForecast> out;
    for (Eigen::Index i = 0; i < yhat.size(); ++i) {
        const DateStamp d = start + i;
        if (out.empty() || out.back().year != d.year() || out.back().month != d.month()) {
            MonthlyForecast m;
            m.sku = sku;
            m.year = d.year();
            m.month = d.month();
            m.month_diff = month_diff(d, cutoff);
            out.push_back(m);
        }
        auto& m = out.back();
        m.sales += yhat[i];
        m.lower += lower[i];
        m.upper += upper[i];
        ++m.days_covered;
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.month_diff < b.month_diff; });
    return out;
}

std::vector<MonthlyForecast> monthly_totals(DateStamp start, const Eigen::Ref<const Eigen::VectorXd>& yhat,
                                            const SkuId& sku, DateStamp cutoff) {
    return monthly_totals(start, yhat, yhat, yhat, sku, cutoff);
}

std::string write_monthly(const std::vector<MonthlyForecast>& rows) {
    std::string out = "sku,year,month,month_diff,sales,lower,upper,days_covered\n";
    for (const auto& m : rows)
        out += m.sku.str() + "," + std::to_string(m.year) + "," + std::to_string(m.month) + "," +
               std::to_string(m.month_diff) + "," + text::format_double(m.sales) + "," + text::format_double(m.lower) +
               "," + text::format_double(m.upper) + "," + std::to_string(m.days_covered) + "\n";
    return out;
}

std::vector<MonthlyForecast> parse_monthly(std::string_view bytes) {
    const auto lines = text::lines(bytes);
    if (lines.empty() || lines.front() != "sku,year,month,month_diff,sales,lower,upper,days_covered")
        throw FormatError("missing header 'sku,year,month,month_diff,sales,lower,upper,days_covered'", 1);
    std::vector<MonthlyForecast> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (text::trim(lines[i]).empty()) continue;
        const auto f = text::split(lines[i]);
        const std::size_t ln = i + 1;
        if (f.size() != 8) throw FormatError("expected 8 fields", ln);
        MonthlyForecast m;
        try {
            m.sku = SkuId(std::string(f[0]));
        } catch (const ValidationError& e) {
            throw ValidationError(e.what(), ln);
        }
        m.year = static_cast<int>(text::parse_int(f[1], ln, "year"));
        m.month = static_cast<unsigned>(text::parse_int(f[2], ln, "month"));
        if (m.month < 1 || m.month > 12) throw ValidationError("month out of range", ln);
        m.month_diff = static_cast<int>(text::parse_int(f[3], ln, "month_diff"));
        m.sales = text::parse_double(f[4], ln, "sales");
        m.lower = text::parse_double(f[5], ln, "lower");
        m.upper = text::parse_double(f[6], ln, "upper");
        m.days_covered = static_cast<int>(text::parse_int(f[7], ln, "days_covered"));
        out.push_back(m);
    }
    return out;
}

std::string planning_table(const std::vector<MonthlyForecast>& rows) {
    std::map<SkuId, std::vector<MonthlyForecast>> by_sku;
    for (const auto& r : rows) by_sku[r.sku].push_back(r);

    std::string out;
    char line[160];
    for (auto& [sku, months] : by_sku) {
        std::stable_sort(months.begin(), months.end(),
                         [](const auto& a, const auto& b) { return a.month_diff < b.month_diff; });
        out += "SKU " + sku.str() + "\n";
        std::snprintf(line, sizeof line, "%-8s %5s %12s %12s %12s %6s\n", "month", "m+", "forecast", "lower", "upper",
                      "days");
        out += line;
        double total = 0.0, lo = 0.0, hi = 0.0;
        for (const auto& m : months) {
            std::snprintf(line, sizeof line, "%04d-%02u  %5d %12.1f %12.1f %12.1f %6d%s\n", m.year, m.month,
                          m.month_diff, m.sales, m.lower, m.upper, m.days_covered,
                          m.month_diff > 0 && m.days_covered < 28 ? " partial" : "");
            out += line;
            total += m.sales;
            lo += m.lower;
            hi += m.upper;
        }
        std::snprintf(line, sizeof line, "%-8s %5s %12.1f %12.1f %12.1f\n\n", "total", "", total, lo, hi);
        out += line;
    }
    return out;
}

}  // namespace demandcast
