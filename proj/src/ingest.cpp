#include "demandcast/ingest.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>

#include "demandcast/text.hpp"

namespace demandcast {

namespace {

template <std::size_t N>
struct Header {
    std::array<std::size_t, N> index{};
    std::size_t width = 0;
};

// Locates each required column by name in the first line.
template <std::size_t N>
Header<N> read_header(const std::vector<std::string_view>& lines, const std::array<const char*, N>& names,
                      Warnings* warnings) {
    std::string expected;
    for (const char* n : names) expected += (expected.empty() ? "" : ",") + std::string(n);
    if (lines.empty()) throw FormatError("missing header '" + expected + "'", 1);

    auto fields = text::split(lines.front());
    Header<N> h;
    h.width = fields.size();
    std::vector<bool> used(fields.size(), false);
    for (std::size_t k = 0; k < N; ++k) {
        auto it = std::find_if(fields.begin(), fields.end(),
                               [&](std::string_view f) { return text::trim(f) == names[k]; });
        if (it == fields.end()) throw FormatError("missing header '" + expected + "'", 1);
        h.index[k] = static_cast<std::size_t>(it - fields.begin());
        used[h.index[k]] = true;
    }
    if (warnings)
        for (std::size_t i = 0; i < fields.size(); ++i)
            if (!used[i]) warnings->push_back("ignoring extra column '" + std::string(text::trim(fields[i])) + "'");
    return h;
}

template <std::size_t N>
std::array<std::string_view, N> row_fields(std::string_view line, const Header<N>& h, std::size_t lineno) {
    auto fields = text::split(line);
    if (fields.size() != h.width)
        throw FormatError("expected " + std::to_string(h.width) + " fields, found " + std::to_string(fields.size()),
                          lineno);
    std::array<std::string_view, N> out;
    for (std::size_t k = 0; k < N; ++k) out[k] = text::trim(fields[h.index[k]]);
    return out;
}

DateStamp parse_date(std::string_view field, std::size_t lineno) {
    try {
        return DateStamp::parse(field);
    } catch (const FormatError& e) {
        throw FormatError(e.what(), lineno);
    }
}

}  // namespace

std::vector<Observation> parse_sales(std::string_view bytes, Warnings* warnings) {
    const auto lines = text::lines(bytes);
    const auto header = read_header<3>(lines, {"dt", "sku", "quantity"}, warnings);
    std::vector<Observation> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (text::trim(lines[i]).empty()) continue;
        const std::size_t lineno = i + 1;
        const auto f = row_fields(lines[i], header, lineno);
        Observation obs;
        obs.date = parse_date(f[0], lineno);
        try {
            obs.sku = SkuId(std::string(f[1]));
        } catch (const ValidationError& e) {
            throw ValidationError(e.what(), lineno);
        }
        obs.quantity = text::parse_double(f[2], lineno, "quantity");
        if (obs.quantity < 0.0) throw ValidationError("negative quantity " + std::string(f[2]), lineno);
        obs.line = lineno;
        out.push_back(std::move(obs));
    }
    return out;
}

std::vector<CovidDaily> parse_covid(std::string_view bytes, Warnings* warnings) {
    const auto lines = text::lines(bytes);
    const auto header = read_header<3>(lines, {"dt", "new_cases", "new_deaths"}, warnings);
    std::vector<std::pair<CovidDaily, std::size_t>> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (text::trim(lines[i]).empty()) continue;
        const std::size_t lineno = i + 1;
        const auto f = row_fields(lines[i], header, lineno);
        CovidDaily rec;
        rec.date = parse_date(f[0], lineno);
        rec.new_cases = text::parse_double(f[1], lineno, "new_cases");
        rec.new_deaths = text::parse_double(f[2], lineno, "new_deaths");
        if (rec.new_cases < 0.0 || rec.new_deaths < 0.0) throw ValidationError("negative COVID count", lineno);
        rows.emplace_back(rec, lineno);
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const auto& a, const auto& b) { return a.first.date < b.first.date; });
    std::vector<CovidDaily> out;
    out.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i > 0 && rows[i].first.date == rows[i - 1].first.date)
            throw ValidationError("duplicate COVID date " + rows[i].first.date.iso(), rows[i].second);
        out.push_back(rows[i].first);
    }
    return out;
}

std::vector<HolidaySpec> parse_holidays(std::string_view bytes, Warnings* warnings) {
    const auto lines = text::lines(bytes);
    const auto header = read_header<4>(lines, {"name", "date", "lower_window", "upper_window"}, warnings);
    std::vector<HolidaySpec> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (text::trim(lines[i]).empty()) continue;
        const std::size_t lineno = i + 1;
        const auto f = row_fields(lines[i], header, lineno);
        HolidaySpec h;
        h.name = std::string(f[0]);
        if (h.name.empty()) throw ValidationError("empty holiday name", lineno);
        h.date = parse_date(f[1], lineno);
        h.lower_window = static_cast<int>(text::parse_int(f[2], lineno, "lower_window"));
        h.upper_window = static_cast<int>(text::parse_int(f[3], lineno, "upper_window"));
        if (h.lower_window > 0) throw ValidationError("lower_window must be <= 0", lineno);
        if (h.upper_window < 0) throw ValidationError("upper_window must be >= 0", lineno);
        out.push_back(std::move(h));
    }
    return out;
}

std::string write_sales(const std::vector<Observation>& rows) {
    std::string out = "dt,sku,quantity\n";
    for (const auto& r : rows) out += r.date.iso() + "," + r.sku.str() + "," + text::format_double(r.quantity) + "\n";
    return out;
}

std::string write_sales(const SkuSeries& series) {
    std::string out = "dt,sku,quantity\n";
    for (std::size_t i = 0; i < series.size(); ++i)
        out += series.date(i).iso() + "," + series.sku().str() + "," + text::format_double(series.values()[i]) + "\n";
    return out;
}

std::string write_covid(const std::vector<CovidDaily>& rows) {
    std::string out = "dt,new_cases,new_deaths\n";
    for (const auto& r : rows)
        out += r.date.iso() + "," + text::format_double(r.new_cases) + "," + text::format_double(r.new_deaths) + "\n";
    return out;
}

std::string write_holidays(const std::vector<HolidaySpec>& rows) {
    std::string out = "name,date,lower_window,upper_window\n";
    for (const auto& h : rows)
        out += h.name + "," + h.date.iso() + "," + std::to_string(h.lower_window) + "," +
               std::to_string(h.upper_window) + "\n";
    return out;
}

CovidAligned merge_covid(const SkuSeries& series, const std::vector<CovidDaily>& covid) {
    CovidAligned out;
    out.cases.assign(series.size(), 0.0);
    out.deaths.assign(series.size(), 0.0);
    for (const auto& rec : covid) {
        const auto offset = rec.date - series.start();
        if (offset < 0 || offset >= static_cast<std::int64_t>(series.size())) continue;
        out.cases[static_cast<std::size_t>(offset)] = rec.new_cases;
        out.deaths[static_cast<std::size_t>(offset)] = rec.new_deaths;
    }
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace demandcast
