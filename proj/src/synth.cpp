#include "demandcast/synth.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include <json.hpp>

#include "demandcast/features.hpp"
#include "demandcast/text.hpp"

namespace demandcast::synth {

namespace {

using Eigen::Index;
using Eigen::VectorXd;
using nlohmann::json;

double seasonal_value(const std::vector<double>& coeffs, double period, double day) {
    if (coeffs.empty()) return 0.0;
    const int order = static_cast<int>(coeffs.size() / 2);
    return fourier_basis(day, period, order).dot(Eigen::Map<const VectorXd>(coeffs.data(), 2 * order));
}

std::string join(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + text::format_double(v[i]);
    return out;
}

}  // namespace

void SynthSpec::validate() const {
    if (span_days < 120) throw ValidationError("synth span_days must be >= 120");
    if (!(noise_sigma >= 0.0)) throw ValidationError("synth noise_sigma must be >= 0");
    if (weekly.size() % 2 || yearly.size() % 2)
        throw ValidationError("seasonal coefficient vectors hold [sin, cos] pairs");
    for (const auto& w : waves)
        if (!(w.center_day > 0.0 && w.width > 0.0)) throw ValidationError("wave center and width must be positive");
}

std::vector<CovidDaily> epidemic_curve(const SynthSpec& spec, int days) {
    const DateStamp end = spec.start + (days - 1);
    const DateStamp last = spec.covid_days > 0 ? std::min(end, spec.covid_start + (spec.covid_days - 1)) : end;
    std::vector<CovidDaily> out;
    for (DateStamp d = spec.covid_start; d <= last; d = d + 1) {
        const double x = static_cast<double>(d - spec.covid_start) + 1.0;
        double cases = 0.0, deaths = 0.0;
        for (const auto& w : spec.waves) {
            const double z = std::log(x / w.center_day) / w.width;
            const double bump = std::exp(-0.5 * z * z);
            cases += w.cases_amplitude * bump;
            deaths += w.deaths_amplitude * bump;
        }
        out.push_back({d, std::round(cases), std::round(deaths)});
    }
    return out;
}

Components components(const SynthSpec& spec, int days, const std::vector<CovidDaily>& covid) {
    const SkuSeries axis(SkuId(spec.sku), spec.start, std::vector<double>(static_cast<std::size_t>(days), 0.0));
    const auto cf = covid_features(merge_covid(axis, covid));

    Components c;
    c.trend.resize(days);
    c.seasonal.resize(days);
    c.holidays = VectorXd::Zero(days);
    c.regressors = spec.covid_beta_cases * cf.cases_7day_avg + spec.covid_beta_deaths * cf.deaths_7day_avg;
    for (Index i = 0; i < days; ++i) {
        const double t = static_cast<double>(i);
        double g = spec.trend_k * t + spec.trend_m;
        for (const auto& cp : spec.changepoints)
            if (t >= cp.day) g += cp.delta * (t - cp.day);
        c.trend[i] = g;
        const auto serial = static_cast<double>(axis.date(static_cast<std::size_t>(i)).serial());
        c.seasonal[i] = seasonal_value(spec.weekly, 7.0, serial) + seasonal_value(spec.yearly, 365.25, serial);
    }
    for (const auto& h : spec.holidays) {
        const auto first = std::max<std::int64_t>(h.spec.first_day() - spec.start, 0);
        const auto last = std::min<std::int64_t>(h.spec.last_day() - spec.start, days - 1);
        for (auto t = first; t <= last; ++t) c.holidays[static_cast<Index>(t)] += h.effect;
    }
    if (spec.mode == SeasonalityMode::additive)
        c.noiseless = c.trend + c.seasonal + c.holidays + c.regressors;
    else
        c.noiseless = c.trend.cwiseProduct((1.0 + c.seasonal.array()).matrix()) + c.holidays + c.regressors;
    c.noise = VectorXd::Zero(days);
    return c;
}

SynthOutput generate(const SynthSpec& spec) {
    spec.validate();
    const int days = spec.span_days;
    auto covid = epidemic_curve(spec, days);
    Components comp = components(spec, days, covid);

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> noise(0.0, spec.noise_sigma > 0 ? spec.noise_sigma : 1.0);
    std::vector<double> values(static_cast<std::size_t>(days));
    int floored = 0;
    for (Index i = 0; i < days; ++i) {
        comp.noise[i] = spec.noise_sigma > 0 ? noise(rng) : 0.0;
        const double y = comp.noiseless[i] + comp.noise[i];
        if (y < 0.0) ++floored;
        values[static_cast<std::size_t>(i)] = std::max(y, 0.0);
    }

    std::vector<HolidaySpec> holidays;
    for (const auto& h : spec.holidays) holidays.push_back(h.spec);

    SynthOutput out{SkuSeries(SkuId(spec.sku), spec.start, std::move(values)), std::move(covid), std::move(holidays),
                    std::move(comp), floored, {}, {}, {}, {}};
    out.sales_csv = write_sales(out.series);
    out.covid_csv = write_covid(out.covid);
    out.holidays_csv = write_holidays(out.holidays);

    std::ostringstream truth;
    truth << "sku=" << spec.sku << "\n"
          << "start=" << spec.start.iso() << "\n"
          << "span_days=" << spec.span_days << "\n"
          << "mode=" << to_string(spec.mode) << "\n"
          << "trend_k=" << text::format_double(spec.trend_k) << "\n"
          << "trend_m=" << text::format_double(spec.trend_m) << "\n";
    for (std::size_t j = 0; j < spec.changepoints.size(); ++j)
        truth << "changepoint_" << j << "=" << spec.changepoints[j].day << ","
              << text::format_double(spec.changepoints[j].delta) << "\n";
    truth << "weekly=" << join(spec.weekly) << "\n"
          << "yearly=" << join(spec.yearly) << "\n";
    for (const auto& h : spec.holidays)
        truth << "holiday_" << h.spec.name << "_" << h.spec.date.iso() << "=" << text::format_double(h.effect) << "\n";
    truth << "covid_beta_cases=" << text::format_double(spec.covid_beta_cases) << "\n"
          << "covid_beta_deaths=" << text::format_double(spec.covid_beta_deaths) << "\n"
          << "noise_sigma=" << text::format_double(spec.noise_sigma) << "\n"
          << "seed=" << spec.seed << "\n"
          << "floored_days=" << floored << "\n";
    out.truth = truth.str();
    return out;
}

SynthSpec parse_spec(std::string_view json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw FormatError(std::string("synth spec is not valid JSON: ") + e.what());
    }
    SynthSpec s;
    try {
        s.sku = j.value("sku", s.sku);
        if (j.contains("start")) s.start = DateStamp::parse(j["start"].get<std::string>());
        s.span_days = j.value("span_days", s.span_days);
        if (j.contains("trend")) {
            const auto& t = j["trend"];
            s.trend_k = t.value("k", 0.0);
            s.trend_m = t.value("m", 0.0);
            for (const auto& cp : t.value("changepoints", json::array()))
                s.changepoints.push_back({cp.at("day").get<int>(), cp.at("delta").get<double>()});
        }
        s.weekly = j.value("weekly", std::vector<double>{});
        s.yearly = j.value("yearly", std::vector<double>{});
        for (const auto& h : j.value("holidays", json::array())) {
            HolidayEffect e;
            e.spec.name = h.at("name").get<std::string>();
            e.spec.date = DateStamp::parse(h.at("date").get<std::string>());
            e.spec.lower_window = h.value("lower_window", 0);
            e.spec.upper_window = h.value("upper_window", 0);
            e.effect = h.at("effect").get<double>();
            if (e.spec.lower_window > 0 || e.spec.upper_window < 0)
                throw ValidationError("holiday window signs violated for '" + e.spec.name + "'");
            s.holidays.push_back(e);
        }
        s.covid_beta_cases = j.value("covid_beta_cases", 0.0);
        s.covid_beta_deaths = j.value("covid_beta_deaths", 0.0);
        if (j.contains("covid_start")) s.covid_start = DateStamp::parse(j["covid_start"].get<std::string>());
        s.covid_days = j.value("covid_days", 0);
        for (const auto& w : j.value("waves", json::array()))
            s.waves.push_back({w.at("center_day").get<double>(), w.at("width").get<double>(),
                               w.value("cases_amplitude", 0.0), w.value("deaths_amplitude", 0.0)});
        s.noise_sigma = j.value("noise_sigma", 0.0);
        s.mode = seasonality_mode_from_string(j.value("mode", std::string("additive")));
        s.seed = j.value("seed", std::uint64_t{0});
    } catch (const json::exception& e) {
        throw FormatError(std::string("synth spec: ") + e.what());
    }
    s.validate();
    return s;
}

std::string write_spec(const SynthSpec& s) {
    json j;
    j["sku"] = s.sku;
    j["start"] = s.start.iso();
    j["span_days"] = s.span_days;
    json cps = json::array();
    for (const auto& cp : s.changepoints) cps.push_back({{"day", cp.day}, {"delta", cp.delta}});
    j["trend"] = {{"k", s.trend_k}, {"m", s.trend_m}, {"changepoints", cps}};
    j["weekly"] = s.weekly;
    j["yearly"] = s.yearly;
    json hol = json::array();
    for (const auto& h : s.holidays)
        hol.push_back({{"name", h.spec.name},
                       {"date", h.spec.date.iso()},
                       {"lower_window", h.spec.lower_window},
                       {"upper_window", h.spec.upper_window},
                       {"effect", h.effect}});
    j["holidays"] = hol;
    j["covid_beta_cases"] = s.covid_beta_cases;
    j["covid_beta_deaths"] = s.covid_beta_deaths;
    j["covid_start"] = s.covid_start.iso();
    j["covid_days"] = s.covid_days;
    json waves = json::array();
    for (const auto& w : s.waves)
        waves.push_back({{"center_day", w.center_day},
                         {"width", w.width},
                         {"cases_amplitude", w.cases_amplitude},
                         {"deaths_amplitude", w.deaths_amplitude}});
    j["waves"] = waves;
    j["noise_sigma"] = s.noise_sigma;
    j["mode"] = std::string(to_string(s.mode));
    j["seed"] = s.seed;
    return j.dump(2) + "\n";
}

}  // namespace demandcast::synth
