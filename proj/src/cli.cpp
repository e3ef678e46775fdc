#include "demandcast/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "demandcast/aggregate.hpp"
#include "demandcast/ingest.hpp"
#include "demandcast/metrics.hpp"
#include "demandcast/model_io.hpp"
#include "demandcast/synth.hpp"
#include "demandcast/text.hpp"

namespace demandcast::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kDailyHeader = "ds,sku,yhat,yhat_lower,yhat_upper,trend,weekly,yearly,holidays,regressors";

std::string num(double v) { return text::format_double(v); }

template <typename Fn>
auto with_path(const std::string& path, Fn&& fn) {
    try {
        return fn(read_file(path));
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    } catch (const CheckpointError&) {
        throw;
    } catch (const ConfigError&) {
        throw;
    }
}

void ensure_parent(const fs::path& p) {
    std::error_code ec;
    if (p.has_parent_path()) fs::create_directories(p.parent_path(), ec);
}

void write_text(const std::string& path, const std::string& content) {
    const fs::path p(path);
    ensure_parent(p);
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << content;
    if (!out) throw ConfigError("failed writing '" + path + "'");
}

std::string under(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

void print_warnings(std::ostream& err, const std::string& path, const Warnings& w) {
    for (const auto& m : w) err << "warning: " << path << ": " << m << "\n";
}

MonthDay parse_month_day(const std::string& s) {
    const auto parts = text::split(s, '-');
    if (parts.size() != 2) throw ConfigError("expected MM-DD, got '" + s + "'");
    try {
        const MonthDay md{static_cast<unsigned>(text::parse_int(parts[0], 0, "month")),
                          static_cast<unsigned>(text::parse_int(parts[1], 0, "day"))};
        (void)DateStamp(2000, md.month, md.day);
        return md;
    } catch (const ValidationError&) {
        throw ConfigError("invalid month-day '" + s + "'");
    }
}

Hyperparameters params_from_json(const json& j) {
    Hyperparameters hp;
    for (const auto& [key, value] : j.items()) {
        if (key == "changepoint_prior_scale") hp.changepoint_prior_scale = value.get<double>();
        else if (key == "seasonality_prior_scale") hp.seasonality_prior_scale = value.get<double>();
        else if (key == "holidays_prior_scale") hp.holidays_prior_scale = value.get<double>();
        else if (key == "seasonality_mode") hp.seasonality_mode = seasonality_mode_from_string(value.get<std::string>());
        else if (key == "changepoint_range") hp.changepoint_range = value.get<double>();
        else if (key == "n_changepoints") hp.n_changepoints = value.get<int>();
        else if (key == "sku" || key == "cv_mape" || key == "trial") continue;
        else throw ConfigError("unknown hyperparameter '" + key + "'");
    }
    hp.validate();
    return hp;
}

json params_to_json(const Hyperparameters& hp) {
    json j = json::object();
    j["changepoint_prior_scale"] = hp.changepoint_prior_scale;
    j["seasonality_prior_scale"] = hp.seasonality_prior_scale;
    j["holidays_prior_scale"] = hp.holidays_prior_scale;
    j["seasonality_mode"] = std::string(to_string(hp.seasonality_mode));
    j["changepoint_range"] = hp.changepoint_range;
    j["n_changepoints"] = hp.n_changepoints;
    return j;
}

template <typename T>
Range<T> range_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2) throw ConfigError("search ranges are [lo, hi] pairs");
    return {j[0].get<T>(), j[1].get<T>()};
}

// Data loading -----------------------------------------------------------------

struct Data {
    SkuSeries series;
    std::vector<CovidDaily> covid;
    std::vector<HolidaySpec> holidays;
};

std::string require_path(const std::string& path, const char* what) {
    if (path.empty()) throw ConfigError(std::string("no ") + what + " file given (flag or config)");
    return path;
}

SkuSeries load_series(const std::string& path, const std::string& sku, std::ostream& err) {
    Warnings w;
    const auto rows = with_path(path, [&](const std::string& b) { return parse_sales(b, &w); });
    print_warnings(err, path, w);
    auto all = align_series(rows);
    const auto it = all.find(SkuId(sku));
    if (it == all.end()) throw ValidationError(path + ": no rows for SKU '" + sku + "'");
    return it->second;
}

std::vector<CovidDaily> load_covid(const std::string& path, std::ostream& err) {
    if (path.empty()) return {};
    Warnings w;
    auto rows = with_path(path, [&](const std::string& b) { return parse_covid(b, &w); });
    print_warnings(err, path, w);
    return rows;
}

std::vector<HolidaySpec> load_holidays(const std::string& path, std::ostream& err) {
    if (path.empty()) return {};
    Warnings w;
    auto rows = with_path(path, [&](const std::string& b) { return parse_holidays(b, &w); });
    print_warnings(err, path, w);
    return rows;
}

Data load_data(const RunConfig& cfg, const std::string& sku, std::ostream& err) {
    return {load_series(require_path(cfg.sales, "sales"), sku, err), load_covid(cfg.covid, err),
            load_holidays(cfg.holidays, err)};
}

std::vector<CovidDaily> covid_through(const std::vector<CovidDaily>& covid, DateStamp cutoff) {
    std::vector<CovidDaily> out;
    for (const auto& c : covid)
        if (c.date <= cutoff) out.push_back(c);
    return out;
}

DateStamp parse_date_flag(const std::string& s, const char* flag) {
    try {
        return DateStamp::parse(s);
    } catch (const FormatError&) {
        throw ValidationError(std::string(flag) + ": invalid date '" + s + "'");
    }
}

// Daily forecast file ------------------------------------------------------------

struct DailyRow {
    DateStamp ds;
    SkuId sku;
    double yhat;
};

std::vector<DailyRow> parse_daily(std::string_view bytes) {
    const auto lines = text::lines(bytes);
    if (lines.empty()) throw FormatError("missing header", 1);
    const auto header = text::split(lines.front());
    auto index_of = [&](std::string_view name) {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (text::trim(header[i]) == name) return i;
        throw FormatError("header lacks column '" + std::string(name) + "'", 1);
    };
    const auto ids = index_of("ds"), isku = index_of("sku"), iy = index_of("yhat");
    std::vector<DailyRow> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (text::trim(lines[i]).empty()) continue;
        const auto f = text::split(lines[i]);
        if (f.size() != header.size()) throw FormatError("wrong field count", i + 1);
        DateStamp d;
        try {
            d = DateStamp::parse(text::trim(f[ids]));
        } catch (const FormatError& e) {
            throw FormatError(e.what(), i + 1);
        }
        const double y = text::parse_double(f[iy], i + 1, "yhat");
        try {
            rows.push_back({d, SkuId(std::string(text::trim(f[isku]))), y});
        } catch (const ValidationError& e) {
            throw ValidationError(e.what(), i + 1);
        }
    }
    return rows;
}

// Metrics report (read back for `report`) -----------------------------------------

std::vector<EvalReport> parse_metrics_report(std::string_view bytes) {
    const auto lines = text::lines(bytes);
    if (lines.empty() || text::trim(lines.front()) != "sku,horizon_months,mape,rmse,mae,directional_accuracy,n_points,mape_excluded")
        throw FormatError("missing metrics header", 1);
    auto real = [](std::string_view f, std::size_t ln, std::string_view what) {
        if (f == "nan") return std::numeric_limits<double>::quiet_NaN();
        return text::parse_double(f, ln, what);
    };
    std::vector<EvalReport> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (text::trim(lines[i]).empty()) continue;
        const auto f = text::split(lines[i]);
        if (f.size() != 8) throw FormatError("wrong field count", i + 1);
        EvalReport r{SkuId(std::string(f[0])),
                     static_cast<int>(text::parse_int(f[1], i + 1, "horizon_months")),
                     real(f[2], i + 1, "mape"),
                     real(f[3], i + 1, "rmse"),
                     real(f[4], i + 1, "mae"),
                     real(f[5], i + 1, "directional_accuracy"),
                     static_cast<std::size_t>(text::parse_int(f[6], i + 1, "n_points")),
                     static_cast<std::size_t>(text::parse_int(f[7], i + 1, "mape_excluded"))};
        out.push_back(r);
    }
    return out;
}

std::vector<Trial> parse_trial_log(std::string_view bytes) {
    const auto lines = text::lines(bytes);
    if (lines.empty()) throw FormatError("missing trial log header", 1);
    std::vector<Trial> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (text::trim(lines[i]).empty()) continue;
        const auto f = text::split(lines[i]);
        if (f.size() != 8) throw FormatError("wrong field count", i + 1);
        Trial t;
        t.index = static_cast<int>(text::parse_int(f[0], i + 1, "trial"));
        t.mape = f[7] == "inf" ? std::numeric_limits<double>::infinity() : text::parse_double(f[7], i + 1, "mape");
        out.push_back(t);
    }
    if (out.empty()) throw FormatError("trial log has no trials", 1);
    return out;
}

std::string percent(double v) {
    if (!std::isfinite(v)) return "n/a";
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << 100.0 * v;
    return s.str();
}

std::string fixed(double v, int digits) {
    if (!std::isfinite(v)) return "n/a";
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
}

// Commands ------------------------------------------------------------------------

struct Common {
    std::string config;
    std::optional<std::string> sales, covid, holidays, out_dir;
};

RunConfig resolve(const Common& c) {
    RunConfig cfg = c.config.empty() ? RunConfig{} : load_config(c.config);
    if (c.sales) cfg.sales = *c.sales;
    if (c.covid) cfg.covid = *c.covid;
    if (c.holidays) cfg.holidays = *c.holidays;
    if (c.out_dir) cfg.output_dir = *c.out_dir;
    return cfg;
}

int cmd_validate(const Common& c, std::ostream& out, std::ostream& err) {
    const RunConfig cfg = resolve(c);
    if (cfg.sales.empty() && cfg.covid.empty() && cfg.holidays.empty())
        throw ConfigError("validate needs at least one of --sales, --covid, --holidays");
    int failures = 0;
    auto check = [&](const std::string& path, const char* kind, auto&& body) {
        if (path.empty()) return;
        try {
            Warnings w;
            const std::string summary = body(read_file(path), w);
            print_warnings(err, path, w);
            out << "ok " << kind << " " << path << ": " << summary << "\n";
        } catch (const ValidationError& e) {
            ++failures;
            err << "error: " << path << ": " << e.what() << "\n";
        } catch (const ConfigError& e) {
            ++failures;
            err << "error: " << e.what() << "\n";
        }
    };
    check(cfg.sales, "sales", [](const std::string& b, Warnings& w) {
        const auto rows = parse_sales(b, &w);
        const auto all = align_series(rows);
        std::string s = std::to_string(rows.size()) + " rows, " + std::to_string(all.size()) + " SKUs";
        for (const auto& [id, series] : all)
            s += "; " + id.str() + " " + series.start().iso() + ".." + series.end().iso() + " (" +
                 std::to_string(series.size()) + " days)";
        return s;
    });
    check(cfg.covid, "covid", [](const std::string& b, Warnings& w) {
        const auto rows = parse_covid(b, &w);
        std::string s = std::to_string(rows.size()) + " days";
        if (!rows.empty()) s += ", " + rows.front().date.iso() + ".." + rows.back().date.iso();
        return s;
    });
    check(cfg.holidays, "holidays", [](const std::string& b, Warnings& w) {
        return std::to_string(parse_holidays(b, &w).size()) + " holiday rows";
    });
    return failures ? kInputError : kSuccess;
}

struct TuneFlags {
    std::string sku;
    std::optional<int> budget, threads;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> checkpoint, params_out, trials_out;
};

int cmd_tune(const Common& c, const TuneFlags& f, std::ostream& out, std::ostream& err) {
    RunConfig cfg = resolve(c);
    if (f.budget) cfg.budget = *f.budget;
    if (f.threads) cfg.threads = *f.threads;
    if (f.seed) cfg.seed = *f.seed;
    if (f.checkpoint) cfg.checkpoint = *f.checkpoint;
    const Data data = load_data(cfg, f.sku, err);

    CvGeometry geo = CvGeometry::defaults_for(static_cast<std::int64_t>(data.series.size()));
    if (cfg.cv_initial_train_days) geo.initial_train_days = *cfg.cv_initial_train_days;
    geo.period_days = cfg.cv_period_days;
    geo.horizon_days = cfg.cv_horizon_days;
    const auto splits = make_cv_splits(data.series.start(), static_cast<std::int64_t>(data.series.size()), geo);
    cfg.search_space.validate();

    SearchOptions so;
    so.budget = cfg.budget;
    so.seed = cfg.seed;
    so.checkpoint_path = cfg.checkpoint;
    if (!cfg.checkpoint.empty()) ensure_parent(cfg.checkpoint);
    so.threads = cfg.threads;
    const auto result = search(data.series, data.covid, data.holidays, cfg.search_space, splits,
                               CvOptions{cfg.model, cfg.windows, cfg.monthly_buckets}, so);

    const std::string params_path = f.params_out.value_or(under(cfg.output_dir, f.sku + ".params.json"));
    const std::string trials_path = f.trials_out.value_or(under(cfg.output_dir, f.sku + ".trials.csv"));
    write_text(params_path, write_params(result.best.hp, f.sku, result.best.mape, result.best.index));
    write_text(trials_path, write_trial_log(result.trials));

    const double base = result.trials.front().mape;
    out << "sku " << f.sku << ": " << result.trials.size() << " trials over " << splits.size() << " CV splits\n";
    out << "default MAPE " << percent(base) << "%, best MAPE " << percent(result.best.mape) << "% (trial "
        << result.best.index << ", " << to_string(result.best.hp.seasonality_mode) << ")\n";
    if (std::isfinite(base) && base > 0) out << "improvement " << percent(1.0 - result.best.mape / base) << "%\n";
    out << "wrote " << params_path << "\nwrote " << trials_path << "\n";
    return kSuccess;
}

struct FitFlags {
    std::string sku;
    std::optional<std::string> params, preset, cutoff, model_out;
};

Hyperparameters choose_params(const RunConfig& cfg, const std::string& sku, const std::optional<std::string>& params,
                              const std::optional<std::string>& preset) {
    if (params && preset) throw ConfigError("--params and --preset are mutually exclusive");
    if (params)
        return with_path(*params, [](const std::string& b) {
            try {
                return parse_params(b);
            } catch (const ConfigError& e) {
                throw ValidationError(e.what());
            }
        });
    const std::string name = preset.value_or(sku);
    if (auto it = cfg.presets.find(name); it != cfg.presets.end()) return it->second;
    if (auto it = builtin_presets().find(name); it != builtin_presets().end()) return it->second;
    if (preset) throw ConfigError("unknown preset '" + *preset + "'");
    return default_hyperparameters();
}

int cmd_fit(const Common& c, const FitFlags& f, std::ostream& out, std::ostream& err) {
    const RunConfig cfg = resolve(c);
    const Hyperparameters hp = choose_params(cfg, f.sku, f.params, f.preset);
    Data data = load_data(cfg, f.sku, err);
    DateStamp cutoff = data.series.end();
    if (f.cutoff) {
        cutoff = parse_date_flag(*f.cutoff, "--cutoff");
        if (cutoff < data.series.start() || cutoff > data.series.end())
            throw ValidationError("--cutoff " + cutoff.iso() + " lies outside the sales history " +
                                  data.series.start().iso() + ".." + data.series.end().iso());
    }
    const SkuSeries train = data.series.truncated(cutoff);
    const auto covid = covid_through(data.covid, cutoff);
    const DesignMatrix design = assemble_design(train, merge_covid(train, covid), cfg.windows);
    const FittedModel model = fit(design, hp, data.holidays, cfg.model);

    const std::string path = f.model_out.value_or(under(cfg.output_dir, f.sku + ".model"));
    write_text(path, write_model({SkuId(f.sku), model, cfg.windows}));
    out << "fitted " << f.sku << " on " << model.train_start.iso() << ".." << model.train_end.iso() << " ("
        << design.rows() << " rows, " << to_string(model.mode) << ", " << model.iterations << " iterations)\n";
    out << "objective " << num(model.objective) << ", residual sigma " << num(model.residual_sigma * model.y_scale)
        << "\nwrote " << path << "\n";
    return kSuccess;
}

struct ForecastFlags {
    std::optional<std::string> sku, model, cutoff, scenario, daily_out, monthly_out;
    std::optional<int> horizon, samples;
    std::optional<double> level;
    std::optional<std::uint64_t> seed;
    bool clamp_negative = false;
};

int cmd_forecast(const Common& c, const ForecastFlags& f, std::ostream& out, std::ostream& err) {
    RunConfig cfg = resolve(c);
    if (f.horizon) cfg.horizon = *f.horizon;
    if (f.samples) cfg.samples = *f.samples;
    if (f.level) cfg.level = *f.level;
    if (f.seed) cfg.seed = *f.seed;
    if (f.scenario) cfg.scenario = *f.scenario;
    if (f.clamp_negative) cfg.clamp_negative = true;
    if (cfg.horizon < 1) throw ConfigError("--horizon must be >= 1");
    if (!(cfg.level > 0.0 && cfg.level < 1.0)) throw ConfigError("--level must lie in (0, 1)");
    if (cfg.samples < 100) throw ConfigError("--samples must be >= 100");
    if (!f.model) throw ConfigError("forecast needs --model");

    const ModelFile mf = with_path(*f.model, [](const std::string& b) { return read_model(b); });
    const std::string sku = mf.sku.str();
    if (f.sku && *f.sku != sku)
        throw ValidationError("--sku " + *f.sku + " does not match the model's SKU '" + sku + "'");

    Data data = load_data(cfg, sku, err);
    const DateStamp cutoff = f.cutoff ? parse_date_flag(*f.cutoff, "--cutoff") : mf.model.train_end;
    if (cutoff < mf.model.train_end)
        throw ValidationError("--cutoff " + cutoff.iso() + " precedes the model's training end " +
                              mf.model.train_end.iso());
    if (cutoff > data.series.end())
        throw ValidationError("sales history ends " + data.series.end().iso() + ", before --cutoff " + cutoff.iso());

    const SkuSeries history = data.series.truncated(cutoff);
    const DesignMatrix design =
        assemble_design(history, merge_covid(history, covid_through(data.covid, cutoff)), mf.windows);
    std::optional<CovidScenario> scenario;
    if (!cfg.scenario.empty()) {
        Warnings w;
        scenario = with_path(cfg.scenario, [&](const std::string& b) { return parse_covid_scenario(b, &w); });
        print_warnings(err, cfg.scenario, w);
    }
    const DesignMatrix future = project_future(design, cfg.horizon, mf.windows, scenario ? &*scenario : nullptr);
    const Prediction p = predict(mf.model, future);
    const Interval iv = sample_intervals(mf.model, future, cfg.samples, cfg.level, cfg.seed);

    // Seasonal columns are absolute contributions in both modes, so yhat is their sum.
    const Eigen::Index n = p.size();
    Eigen::VectorXd weekly = Eigen::VectorXd::Zero(n), yearly = Eigen::VectorXd::Zero(n);
    std::vector<std::pair<std::string, Eigen::VectorXd>> extra;
    for (const auto& [name, values] : p.seasonal_components) {
        const Eigen::VectorXd abs =
            p.mode == SeasonalityMode::multiplicative ? Eigen::VectorXd(p.trend.cwiseProduct(values)) : values;
        if (name == "weekly") weekly += abs;
        else if (name == "yearly") yearly += abs;
        else extra.emplace_back(name, abs);
    }
    std::ostringstream daily;
    daily << kDailyHeader;
    for (const auto& [name, v] : extra) daily << "," << name;
    daily << "\n";
    for (Eigen::Index i = 0; i < n; ++i) {
        daily << future.date(i).iso() << "," << sku << "," << num(p.yhat[i]) << "," << num(iv.lower[i]) << ","
              << num(iv.upper[i]) << "," << num(p.trend[i]) << "," << num(weekly[i]) << "," << num(yearly[i]) << ","
              << num(p.holidays[i]) << "," << num(p.regressors[i]);
        for (const auto& [name, v] : extra) daily << "," << num(v[i]);
        daily << "\n";
    }

    Eigen::VectorXd yhat = p.yhat, lower = iv.lower, upper = iv.upper;
    if (cfg.clamp_negative) {
        yhat = yhat.cwiseMax(0.0);
        lower = lower.cwiseMax(0.0);
        upper = upper.cwiseMax(0.0);
    }
    const auto monthly = monthly_totals(future.start, yhat, lower, upper, mf.sku, cutoff);

    const std::string daily_path = f.daily_out.value_or(under(cfg.output_dir, sku + ".forecast.csv"));
    const std::string monthly_path = f.monthly_out.value_or(under(cfg.output_dir, sku + ".monthly.csv"));
    write_text(daily_path, daily.str());
    write_text(monthly_path, write_monthly(monthly));
    out << "forecast " << sku << " " << future.start.iso() << ".." << future.last_date().iso() << " ("
        << cfg.horizon << " days, " << percent(cfg.level) << "% interval)\n";
    out << "wrote " << daily_path << "\nwrote " << monthly_path << "\n";
    return kSuccess;
}

struct EvaluateFlags {
    std::optional<std::string> forecast, actuals, report_out;
    std::vector<int> horizons{1, 2, 3};
};

int cmd_evaluate(const Common& c, const EvaluateFlags& f, std::ostream& out, std::ostream& err) {
    const RunConfig cfg = resolve(c);
    if (!f.forecast || !f.actuals) throw ConfigError("evaluate needs --forecast and --actuals");
    for (int h : f.horizons)
        if (h < 1) throw ConfigError("--horizons must be positive month counts");

    const auto daily = with_path(*f.forecast, [](const std::string& b) { return parse_daily(b); });
    Warnings w;
    const auto actual_rows = with_path(*f.actuals, [&](const std::string& b) { return parse_sales(b, &w); });
    print_warnings(err, *f.actuals, w);
    const auto actuals = align_series(actual_rows);

    std::map<SkuId, std::vector<DailyRow>> by_sku;
    for (const auto& r : daily) by_sku[r.sku].push_back(r);
    if (by_sku.empty()) throw ValidationError(*f.forecast + ": no forecast rows");

    std::vector<EvalReport> reports;
    for (auto& [sku, rows] : by_sku) {
        std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.ds < b.ds; });
        for (std::size_t i = 1; i < rows.size(); ++i)
            if (rows[i].ds - rows[i - 1].ds != 1)
                throw ValidationError(*f.forecast + ": forecast dates for '" + sku.str() + "' are not contiguous");
        const auto it = actuals.find(sku);
        if (it == actuals.end()) throw ValidationError(*f.actuals + ": no actuals for SKU '" + sku.str() + "'");
        const SkuSeries& act = it->second;

        const DateStamp cutoff = rows.front().ds - 1;
        const DateStamp first = std::max(rows.front().ds, act.start());
        const DateStamp last = std::min(rows.back().ds, act.end());
        if (last < first) throw ValidationError("actuals for '" + sku.str() + "' do not overlap the forecast");
        const auto len = static_cast<Eigen::Index>(last - first + 1);
        Eigen::VectorXd a(len), p(len);
        for (Eigen::Index i = 0; i < len; ++i) {
            a[i] = act.values()[static_cast<std::size_t>((first + i) - act.start())];
            p[i] = rows[static_cast<std::size_t>((first + i) - rows.front().ds)].yhat;
        }
        const auto am = monthly_totals(first, a, sku, cutoff);
        const auto pm = monthly_totals(first, p, sku, cutoff);

        // Directional accuracy runs on daily rates, anchored at the last observed month.
        std::optional<double> anchor;
        if (act.start() <= cutoff && cutoff <= act.end()) {
            const DateStamp from = std::max(act.start(), cutoff - 29);
            double s = 0.0;
            for (DateStamp d = from; d <= cutoff; d = d + 1) s += act.values()[static_cast<std::size_t>(d - act.start())];
            anchor = s / static_cast<double>(cutoff - from + 1);
        }

        for (int h : f.horizons) {
            std::vector<double> as, ps, ar, pr;
            if (anchor) {
                ar.push_back(*anchor);
                pr.push_back(*anchor);
            }
            for (std::size_t i = 0; i < am.size(); ++i) {
                if (am[i].month_diff < 1 || am[i].month_diff > h) continue;
                as.push_back(am[i].sales);
                ps.push_back(pm[i].sales);
                ar.push_back(am[i].sales / am[i].days_covered);
                pr.push_back(pm[i].sales / pm[i].days_covered);
            }
            if (as.empty()) {
                err << "warning: " << sku.str() << ": no forecast months for horizon " << h << "\n";
                continue;
            }
            const auto map = [](const std::vector<double>& v) {
                return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
            };
            const auto m = point_metrics(map(as), map(ps));
            const double da =
                ar.size() >= 2 ? directional_accuracy(map(ar), map(pr)) : std::numeric_limits<double>::quiet_NaN();
            reports.push_back({sku, h, m.mape, m.rmse, m.mae, da, as.size(), m.mape_excluded});
        }
    }

    const std::string path = f.report_out.value_or(under(cfg.output_dir, "metrics.csv"));
    write_text(path, write_metrics_report(reports));
    out << std::left << std::setw(12) << "SKU" << std::setw(9) << "Horizon" << std::setw(10) << "MAPE (%)"
        << std::setw(12) << "RMSE" << std::setw(12) << "MAE" << "Directional\n";
    for (const auto& r : reports)
        out << std::setw(12) << r.sku.str() << std::setw(9) << (std::to_string(r.horizon_months) + "m") << std::setw(10)
            << percent(r.mape) << std::setw(12) << fixed(r.rmse, 2) << std::setw(12) << fixed(r.mae, 2)
            << percent(r.directional_accuracy) << "\n";
    out << "wrote " << path << "\n";
    return kSuccess;
}

int cmd_synth(const std::string& spec_path, const std::string& out_dir, std::ostream& out) {
    const synth::SynthSpec spec = with_path(spec_path, [](const std::string& b) { return synth::parse_spec(b); });
    const auto result = synth::generate(spec);
    write_text(under(out_dir, "sales.csv"), result.sales_csv);
    write_text(under(out_dir, "covid.csv"), result.covid_csv);
    write_text(under(out_dir, "holidays.csv"), result.holidays_csv);
    write_text(under(out_dir, "truth.txt"), result.truth);

    std::ostringstream comp;
    comp << "ds,trend,seasonal,holidays,regressors,noiseless,noise,y\n";
    const auto& k = result.components;
    for (std::size_t i = 0; i < result.series.size(); ++i) {
        const auto e = static_cast<Eigen::Index>(i);
        comp << result.series.date(i).iso() << "," << num(k.trend[e]) << "," << num(k.seasonal[e]) << ","
             << num(k.holidays[e]) << "," << num(k.regressors[e]) << "," << num(k.noiseless[e]) << ","
             << num(k.noise[e]) << "," << num(result.series.values()[i]) << "\n";
    }
    write_text(under(out_dir, "components.csv"), comp.str());
    out << "synthesized " << spec.sku << ": " << result.series.size() << " days from " << result.series.start().iso()
        << ", " << result.floored << " days floored at zero\nwrote " << out_dir << "\n";
    return kSuccess;
}

struct ReportFlags {
    std::optional<std::string> monthly, metrics;
    std::vector<std::string> trials;
};

int cmd_report(const ReportFlags& f, std::ostream& out) {
    if (!f.monthly && !f.metrics && f.trials.empty())
        throw ConfigError("report needs --monthly, --metrics or --trials");
    bool first = true;
    auto section = [&](const char* title) {
        if (!first) out << "\n";
        first = false;
        out << title << "\n";
    };
    if (!f.trials.empty()) {
        section("Tuned vs default (CV MAPE)");
        out << std::left << std::setw(14) << "SKU" << std::setw(14) << "Default (%)" << std::setw(14) << "Tuned (%)"
            << "Improvement (%)\n";
        for (const auto& spec : f.trials) {
            const auto eq = spec.find('=');
            if (eq == std::string::npos || eq == 0) throw ConfigError("--trials expects SKU=PATH, got '" + spec + "'");
            const std::string path = spec.substr(eq + 1);
            const auto trials = with_path(path, [](const std::string& b) { return parse_trial_log(b); });
            const double base = trials.front().mape;
            double best = base;
            for (const auto& t : trials) best = std::min(best, t.mape);
            out << std::setw(14) << spec.substr(0, eq) << std::setw(14) << percent(base) << std::setw(14) << percent(best)
                << (base > 0 && std::isfinite(base) ? percent(1.0 - best / base) : std::string("n/a")) << "\n";
        }
    }
    if (f.metrics) {
        section("Forecast accuracy by horizon");
        const auto rows = with_path(*f.metrics, [](const std::string& b) { return parse_metrics_report(b); });
        out << std::left << std::setw(14) << "SKU" << std::setw(10) << "Horizon" << std::setw(11) << "MAPE (%)"
            << std::setw(12) << "RMSE" << "Directional Accuracy (%)\n";
        for (const auto& r : rows)
            out << std::setw(14) << r.sku.str() << std::setw(10) << (std::to_string(r.horizon_months) + "-month")
                << std::setw(11) << percent(r.mape) << std::setw(12) << fixed(r.rmse, 2)
                << percent(r.directional_accuracy) << "\n";
    }
    if (f.monthly) {
        section("Monthly production plan");
        const auto rows = with_path(*f.monthly, [](const std::string& b) { return parse_monthly(b); });
        out << planning_table(rows);
    }
    return kSuccess;
}

}  // namespace

const std::map<std::string, Hyperparameters>& builtin_presets() {
    static const std::map<std::string, Hyperparameters> presets = {
        {"10-inch", {0.2, 50.0, 25.0, SeasonalityMode::multiplicative, 0.97, 55}},
        {"12-inch", {0.12, 40.0, 25.0, SeasonalityMode::multiplicative, 0.92, 48}},
        {"12-inch-low-cps", {0.01, 40.0, 25.0, SeasonalityMode::multiplicative, 0.92, 48}},
    };
    return presets;
}

RunConfig parse_config(std::string_view json_text, const std::string& base_dir) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");

    RunConfig cfg;
    auto path = [&](const json& v) {
        const fs::path p(v.get<std::string>());
        return p.is_absolute() ? p.string() : (fs::path(base_dir) / p).lexically_normal().string();
    };
    try {
        for (const auto& [key, v] : j.items()) {
            if (key == "sales") cfg.sales = path(v);
            else if (key == "covid") cfg.covid = path(v);
            else if (key == "holidays") cfg.holidays = path(v);
            else if (key == "scenario") cfg.scenario = path(v);
            else if (key == "checkpoint") cfg.checkpoint = path(v);
            else if (key == "output_dir") cfg.output_dir = path(v);
            else if (key == "horizon") cfg.horizon = v.get<int>();
            else if (key == "level") cfg.level = v.get<double>();
            else if (key == "seed") cfg.seed = v.get<std::uint64_t>();
            else if (key == "samples") cfg.samples = v.get<int>();
            else if (key == "threads") cfg.threads = v.get<int>();
            else if (key == "budget") cfg.budget = v.get<int>();
            else if (key == "clamp_negative") cfg.clamp_negative = v.get<bool>();
            else if (key == "regressor_prior_scale") cfg.model.regressor_prior_scale = v.get<double>();
            else if (key == "cv") {
                for (const auto& [ck, cv] : v.items()) {
                    if (ck == "initial_train_days") cfg.cv_initial_train_days = cv.get<int>();
                    else if (ck == "period_days") cfg.cv_period_days = cv.get<int>();
                    else if (ck == "horizon_days") cfg.cv_horizon_days = cv.get<int>();
                    else if (ck == "monthly_buckets") cfg.monthly_buckets = cv.get<int>();
                    else throw ConfigError("unknown cv key '" + ck + "'");
                }
            } else if (key == "windows") {
                auto pair = [](const json& p) {
                    if (!p.is_array() || p.size() != 2) throw ConfigError("windows are [\"MM-DD\", \"MM-DD\"] pairs");
                    return std::make_pair(parse_month_day(p[0].get<std::string>()), parse_month_day(p[1].get<std::string>()));
                };
                for (const auto& [wk, wv] : v.items()) {
                    if (wk == "summer_peak") std::tie(cfg.windows.summer_peak_begin, cfg.windows.summer_peak_end) = pair(wv);
                    else if (wk == "back_to_school")
                        std::tie(cfg.windows.back_to_school_begin, cfg.windows.back_to_school_end) = pair(wv);
                    else if (wk == "holiday_season")
                        std::tie(cfg.windows.holiday_season_begin, cfg.windows.holiday_season_end) = pair(wv);
                    else if (wk == "black_friday") {
                        const auto r = range_from_json<int>(wv);
                        if (r.lo > r.hi) throw ConfigError("black_friday window is reversed");
                        cfg.windows.black_friday_first = r.lo;
                        cfg.windows.black_friday_last = r.hi;
                    } else throw ConfigError("unknown window '" + wk + "'");
                }
            } else if (key == "seasonalities") {
                cfg.model.seasonalities.clear();
                for (const auto& s : v) {
                    Seasonality season{s.at("name").get<std::string>(), s.at("period").get<double>(),
                                       s.at("order").get<int>()};
                    if (!(season.period > 0) || season.order < 1 || season.name.empty() ||
                        season.name.find_first_of(" ,\t") != std::string::npos)
                        throw ConfigError("invalid seasonality '" + season.name + "'");
                    cfg.model.seasonalities.push_back(season);
                }
            } else if (key == "search_space") {
                for (const auto& [sk, sv] : v.items()) {
                    auto& sp = cfg.search_space;
                    if (sk == "changepoint_prior_scale") sp.changepoint_prior_scale = range_from_json<double>(sv);
                    else if (sk == "seasonality_prior_scale") sp.seasonality_prior_scale = range_from_json<double>(sv);
                    else if (sk == "holidays_prior_scale") sp.holidays_prior_scale = range_from_json<double>(sv);
                    else if (sk == "changepoint_range") sp.changepoint_range = range_from_json<double>(sv);
                    else if (sk == "n_changepoints") sp.n_changepoints = range_from_json<int>(sv);
                    else if (sk == "seasonality_mode") {
                        sp.modes.clear();
                        for (const auto& m : sv) sp.modes.push_back(seasonality_mode_from_string(m.get<std::string>()));
                    } else throw ConfigError("unknown search_space key '" + sk + "'");
                }
                cfg.search_space.validate();
            } else if (key == "presets") {
                for (const auto& [name, pv] : v.items()) cfg.presets[name] = params_from_json(pv);
            } else {
                throw ConfigError("unknown config key '" + key + "'");
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    } catch (const ValidationError& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    const auto dir = fs::path(path).parent_path();
    return parse_config(read_file(path), dir.empty() ? "." : dir.string());
}

std::string write_params(const Hyperparameters& hp, const std::string& sku, std::optional<double> cv_mape,
                         std::optional<int> trial) {
    json j = params_to_json(hp);
    j["sku"] = sku;
    if (cv_mape) j["cv_mape"] = std::isfinite(*cv_mape) ? json(*cv_mape) : json(nullptr);
    if (trial) j["trial"] = *trial;
    return j.dump(2) + "\n";
}

Hyperparameters parse_params(std::string_view json_text) {
    try {
        const json j = json::parse(json_text);
        if (!j.is_object()) throw ConfigError("parameters must be a JSON object");
        return params_from_json(j);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("parameters: ") + e.what());
    } catch (const ValidationError& e) {
        throw ConfigError(std::string("parameters: ") + e.what());
    }
}

int execute(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Pandemic-aware SKU demand forecasting", "demandcast"};
    app.require_subcommand(1, 1);
    app.set_help_all_flag("--help-all", "Show help for every command");

    Common common;
    auto add_common = [&](CLI::App* sub, bool data) {
        sub->add_option("--config", common.config, "JSON run configuration");
        if (data) {
            sub->add_option("--sales", common.sales, "Sales CSV (dt,sku,quantity)");
            sub->add_option("--covid", common.covid, "COVID CSV (dt,new_cases,new_deaths)");
            sub->add_option("--holidays", common.holidays, "Holidays CSV (name,date,lower_window,upper_window)");
        }
        sub->add_option("--out", common.out_dir, "Output directory");
    };

    auto* validate = app.add_subcommand("validate", "Parse inputs and check their invariants");
    add_common(validate, true);

    TuneFlags tf;
    auto* tune = app.add_subcommand("tune", "Cross-validated random search over hyperparameters");
    add_common(tune, true);
    tune->add_option("--sku", tf.sku, "SKU to tune")->required();
    tune->add_option("--budget", tf.budget, "Number of trials (trial 0 is the default configuration)");
    tune->add_option("--seed", tf.seed, "Search seed");
    tune->add_option("--checkpoint", tf.checkpoint, "Append-only trial checkpoint for resume");
    tune->add_option("--threads", tf.threads, "Concurrent trial evaluations");
    tune->add_option("--params-out", tf.params_out, "Best-parameters JSON path");
    tune->add_option("--trials-out", tf.trials_out, "Trial log CSV path");

    FitFlags ff;
    auto* fitc = app.add_subcommand("fit", "Fit a model and write the model file");
    add_common(fitc, true);
    fitc->add_option("--sku", ff.sku, "SKU to fit")->required();
    fitc->add_option("--params", ff.params, "Hyperparameter JSON (e.g. the output of tune)");
    fitc->add_option("--preset", ff.preset, "Named hyperparameter preset");
    fitc->add_option("--cutoff", ff.cutoff, "Last training date (YYYY-MM-DD)");
    fitc->add_option("--model-out", ff.model_out, "Model file path");

    ForecastFlags fc;
    auto* forecast = app.add_subcommand("forecast", "Daily forecast with components, bounds and monthly totals");
    add_common(forecast, true);
    forecast->add_option("--sku", fc.sku, "SKU (must match the model)");
    forecast->add_option("--model", fc.model, "Model file written by fit");
    forecast->add_option("--horizon", fc.horizon, "Days to forecast");
    forecast->add_option("--cutoff", fc.cutoff, "Last observed date (defaults to the model's training end)");
    forecast->add_option("--level", fc.level, "Interval level in (0, 1)");
    forecast->add_option("--seed", fc.seed, "Interval sampling seed");
    forecast->add_option("--samples", fc.samples, "Monte-Carlo samples (>= 100)");
    forecast->add_option("--scenario", fc.scenario, "Future COVID path (dt,cases_7day_avg,deaths_7day_avg)");
    forecast->add_option("--daily-out", fc.daily_out, "Daily forecast CSV path");
    forecast->add_option("--monthly-out", fc.monthly_out, "Monthly totals CSV path");
    forecast->add_flag("--clamp-negative", fc.clamp_negative, "Clamp negative daily values to 0 before aggregating");

    EvaluateFlags ef;
    auto* evaluate = app.add_subcommand("evaluate", "Score a daily forecast against actuals by monthly horizon");
    add_common(evaluate, false);
    evaluate->add_option("--forecast", ef.forecast, "Daily forecast CSV");
    evaluate->add_option("--actuals", ef.actuals, "Sales CSV with the realized demand");
    evaluate->add_option("--report-out", ef.report_out, "Metrics report path");
    evaluate->add_option("--horizons", ef.horizons, "Month horizons to score")->delimiter(',');

    std::string spec_path, synth_out;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset with known ground truth");
    synth_cmd->add_option("--spec", spec_path, "Generator spec JSON")->required();
    synth_cmd->add_option("--out", synth_out, "Output directory")->required();

    ReportFlags rf;
    auto* report = app.add_subcommand("report", "Human-readable planning and accuracy tables");
    report->add_option("--monthly", rf.monthly, "Monthly totals CSV");
    report->add_option("--metrics", rf.metrics, "Metrics report CSV");
    report->add_option("--trials", rf.trials, "SKU=PATH trial log (repeatable)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        const auto subs = app.get_subcommands();
        out << (subs.empty() ? app.help() : subs.front()->help());
        return kSuccess;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kSuccess;
    } catch (const CLI::ParseError& e) {
        const auto subs = app.get_subcommands();
        err << "error: " << e.what() << "\n\n" << (subs.empty() ? app.help() : subs.front()->help());
        return kInputError;
    }

    try {
        if (validate->parsed()) return cmd_validate(common, out, err);
        if (tune->parsed()) return cmd_tune(common, tf, out, err);
        if (fitc->parsed()) return cmd_fit(common, ff, out, err);
        if (forecast->parsed()) return cmd_forecast(common, fc, out, err);
        if (evaluate->parsed()) return cmd_evaluate(common, ef, out, err);
        if (synth_cmd->parsed()) return cmd_synth(spec_path, synth_out, out);
        if (report->parsed()) return cmd_report(rf, out);
        err << app.help();
        return kInputError;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const InsufficientHistory& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const CheckpointError& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kInternalError;
    }
}

}  // namespace demandcast::cli
